"""Solution records, classification and deduplication."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .tracker import TrackerConfig

NONSINGULAR, SINGULAR, FAILED = "nonsingular", "singular", "failed"


@dataclass
class Solution:
    z: np.ndarray
    lam: complex | None = None
    residual: float = float("nan")
    condition: float = float("nan")
    cls: str = NONSINGULAR
    real: bool = False

    @property
    def y(self) -> np.ndarray:
        if self.lam is None:
            return np.asarray(self.z)
        return np.concatenate([self.z, [self.lam]])

    def to_dict(self) -> dict:
        out = {
            "z": [[float(c.real), float(c.imag)] for c in np.asarray(self.z, dtype=complex)],
            "lambda": None if self.lam is None else [float(np.real(self.lam)), float(np.imag(self.lam))],
            "residual": _finite_or_none(self.residual),
            "condition": _finite_or_none(self.condition),
            "class": self.cls,
            "real": bool(self.real),
        }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Solution":
        z = np.array([complex(a, b) for a, b in d["z"]], dtype=complex)
        lam = None if d.get("lambda") is None else complex(*d["lambda"])
        res = d.get("residual")
        cond = d.get("condition")
        return cls(z, lam, float("nan") if res is None else res,
                   float("inf") if cond is None else cond, d.get("class", NONSINGULAR),
                   bool(d.get("real", False)))


def _finite_or_none(v):
    v = float(v)
    return v if np.isfinite(v) else None


def is_real(y: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    y = np.atleast_2d(y)
    if y.shape[-1] == 0:
        return np.ones(y.shape[0], dtype=bool)
    return np.abs(y.imag).max(axis=-1) < tol * (1 + np.abs(y).max(axis=-1))


def classify(residual, condition, contraction, cfg: TrackerConfig | None = None,
             converged=None) -> np.ndarray:
    """Endpoint classes from polish statistics (arrays of equal length)."""
    cfg = cfg or TrackerConfig()
    residual = np.atleast_1d(np.asarray(residual, dtype=float))
    condition = np.atleast_1d(np.asarray(condition, dtype=float))
    contraction = np.atleast_1d(np.asarray(contraction, dtype=float))
    out = np.full(residual.shape, FAILED, dtype=object)
    finite = np.isfinite(residual)
    if converged is not None:
        finite &= np.asarray(converged) | (residual < cfg.residual_tol)
    sing = (condition > cfg.singular_threshold) | (np.nan_to_num(contraction) > cfg.contraction_max)
    out[finite & sing] = SINGULAR
    out[finite & ~sing & (residual < cfg.residual_tol)] = NONSINGULAR
    out[finite & ~sing & (residual >= cfg.residual_tol)] = SINGULAR
    return out


def dedup_indices(Y: np.ndarray, tol: float = 1e-6, known: np.ndarray | None = None) -> np.ndarray:
    """Indices of rows of ``Y`` that are new (not within ``tol`` of ``known`` or an earlier row).

    Distance is the relative max-norm ||a - b|| <= tol * (1 + max(||a||, ||b||)).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    base = np.zeros((0, Y.shape[1]), dtype=complex) if known is None else np.atleast_2d(known)
    base_norm = np.abs(base).max(axis=1) if base.size else np.zeros(base.shape[0])
    accepted = []
    for i, row in enumerate(Y):
        rn = np.abs(row).max() if row.size else 0.0
        if base.shape[0]:
            dist = np.abs(base - row).max(axis=1) if row.size else np.zeros(base.shape[0])
            if np.any(dist <= tol * (1 + np.maximum(base_norm, rn))):
                continue
        if accepted:
            A = Y[accepted]
            dist = np.abs(A - row).max(axis=1) if row.size else np.zeros(len(accepted))
            if np.any(dist <= tol * (1 + np.maximum(np.abs(A).max(axis=1) if row.size else 0, rn))):
                continue
        accepted.append(i)
    return np.array(accepted, dtype=int)


@dataclass
class SolutionSet:
    solutions: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def of_class(self, cls: str) -> list:
        return [s for s in self.solutions if s.cls == cls]

    @property
    def nonsingular(self) -> list:
        return self.of_class(NONSINGULAR)

    @property
    def count(self) -> int:
        return len(self.nonsingular)

    @property
    def real_count(self) -> int:
        return sum(1 for s in self.nonsingular if s.real)

    def Y(self, cls: str | None = NONSINGULAR) -> np.ndarray:
        sols = self.solutions if cls is None else self.of_class(cls)
        if not sols:
            return np.zeros((0, 0), dtype=complex)
        return np.array([s.y for s in sols], dtype=complex)

    def lambdas(self, cls: str | None = NONSINGULAR) -> np.ndarray:
        sols = self.solutions if cls is None else self.of_class(cls)
        return np.array([s.lam for s in sols if s.lam is not None], dtype=complex)

    def summary(self) -> dict:
        out = {"count": self.count, "real": self.real_count,
               "singular": len(self.of_class(SINGULAR)), "failed": len(self.of_class(FAILED))}
        return out

    def to_dict(self) -> dict:
        return {"solutions": [s.to_dict() for s in self.solutions], "meta": _plain(self.meta)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionSet":
        return cls([Solution.from_dict(s) for s in d.get("solutions", [])], dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "SolutionSet":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
