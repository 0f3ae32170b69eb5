"""CC-specific drivers: generic start sets by monodromy and targeted parameter homotopy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ccsystem import CCFamily, Hamiltonian, random_symmetric, start_system
from ..indexing import TruncationSet
from .monodromy import StoppingRule, dedup_indices, monodromy, parameter_homotopy
from .solutions import NONSINGULAR, Solution, SolutionSet, is_real
from .tracker import TrackerConfig


@dataclass
class GenericStart:
    """A complete solution set of the CC system at a generic complex Hamiltonian."""
    trunc: TruncationSet
    formulation: str
    H: np.ndarray
    Y: np.ndarray
    evidence: dict
    seed: object = None

    @property
    def count(self) -> int:
        return self.Y.shape[0]

    def save(self, path: str) -> None:
        np.savez_compressed(path, d=self.trunc.d, n=self.trunc.n, sigma=np.array(self.trunc.sigma),
                            formulation=self.formulation, H=self.H, Y=self.Y,
                            evidence=np.array(repr(self.evidence)),
                            seed=np.array(-1 if self.seed is None else self.seed))

    @classmethod
    def load(cls, path: str) -> "GenericStart":
        import ast
        with np.load(path, allow_pickle=False) as f:
            trunc = TruncationSet(tuple(int(s) for s in f["sigma"]), int(f["d"]), int(f["n"]))
            seed = int(f["seed"])
            return cls(trunc, str(f["formulation"]), f["H"], f["Y"],
                       ast.literal_eval(str(f["evidence"])), None if seed < 0 else seed)

    def solution_set(self) -> SolutionSet:
        fam = CCFamily(self.trunc, self.formulation)
        return _to_solution_set(fam, self.Y, self.H, None, {
            "seed": self.seed, "formulation": self.formulation, **self.evidence})


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def monodromy_solve(trunc: TruncationSet, seed=None, cfg: TrackerConfig | None = None,
                    stop: StoppingRule | None = None, formulation: str = "new",
                    progress=None) -> GenericStart:
    """All solutions of the CC system for a random generic complex symmetric H."""
    rng = _rng(seed)
    H0, z0, lam0 = start_system(trunc, rng, formulation)
    fam = CCFamily(trunc, formulation)
    y0 = np.concatenate([z0, [lam0]]) if formulation == "new" else z0
    N = trunc.basis.size
    res = monodromy(fam, H0.matrix, y0[None], lambda r: random_symmetric(N, r), stop, cfg, rng, progress)
    return GenericStart(trunc, formulation, H0.matrix, res.Y, res.evidence(),
                        seed if isinstance(seed, (int, np.integer)) else None)


def _to_solution_set(fam: CCFamily, Y, H, ends, meta) -> SolutionSet:
    sols = []
    if ends is None:
        real = is_real(Y) if len(Y) else []
        for k, y in enumerate(Y):
            z, lam = fam.split(y)
            if lam is None:
                lam = complex(fam.energy(z, H)[0])
            sols.append(Solution(np.array(z), complex(lam), float("nan"), float("nan"), NONSINGULAR, bool(real[k])))
    else:
        for k in range(ends.y.shape[0]):
            z, lam = fam.split(ends.y[k])
            if lam is None and ends.cls[k] != "failed":
                lam = complex(fam.energy(z, H)[0])
            sols.append(Solution(np.array(z), lam, float(ends.residual[k]), float(ends.condition[k]),
                                 str(ends.cls[k]), bool(ends.real[k])))
    return SolutionSet(sols, meta)


def solve_target(generic: GenericStart, H_target, cfg: TrackerConfig | None = None,
                 seed=None) -> SolutionSet:
    """Parameter homotopy from the generic start set to ``H_target``.

    Nonsingular endpoints are deduplicated; singular and failed paths are kept
    as separate entries so that every path is accounted for.
    """
    cfg = cfg or TrackerConfig()
    rng = _rng(seed)
    Ht = H_target.matrix if isinstance(H_target, Hamiltonian) else np.asarray(H_target)
    fam = CCFamily(generic.trunc, generic.formulation)
    N = Ht.shape[0]
    scale = max(1.0, float(np.abs(Ht).max()))
    ends = parameter_homotopy(fam, generic.Y, generic.H, Ht, cfg, rng,
                              waypoint=lambda r: scale * random_symmetric(N, r))
    keep = np.ones(len(ends.cls), dtype=bool)
    ns = np.flatnonzero(ends.cls == NONSINGULAR)
    if ns.size:
        uniq = ns[dedup_indices(ends.y[ns], cfg.dedup_tol)]
        keep[ns] = False
        keep[uniq] = True
    for name in ("y", "cls", "residual", "condition", "real", "status", "t"):
        setattr(ends, name, getattr(ends, name)[keep])
    meta = {"paths": int(generic.count), "formulation": generic.formulation,
            "seed": seed if isinstance(seed, (int, np.integer)) else None,
            "start_evidence": generic.evidence}
    return _to_solution_set(fam, ends.y, Ht, ends, meta)
