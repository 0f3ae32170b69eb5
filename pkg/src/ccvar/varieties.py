"""Truncation varieties: descriptors, defining equations and numerical degrees."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, prod

import numpy as np

from .errors import ResourceLimitError
from .expparam import Parametrization, backward
from .homotopy.monodromy import StoppingRule, monodromy
from .homotopy.tracker import OK, TrackerConfig, safe_solve, track
from .indexing import TruncationSet
from .ubp import coordinate_polynomial

MAX_AMBIENT = 70


def is_linear(trunc: TruncationSet) -> bool:
    """sigma closed under addition inside [d]."""
    s = set(trunc.sigma)
    return all(i + j in s for i in s for j in s if i + j <= trunc.d)


@dataclass(frozen=True)
class VarietyDescriptor:
    trunc: TruncationSet
    dim: int
    ambient_dim: int
    defining_levels: tuple
    is_linear: bool

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    def to_dict(self) -> dict:
        t = self.trunc
        return {"d": t.d, "n": t.n, "sigma": list(t.sigma), "dim": self.dim, "codim": self.codim,
                "ambient_dim": self.ambient_dim, "defining_levels": list(self.defining_levels),
                "is_linear": self.is_linear}


def describe(trunc: TruncationSet) -> VarietyDescriptor:
    N = trunc.basis.size
    return VarietyDescriptor(trunc, len(trunc), N - 1, trunc.complement_levels, is_linear(trunc))


class DefiningEquations:
    """The affine equations x_I(psi) = 0 for every I whose level lies outside sigma."""

    def __init__(self, trunc: TruncationSet):
        self.trunc = trunc
        self.par = Parametrization(trunc.d, trunc.n)
        self.positions = trunc.basis.at_levels(trunc.complement_levels)
        self.indices = [trunc.basis.sets[k] for k in self.positions]

    def __len__(self) -> int:
        return len(self.positions)

    def evaluate(self, psi) -> np.ndarray:
        """x_I(psi) on the chart psi_[d] = 1."""
        return backward(psi, self.trunc.d, self.trunc.n)[..., self.positions]

    def jacobian(self, psi) -> np.ndarray:
        """d x_I / d psi, shape (..., len(self), N); column 0 is zero."""
        _, Jinv = self.par.backward_jac(np.asarray(psi))
        return Jinv[..., self.positions, :]

    def polynomials(self) -> list:
        d, n = self.trunc.d, self.trunc.n
        return [coordinate_polynomial(I, d, n, "backward") for I in self.indices]


def defining_equations(trunc: TruncationSet) -> DefiningEquations:
    return DefiningEquations(trunc)


class SliceFamily:
    """V_sigma cut by the affine space psi' = A u + b, as a family over b.

    psi' are the non-reference Plücker coordinates on the chart psi_[d] = 1.
    """

    def __init__(self, trunc: TruncationSet, A: np.ndarray):
        self.trunc = trunc
        self.par = Parametrization(trunc.d, trunc.n)
        self.A = np.asarray(A, dtype=complex)
        self.E = trunc.basis.at_levels(trunc.complement_levels)
        self.n_unknowns = self.A.shape[1]

    def psi(self, u, b):
        u = np.atleast_2d(u)
        out = np.ones(u.shape[:-1] + (self.A.shape[0] + 1,), dtype=complex)
        out[..., 1:] = u @ self.A.T + b
        return out

    def evaluate(self, u, t, ba, db, need_dp: bool = True):
        u = np.atleast_2d(np.asarray(u, dtype=complex))
        t = np.broadcast_to(np.asarray(t, dtype=float), u.shape[:1])
        psi = np.ones((u.shape[0], self.A.shape[0] + 1), dtype=complex)
        psi[:, 1:] = u @ self.A.T + ba + t[:, None] * db
        x = self.par.backward(psi)
        _, Jf = self.par.forward_jac(x)
        rhs = np.concatenate([np.broadcast_to(self.A, (u.shape[0],) + self.A.shape),
                              np.broadcast_to(np.asarray(db, dtype=complex)[None, :, None],
                                              (u.shape[0], self.A.shape[0], 1))], axis=2)
        sol = safe_solve(Jf[:, 1:, 1:], rhs)
        e = self.E - 1
        F = x[:, self.E]
        J = sol[:, e, :-1]
        Fdp = sol[:, e, -1]
        return F, J, Fdp


@dataclass
class DegreeResult:
    degree: int
    evidence: dict
    points: np.ndarray
    seed: object = None
    family: SliceFamily | None = None   # the slice the points lie on
    offset: np.ndarray | None = None

    @property
    def stabilized(self) -> bool:
        return bool(self.evidence.get("stabilized", False))

    def to_dict(self) -> dict:
        return {"degree": self.degree, "stabilized": self.stabilized, "evidence": self.evidence}


def numerical_degree(trunc: TruncationSet, seed=None, cfg: TrackerConfig | None = None,
                     stop: StoppingRule | None = None, progress=None,
                     trace_rounds: int = 4, trace_tol: float = 1e-8) -> DegreeResult:
    """deg V_sigma as the number of points on a random slice of complementary dimension.

    One point is planted on the slice, the rest are found by monodromy in the
    slice offset b.  When the stopping rule fires, a trace test checks
    completeness; on failure monodromy resumes, up to ``trace_rounds`` times.
    ``evidence["stabilized"]`` requires both the stopping rule and the trace test.
    """
    N = trunc.basis.size
    if N - 1 > MAX_AMBIENT:
        raise ResourceLimitError(f"ambient dimension {N - 1} exceeds the desk-scale cap {MAX_AMBIENT}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = N - 1 - len(trunc)
    if m == 0:
        return DegreeResult(1, {"loops": 0, "loops_since_new": 0, "rule": "trivial",
                                "stabilized": True, "history": [1]}, np.zeros((1, 0)), seed)
    par = Parametrization(trunc.d, trunc.n)

    def cgauss(*shape):
        return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)

    x0 = np.zeros(N, dtype=complex)
    x0[0] = 1
    x0[trunc.tilde] = cgauss(len(trunc))
    psi0 = par.forward(x0)
    A = cgauss(N - 1, m)
    u0 = cgauss(m)
    b0 = psi0[1:] - A @ u0
    fam = SliceFamily(trunc, A)
    cfg = cfg or TrackerConfig()

    def sample(r):
        return (r.normal(size=N - 1) + 1j * r.normal(size=N - 1)) / np.sqrt(2)

    Y, history, loops, seconds = u0[None], [], 0, 0.0
    for _ in range(trace_rounds):
        res = monodromy(fam, b0, Y, sample, stop, cfg, rng, progress)
        Y, loops, seconds = res.Y, loops + res.loops, seconds + res.seconds
        history += res.history if not history else res.history[1:]
        defect = trace_defect(fam, Y, b0, cgauss(N - 1), cfg)
        if defect < trace_tol:
            break
    evidence = res.evidence()
    evidence.update(loops=loops, history=history, seconds=round(seconds, 3), trace_defect=defect,
                    stabilized=bool(res.stabilized and defect < trace_tol))
    return DegreeResult(res.count, evidence, Y, seed if isinstance(seed, (int, np.integer)) else None, fam, b0)


def trace_defect(fam: SliceFamily, Y: np.ndarray, b0: np.ndarray, c: np.ndarray,
                 cfg: TrackerConfig | None = None) -> float:
    """Relative failure of the witness-set trace to be affine in t along b0 + t c.

    The sum of the points of a complete witness set moves affinely under
    parallel translation of the slice, and any proper subset does not
    (generically).  Returns inf when a path fails.
    """
    cfg = cfg or TrackerConfig()
    sums = [Y.sum(axis=0)]
    for s in (1.0, -1.0):
        res = track(fam, Y, [(b0, b0 + s * c)], cfg)
        if np.any(res.status != OK):
            return float("inf")
        sums.append(res.y.sum(axis=0))
    scale = max(1.0, float(np.abs(Y).sum()))
    return float(np.abs(sums[1] - 2 * sums[0] + sums[2]).max() / scale)


def cc_degree_bound(trunc: TruncationSet, degree: int) -> int:
    """(dim V_sigma + 1) * deg V_sigma."""
    return (len(trunc) + 1) * int(degree)


def grassmannian_cc_degree(n: int) -> int:
    """CC degree of Gr(2, n): 4/n * C(2n-3, n-1) - 1."""
    if n < 4:
        raise ValueError("the Gr(2,n) formula needs n >= 4")
    num = 4 * comb(2 * n - 3, n - 1)
    if num % n:
        raise ArithmeticError(f"4*C(2n-3,n-1) not divisible by n={n}")
    return num // n - 1


def hypersurface_cc_degree(d: int) -> int:
    """CC degree for n = 2d and sigma = [d-1]: d C(2d,d) - 2d + 1."""
    if d < 2:
        raise ValueError("need d >= 2")
    return d * comb(2 * d, d) - 2 * d + 1


def grassmannian_degree(d: int, n: int) -> int:
    """deg Gr(d, n) by the hook length formula for the d x (n-d) rectangle."""
    k = n - d
    hooks = prod((d - i) + (k - j) - 1 for i in range(d) for j in range(k))
    return factorial(d * k) // hooks
