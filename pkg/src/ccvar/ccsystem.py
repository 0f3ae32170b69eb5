"""Coupled cluster equations as square systems in the truncated amplitudes.

Two formulations are provided for a truncation set sigma:

* ``new``: [(H - lambda) exp(T(z)) e_[d]]_S = 0 with S = sigma-tilde plus the
  reference row; unknowns (z, lambda), |sigma-tilde| + 1 equations.
* ``traditional``: [exp(-T(z)) H exp(T(z)) e_[d]]_{sigma-tilde} = 0;
  unknowns z, |sigma-tilde| equations.  The energy is the reference row of
  exp(-T(z)) H psi.

Unknowns are ordered as z in the global order of sigma-tilde, then lambda.
Both residuals are affine-linear in H, which the homotopy code relies on.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import NotSymmetricError, ParseError, RankDeficientError
from .expparam import Parametrization
from .indexing import TruncationSet, orbital_basis
from .linalg import least_norm_solve

FORMULATIONS = ("new", "traditional")
_MAGIC = b"CCVARHAM"


@dataclass(frozen=True)
class Hamiltonian:
    """A symmetric C(n,d) x C(n,d) matrix in the global order."""
    matrix: np.ndarray
    d: int
    n: int
    provenance: str = "unspecified"

    def __post_init__(self):
        M = np.array(self.matrix)
        N = orbital_basis(self.d, self.n).size
        if M.shape != (N, N):
            raise ValueError(f"Hamiltonian must be {N}x{N} for (d,n)=({self.d},{self.n}), got {M.shape}")
        scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
        if np.abs(M - M.T).max() > 1e-12 * scale:
            raise NotSymmetricError("Hamiltonian matrix is not symmetric")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix) or bool(np.all(self.matrix.imag == 0))

    def to_bytes(self) -> bytes:
        cplx = np.iscomplexobj(self.matrix)
        head = _MAGIC + struct.pack("<qqqq", self.d, self.n, self.N, int(cplx))
        data = np.ascontiguousarray(self.matrix, dtype="<c16" if cplx else "<f8")
        return head + data.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes, provenance: str = "binary") -> "Hamiltonian":
        if blob[:8] != _MAGIC or len(blob) < 40:
            raise ParseError("not a Hamiltonian binary file (bad magic header)")
        d, n, N, cplx = struct.unpack("<qqqq", blob[8:40])
        dtype = "<c16" if cplx else "<f8"
        expected = N * N * np.dtype(dtype).itemsize
        if len(blob) - 40 != expected:
            raise ParseError(f"Hamiltonian payload has {len(blob) - 40} bytes, expected {expected}")
        M = np.frombuffer(blob[40:], dtype=dtype).reshape(N, N).copy()
        return cls(M, int(d), int(n), provenance)

    def to_dict(self) -> dict:
        M = self.matrix
        out = {"d": self.d, "n": self.n, "provenance": self.provenance}
        if np.iscomplexobj(M):
            out["real"] = M.real.tolist()
            out["imag"] = M.imag.tolist()
        else:
            out["matrix"] = M.tolist()
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "Hamiltonian":
        try:
            if "matrix" in obj:
                M = np.array(obj["matrix"], dtype=float)
            else:
                M = np.array(obj["real"], dtype=float) + 1j * np.array(obj["imag"], dtype=float)
            return cls(M, int(obj["d"]), int(obj["n"]), obj.get("provenance", "json"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, NotSymmetricError):
                raise
            raise ParseError(f"malformed Hamiltonian JSON: {exc}") from None

    def save(self, path: str) -> None:
        if str(path).endswith(".json"):
            with open(path, "w") as fh:
                json.dump(self.to_dict(), fh)
        else:
            with open(path, "wb") as fh:
                fh.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> "Hamiltonian":
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:8] == _MAGIC:
            return cls.from_bytes(blob, provenance=f"file:{path}")
        try:
            obj = json.loads(blob.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: neither a Hamiltonian binary nor JSON ({exc})") from None
        return cls.from_dict(obj)


def _as_matrix(H) -> np.ndarray:
    return H.matrix if isinstance(H, Hamiltonian) else np.asarray(H)


def random_symmetric(N: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    A = rng.normal(size=(N, N))
    if complex_:
        A = A + 1j * rng.normal(size=(N, N))
    return (A + A.T) / 2


def embed(z: np.ndarray, trunc: TruncationSet) -> np.ndarray:
    """Full amplitude vector: reference 1, sigma-tilde from z, all else 0."""
    z = np.asarray(z)
    k = len(trunc)
    if z.shape[-1] != k:
        raise ValueError(f"expected {k} truncated amplitudes, got {z.shape[-1]}")
    x = np.zeros(z.shape[:-1] + (trunc.basis.size,), dtype=np.result_type(z, float))
    x[..., 0] = 1
    x[..., trunc.tilde] = z
    return x


def truncate(x: np.ndarray, trunc: TruncationSet) -> np.ndarray:
    return np.asarray(x)[..., trunc.tilde]


class CCFamily:
    """CC equations as a family over Hamiltonians (see :mod:`ccvar.homotopy.tracker`)."""

    def __init__(self, trunc: TruncationSet, formulation: str = "new"):
        if formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        self.trunc = trunc
        self.formulation = formulation
        self.par = Parametrization(trunc.d, trunc.n)
        self.tilde = trunc.tilde
        self.rows = trunc.rows
        self.k = len(self.tilde)
        self.n_unknowns = self.k + 1 if formulation == "new" else self.k

    def split(self, y):
        y = np.asarray(y)
        if self.formulation == "new":
            return y[..., :-1], y[..., -1]
        return y, None

    def evaluate(self, y, t, Ha, dH, need_dp: bool = True):
        y = np.atleast_2d(np.asarray(y, dtype=complex))
        t = np.broadcast_to(np.asarray(t, dtype=float), y.shape[:1])
        z, lam = self.split(y)
        x = embed(z, self.trunc)
        T = self.par.T(x)
        psi, Dpsi = self.par.forward_jac(x, T=T, var_cols=self.tilde)
        Ha = _as_matrix(Ha)
        dH = None if dH is None else _as_matrix(dH)
        with_dp = need_dp and dH is not None and np.any(dH)
        if self.formulation == "new":
            S = self.rows
            HS = Ha[S]
            Hpsi = psi @ HS.T
            Jz = HS @ Dpsi
            if dH is not None and np.any(t):
                dHS = dH[S]
                Hpsi = Hpsi + t[:, None] * (psi @ dHS.T)
                Jz = Jz + t[:, None, None] * (dHS @ Dpsi)
            F = Hpsi - lam[:, None] * psi[:, S]
            Jz = Jz - lam[:, None, None] * Dpsi[:, S]
            J = np.concatenate([Jz, -psi[:, S][:, :, None]], axis=2)
            Fdp = psi @ dH[S].T if with_dp else np.zeros_like(F)
            return F, J, Fdp
        # traditional
        H_t = Ha[None] if dH is None or not np.any(t) else Ha[None] + t[:, None, None] * dH[None]
        w = np.einsum("pmn,pn->pm", np.broadcast_to(H_t, (y.shape[0],) + Ha.shape), psi)
        u, Du = self.par.exp_apply_jac(x, w, s=-1.0, T=T, var_cols=self.tilde)
        HD = np.broadcast_to(H_t, (y.shape[0],) + Ha.shape) @ Dpsi
        EHD = self.par.exp_matrix_apply(x, HD, s=-1.0, T=T)
        tl = self.tilde
        F = u[:, tl]
        J = Du[:, tl] + EHD[:, tl]
        if with_dp:
            v = psi @ dH.T
            Fdp = self.par.exp_matrix_apply(x, v[..., None], s=-1.0, T=T)[..., 0][:, tl]
        else:
            Fdp = np.zeros_like(F)
        return F, J, Fdp

    def energy(self, z, H) -> np.ndarray:
        """Reference row of exp(-T(z)) H exp(T(z)) e_[d] (the CC energy)."""
        x = embed(np.atleast_2d(z), self.trunc)
        psi = self.par.forward(x)
        w = psi @ _as_matrix(H).T
        u = self.par.exp_matrix_apply(x, w[..., None], s=-1.0)[..., 0]
        return u[:, 0]

    def linear_map(self, y, H=None):
        """Matrix of H -> F restricted to symmetric H (upper-triangle parameters).

        Returns (L, F0) with F(H) = L @ h_upper + F0 where F0 is the H-free part.
        """
        y = np.asarray(y, dtype=complex)
        z, lam = self.split(y)
        x = embed(z, self.trunc)
        psi = self.par.forward(x)
        N = psi.shape[-1]
        if self.formulation == "new":
            G = np.zeros((self.k + 1, N), dtype=complex)
            G[np.arange(self.k + 1), self.rows] = 1
            F0 = -lam * psi[self.rows]
        else:
            E = self.par.exp_matrix_apply(x, np.eye(N, dtype=complex), s=-1.0)
            G = E[self.tilde]
            F0 = np.zeros(self.k, dtype=complex)
        iu, ju = np.triu_indices(N)
        L = G[:, iu] * psi[ju] + np.where(iu != ju, 1, 0) * G[:, ju] * psi[iu]
        return L, F0


def upper_to_symmetric(h: np.ndarray, N: int) -> np.ndarray:
    iu, ju = np.triu_indices(N)
    M = np.zeros((N, N), dtype=h.dtype)
    M[iu, ju] = h
    M[ju, iu] = h
    return M


@dataclass
class CCSystem:
    trunc: TruncationSet
    hamiltonian: object
    formulation: str = "new"
    family: CCFamily = field(init=False, repr=False)

    def __post_init__(self):
        self.family = CCFamily(self.trunc, self.formulation)
        H = self.hamiltonian
        if not isinstance(H, Hamiltonian):
            H = Hamiltonian(np.asarray(H), self.trunc.d, self.trunc.n, "array")
        self.hamiltonian = H

    @property
    def H(self) -> np.ndarray:
        return self.hamiltonian.matrix

    @property
    def n_unknowns(self) -> int:
        return self.family.n_unknowns

    def pack(self, z, lam=None) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.formulation == "new":
            return np.concatenate([z, [lam]])
        return z

    def residual(self, y) -> np.ndarray:
        F, _, _ = self.family.evaluate(np.atleast_2d(y), 0.0, self.H, None, need_dp=False)
        return F if np.ndim(y) > 1 else F[0]

    def jacobian(self, y) -> np.ndarray:
        _, J, _ = self.family.evaluate(np.atleast_2d(y), 0.0, self.H, None, need_dp=False)
        return J if np.ndim(y) > 1 else J[0]


def residual_new(system: CCSystem, z, lam) -> np.ndarray:
    if system.formulation != "new":
        raise ValueError("residual_new needs a system in the 'new' formulation")
    return system.residual(system.pack(z, lam))


def residual_traditional(system: CCSystem, z) -> np.ndarray:
    if system.formulation != "traditional":
        raise ValueError("residual_traditional needs a system in the 'traditional' formulation")
    return system.residual(system.pack(z))


def jacobian(system: CCSystem, z, lam=None) -> np.ndarray:
    return system.jacobian(system.pack(z, lam))


def formulations_equivalent(trunc: TruncationSet) -> bool:
    """True iff sigma = {m, 2m, ..., km} for some m, k."""
    s = trunc.sigma
    m = s[0]
    return s == tuple(range(m, m * len(s) + 1, m))


def start_system(trunc: TruncationSet, seed=None, formulation: str = "new", max_tries: int = 5):
    """Random (z0, lambda0) and a complex symmetric H for which they solve the CC system.

    H is a random complex symmetric matrix plus the least-norm symmetric
    correction that zeroes the residual.  Returns (Hamiltonian, z0, lambda0);
    for the traditional formulation lambda0 is the CC energy.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    fam = CCFamily(trunc, formulation)
    N = trunc.basis.size
    for _ in range(max_tries):
        z0 = (rng.normal(size=fam.k) + 1j * rng.normal(size=fam.k)) / np.sqrt(2)
        lam0 = complex(rng.normal(), rng.normal()) / np.sqrt(2)
        y0 = np.concatenate([z0, [lam0]]) if formulation == "new" else z0
        Hr = random_symmetric(N, rng)
        L, F0 = fam.linear_map(y0)
        iu, ju = np.triu_indices(N)
        r = L @ Hr[iu, ju] + F0
        try:
            delta = least_norm_solve(L, -r)
        except RankDeficientError:
            continue
        H = Hr + upper_to_symmetric(delta, N)
        ham = Hamiltonian(H, trunc.d, trunc.n, "generic-complex")
        if formulation == "traditional":
            lam0 = complex(fam.energy(z0, H)[0])
        return ham, z0, lam0
    raise RankDeficientError(f"start system stayed degenerate after {max_tries} samples")
