"""The cluster operator T(x), its nilpotent exponential and the maps x <-> psi.

Vectors are dense arrays of length C(n, d) in the global order of
:mod:`ccvar.indexing`; a leading batch axis is allowed everywhere.  The entry
at position 0 (the reference set) is never placed in T(x).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import ChartError
from .indexing import orbital_basis, permutation_sign


@dataclass(frozen=True)
class TPattern:
    """Nonzero pattern of T(x): entry (rows[e], cols[e]) = signs[e] * x[vars[e]]."""
    d: int
    n: int
    N: int
    rows: np.ndarray
    cols: np.ndarray
    vars: np.ndarray
    signs: np.ndarray
    eps: np.ndarray  # eps[I] = sign of the (I, [d]) entry; eps[0] = 1
    max_level: int


@lru_cache(maxsize=None)
def pattern(d: int, n: int) -> TPattern:
    basis = orbital_basis(d, n)
    ref = set(range(1, d + 1))
    rows, cols, vars_, signs = [], [], [], []
    for ci, I in enumerate(basis.sets):
        Iset = set(I)
        holes_avail = sorted(Iset & ref)
        parts_avail = [j for j in range(d + 1, n + 1) if j not in Iset]
        for k in range(1, min(len(holes_avail), len(parts_avail)) + 1):
            for alpha in combinations(holes_avail, k):
                common = sorted(Iset - set(alpha))
                s_col = permutation_sign(common + list(alpha))
                K_base = ref - set(alpha)
                for beta in combinations(parts_avail, k):
                    J = tuple(sorted(set(common) | set(beta)))
                    s_row = permutation_sign(common + list(beta))
                    K = tuple(sorted(K_base | set(beta)))
                    rows.append(basis.position[J])
                    cols.append(ci)
                    vars_.append(basis.position[K])
                    signs.append(s_col * s_row)
    rows, cols, vars_ = (np.array(a, dtype=np.intp) for a in (rows, cols, vars_))
    signs = np.array(signs, dtype=float)
    eps = np.ones(basis.size)
    first = cols == 0
    eps[rows[first]] = signs[first]
    for a in (rows, cols, vars_, signs, eps):
        a.setflags(write=False)
    return TPattern(d, n, basis.size, rows, cols, vars_, signs, eps, basis.max_level)


def build_T(x: np.ndarray, d: int, n: int, sparse: bool = False):
    """T(x) as a dense (..., N, N) array, or a scipy CSR matrix for a single x."""
    pat = pattern(d, n)
    x = np.asarray(x)
    _check_len(x, pat.N)
    vals = pat.signs * x[..., pat.vars]
    if sparse:
        if x.ndim != 1:
            raise ValueError("sparse output needs a single coefficient vector")
        return sp.csr_matrix((vals, (pat.rows, pat.cols)), shape=(pat.N, pat.N))
    T = np.zeros(x.shape[:-1] + (pat.N, pat.N), dtype=np.result_type(x, float))
    T[..., pat.rows, pat.cols] = vals
    return T


def exp_T(x: np.ndarray, d: int, n: int) -> np.ndarray:
    """exp(T(x)) as the exact finite sum sum_k T^k / k!."""
    pat = pattern(d, n)
    T = build_T(x, d, n)
    term = np.broadcast_to(np.eye(pat.N, dtype=T.dtype), T.shape).copy()
    out = term.copy()
    for k in range(1, pat.max_level + 1):
        term = T @ term / k
        out = out + term
    return out


def _check_len(v: np.ndarray, N: int) -> None:
    if v.shape[-1] != N:
        raise ValueError(f"expected vectors of length {N}, got {v.shape[-1]}")


@lru_cache(maxsize=None)
def _scatter(d: int, n: int) -> sp.csr_matrix:
    pat = pattern(d, n)
    nnz = len(pat.rows)
    return sp.csr_matrix((np.ones(nnz), (np.arange(nnz), pat.rows)), shape=(nnz, pat.N))


def _apply_T(pat: TPattern, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """T(x) v without forming T; x and v share their batch shape."""
    vals = pat.signs * x[..., pat.vars] * v[..., pat.cols]
    shape = vals.shape[:-1]
    out = _scatter(pat.d, pat.n).T @ vals.reshape(-1, len(pat.rows)).T
    return np.asarray(out).T.reshape(shape + (pat.N,))


def exp_apply(x: np.ndarray, w: np.ndarray, d: int, n: int, s: float = 1.0) -> np.ndarray:
    """exp(s T(x)) w by Horner's rule on the finite series."""
    pat = pattern(d, n)
    x = np.asarray(x)
    w = np.asarray(w)
    v = w
    for k in range(pat.max_level, 0, -1):
        v = w + s * _apply_T(pat, x, v) / k
    return v


def forward(x: np.ndarray, d: int, n: int) -> np.ndarray:
    """psi = exp(T(x)) e_[d]."""
    x = np.asarray(x)
    N = pattern(d, n).N
    _check_len(x, N)
    e0 = np.zeros(x.shape, dtype=np.result_type(x, float))
    e0[..., 0] = 1
    return exp_apply(x, e0, d, n)


def dehomogenize(psi: np.ndarray) -> np.ndarray:
    """Scale psi so that psi_[d] = 1."""
    psi = np.asarray(psi)
    p0 = psi[..., :1]
    if np.any(p0 == 0):
        raise ChartError("psi_[d] = 0: the point lies at infinity of the affine chart")
    return psi / p0


def backward(psi: np.ndarray, d: int, n: int, normalize: bool = False, atol: float = 1e-9) -> np.ndarray:
    """Amplitudes x with forward(x) = psi, solved one excitation level at a time."""
    pat = pattern(d, n)
    psi = np.asarray(psi)
    _check_len(psi, pat.N)
    if np.any(psi[..., 0] == 0):
        raise ChartError("psi_[d] = 0: the point lies at infinity of the affine chart")
    if normalize:
        psi = dehomogenize(psi)
    elif np.any(np.abs(psi[..., 0] - 1) > atol):
        raise ValueError("backward expects psi_[d] = 1; dehomogenize first or pass normalize=True")
    levels = orbital_basis(d, n).levels
    x = np.zeros(psi.shape, dtype=np.result_type(psi, float))
    x[..., 0] = 1
    for r in range(1, pat.max_level + 1):
        idx = np.flatnonzero(levels == r)
        partial = forward(x, d, n)
        x[..., idx] = pat.eps[idx] * (psi[..., idx] - partial[..., idx])
    return x


@lru_cache(maxsize=None)
def _var_subset(d: int, n: int, var_cols: tuple):
    """Pattern entries whose variable lies in ``var_cols`` and their column slot."""
    pat = pattern(d, n)
    slot = {v: k for k, v in enumerate(var_cols)}
    keep = np.array([v in slot for v in pat.vars], dtype=bool)
    cols = np.array([slot[v] for v in pat.vars[keep]], dtype=np.intp)
    return keep, cols


def _horner_jac(pat: TPattern, T: np.ndarray, w: np.ndarray, s: float, var_cols=None):
    """exp(sT(x)) w and its derivative in x (w held fixed), batched.

    Returns (v, D) with D[..., :, k] = d v / d x_{var_cols[k]}.  Without
    ``var_cols`` all N coordinates are used and column 0 is zero.  The
    excitation operators commute, so d/dx_K exp(sT) w = s E_K exp(sT) w and
    D is a single scatter of v.
    """
    N = pat.N
    if var_cols is None:
        keep, dcols, ncol = slice(None), pat.vars, N
    else:
        keep, dcols = _var_subset(pat.d, pat.n, tuple(int(v) for v in var_cols))
        ncol = len(var_cols)
    rows, src, sg = pat.rows[keep], pat.cols[keep], pat.signs[keep]
    batch = w.shape[:-1]
    dtype = np.result_type(T, w, float)
    v = w
    for k in range(pat.max_level, 0, -1):
        v = w + s * (T @ v[..., None])[..., 0] / k
    D = np.zeros(batch + (N, ncol), dtype=dtype)
    D[..., rows, dcols] = (s * sg) * v[..., src]
    return v, D


class Parametrization:
    """Forward/backward maps with Jacobians for a fixed (d, n)."""

    def __init__(self, d: int, n: int):
        self.d, self.n = d, n
        self.pat = pattern(d, n)
        self.basis = orbital_basis(d, n)
        self.N = self.pat.N

    def T(self, x):
        return build_T(x, self.d, self.n)

    def forward(self, x):
        return forward(x, self.d, self.n)

    def backward(self, psi, normalize=False):
        return backward(psi, self.d, self.n, normalize=normalize)

    def forward_jac(self, x, T=None, var_cols=None):
        """(psi, dpsi/dx); dpsi/dx has shape (..., N, N), column 0 zero,
        or (..., N, len(var_cols)) when a variable subset is given."""
        x = np.asarray(x)
        if T is None:
            T = self.T(x)
        e0 = np.zeros(x.shape, dtype=np.result_type(x, float))
        e0[..., 0] = 1
        return _horner_jac(self.pat, T, e0, 1.0, var_cols)

    def exp_apply_jac(self, x, w, s=1.0, T=None, var_cols=None):
        """(exp(sT(x)) w, derivative in x at fixed w)."""
        x = np.asarray(x)
        if T is None:
            T = self.T(x)
        return _horner_jac(self.pat, T, np.asarray(w), s, var_cols)

    def exp_matrix_apply(self, x, W, s=1.0, T=None):
        """exp(sT(x)) W for a batch of matrices W of shape (..., N, m)."""
        if T is None:
            T = self.T(x)
        out = W
        for k in range(self.pat.max_level, 0, -1):
            out = W + s * (T @ out) / k
        return out

    def backward_jac(self, psi):
        """(x, dx/dpsi) on the chart; row and column 0 are zero."""
        x = self.backward(psi)
        _, J = self.forward_jac(x)
        Jinv = np.zeros_like(J)
        Jinv[..., 1:, 1:] = np.linalg.inv(J[..., 1:, 1:])
        return x, Jinv


def grassmann_minors(t: np.ndarray, d: int, n: int) -> np.ndarray:
    """All maximal minors of [Id_d | (t_ij)] in the global order.

    t_ij is the level-one amplitude x_{([d] minus i) union j}.
    """
    basis = orbital_basis(d, n)
    t = np.asarray(t)
    M = np.zeros(t.shape[:-1] + (d, n), dtype=np.result_type(t, float))
    M[..., :, :d] = np.eye(d)
    for i in range(1, d + 1):
        for j in range(d + 1, n + 1):
            K = tuple(sorted((set(range(1, d + 1)) - {i}) | {j}))
            M[..., i - 1, j - 1] = t[..., basis.position[K]]
    cols = np.array([[i - 1 for i in I] for I in basis.sets])
    return np.linalg.det(np.moveaxis(M[..., :, cols], -2, -3))


def grassmann_column_check(t: np.ndarray, d: int, n: int, tol: float = 1e-12) -> bool:
    """Compare forward(t) with the maximal minors for level-one amplitudes t."""
    t = np.asarray(t)
    levels = orbital_basis(d, n).levels
    if np.any(t[..., levels >= 2] != 0):
        raise ValueError("grassmann_column_check needs amplitudes supported on level one")
    psi = forward(t, d, n)
    minors = grassmann_minors(t, d, n)
    scale = 1 + np.max(np.abs(minors))
    return bool(np.max(np.abs(psi - minors)) <= tol * scale)


def reference_signs(d: int, n: int) -> np.ndarray:
    """eps_I, the coefficient of x_I in psi_I(x)."""
    return pattern(d, n).eps.copy()

