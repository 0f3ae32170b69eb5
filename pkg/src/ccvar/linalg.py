"""Small dense linear algebra used by the solvers.

LU factorizations, QR and companion eigenvalues come from LAPACK through
numpy/scipy; the symmetric eigensolver is a vectorized cyclic Jacobi sweep.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla

from .errors import NotSymmetricError, RankDeficientError


def lu_solve(A: np.ndarray, b: np.ndarray, refine: bool = True) -> np.ndarray:
    """Solve A x = b (batched over leading axes) with one refinement step."""
    A = np.asarray(A)
    b = np.asarray(b)
    vec = b.ndim == A.ndim - 1
    rhs = b[..., None] if vec else b
    x = np.linalg.solve(A, rhs)
    if refine:
        r = rhs - A @ x
        x = x + np.linalg.solve(A, r)
    return x[..., 0] if vec else x


def _onenorm(A):
    return np.abs(A).sum(axis=-2).max(axis=-1)


def condition_estimate(A: np.ndarray, max_iter: int = 5) -> np.ndarray:
    """Hager's 1-norm estimate of cond_1(A), batched; inf for singular A."""
    A = np.asarray(A)
    batch = A.shape[:-2]
    n = A.shape[-1]
    Af = A.reshape((-1, n, n))
    out = np.empty(Af.shape[0])
    for b in range(Af.shape[0]):
        M = Af[b]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu = sla.lu_factor(M, check_finite=False)
        except (ValueError, np.linalg.LinAlgError):
            out[b] = np.inf
            continue
        if np.any(np.diag(lu[0]) == 0) or not np.all(np.isfinite(lu[0])):
            out[b] = np.inf
            continue
        cplx = np.iscomplexobj(M)
        x = np.full(n, 1.0 / n, dtype=M.dtype)
        est = 0.0
        for _ in range(max_iter):
            y = sla.lu_solve(lu, x, check_finite=False)
            est_new = np.abs(y).sum()
            if cplx:
                xi = np.where(np.abs(y) > 0, y / np.maximum(np.abs(y), 1e-300), 1)
            else:
                xi = np.where(y >= 0, 1.0, -1.0)
            z = sla.lu_solve(lu, xi, trans=2 if cplx else 1, check_finite=False)
            j = int(np.argmax(np.abs(z)))
            if est_new <= est or np.abs(z[j]) <= (z.conj() @ x).real:
                est = max(est, est_new)
                break
            est = est_new
            x = np.zeros(n, dtype=M.dtype)
            x[j] = 1
        out[b] = est * _onenorm(M)
    return out.reshape(batch)


def least_norm_solve(M: np.ndarray, b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Minimum-norm solution of the underdetermined system M x = b via QR of M^H."""
    M = np.asarray(M)
    b = np.asarray(b)
    m, n = M.shape
    if m > n:
        raise RankDeficientError(f"{m} equations in {n} unknowns is not underdetermined")
    Q, R = np.linalg.qr(M.conj().T)
    diag = np.abs(np.diag(R))
    if m and diag.min() <= rtol * max(diag.max(), 1e-300):
        raise RankDeficientError("matrix lacks full row rank; resample the start data")
    y = sla.solve_triangular(R.conj().T, b, lower=True)
    return Q @ y


def symmetric_eigen(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.

    Cyclic Jacobi with round-robin pairing, so each sweep applies n/2
    disjoint rotations at a time.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetricError("expected a square matrix")
    n = A.shape[0]
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise NotSymmetricError("matrix is not symmetric")
    A = (A + A.T) / 2
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    norm = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(A.diagonal() ** 2), 0.0))
        if off < tol * norm:
            break
        for p, q in rounds:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            active = np.abs(apq) > 1e-300
            theta = np.where(active, (aqq - app) / (2 * np.where(active, apq, 1)), 0)
            t = np.where(active, np.sign(theta + (theta == 0)) /
                         (np.abs(theta) + np.hypot(theta, 1)), 0)
            c = 1 / np.sqrt(t * t + 1)
            s = t * c
            # A <- G^T A G with G acting on column pairs (p, q)
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
    w = A.diagonal().copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def univariate_roots(coeffs) -> np.ndarray:
    """Roots of sum_k coeffs[k] * t^k (ascending order of powers).

    Trailing zero high coefficients are stripped; zero roots are returned explicitly.
    """
    c = np.array(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("the zero polynomial has no finite root set")
    c = c[: nz[-1] + 1]
    low = nz[0]
    core = c[low:]
    deg = len(core) - 1
    if deg == 0:
        return np.zeros(low, dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[0, :] = -core[-2::-1] / core[-1]
    comp[1:, :-1] = np.eye(deg - 1)
    roots = np.linalg.eigvals(comp)
    return np.concatenate([np.zeros(low, dtype=complex), roots])


def polyval(coeffs, t):
    """Evaluate sum_k coeffs[k] t^k (ascending powers) by Horner's rule."""
    out = np.zeros(np.shape(t), dtype=complex)
    for c in np.asarray(coeffs)[::-1]:
        out = out * t + c
    return out


def signed_maximal_minors(M: np.ndarray, log: bool = False):
    """Kernel vector of an m x (m+1) matrix by signed maximal minors.

    v_i = (-1)^i det(M without column i) (0-based i), so M v = 0.  With
    ``log=True`` returns (scaled v, log scale) to avoid overflow.
    """
    M = np.asarray(M)
    m, k = M.shape[-2:]
    if k != m + 1:
        raise ValueError("need one more column than rows")
    sign = np.empty(M.shape[:-2] + (k,), dtype=np.result_type(M, float))
    logabs = np.empty(M.shape[:-2] + (k,))
    for i in range(k):
        sub = np.delete(M, i, axis=-1)
        s, la = np.linalg.slogdet(sub)
        sign[..., i] = s * (-1) ** i
        logabs[..., i] = la
    if not log:
        return sign * np.exp(logabs)
    finite = np.where(np.isfinite(logabs), logabs, -np.inf)
    top = finite.max(axis=-1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    return sign * np.exp(finite - top), top[..., 0]


def cramer_kernel(M: np.ndarray):
    """Signed maximal minors of (batched) m x (m+1) matrices by Cramer's rule.

    Writes M = [B | c]; the minors are (-1)^m det(B) * (B^{-1}(-c), 1).
    Returns (v, log_scale) with minors = v * exp(log_scale) and max|v| = 1.
    """
    M = np.asarray(M)
    m = M.shape[-2]
    B, c = M[..., :, :-1], M[..., :, -1]
    sign, logdet = np.linalg.slogdet(B)
    y = np.linalg.solve(B, -c[..., None])[..., 0]
    v = np.concatenate([y, np.ones(y.shape[:-1] + (1,), dtype=y.dtype)], axis=-1)
    top = np.abs(v).max(axis=-1, keepdims=True)
    v = v / top * (sign * (-1) ** m)[..., None]
    return v, logdet + np.log(top[..., 0])
