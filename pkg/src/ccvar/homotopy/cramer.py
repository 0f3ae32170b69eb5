"""Univariate oracle for the hypersurface case n = 2d, sigma = [d-1].

For sigma = [d-1] the new CC equations say that psi spans the kernel of
(H - lambda I) with the top-level row removed.  By Cramer's rule that kernel
is the vector of signed maximal minors, so the single defining equation of
V_sigma restricted to it is a polynomial in lambda alone.  Its degree is the
CC degree and its roots are the energies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidDimensionError
from ..indexing import orbital_basis
from ..linalg import cramer_kernel, univariate_roots
from ..ubp import coordinate_polynomial


@dataclass
class CramerResult:
    degree: int
    roots: np.ndarray
    coefficients: np.ndarray  # scaled: coefficients[k] = c_k * R^(k - D)
    radius: float
    root_residuals: np.ndarray  # final |Newton step| relative to 1 + |root|


def _homogenized_terms(d: int):
    """Positions (padded with the reference) and coefficients of x_top(psi) homogenized."""
    n = 2 * d
    basis = orbital_basis(d, n)
    top = basis.sets[-1]
    poly = coordinate_polynomial(top, d, n, "backward")
    idx, coef = [], []
    for mono, c in poly.terms.items():
        pos = [basis.position[v] for v, e in mono for _ in range(e)]
        idx.append(pos + [0] * (d - len(pos)))
        coef.append(c)
    return np.array(idx, dtype=int), np.array(coef, dtype=float)


def _scaled_values(H: np.ndarray, lam: np.ndarray, d: int, idx, coef, log_norm: float):
    """f(psi(lambda)) * exp(-log_norm) at each lambda, psi from signed minors."""
    N = H.shape[0]
    M = H[None, :-1, :] - lam[:, None, None] * np.eye(N)[None, :-1, :]
    v, top = cramer_kernel(M)
    f = (coef * np.prod(v[:, idx], axis=-1)).sum(axis=-1)
    return f * np.exp(d * top - log_norm)


def _coefficients(H, d, radius, M, idx, coef, phase=0.0):
    """Scaled coefficients c_k R^(k-D) e^(i k phase) from M samples on |lambda| = R."""
    N = H.shape[0]
    D = d * (N - 1)
    lam = radius * np.exp(1j * phase + 2j * np.pi * np.arange(M) / M)
    g = _scaled_values(H, lam, d, idx, coef, D * np.log(radius))
    return np.fft.fft(g) / M


def cramer_oracle(d: int, H, seed=None, tol: float = 1e-9, polish_iters: int = 200) -> CramerResult:
    """Degree and roots of the univariate CC polynomial for (d, 2d), sigma = [d-1].

    The coefficients are interpolated from samples on circles (FFT with at
    least twice as many points as the formal degree).  The degree is read off
    on a large circle where the leading coefficient dominates.  Companion
    roots from a circle of spectral size seed a simultaneous Aberth iteration
    on the function itself, so rounding in the coefficients does not survive.
    """
    H = np.asarray(getattr(H, "matrix", H))
    N = H.shape[0]
    if orbital_basis(d, 2 * d).size != N:
        raise InvalidDimensionError(f"H must be {orbital_basis(d, 2 * d).size}-dimensional for d={d}")
    rng = np.random.default_rng(seed)
    idx, coef = _homogenized_terms(d)
    D = d * (N - 1)
    M = 1 << int(np.ceil(np.log2(2 * (D + 1))))
    scale = max(1.0, float(np.linalg.norm(H, 2)))
    # random phase so no sample lands on an eigenvalue of a structured H
    a = _coefficients(H, d, 1e3 * scale * N, M, idx, coef, rng.uniform(0, 2 * np.pi))
    mag = np.abs(a)
    degree = int(np.flatnonzero(mag > tol * mag.max()).max())

    radius = scale
    b = _coefficients(H, d, radius, M, idx, coef)[: degree + 1]
    roots = radius * univariate_roots(b)

    def g(lam):
        return _scaled_values(H, lam, d, idx, coef, D * np.log(radius))

    roots = _aberth(g, roots, polish_iters)
    res = _newton_ratio(g, roots) if roots.size else np.zeros(0)
    return CramerResult(degree, roots, b, radius, np.abs(res) / (1 + np.abs(roots)))


def _newton_ratio(g, z):
    """g(z) / g'(z) with a central difference; independent of the scale of g."""
    h = 1e-5 * (1 + np.abs(z))
    g0 = g(z)
    gp = (g(z + h) - g(z - h)) / (2 * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(g0 == 0, 0, g0 / gp)


def _aberth(g, z, max_iter: int):
    """Simultaneous Aberth-Ehrlich refinement of all roots of the polynomial g."""
    z = np.array(z, dtype=complex)
    k = z.size
    if k == 0:
        return z
    for _ in range(max_iter):
        ratio = _newton_ratio(g, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1)
        inv = 1 / diff
        np.fill_diagonal(inv, 0)
        w = ratio / (1 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0)
        z = z - w
        if np.all(np.abs(w) < 1e-14 * (1 + np.abs(z))):
            break
    return z
