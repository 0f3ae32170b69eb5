"""Desk-scale invariant checks behind ``ccvar selftest`` (about half a minute serial)."""
from __future__ import annotations

import time

import numpy as np


def _ubp_counts():
    from .ubp import enumerate_ubp
    got = [len(enumerate_ubp(d)) for d in (2, 3, 4, 5)]
    return got == [3, 16, 131, 1496], f"counts {got}"


def _master_d2():
    from .ubp import master_backward, master_forward
    f, b = master_forward(2).to_text("x"), master_backward(2).to_text("x")
    want = "x34 - x13*x24 + x14*x23"
    return f == want and b == want, f"forward {f!r}, backward {b!r}"


def _sign_lock():
    from .expparam import pattern
    from .indexing import orbital_basis
    pat = pattern(2, 5)
    basis = orbital_basis(2, 5)
    entries = {(basis.sets[r], basis.sets[c]): (s, basis.sets[v])
               for r, c, v, s in zip(pat.rows, pat.cols, pat.vars, pat.signs)}
    ok = entries.get(((3, 4), (1, 3))) == (-1, (2, 4)) and entries.get(((1, 3), (1, 2))) == (1, (1, 3))
    ok &= ((3, 4), (1, 5)) not in entries
    return ok, f"{len(entries)} structural nonzeros"


def _round_trip():
    from .expparam import backward, forward
    rng = np.random.default_rng(0)
    worst = 0.0
    for d, n in ((3, 6), (2, 6), (4, 8)):
        from .indexing import orbital_basis
        N = orbital_basis(d, n).size
        x = rng.normal(size=(20, N)) + 1j * rng.normal(size=(20, N))
        x[:, 0] = 1
        worst = max(worst, float(np.abs(backward(forward(x, d, n), d, n) - x).max()))
    return worst < 1e-10, f"max error {worst:.2e}"


def _grassmann():
    from .expparam import grassmann_column_check
    from .indexing import orbital_basis
    rng = np.random.default_rng(1)
    ok = True
    for d, n in ((2, 5), (3, 6)):
        levels = orbital_basis(d, n).levels
        t = np.where(levels == 1, rng.normal(size=levels.size) + 1j * rng.normal(size=levels.size), 0)
        t[0] = 1
        ok &= grassmann_column_check(t, d, n)
    return ok, ""


def _census():
    from itertools import combinations
    from .indexing import TruncationSet
    from .varieties import is_linear

    def linear(d, n):
        return sorted(s for k in range(1, d) for s in combinations(range(1, d + 1), k)
                      if is_linear(TruncationSet(s, d, n)))
    a, b = linear(3, 6), linear(4, 8)
    ok = a == [(2,), (2, 3), (3,)] and b == sorted([(3,), (4,), (2, 4), (3, 4), (2, 3, 4)])
    return ok, f"(3,6) {a}; (4,8) {b}"


def _cc_degree_24():
    from .homotopy import StoppingRule, monodromy_solve
    from .indexing import TruncationSet
    g = monodromy_solve(TruncationSet((1,), 2, 4), seed=0, stop=StoppingRule(quiet_loops=5))
    return g.count == 9, f"{g.count} solutions"


def _cramer_d2():
    from .ccsystem import random_symmetric
    from .homotopy.cramer import cramer_oracle
    r = cramer_oracle(2, random_symmetric(6, np.random.default_rng(2)), seed=0)
    return r.degree == 9 and len(r.roots) == 9, f"degree {r.degree}"


def _hamiltonian_assembly():
    from .chemio import assemble_hamiltonian, permutation_formula_constant, random_integrals
    from .indexing import orbital_basis
    t = random_integrals(6, seed=3)
    H = assemble_hamiltonian(t, 3).matrix
    sets = orbital_basis(3, 6).sets
    far = max(abs(H[a, b]) for a in range(len(sets)) for b in range(len(sets))
              if len(set(sets[a]) - set(sets[b])) >= 3)
    c = permutation_formula_constant(random_integrals(4, seed=4), 2)
    return far == 0 and np.array_equal(H, H.T) and abs(c - 2) < 1e-9, f"constant at d=2: {c:.6f}"


CHECKS = [
    ("ubp counts 3,16,131,1496", _ubp_counts),
    ("d=2 master polynomials", _master_d2),
    ("T(x) sign convention at (2,5)", _sign_lock),
    ("forward/backward round trip", _round_trip),
    ("Grassmannian minors", _grassmann),
    ("linearity census", _census),
    ("CC degree 9 at (2,4)", _cc_degree_24),
    ("Cramer oracle degree 9 at d=2", _cramer_d2),
    ("Hamiltonian assembly", _hamiltonian_assembly),
]


def run_checks(progress=None) -> list[dict]:
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append({"name": name, "passed": bool(ok), "seconds": round(time.perf_counter() - t0, 3),
                    "detail": detail})
        if progress:
            progress(name, ok)
    return out
