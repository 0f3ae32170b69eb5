import json

import numpy as np
import pytest

from ccvar.ccsystem import CCFamily, Hamiltonian, random_symmetric, start_system
from ccvar.homotopy import (GenericStart, Solution, SolutionSet, StoppingRule, TrackerConfig,
                            classify, dedup_indices, is_real, monodromy_solve, newton_polish,
                            parameter_homotopy, solve_target, track)
from ccvar.homotopy.tracker import OK
from ccvar.indexing import TruncationSet
from conftest import generic_start


def test_constant_path_returns_start():
    trunc = TruncationSet((1,), 2, 4)
    H, z0, lam0 = start_system(trunc, seed=0)
    fam = CCFamily(trunc)
    y0 = np.concatenate([z0, [lam0]])[None]
    res = track(fam, y0, [(H.matrix, H.matrix)], TrackerConfig())
    assert res.status[0] == OK
    assert np.allclose(res.y, y0, atol=1e-12)


def test_linear_sigma_endpoints_are_eigenpairs():
    g = generic_start((2, 3), 3, 6)
    assert g.count == 11
    rng = np.random.default_rng(7)
    H = random_symmetric(20, rng, complex_=False)
    S = solve_target(g, H, seed=1)
    assert S.count == 11 and S.real_count == 11
    rows = g.trunc.rows
    ev = np.linalg.eigvalsh(H[np.ix_(rows, rows)])
    assert np.allclose(np.sort(S.lambdas().real), ev, atol=1e-8)


def test_real_target_solutions_closed_under_conjugation():
    g = generic_start((1,), 2, 4)
    H = random_symmetric(6, np.random.default_rng(3), complex_=False)
    S = solve_target(g, H, seed=2)
    Y = S.Y()
    assert S.count == 9
    assert (S.count - S.real_count) % 2 == 0
    for y in Y:
        assert np.abs(Y - y.conj()).max(axis=1).min() < 1e-8


def test_target_equal_to_start_gives_generic_set():
    g = generic_start((1,), 2, 4)
    S = solve_target(g, g.H, seed=0)
    assert S.count == g.count
    Y = S.Y()
    for y in g.Y:
        assert np.abs(Y - y).max(axis=1).min() < 1e-8


def test_double_eigenvalue_gives_singular_endpoints():
    # for linear sigma the solutions are the eigenvectors of H_SS; a repeated
    # eigenvalue turns two of them into a line of solutions
    g = generic_start((2, 3), 3, 6)
    rows = g.trunc.rows
    rng = np.random.default_rng(11)
    Q, _ = np.linalg.qr(rng.normal(size=(11, 11)))
    ev = rng.normal(size=11)
    ev[1] = ev[0]
    H = random_symmetric(20, rng, complex_=False)
    H[np.ix_(rows, rows)] = Q @ np.diag(ev) @ Q.T
    H = (H + H.T) / 2
    S = solve_target(g, H, seed=4)
    assert S.count == 9
    assert len(S.of_class("singular")) + len(S.of_class("failed")) == 2


def test_generic_solutions_are_nonsingular_and_complex():
    g = generic_start((1,), 2, 4)
    sols = g.solution_set()
    assert all(s.cls == "nonsingular" for s in sols)
    assert not any(s.real for s in sols)


def test_classify_rules():
    cfg = TrackerConfig()
    cls = classify([1e-14, 1e-14, 1e-14, 1e-3, np.inf], [10, 1e9, 10, 10, 10],
                   [0.01, 0.01, 0.9, 0.01, 0.01], cfg)
    assert list(cls) == ["nonsingular", "singular", "singular", "singular", "failed"]


def test_dedup_and_realness():
    Y = np.array([[1, 2], [1 + 1e-9, 2], [3, 4j]], dtype=complex)
    assert list(dedup_indices(Y)) == [0, 2]
    assert list(dedup_indices(Y, known=Y[:1])) == [2]
    assert list(is_real(Y)) == [True, True, False]


def test_solution_set_json_round_trip():
    s = SolutionSet([Solution(np.array([1 + 2j]), 0.5 - 1j, 1e-14, 3.0, "nonsingular", False),
                     Solution(np.array([0j]), None, float("nan"), float("inf"), "failed", False)],
                    {"seed": 3, "loops": 4, "stabilized": True})
    t = SolutionSet.from_json(s.to_json())
    assert t.count == 1 and t.solutions[0].lam == 0.5 - 1j
    assert json.loads(s.to_json())["solutions"][1]["lambda"] is None


def test_generic_start_cache_round_trip(tmp_path):
    g = generic_start((1,), 2, 4)
    p = tmp_path / "start.npz"
    g.save(str(p))
    h = GenericStart.load(str(p))
    assert np.array_equal(h.Y, g.Y) and h.evidence == g.evidence
    assert h.trunc == g.trunc


def test_monodromy_reproducible_with_seed():
    trunc = TruncationSet((1,), 2, 4)
    a = monodromy_solve(trunc, seed=5, stop=StoppingRule(quiet_loops=3))
    b = monodromy_solve(trunc, seed=5, stop=StoppingRule(quiet_loops=3))
    assert np.array_equal(a.Y, b.Y)


def test_threads_give_same_set():
    g = generic_start((1,), 2, 5)
    H = random_symmetric(10, np.random.default_rng(1), complex_=False)
    a = solve_target(g, H, TrackerConfig(threads=1, chunk_size=8), seed=3)
    b = solve_target(g, H, TrackerConfig(threads=4, chunk_size=8), seed=3)
    assert a.count == b.count == 27
    Ya, Yb = a.Y(), b.Y()
    for y in Ya:
        assert np.abs(Yb - y).max(axis=1).min() < 1e-8


def test_monodromy_stops_at_target_and_reports_rule():
    trunc = TruncationSet((1,), 2, 4)
    g = monodromy_solve(trunc, seed=2, stop=StoppingRule(target=9))
    assert g.count == 9 and g.evidence["rule"] == "target" and g.evidence["stabilized"]
    h = monodromy_solve(trunc, seed=2, stop=StoppingRule(quiet_loops=100, max_loops=1))
    assert h.evidence["rule"] == "max_loops" and not h.evidence["stabilized"]


def test_newton_polish_reduces_residual():
    trunc = TruncationSet((1, 2), 3, 6)
    H, z0, lam0 = start_system(trunc, seed=1)
    fam = CCFamily(trunc)
    y = np.concatenate([z0, [lam0]])[None] + 1e-6
    yp, res, cond, contr, conv = newton_polish(fam, y, H.matrix, TrackerConfig())
    assert conv[0] and res[0] < 1e-12
    assert np.allclose(yp[0, :-1], z0)


@pytest.mark.slow
@pytest.mark.parametrize("sigma,expected", [((2,), 19), ((3,), 5), ((2, 3), 23)])
def test_linear_cc_degree_at_37_is_dim_plus_one(sigma, expected):
    # the {2,3} column is tabulated as 287; the decisions ledger explains why 23 is expected
    g = generic_start(sigma, 3, 7, quiet_loops=5)
    assert g.count == expected == len(g.trunc) + 1
