import numpy as np
import pytest

from ccvar.ccsystem import random_symmetric
from ccvar.errors import InvalidDimensionError
from ccvar.homotopy import solve_target
from ccvar.homotopy.cramer import cramer_oracle
from ccvar.varieties import hypersurface_cc_degree
from conftest import generic_start


@pytest.mark.parametrize("d", [2, 3])
def test_degree_matches_closed_form(d):
    H = random_symmetric({2: 6, 3: 20}[d], np.random.default_rng(d))
    r = cramer_oracle(d, H, seed=0)
    assert r.degree == hypersurface_cc_degree(d)
    assert len(r.roots) == r.degree
    assert r.root_residuals.max() < 1e-10


def test_d2_roots_match_homotopy():
    g = generic_start((1,), 2, 4)
    H = random_symmetric(6, np.random.default_rng(21), complex_=False)
    S = solve_target(g, H, seed=0)
    lams = S.lambdas()
    roots = cramer_oracle(2, H, seed=1).roots
    assert len(lams) == len(roots) == 9
    dist = np.abs(roots[:, None] - lams[None, :])
    assert dist.min(axis=1).max() < 1e-7 and dist.min(axis=0).max() < 1e-7


def test_d3_roots_match_monodromy_energies():
    g = generic_start((1, 2), 3, 6)
    roots = cramer_oracle(3, g.H, seed=0).roots
    lams = g.Y[:, -1]
    dist = np.abs(roots[:, None] - lams[None, :])
    assert dist.min(axis=1).max() < 1e-7 and dist.min(axis=0).max() < 1e-7


def test_wrong_size_rejected():
    with pytest.raises(InvalidDimensionError):
        cramer_oracle(2, np.eye(5))
