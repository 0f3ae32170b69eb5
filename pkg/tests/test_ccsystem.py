import io

import numpy as np
import pytest

from ccvar.ccsystem import (CCFamily, CCSystem, Hamiltonian, embed, formulations_equivalent,
                            jacobian, random_symmetric, residual_new, residual_traditional,
                            start_system, truncate, upper_to_symmetric)
from ccvar.errors import NotSymmetricError, ParseError
from ccvar.expparam import exp_T, forward
from ccvar.indexing import TruncationSet
from conftest import cgauss


@pytest.fixture
def trunc():
    return TruncationSet((1, 2), 3, 6)


def test_hamiltonian_checks_symmetry():
    with pytest.raises(NotSymmetricError):
        Hamiltonian(np.arange(36.0).reshape(6, 6), 2, 4)
    with pytest.raises(ValueError):
        Hamiltonian(np.eye(5), 2, 4)


def test_hamiltonian_io_round_trips(tmp_path, rng):
    for cplx in (False, True):
        H = Hamiltonian(random_symmetric(6, rng, complex_=cplx), 2, 4, "test")
        for name in ("h.bin", "h.json"):
            p = tmp_path / name
            H.save(str(p))
            G = Hamiltonian.load(str(p))
            assert np.array_equal(G.matrix, H.matrix) and (G.d, G.n) == (2, 4)
    with pytest.raises(ParseError):
        Hamiltonian.from_bytes(b"garbage" * 10)
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    with pytest.raises(ParseError):
        Hamiltonian.load(str(bad))


def test_embed_truncate(trunc, rng):
    z = cgauss(rng, len(trunc))
    x = embed(z, trunc)
    assert x[0] == 1 and np.array_equal(truncate(x, trunc), z)
    assert np.count_nonzero(x) == len(trunc) + 1


def _residual_new_direct(trunc, H, z, lam):
    psi = exp_T(embed(z, trunc), trunc.d, trunc.n)[:, 0]
    S = trunc.rows
    return (H @ psi - lam * psi)[S]


def _residual_trad_direct(trunc, H, z):
    x = embed(z, trunc)
    xm = -x
    xm[0] = 1
    E, Ei = exp_T(x, trunc.d, trunc.n), exp_T(xm, trunc.d, trunc.n)
    return (Ei @ H @ E[:, 0])[trunc.tilde]


def test_residuals_match_dense_construction(trunc, rng):
    H = random_symmetric(20, rng)
    z = cgauss(rng, len(trunc))
    lam = 0.3 - 0.2j
    sn = CCSystem(trunc, H, "new")
    st = CCSystem(trunc, H, "traditional")
    assert np.allclose(residual_new(sn, z, lam), _residual_new_direct(trunc, H, z, lam))
    assert np.allclose(residual_traditional(st, z), _residual_trad_direct(trunc, H, z))
    with pytest.raises(ValueError):
        residual_new(st, z, lam)


@pytest.mark.parametrize("formulation", ["new", "traditional"])
def test_jacobian_finite_differences(trunc, formulation, rng):
    H = random_symmetric(20, rng)
    sys_ = CCSystem(trunc, H, formulation)
    y = cgauss(rng, sys_.n_unknowns)
    J = sys_.jacobian(y)
    h = 1e-6
    for k in range(0, sys_.n_unknowns, 5):
        e = np.zeros_like(y)
        e[k] = h
        fd = (sys_.residual(y + e) - sys_.residual(y - e)) / (2 * h)
        assert np.abs(fd - J[:, k]).max() < 1e-7 * (1 + np.abs(J).max())


@pytest.mark.parametrize("formulation", ["new", "traditional"])
def test_family_parameter_derivative_and_linearity(trunc, formulation, rng):
    fam = CCFamily(trunc, formulation)
    Ha, Hb = random_symmetric(20, rng), random_symmetric(20, rng)
    y = cgauss(rng, fam.n_unknowns)[None]
    t = np.array([0.37])
    F, _, Fdp = fam.evaluate(y, t, Ha, Hb - Ha)
    Fm, _, _ = fam.evaluate(y, 0.0, (1 - t[0]) * Ha + t[0] * Hb, None)
    assert np.allclose(F, Fm)
    F1, _, _ = fam.evaluate(y, 0.0, Hb, None)
    F0, _, _ = fam.evaluate(y, 0.0, Ha, None)
    assert np.allclose(Fdp, F1 - F0)
    L, F00 = fam.linear_map(y[0])
    iu, ju = np.triu_indices(20)
    assert np.allclose(L @ Ha[iu, ju] + F00, F0[0])


@pytest.mark.parametrize("formulation", ["new", "traditional"])
def test_start_system_solves(trunc, formulation):
    H, z0, lam0 = start_system(trunc, seed=3, formulation=formulation)
    sys_ = CCSystem(trunc, H, formulation)
    y = sys_.pack(z0, lam0)
    assert np.abs(sys_.residual(y)).max() < 1e-10
    assert np.linalg.cond(sys_.jacobian(y)) < 1e8
    if formulation == "traditional":
        assert np.isclose(CCFamily(trunc, formulation).energy(z0, H)[0], lam0)


def test_energy_is_reference_row(trunc, rng):
    H, z0, lam0 = start_system(trunc, seed=5, formulation="new")
    fam = CCFamily(trunc, "traditional")
    # on a solution of the new system the similarity-transformed reference row is lambda
    assert np.isclose(fam.energy(z0, H)[0], lam0)


def test_equivalence_predicate():
    def T(s, d=5, n=10):
        return TruncationSet(s, d, n)
    assert formulations_equivalent(T((1,)))
    assert formulations_equivalent(T((2, 4)))
    assert formulations_equivalent(T((1, 2, 3)))
    assert not formulations_equivalent(T((2, 3)))
    assert not formulations_equivalent(T((1, 3)))
    assert formulations_equivalent(TruncationSet((2, 4), 4, 8))


def test_upper_to_symmetric(rng):
    A = random_symmetric(5, rng)
    iu, ju = np.triu_indices(5)
    assert np.array_equal(upper_to_symmetric(A[iu, ju], 5), A)


def test_linear_sigma_solution_is_eigenvector(rng):
    # for linear sigma, psi restricted to S is an eigenvector of H_SS
    trunc = TruncationSet((2, 3), 3, 6)
    H, z0, lam0 = start_system(trunc, seed=9)
    psi = forward(embed(z0, trunc), 3, 6)
    S = trunc.rows
    HS = H.matrix[np.ix_(S, S)]
    assert np.allclose(HS @ psi[S], lam0 * psi[S])
