import numpy as np
import pytest
import scipy.sparse as sp

from ccvar.errors import ChartError
from ccvar.expparam import (Parametrization, backward, build_T, dehomogenize, exp_T, forward,
                            grassmann_column_check, grassmann_minors, pattern, reference_signs)
from ccvar.indexing import orbital_basis
from conftest import cgauss, random_amplitudes

# T(x) at (2,5) written out by hand: row label -> {column label: (sign, variable)}
EXAMPLE_25 = {
    "13": {"12": (1, "13")}, "14": {"12": (1, "14")}, "15": {"12": (1, "15")},
    "23": {"12": (-1, "23")}, "24": {"12": (-1, "24")}, "25": {"12": (-1, "25")},
    "34": {"12": (1, "34"), "13": (-1, "24"), "14": (1, "23"), "23": (-1, "14"), "24": (1, "13")},
    "35": {"12": (1, "35"), "13": (-1, "25"), "15": (1, "23"), "23": (-1, "15"), "25": (1, "13")},
    "45": {"12": (1, "45"), "14": (-1, "25"), "15": (1, "24"), "24": (-1, "15"), "25": (1, "14")},
}


def _lab(I):
    return "".join(map(str, I))


def test_T_pattern_25_entry_for_entry():
    pat = pattern(2, 5)
    sets = orbital_basis(2, 5).sets
    got = {}
    for r, c, v, s in zip(pat.rows, pat.cols, pat.vars, pat.signs):
        got.setdefault(_lab(sets[r]), {})[_lab(sets[c])] = (int(s), _lab(sets[v]))
    assert got == EXAMPLE_25
    assert sum(len(row) for row in got.values()) == 21


def test_T_spot_entries(rng):
    x = random_amplitudes(rng, 2, 5)
    b = orbital_basis(2, 5)
    T = build_T(x, 2, 5)
    assert T[b.index((3, 4)), b.index((1, 3))] == -x[b.index((2, 4))]
    assert T[b.index((1, 3)), b.index((1, 2))] == x[b.index((1, 3))]
    assert T[b.index((3, 4)), b.index((1, 5))] == 0
    assert np.all(T[:, 0] == build_T(x, 2, 5)[:, 0])
    Ts = build_T(x, 2, 5, sparse=True)
    assert sp.issparse(Ts) and np.allclose(Ts.toarray(), T)


def test_reference_amplitude_never_enters_T(rng):
    x = random_amplitudes(rng, 3, 6)
    y = x.copy()
    y[0] = 17.0
    assert np.array_equal(build_T(x, 3, 6), build_T(y, 3, 6))


@pytest.mark.parametrize("d,n", [(2, 4), (2, 5), (3, 6), (3, 7), (4, 8)])
def test_nilpotent_and_lower_triangular(d, n, rng):
    T = build_T(random_amplitudes(rng, d, n), d, n)
    assert np.all(np.triu(T) == 0)
    assert np.all(np.linalg.matrix_power(T, d + 1) == 0)


def test_exp_quadratic_entry_25(rng):
    x = random_amplitudes(rng, 2, 5)
    b = orbital_basis(2, 5)
    X = {I: x[k] for k, I in enumerate(b.sets)}
    E = exp_T(x, 2, 5)
    want = X[(1, 4)] * X[(2, 3)] - X[(1, 3)] * X[(2, 4)] + X[(3, 4)]
    assert np.isclose(E[b.index((3, 4)), 0], want)
    assert np.allclose(exp_T(np.zeros(10), 2, 5), np.eye(10))


def test_exp_inverse(rng):
    for _ in range(100):
        x = random_amplitudes(rng, 3, 6)
        xm = -x
        xm[0] = 1
        assert np.abs(exp_T(x, 3, 6) @ exp_T(xm, 3, 6) - np.eye(20)).max() < 1e-12


def test_forward_example_36():
    b = orbital_basis(3, 6)
    a, bb, c, e = 2.0, 3.0, 5.0, 7.0
    x = np.zeros(20)
    x[0] = 1
    for I, v in [((1, 2, 4), a), ((1, 3, 5), bb), ((1, 2, 5), c), ((1, 3, 4), e)]:
        x[b.index(I)] = v
    psi = forward(x, 3, 6)
    assert psi[b.index((1, 4, 5))] == -a * bb + c * e
    assert psi[b.index((1, 3, 4))] == -e


def test_forward_is_first_column(rng):
    x = random_amplitudes(rng, 3, 7, batch=(4,))
    psi = forward(x, 3, 7)
    for k in range(4):
        assert np.allclose(psi[k], exp_T(x[k], 3, 7)[:, 0])
    e = np.zeros(35)
    e[0] = 1
    assert np.array_equal(forward(e, 3, 7), e)


@pytest.mark.parametrize("d,n", [(3, 6), (2, 6), (4, 8), (3, 5)])
def test_round_trips(d, n, rng):
    x = random_amplitudes(rng, d, n, batch=(100,))
    assert np.abs(backward(forward(x, d, n), d, n) - x).max() < 1e-11
    psi = forward(random_amplitudes(rng, d, n, batch=(20,)), d, n)
    assert np.abs(forward(backward(psi, d, n), d, n) - psi).max() < 1e-11


def test_linear_slopes_are_reference_signs(rng):
    d, n = 3, 6
    eps = reference_signs(d, n)
    x = random_amplitudes(rng, d, n)
    base = forward(x, d, n)
    for k in range(1, 20):
        y = x.copy()
        y[k] += 1.0
        assert np.isclose(forward(y, d, n)[k] - base[k], eps[k])


def test_chart_errors(rng):
    psi = forward(random_amplitudes(rng, 2, 4), 2, 4)
    with pytest.raises(ValueError):
        backward(2 * psi, 2, 4)
    assert np.allclose(backward(2 * psi, 2, 4, normalize=True), backward(psi, 2, 4))
    psi[0] = 0
    with pytest.raises(ChartError):
        backward(psi, 2, 4)
    with pytest.raises(ChartError):
        dehomogenize(psi)


def test_grassmann_identification(rng):
    for d, n in [(2, 5), (3, 6)]:
        lv = orbital_basis(d, n).levels
        t = np.where(lv == 1, cgauss(rng, lv.size), 0)
        t[0] = 1
        assert grassmann_column_check(t, d, n)
        assert np.abs(forward(t, d, n) - grassmann_minors(t, d, n)).max() < 1e-12
    t0 = np.zeros(20)
    t0[0] = 1
    assert np.array_equal(grassmann_minors(t0, 3, 6), t0)
    bad = t0.copy()
    bad[-1] = 1
    with pytest.raises(ValueError):
        grassmann_column_check(bad, 3, 6)


def test_jacobians_by_finite_differences(rng):
    par = Parametrization(3, 6)
    x = random_amplitudes(rng, 3, 6)
    psi, J = par.forward_jac(x)
    h = 1e-6
    for k in (1, 7, 19):
        e = np.zeros(20)
        e[k] = h
        fd = (par.forward(x + e) - par.forward(x - e)) / (2 * h)
        assert np.abs(fd - J[:, k]).max() < 1e-8
    _, Jsub = par.forward_jac(x, var_cols=[3, 11])
    assert np.allclose(Jsub, J[:, [3, 11]])
    _, Jinv = par.backward_jac(psi)
    assert np.allclose(Jinv[1:, 1:] @ J[1:, 1:], np.eye(19))
