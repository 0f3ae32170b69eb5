import numpy as np

from ccvar.polynomial import SparsePolynomial as P


def x(*I):
    return P.variable(I)


def test_arithmetic_and_cancellation():
    p = x(3, 4) - x(1, 3) * x(2, 4) + x(1, 4) * x(2, 3)
    assert len(p) == 3
    assert p.degree == 2
    assert (p - p).terms == {}
    assert p.coefficient([(1, 3), (2, 4)]) == -1


def test_power_and_subs():
    p = (x(1) + x(2)) ** 2
    assert p.coefficient([(1,), (2,)]) == 2
    q = p.subs({(2,): x(1)})
    assert q == 4 * x(1) ** 2


def test_evaluate_matches_compile(rng):
    p = x(3, 4) - 2 * x(1, 3) * x(2, 4) ** 2 + 5
    pos = {(3, 4): 0, (1, 3): 1, (2, 4): 2}
    X = rng.normal(size=(7, 3))
    f = p.compile(pos)
    direct = np.array([p.evaluate({v: row[k] for v, k in pos.items()}) for row in X])
    assert np.allclose(f(X), direct)


def test_text_and_records():
    p = x(3, 4) - x(1, 3) * x(2, 4) + x(1, 4) * x(2, 3)
    assert p.to_text("x") == "x34 - x13*x24 + x14*x23"
    recs = p.to_records("x")
    assert recs[0] == {"monomial": [[3, 4]], "coefficient": 1, "variable": "x"}
    assert P().to_text() == "0"
