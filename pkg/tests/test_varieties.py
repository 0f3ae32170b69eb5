from itertools import combinations

import numpy as np
import pytest

from ccvar.errors import ResourceLimitError
from ccvar.expparam import forward
from ccvar.indexing import TruncationSet
from ccvar.ccsystem import embed
from ccvar.varieties import (cc_degree_bound, defining_equations, describe, grassmannian_cc_degree,
                             grassmannian_degree, hypersurface_cc_degree, is_linear,
                             numerical_degree, trace_defect)
from conftest import cgauss


def proper_subsets(d):
    return [s for k in range(1, d) for s in combinations(range(1, d + 1), k)]


def test_linearity_census():
    assert {s for s in proper_subsets(3) if is_linear(TruncationSet(s, 3, 6))} == {(2,), (3,), (2, 3)}
    lin48 = {s for s in proper_subsets(4) if is_linear(TruncationSet(s, 4, 8))}
    assert lin48 == {(3,), (4,), (2, 4), (3, 4), (2, 3, 4)}


def test_descriptor():
    v = describe(TruncationSet((2, 3), 3, 6))
    assert (v.dim, v.codim, v.is_linear, v.defining_levels) == (10, 9, True, (1,))
    assert v.to_dict()["sigma"] == [2, 3]


def test_defining_equations_vanish_on_variety(rng):
    for sigma in [(1,), (1, 2), (1, 3), (2,)]:
        trunc = TruncationSet(sigma, 3, 6)
        eqs = defining_equations(trunc)
        psi = forward(embed(cgauss(rng, len(trunc)), trunc), 3, 6)
        assert np.abs(eqs.evaluate(psi)).max() < 1e-12
        assert len(eqs) == 20 - 1 - len(trunc)
        poly = eqs.polynomials()[0]
        val = poly.evaluate({I: psi[k] for k, I in enumerate(trunc.basis.sets)})
        assert abs(val) < 1e-12


def test_defining_equation_jacobian(rng):
    trunc = TruncationSet((1,), 3, 6)
    eqs = defining_equations(trunc)
    x = cgauss(rng, 20)
    x[0] = 1
    psi = forward(x, 3, 6)
    J = eqs.jacobian(psi)
    h = 1e-6
    for k in (1, 10, 19):
        e = np.zeros(20, dtype=complex)
        e[k] = h
        fd = (eqs.evaluate(psi + e) - eqs.evaluate(psi - e)) / (2 * h)
        assert np.allclose(fd, J[:, k], atol=1e-7)


def test_closed_forms():
    assert [grassmannian_cc_degree(n) for n in range(4, 10)] == [9, 27, 83, 263, 857, 2859]
    assert [hypersurface_cc_degree(d) for d in (2, 3, 4)] == [9, 55, 273]
    assert grassmannian_degree(2, 5) == 5 and grassmannian_degree(3, 6) == 42
    assert cc_degree_bound(TruncationSet((1,), 3, 6), 42) == 420
    assert cc_degree_bound(TruncationSet((1,), 2, 6), 14) == 126
    with pytest.raises(ValueError):
        grassmannian_cc_degree(3)


def test_hypersurface_closed_form_is_bound_minus_d_minus_1():
    for d in (2, 3, 4):
        trunc = TruncationSet(tuple(range(1, d)), d, 2 * d)
        assert hypersurface_cc_degree(d) == cc_degree_bound(trunc, d) - (d - 1)


def test_linear_degree_is_one():
    r = numerical_degree(TruncationSet((2, 3), 3, 6), seed=0)
    assert r.degree == 1 and r.stabilized


def test_trace_test_separates_complete_from_partial_witness_sets():
    r = numerical_degree(TruncationSet((1,), 2, 5), seed=4)
    assert r.degree == 5 and r.evidence["trace_defect"] < 1e-8
    c = cgauss(np.random.default_rng(1), r.offset.size)
    assert trace_defect(r.family, r.points, r.offset, c) < 1e-8
    assert trace_defect(r.family, r.points[:-1], r.offset, c) > 1e-3


@pytest.mark.parametrize("sigma", [(1,), (2,)])
def test_duality_of_degrees(sigma):
    a = numerical_degree(TruncationSet(sigma, 2, 5), seed=3)
    b = numerical_degree(TruncationSet(sigma, 3, 5), seed=3)
    assert a.degree == b.degree
    assert a.stabilized and b.stabilized


def test_resource_cap():
    with pytest.raises(ResourceLimitError):
        numerical_degree(TruncationSet((1,), 4, 9))
