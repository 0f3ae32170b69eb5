"""Shared fixtures: monodromy runs are expensive, so each case is solved once per session."""
from __future__ import annotations

import numpy as np
import pytest

from ccvar.homotopy import StoppingRule, monodromy_solve
from ccvar.indexing import TruncationSet

_GENERIC = {}


def generic_start(sigma, d, n, formulation="new", seed=1, quiet_loops=10):
    """Monodromy solution set for a random complex H, memoized per session."""
    key = (tuple(sigma), d, n, formulation, seed, quiet_loops)
    if key not in _GENERIC:
        trunc = TruncationSet(tuple(sigma), d, n)
        _GENERIC[key] = monodromy_solve(trunc, seed=seed, formulation=formulation,
                                        stop=StoppingRule(quiet_loops=quiet_loops))
    return _GENERIC[key]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cgauss(rng, *shape):
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def random_amplitudes(rng, d, n, batch=()):
    from ccvar.indexing import orbital_basis
    N = orbital_basis(d, n).size
    x = cgauss(rng, *batch, N)
    x[..., 0] = 1
    return x
