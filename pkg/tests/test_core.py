from __future__ import annotations

import numpy as np
import pytest

from fraclap.core import FracParams, HalfSpacePoint, QuadResult
from fraclap.errors import DomainError
from fraclap.streams import chunk_generators, chunk_sizes, run_chunks


def test_params_validation():
    FracParams(3, 0.999)
    with pytest.raises(DomainError):
        FracParams(4, 0.5).require_quadrature_dim()
    with pytest.raises(DomainError):
        FracParams(1.5, 0.5)


def test_half_space_point():
    at = HalfSpacePoint([1.0, 2.0], 0.5)
    assert at.dim == 2 and at.x == (1.0, 2.0)
    np.testing.assert_array_equal(at.x_array(), [1.0, 2.0])
    HalfSpacePoint([0.0], 0.0).check(FracParams(1, 0.5), interior=False)
    with pytest.raises(DomainError):
        HalfSpacePoint([0.0], 0.0).check(FracParams(1, 0.5))
    with pytest.raises(DomainError):
        HalfSpacePoint([0.0], -1.0)


def test_quad_result_validation():
    with pytest.raises(ValueError):
        QuadResult(1.0, -1.0, 3)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert sum(chunk_sizes(1_000_001)) == 1_000_001


def test_chunk_streams_are_independent_and_stable():
    a1, b1 = chunk_generators(5, 0, 2)
    a2, _ = chunk_generators(5, 0, 2)
    c, = chunk_generators(5, 1)
    x, y, z = a1.random(4), a2.random(4), b1.random(4)
    assert np.array_equal(x, y)
    assert not np.array_equal(x, z)
    assert not np.array_equal(x, c.random(4))


def test_run_chunks_order_independent_of_threads():
    def work(size, gens, k):
        return gens[0].standard_normal(size) + k

    outs = [np.concatenate(run_chunks(work, 300_000, 1, 1, threads=t)) for t in (1, 3)]
    assert np.array_equal(outs[0], outs[1])
