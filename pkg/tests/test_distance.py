import itertools
import math

import numpy as np
import pytest

from simrerank import (
    EmbeddingSet,
    ValidationError,
    pairwise_l2,
    self_distances,
    unit_normalize,
)

from conftest import gallery_registry, query_registry


def naive_l2(x, y):
    """Scalar triple-loop reference."""
    out = np.zeros((len(x), len(y)))
    for i in range(len(x)):
        for j in range(len(y)):
            acc = 0.0
            for d in range(x.shape[1]):
                acc += (x[i, d] - y[j, d]) ** 2
            out[i, j] = math.sqrt(acc)
    return out


def test_identical_points():
    a = EmbeddingSet(query_registry(1), [[0.0, 0.0]])
    b = EmbeddingSet(gallery_registry(1), [[0.0, 0.0]])
    assert pairwise_l2(a, b).values[0, 0] == 0.0


def test_three_four_five():
    a = EmbeddingSet(query_registry(1), [[0.0, 0.0]])
    b = EmbeddingSet(gallery_registry(1), [[3.0, 4.0]])
    assert pairwise_l2(a, b).values[0, 0] == 5.0


def test_matches_triple_loop_oracle(rng):
    x = rng.standard_normal((4, 3))
    y = rng.standard_normal((5, 3))
    a = EmbeddingSet(query_registry(4), x)
    b = EmbeddingSet(gallery_registry(5), y)
    got = pairwise_l2(a, b).values
    want = naive_l2(x, y)
    assert np.allclose(got, want, rtol=1e-6, atol=0)


def test_dimension_mismatch():
    a = EmbeddingSet(query_registry(1), [[0.0, 0.0]])
    b = EmbeddingSet(gallery_registry(1), [[1.0, 2.0, 3.0]])
    with pytest.raises(ValidationError, match="dimension mismatch"):
        pairwise_l2(a, b)


def test_self_single_sample():
    g = EmbeddingSet(gallery_registry(1), [[1.0, 2.0]])
    assert self_distances(g).values[0, 0] == 0.0


def test_self_two_samples_exact():
    g = EmbeddingSet(gallery_registry(2), [[0.0, 0.0], [3.0, 4.0]])
    assert np.array_equal(self_distances(g).values, [[0.0, 5.0], [5.0, 0.0]])


def test_self_symmetry_exact(rng):
    g = EmbeddingSet(gallery_registry(20), rng.standard_normal((20, 6)))
    v = self_distances(g).values
    assert np.array_equal(v, v.T)
    assert np.all(np.diagonal(v) == 0.0)


def test_self_triangle_inequality_exhaustive(rng):
    g = EmbeddingSet(gallery_registry(20), rng.standard_normal((20, 6)))
    v = self_distances(g).values
    for i, j, t in itertools.product(range(20), repeat=3):
        assert v[i, j] + v[j, t] >= v[i, t] - 1e-6


def test_permutation_equivariance(rng):
    x = rng.standard_normal((6, 3))
    y = rng.standard_normal((4, 3))
    perm = rng.permutation(6)
    a = EmbeddingSet(query_registry(6), x)
    ap = EmbeddingSet(query_registry(6), x[perm])
    b = EmbeddingSet(gallery_registry(4), y)
    assert np.array_equal(pairwise_l2(ap, b).values, pairwise_l2(a, b).values[perm])


def test_unit_normalize(rng):
    g = EmbeddingSet(gallery_registry(5), rng.standard_normal((5, 3)) * 7.0)
    normed = unit_normalize(g)
    assert np.allclose(np.linalg.norm(normed.vectors, axis=1), 1.0)
    zero = EmbeddingSet(gallery_registry(1), [[0.0, 0.0]])
    assert np.array_equal(unit_normalize(zero).vectors, zero.vectors)
