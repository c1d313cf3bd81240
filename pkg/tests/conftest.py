import numpy as np
import pytest

from simrerank import DistanceMatrix, EmbeddingSet, Modality, SampleId


def gallery_registry(n, persons=None):
    persons = range(n) if persons is None else persons
    return tuple(SampleId(i, int(p), Modality.RGB) for i, p in enumerate(persons))


def query_registry(n, persons=None):
    persons = range(n) if persons is None else persons
    return tuple(SampleId(i, int(p), Modality.IR) for i, p in enumerate(persons))


def embedding_pair(rng, n_q, n_g, dim=4):
    q = EmbeddingSet(query_registry(n_q), rng.standard_normal((n_q, dim)))
    g = EmbeddingSet(gallery_registry(n_g), rng.standard_normal((n_g, dim)))
    return q, g


def random_instance(rng, n_q, n_g, dim=4):
    """Metric query-gallery and gallery-gallery matrices from random points."""
    from simrerank import pairwise_l2, self_distances

    q, g = embedding_pair(rng, n_q, n_g, dim)
    return pairwise_l2(q, g), self_distances(g)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
