import numpy as np
import pytest

from simrerank import (
    DistanceMatrix,
    EmbeddingSet,
    Modality,
    SampleId,
    SimParams,
    ValidationError,
    check_metric,
    validate_params,
)

from conftest import gallery_registry, query_registry


class TestValidateParams:
    def test_reference_defaults_valid(self):
        p = SimParams(lam=0.01, big_k=9, alpha=0.3, k_q=10, k_g=10, prune_k=9)
        assert validate_params(p, 100) is p

    def test_minimal_boundary_valid(self):
        p = SimParams(lam=0.0, big_k=1, alpha=1.0, k_q=1, k_g=1, prune_k=1)
        assert validate_params(p, 1) is p

    def test_bigk_exceeds_prune_k(self):
        p = SimParams(big_k=10, prune_k=9)
        with pytest.raises(ValidationError, match="bigK exceeds prune_k"):
            validate_params(p, 100)

    def test_prune_k_defaults_to_bigk(self):
        assert SimParams(big_k=7).prune_k == 7
        assert SimParams(big_k=7, prune_k=12).prune_k == 12

    def test_gallery_size_constraints(self):
        with pytest.raises(ValidationError, match="k_q exceeds gallery size"):
            validate_params(SimParams(k_q=11, k_g=5, big_k=1, prune_k=5), 10)
        with pytest.raises(ValidationError, match="k_g exceeds gallery size"):
            validate_params(SimParams(k_q=5, k_g=11, big_k=1, prune_k=5), 10)
        with pytest.raises(ValidationError, match="bigK exceeds gallery size"):
            validate_params(SimParams(k_q=2, k_g=2, big_k=5, prune_k=5), 3)

    def test_range_constraints(self):
        with pytest.raises(ValidationError, match="lambda"):
            validate_params(SimParams(lam=1.5), 100)
        with pytest.raises(ValidationError, match="alpha"):
            validate_params(SimParams(alpha=-0.1), 100)
        with pytest.raises(ValidationError, match="bigK must be positive"):
            validate_params(SimParams(big_k=0, prune_k=3), 100)


class TestEmbeddingSet:
    def test_basic(self):
        es = EmbeddingSet(query_registry(2), np.zeros((2, 3)))
        assert es.dim == 3 and len(es) == 2

    def test_rejects_nan(self):
        with pytest.raises(ValidationError, match="NaN"):
            EmbeddingSet(query_registry(1), np.array([[np.nan, 0.0]]))

    def test_rejects_row_mismatch(self):
        with pytest.raises(ValidationError):
            EmbeddingSet(query_registry(3), np.zeros((2, 2)))

    def test_rejects_duplicate_index(self):
        samples = (
            SampleId(0, 0, Modality.IR),
            SampleId(0, 1, Modality.IR),
        )
        with pytest.raises(ValidationError, match="not unique"):
            EmbeddingSet(samples, np.zeros((2, 2)))

    def test_rejects_mixed_modalities(self):
        samples = (
            SampleId(0, 0, Modality.IR),
            SampleId(1, 1, Modality.RGB),
        )
        with pytest.raises(ValidationError, match="mixed modalities"):
            EmbeddingSet(samples, np.zeros((2, 2)))

    def test_immutable(self):
        es = EmbeddingSet(query_registry(2), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            es.vectors[0, 0] = 1.0

    def test_subset_reindexes(self):
        es = EmbeddingSet(query_registry(4, persons=[7, 8, 9, 10]), np.eye(4))
        sub = es.subset([2, 0])
        assert [s.index for s in sub.samples] == [0, 1]
        assert [s.person for s in sub.samples] == [9, 7]
        assert np.array_equal(sub.vectors, es.vectors[[2, 0]])


class TestDistanceMatrix:
    def test_rejects_negative(self):
        with pytest.raises(ValidationError, match="negative"):
            DistanceMatrix(query_registry(1), gallery_registry(2), [[-1.0, 0.0]])

    def test_rejects_inf(self):
        with pytest.raises(ValidationError, match="NaN or Inf"):
            DistanceMatrix(query_registry(1), gallery_registry(2), [[np.inf, 0.0]])

    def test_square_requires_symmetry_and_zero_diag(self):
        reg = gallery_registry(2)
        DistanceMatrix(reg, reg, [[0.0, 5.0], [5.0, 0.0]])
        with pytest.raises(ValidationError, match="not symmetric"):
            DistanceMatrix(reg, reg, [[0.0, 5.0], [4.0, 0.0]])
        with pytest.raises(ValidationError, match="self-distance diagonal"):
            DistanceMatrix(reg, reg, [[1.0, 5.0], [5.0, 0.0]])

    def test_from_square_cleans_noise(self):
        reg = gallery_registry(2)
        noisy = np.array([[1e-9, 5.0], [5.0 + 1e-7, 0.0]])
        dm = DistanceMatrix.from_square(noisy, reg)
        assert np.array_equal(dm.values, dm.values.T)
        assert dm.values[0, 0] == 0.0

    def test_from_square_rejects_gross_asymmetry(self):
        with pytest.raises(ValidationError, match="not symmetric"):
            DistanceMatrix.from_square([[0.0, 5.0], [4.0, 0.0]], gallery_registry(2))

    def test_check_metric(self, rng):
        from simrerank import self_distances

        g = EmbeddingSet(gallery_registry(12), rng.standard_normal((12, 3)))
        check_metric(self_distances(g))
        reg = gallery_registry(3)
        bad = DistanceMatrix(reg, reg, [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        with pytest.raises(ValidationError, match="triangle"):
            check_metric(bad)
