"""tanh score normalization: fitted statistics, mapping properties."""

import math

import numpy as np
import pytest

from fusebench.datasets import ScoreDataset
from fusebench.errors import DegenerateModalityError, ValidationError
from fusebench.normalization import (
    TanhNormalizer,
    fit_tanh_normalizer,
    normalize,
    normalizer_from_json,
    normalizer_to_json,
)
from oracles import naive_population_std, naive_tanh_norm


def dataset_with_genuine(columns):
    """2-modality dataset whose genuine block is given per modality."""
    genuine = np.column_stack(columns)
    impostor = np.zeros_like(genuine) - 1.0
    return ScoreDataset(genuine.shape[1], genuine, impostor)


class TestFit:
    def test_two_point_statistics(self):
        ds = dataset_with_genuine([[0.0, 2.0], [5.0, 5.0 + 2.0]])
        norm = fit_tanh_normalizer(ds)
        assert norm.means == (1.0, 6.0)
        assert norm.stddevs == (1.0, 1.0)

    def test_four_point_statistics(self):
        ds = dataset_with_genuine([[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]])
        norm = fit_tanh_normalizer(ds)
        assert norm.means[0] == 2.5
        # population (divide by N) standard deviation: sqrt(1.25)
        np.testing.assert_allclose(norm.stddevs[0], math.sqrt(1.25), rtol=0, atol=0)
        np.testing.assert_allclose(
            norm.stddevs[0], naive_population_std([1.0, 2.0, 3.0, 4.0]), atol=1e-15
        )

    def test_constant_modality_rejected(self):
        ds = dataset_with_genuine([[1.0, 2.0, 3.0], [7.0, 7.0, 7.0]])
        with pytest.raises(DegenerateModalityError, match="modality 1"):
            fit_tanh_normalizer(ds)

    def test_single_genuine_tuple_rejected(self):
        ds = ScoreDataset(2, [[0.5, 0.5]], [[0.0, 0.0], [0.1, 0.1]])
        with pytest.raises(ValidationError, match="two genuine"):
            fit_tanh_normalizer(ds)

    def test_impostors_never_consulted(self, make_gaussian):
        base = make_gaussian(seed=8, genuine=40, impostor=40)
        shifted = ScoreDataset(
            base.modality_count, base.genuine, base.impostor + 1000.0
        )
        a = fit_tanh_normalizer(base)
        b = fit_tanh_normalizer(shifted)
        assert a.means == b.means
        assert a.stddevs == b.stddevs


class TestMapping:
    def test_mean_maps_to_half(self):
        norm = TanhNormalizer((3.0, -2.0), (1.0, 5.0))
        out = norm.transform_matrix([[3.0, -2.0]])
        np.testing.assert_array_equal(out, [[0.5, 0.5]])

    def test_hundred_sigma_value(self):
        """One unit inside the tanh: 0.5 * (tanh(1) + 1)."""
        norm = TanhNormalizer((0.0,) * 2, (1.0,) * 2)
        out = norm.transform_matrix([[100.0, -100.0]])
        np.testing.assert_allclose(out[0, 0], 0.8807970779778823, atol=1e-15)
        np.testing.assert_allclose(out[0, 1], 0.1192029220221177, atol=1e-15)
        np.testing.assert_allclose(out[0, 0], naive_tanh_norm(100.0, 0.0, 1.0),
                                   atol=1e-15)

    def test_scalar_normalize_matches_matrix(self):
        norm = TanhNormalizer((2.0, -1.0), (3.0, 0.5))
        for m, score in ((0, 4.7), (1, -3.3)):
            expected = norm.transform_matrix([[score, score]])[0, m]
            assert normalize(score, m, norm) == expected

    def test_range_open_unit_interval(self):
        norm = TanhNormalizer((0.0,), (1.0,))
        scores = np.linspace(-400.0, 400.0, 801).reshape(-1, 1)
        out = norm.transform_matrix(scores)
        assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_strictly_monotone(self):
        norm = TanhNormalizer((5.0,), (2.0,))
        scores = np.linspace(-300.0, 300.0, 2001).reshape(-1, 1)
        out = norm.transform_matrix(scores).ravel()
        assert np.all(np.diff(out) > 0.0)

    def test_symmetry_about_mean(self):
        norm = TanhNormalizer((7.0,), (3.0,))
        d = np.linspace(0.0, 900.0, 501)
        upper = norm.transform_matrix((7.0 + d).reshape(-1, 1)).ravel()
        lower = norm.transform_matrix((7.0 - d).reshape(-1, 1)).ravel()
        np.testing.assert_allclose(upper + lower, 1.0, rtol=0, atol=1e-12)

    def test_modality_index_out_of_range(self):
        norm = TanhNormalizer((0.0,), (1.0,))
        with pytest.raises(ValidationError):
            normalize(1.0, 1, norm)


class TestTransformDataset:
    def test_all_means_become_half(self):
        norm = TanhNormalizer((1.0, 2.0), (1.0, 1.0))
        ds = ScoreDataset(2, [[1.0, 2.0], [1.0, 2.0]], [[1.0, 2.0]])
        out = norm.transform_dataset(ds)
        np.testing.assert_array_equal(out.genuine, 0.5)
        np.testing.assert_array_equal(out.impostor, 0.5)

    def test_labels_order_and_name_preserved(self, make_gaussian):
        ds = make_gaussian(seed=4, genuine=10, impostor=15, name="keepme")
        norm = fit_tanh_normalizer(ds)
        out = norm.transform_dataset(ds)
        assert out.name == "keepme"
        assert out.genuine_count == 10 and out.impostor_count == 15
        # order preserved: monotone map keeps per-column ranking
        for m in range(ds.modality_count):
            assert np.array_equal(np.argsort(out.genuine[:, m], kind="stable"),
                                  np.argsort(ds.genuine[:, m], kind="stable"))

    def test_not_idempotent(self, make_gaussian):
        """Re-applying a fitted map uses stale statistics and changes values."""
        ds = make_gaussian(seed=5)
        norm = fit_tanh_normalizer(ds)
        once = norm.transform_dataset(ds)
        twice = norm.transform_dataset(once)
        assert not np.array_equal(once.genuine, twice.genuine)

    def test_modality_mismatch(self):
        norm = TanhNormalizer((0.0,), (1.0,))
        with pytest.raises(ValidationError, match="expected"):
            norm.transform_matrix(np.zeros((3, 2)))


class TestParamsDocument:
    def test_json_round_trip(self):
        norm = TanhNormalizer((1.5, -2.25), (0.75, 3.5))
        again = normalizer_from_json(normalizer_to_json(norm))
        assert again.means == norm.means
        assert again.stddevs == norm.stddevs

    def test_bad_document_rejected(self):
        with pytest.raises(ValidationError):
            normalizer_from_json("{\"means\": [0.0]}")

    def test_inconsistent_modality_count_rejected(self):
        text = "{\"means\": [0.0], \"stddevs\": [1.0], \"modalities\": 3}"
        with pytest.raises(ValidationError, match="declares 3"):
            normalizer_from_json(text)

    def test_zero_stddev_rejected(self):
        with pytest.raises(DegenerateModalityError):
            TanhNormalizer((0.0,), (0.0,))
