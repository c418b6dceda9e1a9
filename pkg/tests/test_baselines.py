"""Fixed fusion rules, weighted sums, GA weight tuning, baseline protocol."""

import numpy as np
import pytest

from fusebench.baselines import (
    FusionRule,
    GaConfig,
    WeightVector,
    evaluate_baselines,
    evaluate_fused_method,
    fuse_rule,
    fuse_rule_matrix,
    fuse_weighted,
    fuse_weighted_matrix,
    ga_tune_weights,
    geometric_selection_probs,
    rule_scores,
    single_modality_scores,
    weighted_scores,
)
from fusebench.datasets import ScoreDataset, SplitPair, split_dataset
from fusebench.errors import ValidationError
from fusebench.metrics import FusedScores, auc, far_at, frr_at, sweep_roc
from fusebench.normalization import fit_tanh_normalizer


def tiny_ga_config(**overrides):
    base = dict(seed=13, population_size=30, generations=8)
    base.update(overrides)
    return GaConfig(**base)


def normalized_split(ds) -> SplitPair:
    split = split_dataset(ds)
    norm = fit_tanh_normalizer(split.train)
    return SplitPair(
        norm.transform_dataset(split.train),
        norm.transform_dataset(split.validation),
    )


class TestFixedRules:
    matrix = np.array([[0.2, 0.8], [0.5, 0.5]])

    def test_sum(self):
        assert np.array_equal(
            fuse_rule_matrix(FusionRule.SUM, self.matrix), [1.0, 1.0]
        )

    def test_min(self):
        assert np.array_equal(
            fuse_rule_matrix(FusionRule.MIN, self.matrix), [0.2, 0.5]
        )

    def test_mul(self):
        assert np.array_equal(
            fuse_rule_matrix(FusionRule.MUL, self.matrix), [0.2 * 0.8, 0.25]
        )

    def test_scalar_path_matches_matrix_path(self):
        for rule in FusionRule:
            for row in self.matrix:
                assert fuse_rule(rule, row) == fuse_rule_matrix(rule, [row])[0]

    def test_rejects_non_matrix_input(self):
        with pytest.raises(ValidationError):
            fuse_rule_matrix(FusionRule.SUM, np.zeros((2, 0)))

    def test_rule_scores_keeps_class_separation(self, tiny_dataset):
        fs = rule_scores(FusionRule.SUM, tiny_dataset)
        assert np.array_equal(fs.genuine, tiny_dataset.genuine.sum(axis=1))
        assert np.array_equal(fs.impostor, tiny_dataset.impostor.sum(axis=1))


class TestWeightedSum:
    def test_unit_weights_reproduce_the_sum_rule_bitwise(self):
        rng = np.random.default_rng(3)
        matrix = rng.normal(size=(50, 4))
        assert np.array_equal(
            fuse_weighted_matrix(np.ones(4), matrix),
            fuse_rule_matrix(FusionRule.SUM, matrix),
        )

    def test_projection_weights_select_one_column(self):
        matrix = np.array([[0.1, 0.9], [0.4, 0.6]])
        assert np.array_equal(fuse_weighted_matrix([1.0, 0.0], matrix), matrix[:, 0])

    def test_hand_value(self):
        assert fuse_weighted((2.0, -1.0), (0.5, 0.5)) == 0.5

    def test_accepts_weight_vector_objects(self):
        matrix = np.array([[0.25, 0.75]])
        wv = WeightVector((1.0, 1.0))
        assert fuse_weighted_matrix(wv, matrix)[0] == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            fuse_weighted_matrix([1.0, 2.0, 3.0], np.zeros((4, 2)))

    def test_weighted_scores_wraps_both_classes(self, tiny_dataset):
        fs = weighted_scores([0.5, 0.5], tiny_dataset)
        assert np.array_equal(
            fs.genuine, (tiny_dataset.genuine * [0.5, 0.5]).sum(axis=1)
        )


class TestSingleModality:
    def test_projects_one_column(self, tiny_dataset):
        fs = single_modality_scores(1, tiny_dataset)
        assert np.array_equal(fs.genuine, tiny_dataset.genuine[:, 1])
        assert np.array_equal(fs.impostor, tiny_dataset.impostor[:, 1])

    def test_out_of_range(self, tiny_dataset):
        with pytest.raises(ValidationError):
            single_modality_scores(2, tiny_dataset)


class TestWeightVector:
    def test_coerces_to_floats(self):
        wv = WeightVector((1, 2))
        assert wv.weights == (1.0, 2.0)
        assert len(wv) == 2

    def test_default_interval(self):
        assert WeightVector((10.0, -10.0)).weights == (10.0, -10.0)
        with pytest.raises(ValidationError):
            WeightVector((10.5,))

    def test_custom_interval(self):
        assert WeightVector((0.5,), lo=0.0, hi=1.0).weights == (0.5,)
        with pytest.raises(ValidationError):
            WeightVector((-0.5,), lo=0.0, hi=1.0)

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            WeightVector(())


class TestGeometricSelection:
    def test_frozen_three_rank_schedule(self):
        probs = geometric_selection_probs(3, 0.9)
        assert probs == pytest.approx(
            [0.9009009009009009, 0.09009009009009009, 0.009009009009009009],
            rel=1e-15,
        )

    @pytest.mark.parametrize("size", [1, 2, 3, 10, 200, 5000])
    def test_sums_to_one(self, size):
        assert abs(geometric_selection_probs(size, 0.9).sum() - 1.0) <= 1e-12

    def test_strictly_decreasing(self):
        probs = geometric_selection_probs(20, 0.9)
        assert np.all(np.diff(probs) < 0)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_q_validation(self, q):
        with pytest.raises(ValidationError):
            geometric_selection_probs(10, q)

    def test_size_validation(self):
        with pytest.raises(ValidationError):
            geometric_selection_probs(0, 0.9)


class TestGaConfig:
    def test_presets(self):
        paper = GaConfig.paper_scale(seed=1)
        desk = GaConfig.desk_scale(seed=1)
        assert (paper.population_size, paper.generations) == (5000, 500)
        assert (desk.population_size, desk.generations) == (200, 60)
        for cfg in (paper, desk):
            assert cfg.selection_q == 0.9
            assert cfg.elitism
            assert (cfg.weight_lo, cfg.weight_hi) == (-10.0, 10.0)
            assert (cfg.p_crossover, cfg.p_mutation) == (0.8, 0.1)

    @pytest.mark.parametrize(
        "overrides",
        [
            dict(population_size=1),
            dict(generations=0),
            dict(selection_q=0.0),
            dict(selection_q=1.0),
            dict(weight_lo=5.0, weight_hi=5.0),
            dict(p_crossover=1.5),
            dict(p_mutation=-0.2),
        ],
    )
    def test_validation(self, overrides):
        with pytest.raises(ValidationError):
            GaConfig(seed=1, **overrides)


class TestGaTuning:
    def test_never_worse_than_the_sum_rule_on_train(self, make_gaussian):
        ds = make_gaussian(seed=20, modalities=3, genuine=40, impostor=80)
        tuned, _ = ga_tune_weights(ds, tiny_ga_config())
        tuned_eer = sweep_roc(weighted_scores(tuned, ds)).eer
        sum_eer = sweep_roc(rule_scores(FusionRule.SUM, ds)).eer
        assert tuned_eer <= sum_eer + 1e-9

    def test_returned_weights_reproduce_the_reported_best(self, make_gaussian):
        ds = make_gaussian(seed=21, modalities=3, genuine=40, impostor=80)
        tuned, history = ga_tune_weights(ds, tiny_ga_config())
        assert sweep_roc(weighted_scores(tuned, ds)).eer == min(
            st.best for st in history
        )

    def test_elitism_makes_best_non_increasing(self, make_gaussian):
        ds = make_gaussian(seed=22, modalities=3, genuine=40, impostor=80)
        _, history = ga_tune_weights(ds, tiny_ga_config())
        bests = [st.best for st in history]
        assert all(a >= b for a, b in zip(bests, bests[1:]))
        assert [st.generation for st in history] == list(range(len(bests)))
        assert len(history) == tiny_ga_config().generations + 1

    def test_same_seed_reproduces_the_run(self, make_gaussian):
        ds = make_gaussian(seed=23, modalities=3, genuine=40, impostor=80)
        first_w, first_h = ga_tune_weights(ds, tiny_ga_config())
        second_w, second_h = ga_tune_weights(ds, tiny_ga_config())
        assert first_w == second_w
        assert [st.best for st in first_h] == [st.best for st in second_h]
        assert first_h[-1].best_weights == second_h[-1].best_weights

    def test_learns_to_discount_a_noise_modality(self, make_gaussian):
        # modality 3 carries no signal; the sum rule pays for it, the tuned
        # weights can suppress it
        ds = make_gaussian(
            seed=24, modalities=3, genuine=80, impostor=160,
            genuine_means=(1.6, 1.3, 0.0),
        )
        tuned, _ = ga_tune_weights(ds, tiny_ga_config(generations=15))
        tuned_eer = sweep_roc(weighted_scores(tuned, ds)).eer
        sum_eer = sweep_roc(rule_scores(FusionRule.SUM, ds)).eer
        assert tuned_eer < sum_eer

    def test_weights_stay_inside_the_interval(self, make_gaussian):
        ds = make_gaussian(seed=25, modalities=3, genuine=40, impostor=80)
        cfg = tiny_ga_config(weight_lo=0.0, weight_hi=1.0)
        tuned, _ = ga_tune_weights(ds, cfg)
        assert all(0.0 <= w <= 1.0 for w in tuned.weights)
        assert (tuned.lo, tuned.hi) == (0.0, 1.0)

    def test_degenerate_training_data_is_rejected(self):
        flat = ScoreDataset(2, np.full((3, 2), 0.1), np.full((4, 2), 0.1))
        with pytest.raises(ValidationError, match="degenerate"):
            ga_tune_weights(flat, tiny_ga_config())


class TestEvaluateFusedMethod:
    def test_threshold_transfer(self, make_gaussian):
        train = make_gaussian(seed=30, modalities=2, genuine=50, impostor=100)
        validation = make_gaussian(seed=31, modalities=2, genuine=50, impostor=100)
        train_fs = rule_scores(FusionRule.SUM, train)
        validation_fs = rule_scores(FusionRule.SUM, validation)
        row = evaluate_fused_method("sum", train_fs, validation_fs)

        train_curve = sweep_roc(train_fs)
        assert row.method == "sum"
        assert row.train_eer == train_curve.eer
        assert row.train_eer_threshold == train_curve.eer_threshold
        expected_hter = (
            far_at(validation_fs.impostor, train_curve.eer_threshold)
            + frr_at(validation_fs.genuine, train_curve.eer_threshold)
        ) / 2
        assert row.validation_hter == expected_hter
        assert row.validation_auc == auc(sweep_roc(validation_fs))

    def test_identical_splits_transfer_losslessly(self, make_gaussian):
        ds = make_gaussian(seed=32, modalities=2)
        fs = rule_scores(FusionRule.SUM, ds)
        row = evaluate_fused_method("sum", fs, fs)
        assert row.validation_hter == row.train_eer == row.validation_eer


class TestEvaluateBaselines:
    def test_row_catalog_without_ga(self, make_gaussian):
        split = normalized_split(make_gaussian(seed=40, modalities=3))
        report = evaluate_baselines(split)
        assert [r.method for r in report.results] == [
            "s1", "s2", "s3", "sum", "min", "mul",
        ]
        assert report.tuned_weights is None
        assert report.ga_history is None

    def test_row_catalog_with_ga(self, make_gaussian):
        split = normalized_split(make_gaussian(seed=41, modalities=2))
        report = evaluate_baselines(split, ga_config=tiny_ga_config())
        assert [r.method for r in report.results] == [
            "s1", "s2", "sum", "min", "mul", "weight",
        ]
        assert len(report.tuned_weights) == 2
        assert report.ga_history is not None

    def test_all_rates_are_probabilities(self, make_gaussian):
        split = normalized_split(make_gaussian(seed=42, modalities=3))
        report = evaluate_baselines(split, ga_config=tiny_ga_config())
        for row in report.results:
            for value in (
                row.train_eer, row.validation_eer, row.validation_hter,
                row.validation_auc,
            ):
                assert 0.0 <= value <= 1.0
            assert np.all(row.validation_roc.far >= 0.0)
            assert np.all(row.validation_roc.frr <= 1.0)

    def test_tuned_weight_row_beats_or_ties_the_sum_row_on_train(self, make_gaussian):
        split = normalized_split(make_gaussian(seed=43, modalities=3))
        report = evaluate_baselines(split, ga_config=tiny_ga_config())
        by_method = {r.method: r for r in report.results}
        assert by_method["weight"].train_eer <= by_method["sum"].train_eer + 1e-9

    def test_rule_subset_and_no_modalities(self, make_gaussian):
        split = normalized_split(make_gaussian(seed=44, modalities=2))
        report = evaluate_baselines(
            split, rules=(FusionRule.SUM,), include_modalities=False
        )
        assert [r.method for r in report.results] == ["sum"]
