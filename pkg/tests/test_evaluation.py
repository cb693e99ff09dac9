import math

import numpy as np
import pytest

from errpkit import logreg
from errpkit.errors import InsufficientData, NumericalFailure, PlanMismatch
from errpkit.evaluation import (
    CVResult,
    FoldPlan,
    Hyperparams,
    chance_level,
    corrected_t_test,
    derive_seed,
    make_fold_plan,
    normal_two_sided_p,
    permutation_test,
    run_cv,
    t_two_sided_p,
    _canonical_order,
    _fit_transform,
)
from errpkit.synth import ErpTemplateSpec, generate_epochs

TINY = dict(n_channels=3, fs_hz=64.0, pre_s=0.25, post_s=0.75)


def tiny_dataset(seed=0, n=40, frn=-30.0, noise=6.0):
    labels = np.arange(n) % 2
    spec = ErpTemplateSpec(frn_amp_uv=frn, p3a_amp_uv=2.0, noise_rms_uv=noise)
    return generate_epochs(labels, spec, seed=seed, **TINY)


def synthetic_result(plan, accs, method="riemann"):
    return CVResult(method, np.asarray(accs, dtype=np.float64), plan,
                    np.full(plan.r * plan.k, plan.n_epochs // plan.k))


class TestFoldPlan:
    def test_balanced_300_gives_15_per_class(self):
        labels = np.array([0, 1] * 150)
        plan = make_fold_plan(labels, k=10, r=10, seed=1)
        for rep in range(10):
            for fold in range(10):
                members = labels[plan.assignments[rep] == fold]
                assert members.size == 30
                assert (members == 0).sum() == 15
                assert (members == 1).sum() == 15

    def test_unbalanced_299_within_one_of_perfect(self):
        labels = np.array([0, 1] * 149 + [0])
        plan = make_fold_plan(labels, k=10, r=5, seed=2)
        for rep in range(5):
            sizes = np.bincount(plan.assignments[rep], minlength=10)
            assert sizes.max() - sizes.min() <= 1
            for fold in range(10):
                members = labels[plan.assignments[rep] == fold]
                assert abs((members == 0).sum() - 15.0) <= 1.0
                assert abs((members == 1).sum() - 14.9) <= 1.0

    def test_folds_partition_each_repeat(self):
        labels = np.arange(37) % 2
        plan = make_fold_plan(labels, k=4, r=3, seed=3)
        for rep in range(3):
            assert np.isin(plan.assignments[rep], np.arange(4)).all()
            assert np.bincount(plan.assignments[rep], minlength=4).sum() == 37

    def test_same_seed_identical(self):
        labels = np.arange(50) % 2
        p1 = make_fold_plan(labels, k=5, r=4, seed=9)
        p2 = make_fold_plan(labels, k=5, r=4, seed=9)
        assert np.array_equal(p1.assignments, p2.assignments)
        assert p1.same_as(p2)

    def test_small_class_rejected(self):
        labels = np.array([0] * 30 + [1] * 5)
        with pytest.raises(InsufficientData):
            make_fold_plan(labels, k=10)


class TestRunCV:
    def test_strong_signal_high_accuracy_both_methods(self):
        es = tiny_dataset(seed=4, frn=-40.0, noise=6.0)
        plan = make_fold_plan(es.labels, k=5, r=2, seed=5)
        for method in ("riemann", "benchmark"):
            res = run_cv(es, method, plan)
            assert res.accuracies.size == 10
            assert res.accuracies.mean() >= 0.95

    def test_destroyed_labels_near_chance(self):
        es = tiny_dataset(seed=6, frn=-40.0)
        rng = np.random.default_rng(7)
        shuffled = type(es)(es.data, rng.permutation(es.labels), es.fs_hz,
                            es.t0_offset_s, list(es.channels))
        plan = make_fold_plan(shuffled.labels, k=5, r=4, seed=8)
        res = run_cv(shuffled, "benchmark", plan)
        assert 0.3 <= res.accuracies.mean() <= 0.7

    def test_permuted_storage_with_matching_plan_identical(self):
        es = tiny_dataset(seed=9)
        plan = make_fold_plan(es.labels, k=4, r=2, seed=10)
        base = run_cv(es, "riemann", plan)

        rng = np.random.default_rng(11)
        perm = rng.permutation(len(es))
        es2 = es.subset(perm)
        plan2 = FoldPlan(plan.n_epochs, plan.k, plan.r,
                         plan.assignments[:, perm], plan.seed)
        moved = run_cv(es2, "riemann", plan2)
        assert np.array_equal(base.accuracies, moved.accuracies)

    def test_thread_count_does_not_change_result(self):
        es = tiny_dataset(seed=12)
        plan = make_fold_plan(es.labels, k=4, r=2, seed=13)
        r1 = run_cv(es, "benchmark", plan, n_threads=1)
        r2 = run_cv(es, "benchmark", plan, n_threads=3)
        assert np.array_equal(r1.accuracies, r2.accuracies)

    def test_fold_accuracy_is_pure_function_of_split(self):
        es = tiny_dataset(seed=14)
        plan = make_fold_plan(es.labels, k=4, r=1, seed=15)
        res = run_cv(es, "benchmark", plan)
        hp = Hyperparams()
        for fold in range(4):
            mask = plan.assignments[0] == fold
            xtr, ytr, xte, yte = _fit_transform(
                es, "benchmark", np.flatnonzero(~mask), np.flatnonzero(mask), hp)
            order = _canonical_order(xtr, ytr)
            clf = logreg.fit(xtr[order], ytr[order], reg_c=hp.reg_c,
                             tol=hp.clf_tol, max_iter=hp.clf_max_iter)
            acc = float(np.mean(logreg.predict(clf, xte) == yte))
            assert acc == res.accuracies[fold]

    def test_plan_size_mismatch(self):
        es = tiny_dataset(seed=16)
        plan = make_fold_plan(np.arange(20) % 2, k=4, r=1, seed=17)
        with pytest.raises(PlanMismatch):
            run_cv(es, "benchmark", plan)


class TestCorrectedTTest:
    def test_identical_inputs(self):
        plan = make_fold_plan(np.arange(40) % 2, k=4, r=2, seed=0)
        acc = np.linspace(0.6, 0.9, 8)
        res = corrected_t_test(synthetic_result(plan, acc),
                               synthetic_result(plan, acc, "benchmark"))
        assert res.t == 0.0 and res.p == 1.0
        assert res.df == 7

    def test_hand_computed_four_folds(self):
        # k=4 plan: test/train ratio (1/4)/(3/4) = 1/3; spreadsheet arithmetic below
        plan = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=1)
        a = [0.82, 0.88, 0.75, 0.85]
        b = [0.80, 0.84, 0.76, 0.82]
        d = [x - y for x, y in zip(a, b)]
        n = 4
        mean = sum(d) / n
        var = sum((x - mean) ** 2 for x in d) / (n - 1)
        expected_t = mean / math.sqrt(var * (1.0 / n + 1.0 / 3.0))
        res = corrected_t_test(synthetic_result(plan, a),
                               synthetic_result(plan, b, "benchmark"))
        assert abs(res.t - expected_t) < 1e-12
        assert res.df == 3
        assert abs(res.p - t_two_sided_p(expected_t, 3)) < 1e-15

    def test_scaling_identity_against_plain_paired_t(self):
        rng = np.random.default_rng(2)
        plan = make_fold_plan(np.arange(300) % 2, k=10, r=10, seed=3)
        base = rng.uniform(0.6, 0.9, 100)
        d = rng.normal(0.01, 0.02, 100)
        res = corrected_t_test(synthetic_result(plan, base + d),
                               synthetic_result(plan, base, "benchmark"))
        n = 100
        plain_t = d.mean() / math.sqrt(d.var(ddof=1) / n)
        shrink = math.sqrt((1.0 / n) / (1.0 / n + 1.0 / 9.0))
        assert abs(res.t - plain_t * shrink) < 1e-10

    def test_effect_size_scale(self):
        # mean difference 0.061 with spread chosen to land t near 2.33
        plan = make_fold_plan(np.arange(300) % 2, k=10, r=10, seed=4)
        pattern = np.tile([1.0, -1.0], 50)
        d = 0.061 + pattern * 0.0754 / np.std(pattern, ddof=1)
        base = np.full(100, 0.8)
        res = corrected_t_test(synthetic_result(plan, base + d),
                               synthetic_result(plan, base, "benchmark"))
        assert 2.0 < res.t < 2.6
        assert 0.01 < res.p < 0.05
        assert res.df == 99

    def test_zero_variance_nonzero_mean(self):
        plan = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=5)
        res = corrected_t_test(synthetic_result(plan, [0.9] * 4),
                               synthetic_result(plan, [0.8] * 4, "benchmark"))
        assert res.t == np.inf and res.p == 0.0

    def test_plan_mismatch(self):
        p1 = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=6)
        p2 = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=7)
        with pytest.raises(PlanMismatch):
            corrected_t_test(synthetic_result(p1, [0.8] * 4),
                             synthetic_result(p2, [0.8] * 4, "benchmark"))


class TestPermutationTest:
    @staticmethod
    def pairs_from(diffs, rng, spread=0.05):
        plan = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=8)
        pairs = []
        for d in diffs:
            base = rng.uniform(0.6, 0.8, 4)
            pairs.append((synthetic_result(plan, base + d),
                          synthetic_result(plan, base + rng.normal(0, spread, 4),
                                           "benchmark")))
        return pairs

    def test_statistically_identical_methods_give_large_p(self):
        rng = np.random.default_rng(9)
        pairs = self.pairs_from(np.zeros(7), rng, spread=0.02)
        res = permutation_test(pairs, n_perm=2000, seed=10)
        assert abs(res.z) < 2.5
        assert res.p > 0.01

    def test_argument_swap_negates_exactly(self):
        rng = np.random.default_rng(11)
        pairs = self.pairs_from(np.full(7, 0.06), rng)
        fwd = permutation_test(pairs, n_perm=500, seed=12)
        rev = permutation_test([(b, a) for a, b in pairs], n_perm=500, seed=12)
        assert rev.observed_metric == -fwd.observed_metric
        assert rev.z == -fwd.z
        assert rev.p == fwd.p

    def test_zero_null_variance_is_an_error(self):
        plan = make_fold_plan(np.arange(40) % 2, k=4, r=1, seed=13)
        acc = [0.7, 0.8, 0.75, 0.9]
        pairs = [(synthetic_result(plan, acc),
                  synthetic_result(plan, acc, "benchmark"))] * 3
        with pytest.raises(NumericalFailure):
            permutation_test(pairs, n_perm=200, seed=14)

    def test_relabeling_datasets_barely_moves_p(self):
        rng = np.random.default_rng(15)
        pairs = self.pairs_from(np.full(6, 0.05), rng)
        p1 = permutation_test(pairs, n_perm=4000, seed=16).p
        p2 = permutation_test(pairs[::-1], n_perm=4000, seed=16).p
        assert abs(p1 - p2) < 0.35 * max(p1, p2) + 1e-6


class TestChanceLevel:
    def test_null_dataset_chance_band_and_determinism(self):
        # balanced 300-trial dataset with the labels destroyed: mean ~ 0.5
        labels = np.arange(300) % 2
        spec = ErpTemplateSpec(frn_amp_uv=-20.0, p3a_amp_uv=0.0, noise_rms_uv=8.0)
        es = generate_epochs(labels, spec, seed=17, **TINY)
        ch1 = chance_level(es, plan_seed=18, n_shuffles=30, k=5, r=1)
        assert 0.47 <= ch1.mean_accuracy <= 0.53
        assert ch1.threshold_97_5 >= ch1.mean_accuracy - 1e-6
        assert ch1.per_shuffle_mean_accuracies.size == 30
        ch2 = chance_level(es, plan_seed=18, n_shuffles=30, k=5, r=1)
        assert np.array_equal(ch1.per_shuffle_mean_accuracies,
                              ch2.per_shuffle_mean_accuracies)
        assert ch1.threshold_97_5 == ch2.threshold_97_5


class TestTails:
    def test_normal_two_sided_matches_reference_value(self):
        assert abs(normal_two_sided_p(4.028) - 5.632e-05) < 1e-7

    def test_t_tail_at_zero(self):
        assert t_two_sided_p(0.0, 99) == 1.0

    def test_derive_seed_is_stable_and_order_sensitive(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(2, 1)
