import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitlbi import Dataset, Family, Hyperparams, SplitOperator, build_lattice
from splitlbi.evaluation import (
    FoldPlan,
    classify_metrics,
    cross_validate,
    mdc,
    predict_labels,
    support_auc,
)


class TestClassifyMetrics:
    def test_perfect_prediction(self):
        y = np.array([1.0, -1.0, 1.0, -1.0])
        m = classify_metrics(y, y * 2.5)
        assert (m.acc, m.sen, m.spe) == (1.0, 1.0, 1.0)

    def test_all_positive_predictions_on_balanced_labels(self):
        y = np.array([1.0, -1.0] * 10)
        m = classify_metrics(y, np.ones(20))
        assert m.acc == 0.5 and m.sen == 0.0 and m.spe == 1.0

    def test_tie_at_zero_goes_positive(self):
        m = classify_metrics(np.array([1.0, -1.0]), np.zeros(2))
        assert m.acc == 0.5 and m.spe == 1.0 and m.sen == 0.0

    def test_matches_confusion_matrix_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.choice([-1.0, 1.0], size=50)
            mu = rng.standard_normal(50)
            m = classify_metrics(y, mu)
            yhat = np.where(mu >= 0, 1.0, -1.0)
            tp = np.sum((yhat == 1) & (y == 1))
            tn = np.sum((yhat == -1) & (y == -1))
            assert m.acc == pytest.approx((tp + tn) / 50, abs=1e-15)
            assert m.sen == pytest.approx(tn / np.sum(y == -1), abs=1e-15)
            assert m.spe == pytest.approx(tp / np.sum(y == 1), abs=1e-15)

    def test_accuracy_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            y = rng.choice([-1.0, 1.0], size=37)
            m = classify_metrics(y, rng.standard_normal(37))
            n_neg, n_pos = np.sum(y == -1), np.sum(y == 1)
            assert 37 * m.acc == pytest.approx(n_neg * m.sen + n_pos * m.spe, abs=1e-9)

    def test_absent_class_flags(self):
        m = classify_metrics(np.ones(4), np.ones(4))
        assert m.spe == 1.0 and m.spe_defined
        assert not m.sen_defined and np.isnan(m.sen)

    def test_validation(self):
        with pytest.raises(ValueError):
            classify_metrics(np.array([1.0, 0.0]), np.zeros(2))
        with pytest.raises(ValueError):
            classify_metrics(np.ones(3), np.zeros(2))


class TestSupportAuc:
    def test_indicator_scores_give_one(self):
        scores = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
        assert support_auc(scores, [1, 3]) == 1.0

    def test_constant_scores_give_half(self):
        assert support_auc(np.ones(6), [0, 1]) == 0.5

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        scores = rng.standard_normal(30)
        supp = rng.choice(30, size=8, replace=False)
        base = support_auc(scores, supp)
        assert support_auc(np.sign(scores) * np.abs(scores) ** 3, supp) == pytest.approx(base)
        assert support_auc(scores * 7.5, supp) == pytest.approx(base)

    def test_empty_or_full_support_rejected(self):
        with pytest.raises(ValueError):
            support_auc(np.ones(4), [])
        with pytest.raises(ValueError):
            support_auc(np.ones(4), [0, 1, 2, 3])


class TestMdc:
    def test_identical_supports(self):
        assert mdc([{1, 2, 3}, {1, 2, 3}]) == 1.0

    def test_worked_example(self):
        assert mdc([{1, 2}, {2, 3}]) == pytest.approx(0.5)

    def test_disjoint(self):
        assert mdc([{1}, {2}, {3}]) == 0.0

    def test_all_empty_flags_and_returns_zero(self):
        with pytest.warns(UserWarning, match="empty"):
            assert mdc([set(), set()]) == 0.0

    def test_needs_two(self):
        with pytest.raises(ValueError):
            mdc([{1}])

    @given(
        st.lists(
            st.sets(st.integers(0, 15), max_size=10), min_size=2, max_size=6
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_range_and_identity_condition(self, supports):
        if all(len(s) == 0 for s in supports):
            return
        val = mdc(supports)
        assert 0.0 <= val <= 1.0
        if val == 1.0:
            assert all(s == supports[0] for s in supports) and supports[0]


class TestFoldPlan:
    def test_partition_and_stratification(self):
        rng = np.random.default_rng(3)
        y = np.concatenate([np.ones(40), -np.ones(24)])
        rng.shuffle(y)
        plan = FoldPlan.stratified(y, K=8, seed=11)
        assert sorted(np.concatenate([plan.split(k)[1] for k in range(8)]).tolist()) == list(range(64))
        for k in range(8):
            _, val = plan.split(k)
            pos = np.sum(y[val] == 1)
            assert abs(pos - 40 / 8) <= 1
        assert len({tuple(plan.split(k)[1].tolist()) for k in range(8)}) == 8

    def test_single_class_fold_rejected(self):
        y = np.concatenate([np.ones(12), -np.ones(2)])
        with pytest.raises(ValueError, match="single class"):
            FoldPlan.stratified(y, K=4, seed=0)

    def test_deterministic(self):
        y = np.array([1.0, -1.0] * 20)
        a = FoldPlan.stratified(y, K=4, seed=5)
        b = FoldPlan.stratified(y, K=4, seed=5)
        assert np.array_equal(a.assignments, b.assignments)

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            FoldPlan.stratified(np.array([0.0, 1.0, 1.0, -1.0]), K=2, seed=0)


def cv_instance(seed=0, n=80):
    rng = np.random.default_rng(seed)
    graph = build_lattice((2, 3))
    op = SplitOperator(graph, rho=0.5)
    X = rng.standard_normal((n, graph.p))
    beta_star = np.zeros(graph.p)
    beta_star[:2] = 2.0
    prob = 1.0 / (1.0 + np.exp(-(X @ beta_star)))
    y = np.where(rng.random(n) < prob, 1.0, -1.0)
    return Dataset(X, y), op


class TestCrossValidate:
    def test_singleton_grid_returns_that_hyper(self):
        data, op = cv_instance()
        plan = FoldPlan.stratified(data.y, K=4, seed=1)
        hyper = Hyperparams(kappa=5.0, nu=0.5, alpha=1e-2, max_iters=2000, record_every=500)
        result = cross_validate(data, Family.LOGISTIC, op, [hyper], plan)
        assert result.best_hyper is hyper
        assert result.best_t in {0, 500, 1000, 1500, 2000}
        assert len(result.fold_metrics) == 4
        assert len(result.fold_supports) == 4
        assert 0.0 <= result.mdc_les <= 1.0

    def test_deterministic_and_thread_invariant(self):
        data, op = cv_instance(seed=7)
        plan = FoldPlan.stratified(data.y, K=3, seed=2)
        grid = [
            Hyperparams(kappa=5.0, nu=nu, alpha=1e-2, max_iters=1500, record_every=500)
            for nu in (0.5, 2.0)
        ]
        a = cross_validate(data, Family.LOGISTIC, op, grid, plan)
        b = cross_validate(data, Family.LOGISTIC, op, grid, plan)
        c = cross_validate(data, Family.LOGISTIC, op, grid, plan, threads=2)
        for other in (b, c):
            assert a.best_hyper == other.best_hyper
            assert a.best_t == other.best_t
            assert a.mean_acc_table == other.mean_acc_table
            assert a.mdc_les == other.mdc_les

    def test_rho_override_enters_tie_break(self):
        data, op = cv_instance(seed=9)
        plan = FoldPlan.stratified(data.y, K=3, seed=3)
        # identical dynamics with rho = op.rho; the duplicate differs only in label
        grid = [
            Hyperparams(kappa=5.0, nu=0.5, alpha=1e-2, max_iters=1000, record_every=500, rho=0.9),
            Hyperparams(kappa=5.0, nu=0.5, alpha=1e-2, max_iters=1000, record_every=500, rho=0.5),
        ]
        result = cross_validate(data, Family.LOGISTIC, op, grid, plan)
        assert result.best_hyper.rho in (0.5, 0.9)

    def test_empty_grid_rejected(self):
        data, op = cv_instance()
        plan = FoldPlan.stratified(data.y, K=3, seed=1)
        with pytest.raises(ValueError, match="empty"):
            cross_validate(data, Family.LOGISTIC, op, [], plan)


def test_predict_labels_rule():
    np.testing.assert_array_equal(
        predict_labels([-0.1, 0.0, 2.0]), np.array([-1.0, 1.0, 1.0])
    )
