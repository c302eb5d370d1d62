import numpy as np
import pytest

from girgex.classifier import (
    LabeledDataset,
    cross_validate,
    grid_search,
    misclassification_rate,
    standardize,
    train_svm_rbf,
)
from girgex.cleaning import FeatureMatrix


def blobs(n_per_class, sep, rng, dim=2):
    a = rng.normal(0.0, 1.0, (n_per_class, dim))
    b = rng.normal(sep, 1.0, (n_per_class, dim))
    X = np.vstack([a, b])
    y = np.concatenate([np.zeros(n_per_class, int), np.ones(n_per_class, int)])
    return LabeledDataset(X=X, y=y, feature_names=[f"f{i}" for i in range(dim)])


class TestStandardize:
    def test_two_point_column(self):
        train, applied, (mean, std) = standardize(np.array([[1.0], [3.0]]), np.array([[2.0]]))
        np.testing.assert_allclose(train.ravel(), [-1.0, 1.0])
        assert mean[0] == 2.0 and std[0] == 1.0  # population std
        assert applied[0, 0] == 0.0

    def test_constant_column_zeroed(self):
        train, applied, _ = standardize(np.full((4, 1), 5.0), np.array([[7.0]]))
        assert np.all(train == 0.0)
        assert np.all(applied == 0.0)

    def test_train_value_matches(self):
        X = np.array([[1.0], [2.0], [4.0]])
        train, applied, _ = standardize(X, np.array([[2.0]]))
        assert applied[0, 0] == train[1, 0]


class TestTrainSvm:
    def test_separable_blobs_perfect(self):
        rng = np.random.default_rng(0)
        data = blobs(20, 10.0, rng)
        model = train_svm_rbf(data, C_box=1.0, gamma=1.0)
        assert np.mean(model.predict(data.X) == data.y) == 1.0
        assert model.kkt_residual <= 1e-3
        assert model.converged

    def test_single_class_rejected(self):
        X = np.random.default_rng(1).normal(size=(10, 2))
        data = LabeledDataset(X=X, y=np.zeros(10, int), feature_names=["a", "b"])
        with pytest.raises(ValueError, match="single class"):
            train_svm_rbf(data, 1.0, 1.0)

    def test_conflicting_duplicates(self):
        # same point with both labels plus separated scaffolding
        rng = np.random.default_rng(2)
        scaffold = blobs(5, 8.0, rng)
        X = np.vstack([scaffold.X, [[4.0, 4.0]], [[4.0, 4.0]]])
        y = np.concatenate([scaffold.y, [0, 1]])
        data = LabeledDataset(X=X, y=y, feature_names=["a", "b"])
        model = train_svm_rbf(data, 1.0, 1.0)
        dup_pred = model.predict(X[-2:])
        assert np.mean(dup_pred == y[-2:]) <= 0.5

    def test_dual_coefficients_bounded(self):
        rng = np.random.default_rng(3)
        data = blobs(15, 1.0, rng)  # overlapping: some alphas hit the box
        model = train_svm_rbf(data, C_box=2.0, gamma=0.5)
        assert np.all(np.abs(model.dual_coef) <= 2.0 + 1e-9)
        assert model.kkt_residual <= 1e-3


class TestCrossValidate:
    def test_separable_accuracy_one(self):
        rng = np.random.default_rng(4)
        data = blobs(20, 12.0, rng)
        acc = cross_validate(data, 1.0, 1.0, folds=10, rng=np.random.default_rng(5))
        assert acc == 1.0

    def test_noise_near_half(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(200, 3))
        y = np.concatenate([np.zeros(100, int), np.ones(100, int)])
        data = LabeledDataset(X=X, y=y, feature_names=["a", "b", "c"])
        acc = cross_validate(data, 1.0, 0.1, folds=10, rng=np.random.default_rng(7))
        assert 0.35 <= acc <= 0.65

    def test_class_smaller_than_folds(self):
        rng = np.random.default_rng(8)
        data = blobs(5, 3.0, rng)
        with pytest.raises(ValueError, match="fewer"):
            cross_validate(data, 1.0, 1.0, folds=10, rng=np.random.default_rng(9))

    def test_stratified_fold_balance(self):
        from girgex.classifier import _stratified_folds

        y = np.concatenate([np.zeros(23, int), np.ones(23, int)])
        assignment = _stratified_folds(y, 10, np.random.default_rng(10))
        for cls in (0, 1):
            counts = np.bincount(assignment[y == cls], minlength=10)
            assert counts.max() - counts.min() <= 1


class TestGridSearch:
    def test_single_cell(self):
        rng = np.random.default_rng(11)
        data = blobs(15, 6.0, rng)
        (c, g), acc = grid_search(data, [2.0], [0.5], folds=5, rng=np.random.default_rng(12))
        assert (c, g) == (2.0, 0.5)

    def test_separable_reaches_one(self):
        rng = np.random.default_rng(13)
        data = blobs(15, 12.0, rng)
        _, acc = grid_search(
            data, [0.1, 1.0, 10.0], [0.01, 0.1, 1.0], folds=5, rng=np.random.default_rng(14)
        )
        assert acc == 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        data = blobs(12, 2.0, rng)
        a = grid_search(data, [1.0, 4.0], [0.1, 1.0], folds=4, rng=np.random.default_rng(16))
        b = grid_search(data, [1.0, 4.0], [0.1, 1.0], folds=4, rng=np.random.default_rng(16))
        assert a == b

    def test_tie_breaks_toward_small(self):
        # perfectly separable: many cells hit accuracy 1; smallest C then gamma wins
        rng = np.random.default_rng(17)
        data = blobs(15, 14.0, rng)
        (c, g), acc = grid_search(
            data, [0.5, 1.0, 8.0], [0.05, 0.5], folds=5, rng=np.random.default_rng(18)
        )
        assert acc == 1.0
        others = []
        from girgex.classifier import _stratified_folds, _cv_accuracy

        assignment = _stratified_folds(data.y, 5, np.random.default_rng(18))
        for cc in [0.5, 1.0, 8.0]:
            for gg in [0.05, 0.5]:
                others.append(((cc, gg), _cv_accuracy(data, cc, gg, assignment)))
        perfect = [key for key, a in others if a == 1.0]
        assert (c, g) == min(perfect)


class TestInvariances:
    def test_zero_variance_feature_no_effect(self):
        rng = np.random.default_rng(19)
        data = blobs(12, 4.0, rng)
        padded = LabeledDataset(
            X=np.column_stack([data.X, np.full(data.X.shape[0], 3.7)]),
            y=data.y,
            feature_names=data.feature_names + ["const"],
        )
        m1 = train_svm_rbf(data, 1.0, 0.7)
        m2 = train_svm_rbf(padded, 1.0, 0.7)
        np.testing.assert_array_equal(m1.predict(data.X), m2.predict(padded.X))

    def test_label_swap_symmetric_rate(self):
        rng = np.random.default_rng(20)
        n = 12
        real = FeatureMatrix(
            row_labels=[f"r{i}" for i in range(n)],
            columns=["a", "b"],
            values=rng.normal(0, 1, (n, 2)),
        )
        synth = FeatureMatrix(
            row_labels=[f"s{i}" for i in range(n)],
            columns=["a", "b"],
            values=rng.normal(0.8, 1, (n, 2)),
        )
        r1 = misclassification_rate(real, synth, ["a", "b"], np.random.default_rng(21), folds=4)
        r2 = misclassification_rate(synth, real, ["a", "b"], np.random.default_rng(21), folds=4)
        assert r1 == pytest.approx(r2, abs=1e-12)
        assert 0.0 <= r1 <= 1.0


class TestMisclassification:
    def _matrices(self, shift, rng, n=15):
        real = FeatureMatrix(
            row_labels=[f"r{i}" for i in range(n)],
            columns=["a", "b"],
            values=rng.normal(0, 1, (n, 2)),
        )
        synth = FeatureMatrix(
            row_labels=[f"s{i}" for i in range(n)],
            columns=["a", "b"],
            values=rng.normal(0, 1, (n, 2)) + shift,
        )
        return real, synth

    def test_identical_distributions_near_half(self):
        rng = np.random.default_rng(22)
        real, synth = self._matrices(0.0, rng, n=20)
        rate = misclassification_rate(
            real, synth, ["a", "b"], np.random.default_rng(23), folds=5
        )
        assert rate >= 0.25

    def test_shifted_separable_near_zero(self):
        rng = np.random.default_rng(24)
        real, synth = self._matrices(50.0, rng, n=20)
        rate = misclassification_rate(
            real, synth, ["a", "b"], np.random.default_rng(25), folds=5
        )
        assert rate <= 0.05

    def test_unequal_sizes_rejected(self):
        rng = np.random.default_rng(26)
        real, synth = self._matrices(0.0, rng, n=10)
        synth = FeatureMatrix(
            row_labels=synth.row_labels[:-1],
            columns=synth.columns,
            values=synth.values[:-1],
        )
        with pytest.raises(ValueError, match="equal"):
            misclassification_rate(real, synth, ["a"], np.random.default_rng(0))
