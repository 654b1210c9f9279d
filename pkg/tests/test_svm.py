"""Working-set SVM solver on precomputed kernels."""

import numpy as np
import pytest

from foldrep.errors import DataError
from foldrep.kernel import gaussian_kernel, gaussian_rows
from foldrep.svm import (
    SUPPORT_EPS,
    ErrorReport,
    decision_scores,
    evaluate,
    load_model,
    predict,
    save_model,
    train,
)

from oracles import svm_dual_bruteforce

XOR_POINTS = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_LABELS = np.array([1.0, 1.0, -1.0, -1.0])


def blob_data(rng, n_per_class=20, gap=4.0):
    a = rng.normal(size=(n_per_class, 2)) * 0.5 + [gap / 2, 0.0]
    b = rng.normal(size=(n_per_class, 2)) * 0.5 + [-gap / 2, 0.0]
    x = np.vstack([a, b])
    y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return x, y


def full_alpha(model):
    alpha = np.zeros(model.n_train)
    alpha[model.support] = np.abs(model.dual_coef)
    return alpha


def signed_coef(model):
    coef = np.zeros(model.n_train)
    coef[model.support] = model.dual_coef
    return coef


class TestXorProblem:
    def test_objective_matches_quadratic_programming_oracle(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        oracle_obj, oracle_alpha = svm_dual_bruteforce(
            kernel.values, XOR_LABELS, 10.0)
        assert abs(model.objective - oracle_obj) <= 1e-6
        # coefficients only converge at the working tolerance, the
        # objective is what the contract pins down
        assert np.abs(full_alpha(model) - oracle_alpha).max() <= 2e-3
        assert not model.non_convergent

    def test_zero_training_errors(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        assert np.array_equal(predict(model, kernel.values), XOR_LABELS)


class TestSolverContract:
    def test_equality_constraint_holds(self):
        rng = np.random.default_rng(109)
        for _ in range(10):
            x, y = blob_data(rng, n_per_class=12, gap=1.5)
            kernel = gaussian_kernel(x, sigma=1.2)
            model = train(kernel, y, c=3.0)
            assert abs(signed_coef(model).sum()) <= 1e-8

    def test_kkt_conditions_at_tolerance(self):
        rng = np.random.default_rng(113)
        x, y = blob_data(rng, n_per_class=15, gap=2.0)
        kernel = gaussian_kernel(x, sigma=1.0)
        tol = 1e-3
        model = train(kernel, y, c=2.0, tol=tol)
        alpha = full_alpha(model)
        scores = decision_scores(model, kernel.values)
        margins = y * scores
        for i in range(y.size):
            if alpha[i] <= SUPPORT_EPS:
                assert margins[i] >= 1.0 - tol - 1e-9
            elif alpha[i] >= 2.0 - 1e-9:
                assert margins[i] <= 1.0 + tol + 1e-9
            else:
                assert abs(margins[i] - 1.0) <= tol + 1e-9

    def test_separable_blobs_have_zero_training_error(self):
        rng = np.random.default_rng(127)
        x, y = blob_data(rng, n_per_class=20, gap=4.0)
        linear = x @ x.T
        model = train(linear, y, c=2.0)
        report = evaluate(model, linear, y)
        assert report.global_errors == 0

    def test_kernel_scaling_against_inverse_c_scaling(self):
        # scaling the kernel by f and C by 1/f keeps the optimum decision
        # function; solved at finite tolerance this is a label-level
        # invariance on the training points
        rng = np.random.default_rng(131)
        x, y = blob_data(rng, n_per_class=10, gap=1.0)
        kernel = gaussian_kernel(x, sigma=1.0)
        factor = 7.0
        base = train(kernel, y, c=2.0)
        scaled = train(kernel.values * factor, y, c=2.0 / factor)
        assert np.array_equal(predict(base, kernel.values),
                              predict(scaled, kernel.values * factor))
        assert np.abs(decision_scores(base, kernel.values)
                      - decision_scores(scaled, kernel.values * factor)).max() <= 5e-3

    def test_duplication_invariance_of_the_decision_function(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        doubled_points = np.vstack([XOR_POINTS, XOR_POINTS])
        doubled = gaussian_kernel(doubled_points, sigma=1.0)
        twin = train(doubled, np.concatenate([XOR_LABELS, XOR_LABELS]), c=10.0)
        grid = np.array([[u, v] for u in np.linspace(-0.5, 1.5, 9)
                         for v in np.linspace(-0.5, 1.5, 9)])
        rows = gaussian_rows(grid, XOR_POINTS, sigma=1.0)
        rows_doubled = gaussian_rows(grid, doubled_points, sigma=1.0)
        assert np.abs(decision_scores(model, rows)
                      - decision_scores(twin, rows_doubled)).max() <= 1e-6

    def test_iteration_cap_flags_instead_of_raising(self):
        rng = np.random.default_rng(137)
        x, y = blob_data(rng, n_per_class=15, gap=0.2)
        kernel = gaussian_kernel(x, sigma=0.8)
        model = train(kernel, y, c=100.0, max_iter=3)
        assert model.non_convergent

    def test_class_weights_shift_the_error_balance(self):
        rng = np.random.default_rng(139)
        # overlapping classes: weighting one class makes its errors costly
        x, y = blob_data(rng, n_per_class=25, gap=0.8)
        kernel = gaussian_kernel(x, sigma=1.5)
        plain = evaluate(train(kernel, y, c=1.0), kernel.values, y)
        heavy = evaluate(train(kernel, y, c=1.0, class_weights=(50.0, 1.0)),
                         kernel.values, y)
        assert heavy.errors_pos <= plain.errors_pos
        with pytest.raises(DataError):
            train(kernel, y, class_weights=(0.0, 1.0))

    def test_input_validation(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        with pytest.raises(DataError):
            train(kernel, np.array([1.0, 2.0, -1.0, -1.0]))
        with pytest.raises(DataError):
            train(kernel, np.ones(4))
        with pytest.raises(DataError):
            train(kernel, XOR_LABELS[:3])
        with pytest.raises(DataError):
            train(np.zeros((3, 4)), np.array([1.0, -1.0, 1.0]))
        with pytest.raises(DataError):
            train(kernel, XOR_LABELS, c=0.0)
        with pytest.raises(DataError):
            train(kernel, XOR_LABELS, tol=0.0)


class TestEvaluation:
    def test_error_report_counts_per_class(self):
        report = ErrorReport(errors_pos=1, total_pos=4, errors_neg=2, total_neg=6)
        assert report.rate_pos == 0.25
        assert report.rate_neg == pytest.approx(1.0 / 3.0)
        assert report.global_errors == 3
        assert report.global_rate == 0.3

    def test_error_report_published_shape(self):
        # 33 errors of 110 soluble, 232 of 1521 insoluble
        report = ErrorReport(errors_pos=33, total_pos=110,
                             errors_neg=232, total_neg=1521)
        assert report.rate_pos == pytest.approx(0.3000, abs=1e-4)
        assert report.rate_neg == pytest.approx(0.1525, abs=1e-4)
        assert report.global_rate == pytest.approx(0.1624, abs=1e-4)

    def test_all_zero_kernel_row_predicts_the_bias_sign(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        label = predict(model, np.zeros((1, 4)))[0]
        assert label == (1.0 if model.bias >= 0 else -1.0)

    def test_evaluate_against_known_predictions(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        report = evaluate(model, kernel.values, XOR_LABELS)
        assert (report.errors_pos, report.errors_neg) == (0, 0)
        assert (report.total_pos, report.total_neg) == (2, 2)

    def test_empty_test_set_is_an_error(self):
        kernel = gaussian_kernel(XOR_POINTS, sigma=1.0)
        model = train(kernel, XOR_LABELS, c=10.0)
        with pytest.raises(DataError):
            evaluate(model, np.zeros((0, 4)), np.array([]))


class TestPersistence:
    def test_roundtrip_preserves_the_decision_function(self, tmp_path):
        rng = np.random.default_rng(149)
        x, y = blob_data(rng, n_per_class=10, gap=2.0)
        kernel = gaussian_kernel(x, sigma=1.0)
        model = train(kernel, y, c=2.0)
        path = tmp_path / "model.json"
        save_model(path, model)
        back = load_model(path)
        assert np.array_equal(back.dual_coef, model.dual_coef)
        assert np.array_equal(back.support, model.support)
        assert back.bias == model.bias
        assert back.kernel_fingerprint == model.kernel_fingerprint
        probe = gaussian_rows(rng.normal(size=(5, 2)), x, sigma=1.0)
        assert np.array_equal(predict(back, probe), predict(model, probe))

    def test_malformed_model_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"bias": 0.0}')
        with pytest.raises(DataError):
            load_model(path)
