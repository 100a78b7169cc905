import numpy as np
import pytest
from conftest import random_dataset, separable_dataset

from qloan.data import Dataset
from qloan.exceptions import NumericalError, UsageError
from qloan.model import ModelConfig, init_parameters
from qloan.noise import NOISE_KINDS
from qloan.training import (
    TrainConfig,
    compute_metrics,
    evaluate,
    run_noise_sweep,
    run_optimizer_comparison,
    substream,
    train,
)


def small_config(**kw):
    base = dict(model=ModelConfig(n_qubits=2, depth=2), optimizer="adam", iterations=5, seed=3)
    base.update(kw)
    return TrainConfig(**base)


def test_metrics_by_counting():
    m = compute_metrics([1, 0, 0, 1], [0.9, 0.8, 0.1, 0.2])
    assert (m.tp, m.fp, m.tn, m.fn) == (1, 1, 1, 1)
    assert m.precision == m.recall == m.f1 == m.accuracy == 0.5


def test_metrics_perfect():
    m = compute_metrics([1, 0, 1], [1.0, 0.0, 0.7])
    assert m.precision == m.recall == m.f1 == m.accuracy == 1.0


def test_metrics_undefined_when_no_positive_predictions():
    m = compute_metrics([0, 0, 1], [0.1, 0.2, 0.3])
    assert m.precision is None
    assert m.f1 is None
    assert m.recall == 0.0
    assert m.accuracy == pytest.approx(2 / 3)


def test_threshold_tie_goes_to_class_one():
    m = compute_metrics([1, 0], [0.5, 0.5 - 1e-15])
    assert m.tp == 1 and m.fp == 1


def test_loss_history_length_one():
    res = train(separable_dataset(), small_config(iterations=1))
    assert len(res.loss_history) == 1


def test_zero_learning_rate_keeps_loss_constant():
    res = train(separable_dataset(), small_config(optimizer="gradient_descent", lr=0.0, dropout=False))
    assert len(set(res.loss_history)) == 1
    np.testing.assert_array_equal(res.theta, res.theta0)


def test_training_reduces_loss():
    res = train(separable_dataset(), small_config(iterations=100, seed=0))
    model = ModelConfig(n_qubits=2, depth=2)
    ds = separable_dataset()
    assert evaluate(ds, res.theta, model).mse < evaluate(ds, res.theta0, model).mse


def test_training_is_reproducible():
    ds = random_dataset(np.random.default_rng(0), 10, 2)
    a = train(ds, small_config())
    b = train(ds, small_config())
    assert a.loss_history == b.loss_history
    np.testing.assert_array_equal(a.theta, b.theta)


def test_dropout_toggle_does_not_change_initialization():
    ds = separable_dataset()
    a = train(ds, small_config(dropout=True))
    b = train(ds, small_config(dropout=False))
    np.testing.assert_array_equal(a.theta0, b.theta0)


def test_substreams_are_independent():
    assert substream(1, "init").random() != substream(1, "dropout").random()
    assert substream(1, "init").random() == substream(1, "init").random()


def test_non_finite_loss_aborts(monkeypatch):
    import qloan.training as tr

    calls = {"n": 0}

    def broken(ds, theta, model, mask, method):
        calls["n"] += 1
        value = np.nan if calls["n"] == 3 else 0.1
        return value, np.zeros_like(theta)

    monkeypatch.setattr(tr, "cost_and_gradient", broken)
    with pytest.raises(NumericalError) as info:
        train(separable_dataset(), small_config())
    assert info.value.iteration == 2
    assert info.value.theta.shape == (2, 2, 2)


def test_evaluate_rejects_mask():
    model = ModelConfig(n_qubits=2, depth=2)
    with pytest.raises(UsageError):
        evaluate(separable_dataset(), np.zeros(model.param_shape), model, mask=np.ones(model.param_shape, bool))


def test_comparison_report():
    ds = separable_dataset()
    report = run_optimizer_comparison(ds, ds, small_config(iterations=3))
    assert list(report.results) == ["gradient_descent", "adam", "rmsprop", "adagrad"]
    initial = {r.loss_history[0] for r in report.results.values()}
    assert len(initial) == 1
    theta0 = [r.theta0 for r in report.results.values()]
    for t in theta0[1:]:
        np.testing.assert_array_equal(t, theta0[0])
    assert report.best in report.results
    best = report.metrics[report.best]
    assert all(best.mse <= m.mse for m in report.metrics.values())
    assert len(report.table()) == 4


def test_noise_sweep_shape_and_anchors():
    model = ModelConfig(n_qubits=3, depth=2)
    rng = np.random.default_rng(5)
    ds = random_dataset(rng, 12, 3)
    theta = init_parameters(model, rng)
    report = run_noise_sweep(ds, theta, model)
    assert report.accuracy.shape == (6, 11)
    assert report.kinds == list(NOISE_KINDS)
    assert report.p0_max_deviation < 1e-10
    np.testing.assert_array_equal(report.accuracy[:, 0], report.noiseless_accuracy)
    dep = report.kinds.index("depolarizing")
    assert report.accuracy[dep, -1] == pytest.approx(np.mean(ds.y))


def test_noise_sweep_rejects_bad_strength():
    model = ModelConfig(n_qubits=2, depth=1)
    with pytest.raises(ValueError):
        run_noise_sweep(separable_dataset(), np.zeros(model.param_shape), model, grid=[0.0, 1.5])


def test_train_rejects_empty():
    with pytest.raises(ValueError):
        train(Dataset(np.zeros((0, 2)), np.zeros(0)), small_config())
