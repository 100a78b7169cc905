"""MSE cost and its parameter-shift gradient.

Each shifted expectation ``<Z>(theta_k +/- pi/2)`` is evaluated exactly. The
default ``"heisenberg"`` route stores the forward state in front of every
parameterized gate and the observable propagated backwards through the rest
of the circuit, so a shifted circuit costs one rotation plus one quadratic
form instead of a full re-simulation. ``"direct"`` re-simulates every shifted
circuit from scratch.
"""
from __future__ import annotations

import numpy as np

from .model import (
    ModelConfig,
    _check_theta,
    effective_angles,
    encode,
    layer_gates,
    predict_batch,
)
from .state import _apply_1q, apply_gate, rotation_matrix, z_signs

SHIFT = np.pi / 2


def _check_dataset(dataset) -> None:
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if dataset.y is None:
        raise ValueError("dataset has no labels")
    if not np.all((dataset.y == 0) | (dataset.y == 1)):
        raise ValueError("labels must be 0 or 1")


def cost(dataset, theta, config: ModelConfig, mask=None) -> float:
    """Mean squared error between labels and predictions under ``mask``."""
    _check_dataset(dataset)
    preds = predict_batch(dataset.X, theta, config, mask)
    return float(np.mean((dataset.y - preds) ** 2))


def _dense(gate, n_qubits):
    eye = np.eye(1 << n_qubits, dtype=complex)
    return apply_gate(eye, gate).T


def _shifted_expectations_heisenberg(X, angles, config):
    n = config.n_qubits
    psi = encode(X)
    ops = [op for d in range(config.depth) for op in layer_gates(angles, d)]

    before = {}
    for gate, index in ops:
        if index is not None:
            before[index] = psi
        psi = apply_gate(psi, gate)
    pred = (1.0 - np.real(np.abs(psi) ** 2 @ z_signs(n, config.readout_qubit))) / 2.0

    observable = np.diag(z_signs(n, config.readout_qubit)).astype(complex)
    after = {}
    for gate, index in reversed(ops):
        if index is not None:
            after[index] = observable
        u = _dense(gate, n)
        observable = u.conj().T @ observable @ u
    return pred, before, after


def _expectation(states, observable):
    return np.real(np.einsum("bi,bi->b", states.conj(), states @ observable.T))


def prediction_gradients(X, theta, config: ModelConfig, mask=None, method: str = "heisenberg"):
    """Return ``(predictions, dpred)`` where ``dpred`` has shape ``(n_samples,) + theta.shape``."""
    theta = _check_theta(theta, config.n_qubits)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    angles = effective_angles(theta, mask)
    keep = np.ones(theta.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    dpred = np.zeros((len(X),) + theta.shape)

    if method == "direct":
        pred = predict_batch(X, theta, config, mask)
        for index in zip(*np.nonzero(keep)):
            shifted = []
            for sign in (1.0, -1.0):
                moved = angles.copy()
                moved[index] += sign * SHIFT
                shifted.append(predict_batch(X, moved, config))
            dpred[(slice(None),) + index] = (shifted[0] - shifted[1]) / 2.0
        return pred, dpred
    if method != "heisenberg":
        raise ValueError(f"unknown gradient method {method!r}")

    pred, before, after = _shifted_expectations_heisenberg(X, angles, config)
    kinds = ("RY", "RX")
    for index in zip(*np.nonzero(keep)):
        d, q, slot = index
        values = []
        for sign in (1.0, -1.0):
            rot = rotation_matrix(kinds[slot], angles[index] + sign * SHIFT)
            values.append(_expectation(_apply_1q(before[index], rot, q, axis=-1), after[index]))
        # prediction is (1 - <Z>) / 2, hence the -1/4 factor on the <Z> shift difference
        dpred[(slice(None),) + index] = -(values[0] - values[1]) / 4.0
    return pred, dpred


def gradient(dataset, theta, config: ModelConfig, mask=None, method: str = "heisenberg") -> np.ndarray:
    """Parameter-shift gradient of the MSE cost; dropped parameters get exactly 0."""
    _check_dataset(dataset)
    pred, dpred = prediction_gradients(dataset.X, theta, config, mask, method)
    residual = pred - dataset.y
    return 2.0 / len(dataset) * np.tensordot(residual, dpred, axes=(0, 0))


def cost_and_gradient(dataset, theta, config: ModelConfig, mask=None, method: str = "heisenberg"):
    _check_dataset(dataset)
    pred, dpred = prediction_gradients(dataset.X, theta, config, mask, method)
    residual = pred - dataset.y
    return float(np.mean(residual**2)), 2.0 / len(dataset) * np.tensordot(residual, dpred, axes=(0, 0))


def gradient_fd(dataset, theta, config: ModelConfig, mask=None, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of the cost; the verification oracle for ``gradient``."""
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros(theta.shape)
    for index in np.ndindex(theta.shape):
        plus, minus = theta.copy(), theta.copy()
        plus[index] += h
        minus[index] -= h
        grad[index] = (cost(dataset, plus, config, mask) - cost(dataset, minus, config, mask)) / (2 * h)
    return grad
