"""Angle-encoded layered circuit with per-gate dropout and Z readout.

Parameters live in an array of shape ``(depth, n_qubits, 2)``; slot 0 holds
the RY angle and slot 1 the RX angle of each qubit in each layer.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterator, Optional

import numpy as np

from .exceptions import ConfigurationError, UsageError
from .noise import NoiseSpec, apply_layer_noise
from .state import (
    MAX_QUBITS,
    ROTATIONS,
    GateSpec,
    _apply_1q,
    apply_unitary_dm,
    cnot_permutation,
    expectation_z,
    expectation_z_dm,
    rotation_matrix,
    to_density_matrix,
)

GRANULARITIES = ("gate", "layer")


@dataclass(frozen=True)
class ModelConfig:
    n_qubits: int = 6
    depth: int = 5
    readout_qubit: int = 0
    dropout_base: float = 0.2
    dropout_decrement: float = 0.02
    dropout_granularity: str = "gate"

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.depth < 1:
            raise ConfigurationError(f"depth must be >= 1, got {self.depth}")
        if not 0 <= self.readout_qubit < self.n_qubits:
            raise ConfigurationError(f"readout_qubit {self.readout_qubit} out of range")
        if self.dropout_granularity not in GRANULARITIES:
            raise ConfigurationError(
                f"dropout_granularity must be one of {GRANULARITIES}, got {self.dropout_granularity!r}"
            )

    @property
    def param_shape(self) -> tuple:
        return (self.depth, self.n_qubits, 2)

    @property
    def n_params(self) -> int:
        return self.depth * self.n_qubits * 2

    def to_dict(self) -> dict:
        return asdict(self)


def dropout_rates(config: ModelConfig) -> np.ndarray:
    """Per-layer drop probability ``base - decrement * d`` clamped to [0, 1]."""
    d = np.arange(config.depth)
    return np.clip(config.dropout_base - config.dropout_decrement * d, 0.0, 1.0)


def init_parameters(config: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=config.param_shape)


def sample_dropout_mask(config: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    """Boolean keep-mask; entries at layer ``d`` are dropped with the layer's rate."""
    rates = dropout_rates(config)
    if config.dropout_granularity == "layer":
        drop = rng.random(config.depth) < rates
        return np.broadcast_to(~drop[:, None, None], config.param_shape).copy()
    drop = rng.random(config.param_shape) < rates[:, None, None]
    return ~drop


def effective_angles(theta: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is None:
        return theta
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != theta.shape:
        raise ValueError(f"mask shape {mask.shape} does not match parameter shape {theta.shape}")
    return np.where(mask, theta, 0.0)


def _check_theta(theta: np.ndarray, n_qubits: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 3 or theta.shape[1] != n_qubits or theta.shape[2] != 2:
        raise ValueError(f"parameter shape {theta.shape} is inconsistent with {n_qubits} qubits")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    return theta


def ring_pairs(n_qubits: int) -> list:
    if n_qubits < 2:
        return []
    return [(q, (q + 1) % n_qubits) for q in range(n_qubits)]


def layer_gates(angles: np.ndarray, d: int) -> Iterator[tuple]:
    """Yield ``(gate, index)`` for layer ``d``; ``index`` is None for CNOTs."""
    n = angles.shape[1]
    for q in range(n):
        for slot, kind in enumerate(ROTATIONS):
            yield GateSpec(kind, q, angle=float(angles[d, q, slot])), (d, q, slot)
    for control, target in ring_pairs(n):
        yield GateSpec("CNOT", target, control=control), None


def encode(features) -> np.ndarray:
    """Product state with qubit ``j`` rotated by ``RY(pi * features[..., j])``.

    Accepts a single feature vector or a ``(n_samples, n_features)`` batch.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ValueError("features must be a non-empty vector")
    half = np.pi * x / 2
    state = np.ones(x.shape[:-1] + (1,), dtype=complex)
    for q in reversed(range(x.shape[-1])):
        local = np.stack([np.cos(half[..., q]), np.sin(half[..., q])], axis=-1)
        state = (state[..., :, None] * local[..., None, :]).reshape(x.shape[:-1] + (-1,))
    return state


def _apply_layer_sv(state, angles, d):
    n = angles.shape[1]
    for q in range(n):
        for slot, kind in enumerate(ROTATIONS):
            if angles[d, q, slot] != 0.0:
                state = _apply_1q(state, rotation_matrix(kind, angles[d, q, slot]), q, axis=-1)
    for control, target in ring_pairs(n):
        state = state[..., cnot_permutation(n, control, target)]
    return state


def apply_ansatz(state: np.ndarray, theta: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
    n = state.shape[-1].bit_length() - 1
    angles = effective_angles(_check_theta(theta, n), mask)
    for d in range(angles.shape[0]):
        state = _apply_layer_sv(state, angles, d)
    return state


def _apply_ansatz_dm(rho, angles, noise):
    if noise is not None:
        rho = apply_layer_noise(rho, noise)
    for d in range(angles.shape[0]):
        for gate, _ in layer_gates(angles, d):
            if gate.kind != "CNOT" and gate.angle == 0.0:
                continue
            rho = apply_unitary_dm(rho, gate)
        if noise is not None:
            rho = apply_layer_noise(rho, noise)
    return rho


def readout(expval_z) -> np.ndarray:
    return np.clip((1.0 - np.asarray(expval_z)) / 2.0, 0.0, 1.0)


def predict_batch(
    X,
    theta: np.ndarray,
    config: ModelConfig,
    mask: Optional[np.ndarray] = None,
    noise: Optional[NoiseSpec] = None,
    evaluation: bool = False,
) -> np.ndarray:
    """Predicted probability of class 1 for every row of ``X``.

    With ``noise`` set the circuit runs on the density-matrix path, with one
    channel per qubit after the encoding and after every layer.
    """
    if evaluation and mask is not None:
        raise UsageError("dropout masks are not allowed when evaluating")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != config.n_qubits:
        raise ValueError(f"expected {config.n_qubits} features per sample, got {X.shape[1]}")
    theta = _check_theta(theta, config.n_qubits)
    if theta.shape[0] != config.depth:
        raise ValueError(f"parameter depth {theta.shape[0]} does not match config depth {config.depth}")
    angles = effective_angles(theta, mask)
    psi = encode(X)
    if noise is None:
        for d in range(config.depth):
            psi = _apply_layer_sv(psi, angles, d)
        return readout(expectation_z(psi, config.readout_qubit))
    rho = _apply_ansatz_dm(to_density_matrix(psi), angles, noise)
    return readout(expectation_z_dm(rho, config.readout_qubit))


def predict(features, theta, config, mask=None, noise=None, evaluation=False) -> float:
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ValueError("predict expects a single feature vector; use predict_batch for many")
    return float(predict_batch(features[None, :], theta, config, mask, noise, evaluation)[0])
