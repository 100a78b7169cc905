"""Single-qubit Kraus channels applied to density matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import _apply_superop, n_qubits_of, superoperator

NOISE_KINDS = (
    "bitflip",
    "phaseflip",
    "bitphaseflip",
    "depolarizing",
    "phase_damping",
    "amplitude_damping",
)

DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(11))

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

COMPLETENESS_ATOL = 1e-10


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    strength: float

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"noise strength must lie in [0, 1], got {self.strength}")


def kraus_for(spec: NoiseSpec) -> list[np.ndarray]:
    p = float(spec.strength)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise strength must lie in [0, 1], got {p}")
    kind = spec.kind
    if kind == "bitflip":
        return [np.sqrt(1 - p) * _I, np.sqrt(p) * _X]
    if kind == "phaseflip":
        return [np.sqrt(1 - p) * _I, np.sqrt(p) * _Z]
    if kind == "bitphaseflip":
        return [np.sqrt(1 - p) * _I, np.sqrt(p) * _Y]
    if kind == "depolarizing":
        a = np.sqrt(p / 4)
        return [np.sqrt(1 - 3 * p / 4) * _I, a * _X, a * _Y, a * _Z]
    if kind == "amplitude_damping":
        return [
            np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
            np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex),
        ]
    if kind == "phase_damping":
        return [
            np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
            np.array([[0, 0], [0, np.sqrt(p)]], dtype=complex),
        ]
    raise ValueError(f"unknown noise kind {kind!r}")


def completeness_error(kraus) -> float:
    total = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(total - _I)))


def apply_channel(rho: np.ndarray, qubit: int, kraus) -> np.ndarray:
    """Return ``sum_k K rho K^dagger`` with each ``K`` acting on ``qubit``."""
    if completeness_error(kraus) > COMPLETENESS_ATOL:
        raise ValueError("Kraus operators do not satisfy sum K^dagger K = I")
    return _apply_superop(rho, superoperator(kraus), qubit)


def apply_layer_noise(rho: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    kraus = kraus_for(spec)
    for q in range(n_qubits_of(rho)):
        rho = apply_channel(rho, q, kraus)
    return rho


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))
