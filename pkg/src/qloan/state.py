"""Dense statevector and density-matrix simulation.

Qubit 0 is the least-significant bit of the basis index. Every routine
accepts arrays with arbitrary leading batch dimensions: a statevector is
``(..., 2**n)`` and a density matrix is ``(..., 2**n, 2**n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConfigurationError

MAX_QUBITS = 20

ROTATIONS = ("RY", "RX")


@dataclass(frozen=True)
class GateSpec:
    kind: str
    target: int
    control: Optional[int] = None
    angle: float = 0.0

    def validate(self, n_qubits: int) -> None:
        if self.kind not in ("RY", "RX", "CNOT"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        _check_qubit(self.target, n_qubits)
        if self.kind == "CNOT":
            if self.control is None:
                raise ValueError("CNOT requires a control qubit")
            _check_qubit(self.control, n_qubits)
            if self.control == self.target:
                raise ValueError("CNOT control and target must differ")
        elif not np.isfinite(self.angle):
            raise ValueError(f"rotation angle must be finite, got {self.angle}")


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    raise ValueError(f"unknown rotation kind {kind!r}")


def n_qubits_of(arr: np.ndarray, axis: int = -1) -> int:
    dim = arr.shape[axis]
    n = dim.bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise ValueError(f"axis length {dim} is not a power of two >= 2")
    return n


def _check_qubit(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit index {qubit} out of range for {n_qubits} qubits")


def _apply_1q(arr: np.ndarray, mat: np.ndarray, qubit: int, axis: int) -> np.ndarray:
    # Contract a 2x2 matrix into one qubit of the given axis.
    axis = axis % arr.ndim
    n = n_qubits_of(arr, axis)
    _check_qubit(qubit, n)
    moved = np.moveaxis(arr, axis, -1)
    shaped = moved.reshape(moved.shape[:-1] + (1 << (n - 1 - qubit), 2, 1 << qubit))
    out = np.einsum("ij,...ajb->...aib", mat, shaped)
    return np.moveaxis(out.reshape(moved.shape), -1, axis)


def superoperator(kraus) -> np.ndarray:
    """Rank-4 tensor ``S[i, l, j, k] = sum_K K[i, j] conj(K[l, k])`` of a 1-qubit map."""
    return sum(np.einsum("ij,lk->iljk", k, np.conj(k)) for k in kraus)


def _apply_superop(rho: np.ndarray, sup: np.ndarray, qubit: int) -> np.ndarray:
    # Row and column index of ``qubit`` are contracted in one pass.
    n = n_qubits_of(rho)
    _check_qubit(qubit, n)
    hi, lo = 1 << (n - 1 - qubit), 1 << qubit
    shaped = rho.reshape(rho.shape[:-2] + (hi, 2, lo, hi, 2, lo))
    out = np.einsum("iljk,...ajcdke->...aicdle", sup, shaped, optimize=True)
    return out.reshape(rho.shape)


def cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    """Basis-index permutation implementing CNOT (an involution)."""
    _check_qubit(control, n_qubits)
    _check_qubit(target, n_qubits)
    if control == target:
        raise ValueError("CNOT control and target must differ")
    idx = np.arange(1 << n_qubits)
    return np.where((idx >> control) & 1, idx ^ (1 << target), idx)


def init_zero_state(n_qubits: int) -> np.ndarray:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}")
    state = np.zeros(1 << n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def apply_rotation(state: np.ndarray, kind: str, qubit: int, angle: float) -> np.ndarray:
    if not np.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle}")
    return _apply_1q(state, rotation_matrix(kind, angle), qubit, axis=-1)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    perm = cnot_permutation(n_qubits_of(state), control, target)
    return state[..., perm]


def z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    """Diagonal of Pauli-Z acting on ``qubit``: +1 where the bit is 0, -1 where it is 1."""
    _check_qubit(qubit, n_qubits)
    bits = (np.arange(1 << n_qubits) >> qubit) & 1
    return 1.0 - 2.0 * bits


def expectation_z(state: np.ndarray, qubit: int) -> np.ndarray | float:
    probs = np.abs(state) ** 2
    value = probs @ z_signs(n_qubits_of(state), qubit)
    return float(value) if np.ndim(value) == 0 else value


def to_density_matrix(state: np.ndarray) -> np.ndarray:
    return state[..., :, None] * state.conj()[..., None, :]


def apply_unitary_dm(rho: np.ndarray, gate: GateSpec) -> np.ndarray:
    """Evolve ``rho`` to ``U rho U^dagger`` for a single gate."""
    n = n_qubits_of(rho)
    gate.validate(n)
    if gate.kind == "CNOT":
        perm = cnot_permutation(n, gate.control, gate.target)
        return rho[..., perm, :][..., :, perm]
    mat = rotation_matrix(gate.kind, gate.angle)
    return _apply_superop(rho, superoperator([mat]), gate.target)


def apply_gate(state: np.ndarray, gate: GateSpec) -> np.ndarray:
    gate.validate(n_qubits_of(state))
    if gate.kind == "CNOT":
        return apply_cnot(state, gate.control, gate.target)
    return apply_rotation(state, gate.kind, gate.target, gate.angle)


def expectation_z_dm(rho: np.ndarray, qubit: int) -> np.ndarray | float:
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    value = diag @ z_signs(n_qubits_of(rho), qubit)
    return float(value) if np.ndim(value) == 0 else value
