import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qloan.exceptions import ConfigurationError
from qloan.state import (
    GateSpec,
    apply_cnot,
    apply_gate,
    apply_rotation,
    apply_unitary_dm,
    expectation_z,
    expectation_z_dm,
    init_zero_state,
    to_density_matrix,
)

S = 1 / np.sqrt(2)


def random_gate(rng, n):
    kind = rng.choice(["RY", "RX", "CNOT"])
    if kind == "CNOT":
        control, target = rng.choice(n, size=2, replace=False)
        return GateSpec("CNOT", int(target), control=int(control))
    return GateSpec(str(kind), int(rng.integers(n)), angle=float(rng.uniform(-2 * np.pi, 2 * np.pi)))


@pytest.mark.parametrize("n, expected_len", [(1, 2), (2, 4), (6, 64)])
def test_init_zero_state(n, expected_len):
    state = init_zero_state(n)
    assert state.shape == (expected_len,)
    assert state[0] == 1
    assert not np.any(state[1:])


@pytest.mark.parametrize("n", [0, 21, -1])
def test_init_zero_state_rejects_out_of_range(n):
    with pytest.raises(ConfigurationError):
        init_zero_state(n)


def test_ry_pi_flips_zero():
    np.testing.assert_allclose(apply_rotation(init_zero_state(1), "RY", 0, np.pi), [0, 1], atol=1e-15)


def test_rx_half_pi():
    np.testing.assert_allclose(apply_rotation(init_zero_state(1), "RX", 0, np.pi / 2), [S, -1j * S], atol=1e-15)


def test_zero_angle_is_identity():
    rng = np.random.default_rng(1)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    for kind in ("RY", "RX"):
        np.testing.assert_array_equal(apply_rotation(psi, kind, 1, 0.0), psi)


def test_rotation_rejects_bad_qubit():
    with pytest.raises(ValueError):
        apply_rotation(init_zero_state(2), "RY", 2, 0.1)


def test_qubit_zero_is_least_significant():
    state = apply_rotation(init_zero_state(3), "RY", 0, np.pi)
    assert abs(state[1]) == pytest.approx(1.0)


def test_cnot_examples():
    ket10 = np.zeros(4, complex)
    ket10[1] = 1  # qubit 0 set
    out = apply_cnot(ket10, control=0, target=1)
    np.testing.assert_array_equal(out, [0, 0, 0, 1])
    np.testing.assert_array_equal(apply_cnot(init_zero_state(2), 0, 1), [1, 0, 0, 0])
    superposed = np.array([S, S, 0, 0], complex)  # (|00> + |q0=1>)/sqrt2
    np.testing.assert_allclose(apply_cnot(superposed, 0, 1), [S, 0, 0, S])


def test_cnot_rejects_equal_wires():
    with pytest.raises(ValueError):
        apply_cnot(init_zero_state(2), 1, 1)


def test_cnot_involution():
    rng = np.random.default_rng(2)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    np.testing.assert_array_equal(apply_cnot(apply_cnot(psi, 3, 1), 3, 1), psi)


@pytest.mark.parametrize("state, expected", [([1, 0], 1.0), ([0, 1], -1.0), ([S, S], 0.0)])
def test_expectation_z(state, expected):
    assert expectation_z(np.array(state, complex), 0) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "state, expected",
    [([1, 0], [[1, 0], [0, 0]]), ([0, 1], [[0, 0], [0, 1]]), ([S, S], [[0.5, 0.5], [0.5, 0.5]])],
)
def test_to_density_matrix(state, expected):
    np.testing.assert_allclose(to_density_matrix(np.array(state, complex)), expected, atol=1e-15)


def test_unitary_dm_examples():
    rho0 = to_density_matrix(init_zero_state(1))
    np.testing.assert_allclose(apply_unitary_dm(rho0, GateSpec("RY", 0, angle=np.pi)), [[0, 0], [0, 1]], atol=1e-15)
    np.testing.assert_array_equal(apply_unitary_dm(rho0, GateSpec("RX", 0, angle=0.0)), rho0)
    with pytest.raises(ValueError):
        apply_unitary_dm(rho0, GateSpec("CNOT", 0, control=0))


@pytest.mark.parametrize("rho, expected", [
    ([[1, 0], [0, 0]], 1.0),
    ([[0.5, 0], [0, 0.5]], 0.0),
    ([[0.7, 0], [0, 0.3]], 0.4),
])
def test_expectation_z_dm(rho, expected):
    assert expectation_z_dm(np.array(rho, complex), 0) == pytest.approx(expected, abs=1e-15)


def test_statevector_and_density_matrix_agree_on_random_circuits():
    # 100 random 3-qubit circuits, compared gate by gate
    rng = np.random.default_rng(3)
    for _ in range(100):
        psi = init_zero_state(3)
        rho = to_density_matrix(psi)
        for _ in range(rng.integers(1, 25)):
            gate = random_gate(rng, 3)
            psi = apply_gate(psi, gate)
            rho = apply_unitary_dm(rho, gate)
        np.testing.assert_allclose(rho, to_density_matrix(psi), atol=1e-10, rtol=0)
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-8
        for q in range(3):
            assert abs(expectation_z_dm(rho, q) - expectation_z(psi, q)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), k=st.integers(1, 100))
def test_norm_preserved(seed, n, k):
    rng = np.random.default_rng(seed)
    psi = init_zero_state(n)
    for _ in range(k):
        kind = "CNOT" if n > 1 and rng.random() < 0.3 else str(rng.choice(["RY", "RX"]))
        gate = random_gate(rng, n) if kind == "CNOT" else GateSpec(kind, int(rng.integers(n)), angle=float(rng.normal() * 5))
        psi = apply_gate(psi, gate)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), theta=st.floats(-20, 20), kind=st.sampled_from(["RY", "RX"]))
def test_rotation_round_trip(seed, theta, kind):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    back = apply_rotation(apply_rotation(psi, kind, 2, theta), kind, 2, -theta)
    np.testing.assert_allclose(back, psi, atol=1e-10, rtol=0)


def test_batched_states_match_single():
    rng = np.random.default_rng(4)
    batch = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
    out = apply_rotation(batch, "RX", 1, 0.3)
    for row_in, row_out in zip(batch, out):
        np.testing.assert_allclose(apply_rotation(row_in, "RX", 1, 0.3), row_out)
