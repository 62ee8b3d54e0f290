import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from iqp_circuit import bit_index, bit_string
from jw_fermion import (GivensGate, NumberDiagonalGate, StateVector, apply_gate, apply_gates,
                        apply_givens, apply_number_diagonal, fock_oracle_unitary, jw_dense_ladder,
                        popcount, reference_state, restricted_givens_matrix)
from ucj_config import SimulationConfig, set_config
from ucj_errors import CapacityError, InputError
from verification import anticommutation_gap, random_gate_sequence, random_state


def ket(bits: str) -> StateVector:
    return StateVector.basis(len(bits), bit_index(bits))


def test_gate_validation():
    with pytest.raises(InputError):
        GivensGate(1, 1, 0.1)
    with pytest.raises(InputError):
        GivensGate(2, 1, 0.1)
    with pytest.raises(InputError):
        NumberDiagonalGate(1, 0, 0.1)
    with pytest.raises(InputError):
        NumberDiagonalGate(0, 1, math.nan)
    with pytest.raises(InputError):
        apply_givens(StateVector.basis(2, 0), GivensGate(0, 2, 0.1))
    assert NumberDiagonalGate(1, 1, 0.3).q == 1
    assert GivensGate(0, 3, 0.2).adjoint() == GivensGate(0, 3, -0.2)


@pytest.mark.parametrize("n, bits", [(1, "01"), (2, "0011"), (3, "000111")])
def test_reference_state(n, bits):
    state = reference_state(n)
    assert state.modes == 2 * n
    assert bit_string(int(state.support()[0]), 2 * n) == bits
    assert len(state.support()) == 1


def test_zero_angle_is_identity(rng):
    state = random_state(4, rng)
    out = apply_gates(state, [GivensGate(0, 3, 0.0), NumberDiagonalGate(1, 2, 0.0)])
    np.testing.assert_array_equal(out.amplitudes, state.amplitudes)


def test_givens_on_two_modes():
    out = apply_givens(ket("01"), GivensGate(0, 1, math.pi / 4))
    expected = np.zeros(4, dtype=complex)
    expected[bit_index("01")] = expected[bit_index("10")] = 1 / math.sqrt(2)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


@pytest.mark.parametrize("theta", [0.3, -1.1, math.pi / 4])
def test_givens_sign_from_intervening_occupation(theta):
    out = apply_givens(ket("011"), GivensGate(0, 2, theta))
    expected = np.zeros(8, dtype=complex)
    expected[bit_index("011")] = math.cos(theta)
    expected[bit_index("110")] = -math.sin(theta)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_number_diagonal_examples():
    theta = 0.7
    out = apply_number_diagonal(ket("1"), NumberDiagonalGate(0, 0, theta))
    np.testing.assert_allclose(out.amplitudes, [0, np.exp(1j * theta)], atol=1e-15)

    state = StateVector(2, np.array([0, 0, 1, 1]) / math.sqrt(2))
    out = apply_number_diagonal(state, NumberDiagonalGate(0, 1, theta))
    np.testing.assert_allclose(out.amplitudes, np.array([0, 0, 1, np.exp(1j * theta)]) / math.sqrt(2), atol=1e-15)


def test_apply_gate_does_not_mutate_input(rng):
    state = random_state(3, rng)
    before = state.amplitudes.copy()
    apply_gate(state, GivensGate(0, 2, 0.4))
    np.testing.assert_array_equal(state.amplitudes, before)


@pytest.mark.parametrize("parity", [0, 1])
def test_restricted_matrix_depends_only_on_parity(parity):
    theta = 0.37
    matrix = restricted_givens_matrix(GivensGate(0, 4, theta), 5, parity)
    c, s = math.cos(theta), math.sin(theta)
    sign = -1 if parity else 1
    expected = np.array([[1, 0, 0, 0],
                         [0, c, -sign * s, 0],
                         [0, sign * s, c, 0],
                         [0, 0, 0, 1]])
    np.testing.assert_allclose(matrix, expected, atol=1e-15)


def test_restricted_matrix_without_configuration():
    with pytest.raises(InputError):
        restricted_givens_matrix(GivensGate(0, 1, 0.1), 2, 1)


def test_popcount():
    np.testing.assert_array_equal(popcount(np.array([0, 1, 3, 7, 8, 255])), [0, 1, 2, 3, 1, 8])


def test_oracle_empty_list_is_identity():
    np.testing.assert_array_equal(fock_oracle_unitary([], 3), np.eye(8))


def test_oracle_single_givens_matches_kernel():
    gate = GivensGate(0, 1, math.pi / 4)
    unitary = fock_oracle_unitary([gate], 2)
    np.testing.assert_allclose(unitary[:, bit_index("01")], apply_givens(ket("01"), gate).amplitudes, atol=1e-12)


def test_oracle_number_diagonal():
    theta = 0.9
    unitary = fock_oracle_unitary([NumberDiagonalGate(0, 1, theta)], 2)
    np.testing.assert_allclose(unitary, np.diag([1, 1, 1, np.exp(1j * theta)]), atol=1e-12)


@pytest.mark.parametrize("trial", range(200))
def test_kernel_matches_dense_oracle(trial):
    rng = np.random.default_rng(1000 + trial)
    modes = int(rng.integers(1, 7))
    gates = random_gate_sequence(modes, int(rng.integers(0, 21)), rng)
    state = random_state(modes, rng)
    kernel = apply_gates(state, gates)
    oracle = fock_oracle_unitary(gates, modes) @ state.amplitudes
    assert np.max(np.abs(kernel.amplitudes - oracle)) < 1e-10


@pytest.mark.parametrize("modes", range(1, 7))
def test_anticommutation_relations(modes):
    assert anticommutation_gap(modes) < 1e-12


def test_ladder_annihilates_vacuum():
    for p in range(3):
        assert np.all(jw_dense_ladder(p, 3)[:, 0] == 0)


def test_oracle_capacity():
    with pytest.raises(CapacityError):
        jw_dense_ladder(0, 13)
    set_config(SimulationConfig(max_modes=3))
    with pytest.raises(CapacityError):
        StateVector.basis(4, 0)


@seed(3)
@settings(max_examples=40, deadline=None)
@given(theta=st.floats(min_value=-math.pi, max_value=math.pi),
       pair=st.sampled_from([(0, 1), (0, 3), (1, 4), (2, 3)]),
       rng_seed=st.integers(min_value=0, max_value=10 ** 6))
def test_givens_preserves_norm_and_particle_number(theta, pair, rng_seed):
    state = random_state(5, np.random.default_rng(rng_seed))
    counts = popcount(np.arange(32))
    out = apply_givens(state, GivensGate(pair[0], pair[1], theta))
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    before = np.bincount(counts, weights=np.abs(state.amplitudes) ** 2)
    after = np.bincount(counts, weights=np.abs(out.amplitudes) ** 2)
    np.testing.assert_allclose(after, before, atol=1e-12)
