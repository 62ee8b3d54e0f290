import json
import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from iqp_circuit import (Distribution, IqpCircuit, bit_index, bit_string, decompose_diagonal,
                         diagonal_phases, distribution_from_state, iqp_distribution, iqp_dumps,
                         iqp_from_dict, iqp_state, iqp_to_dict, iqp_unitary, load_iqp, random_iqp,
                         reconstruct_diagonal, save_iqp)
from ucj_config import SimulationConfig, set_config
from ucj_errors import CapacityError, InputError, SchemaError

COS2 = math.cos(math.pi / 8) ** 2
SIN2 = math.sin(math.pi / 8) ** 2


def test_bit_string_prints_mode_zero_first():
    assert bit_string(1, 3) == "100"
    assert bit_string(6, 3) == "011"
    assert bit_index("011") == 6
    with pytest.raises(InputError):
        bit_index("0a1")


@pytest.mark.parametrize("n, v, w, expected", [
    (1, (0.0,), {}, [0.0, 0.0]),
    (1, (math.pi / 8,), {}, [math.pi / 8, -math.pi / 8]),
    (2, (0.0, 0.0), {(0, 1): math.pi / 8}, [math.pi / 8, -math.pi / 8, -math.pi / 8, math.pi / 8]),
])
def test_diagonal_phases(n, v, w, expected):
    np.testing.assert_allclose(diagonal_phases(IqpCircuit(n=n, w=w, v=v)), expected, atol=1e-15)


def test_circuit_validation():
    with pytest.raises(InputError):
        IqpCircuit(n=0)
    with pytest.raises(InputError):
        IqpCircuit(n=2, v=(0.0,))
    with pytest.raises(InputError):
        IqpCircuit(n=2, w={(1, 0): 0.1})
    with pytest.raises(InputError):
        IqpCircuit(n=2, v=(math.inf, 0.0))
    assert IqpCircuit(n=3).v == (0.0, 0.0, 0.0)


def test_from_weights_canonicalizes_pairs():
    c = IqpCircuit.from_weights(3, (0.1, 0.2, 0.3), [(2, 0, 0.5), (1, 2, -0.25)])
    assert c.w == {(0, 2): 0.5, (1, 2): -0.25}
    with pytest.raises(InputError):
        IqpCircuit.from_weights(2, (0.0, 0.0), [(0, 1, 0.1), (1, 0, 0.2)])
    with pytest.raises(InputError):
        IqpCircuit.from_weights(2, (0.0, 0.0), [(1, 1, 0.1)])


def test_zero_circuit_gives_exact_basis_state():
    state = iqp_state(IqpCircuit(n=1))
    assert state.amplitudes[0] == 1.0
    assert state.amplitudes[1] == 0.0
    assert iqp_distribution(IqpCircuit(n=3)).to_dict() == {"000": 1.0}


def test_single_z_rotation_probabilities():
    probs = np.abs(iqp_state(IqpCircuit(n=1, v=(math.pi / 8,))).amplitudes) ** 2
    np.testing.assert_allclose(probs, [COS2, SIN2], atol=1e-12)

    d = iqp_distribution(IqpCircuit(n=1, v=(math.pi / 4,)))
    assert d.get("0") == pytest.approx(0.5, abs=1e-12)
    assert d.get("1") == pytest.approx(0.5, abs=1e-12)


def test_single_coupling_distribution():
    d = iqp_distribution(IqpCircuit(n=2, w={(0, 1): math.pi / 8}))
    assert set(d.probs) == {"00", "11"}
    assert d.get("00") == pytest.approx(COS2, abs=1e-12)
    assert d.get("11") == pytest.approx(SIN2, abs=1e-12)


@pytest.mark.parametrize("random_seed", range(5))
def test_state_matches_dense_unitary(random_seed):
    c = random_iqp(4, random_seed)
    dense = iqp_unitary(c)[:, 0]
    np.testing.assert_allclose(iqp_state(c).amplitudes, dense, atol=1e-12)
    np.testing.assert_allclose(dense.conj() @ dense, 1.0, atol=1e-12)


def test_capacity_limits():
    set_config(SimulationConfig(max_modes=4))
    with pytest.raises(CapacityError):
        iqp_state(IqpCircuit(n=5))
    with pytest.raises(CapacityError):
        iqp_unitary(IqpCircuit(n=13))


def test_decompose_diagonal_examples():
    spec = decompose_diagonal(IqpCircuit(n=2))
    assert spec.v_prime == (0.0, 0.0)
    assert spec.cp_terms == ()
    assert spec.global_phase == 0.0

    spec = decompose_diagonal(IqpCircuit(n=2, w={(0, 1): math.pi / 8}))
    assert spec.v_prime == pytest.approx((math.pi / 8, math.pi / 8))
    assert spec.cp_terms == ((0, 1, pytest.approx(math.pi / 2)),)
    assert spec.global_phase == pytest.approx(-math.pi / 8)

    spec = decompose_diagonal(IqpCircuit(n=2, v=(0.3, -0.2)))
    assert spec.v_prime == (0.3, -0.2)
    assert spec.cp_terms == ()


@pytest.mark.parametrize("random_seed", range(100))
def test_diagonal_factorization_identity(random_seed):
    n = 1 + random_seed % 4
    c = random_iqp(n, random_seed)
    exact = np.exp(1j * diagonal_phases(c))
    np.testing.assert_allclose(reconstruct_diagonal(decompose_diagonal(c), n), exact, rtol=0, atol=1e-12)


@seed(11)
@settings(max_examples=50, deadline=None)
@given(n=st.integers(min_value=1, max_value=6), rng_seed=st.integers(min_value=0, max_value=2 ** 32))
def test_distribution_is_normalized(n, rng_seed):
    d = iqp_distribution(random_iqp(n, rng_seed, density=0.5))
    assert d.total() == pytest.approx(1.0, abs=1e-12)
    assert all(len(key) == n for key in d.probs)


def test_distribution_drops_entries_below_floor():
    from jw_fermion import StateVector
    state = StateVector(1, np.array([1.0, 1e-9]))
    assert distribution_from_state(state).to_dict() == {"0": 1.0}
    with pytest.raises(InputError):
        Distribution(2, {"0": 1.0})


def test_random_iqp_density():
    assert random_iqp(3, 5, density=0.0).w == {}
    assert set(random_iqp(3, 5, density=1.0).w) == {(0, 1), (0, 2), (1, 2)}
    c = random_iqp(4, 9)
    assert all(-math.pi < x <= math.pi for x in c.v + tuple(c.w.values()))
    with pytest.raises(InputError):
        random_iqp(3, 5, density=1.5)


def test_random_iqp_is_deterministic():
    assert iqp_dumps(random_iqp(5, 123, 0.4)) == iqp_dumps(random_iqp(5, 123, 0.4))


def test_json_round_trip_is_exact(tmp_path):
    c = random_iqp(4, 77, density=0.7)
    path = tmp_path / "iqp.json"
    save_iqp(c, path)
    loaded = load_iqp(path)
    assert loaded == c
    np.testing.assert_array_equal(iqp_state(loaded).amplitudes, iqp_state(c).amplitudes)


@pytest.mark.parametrize("data, field", [
    ({"v": [0.0], "w": []}, "n"),
    ({"n": 2, "v": [0.0], "w": []}, "v"),
    ({"n": 1, "v": ["x"], "w": []}, "v[0]"),
    ({"n": 1, "v": [10 ** 400], "w": []}, "v[0]"),
    ({"n": 2, "v": [0.0, 0.0], "w": [{"a": 0, "b": 1, "val": -10 ** 400}]}, "w[0].val"),
    ({"n": 2, "v": [0.0, 0.0], "w": [{"a": 1, "b": 0, "val": 0.1}]}, "w[0]"),
    ({"n": 2, "v": [0.0, 0.0], "w": [{"a": 0, "b": 1}]}, "val"),
    ({"n": 2, "v": [0.0, 0.0], "w": [{"a": 0, "b": 1, "val": 0.1}, {"a": 0, "b": 1, "val": 0.2}]}, "w[1]"),
])
def test_schema_errors_name_the_field(data, field):
    with pytest.raises(SchemaError) as excinfo:
        iqp_from_dict(data)
    assert excinfo.value.field == field


def test_malformed_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_iqp(path)


def test_to_dict_layout():
    data = iqp_to_dict(IqpCircuit(n=2, w={(0, 1): 0.5}, v=(0.1, 0.2)))
    assert data == {"n": 2, "v": [0.1, 0.2], "w": [{"a": 0, "b": 1, "val": 0.5}]}
    assert json.loads(iqp_dumps(iqp_from_dict(data))) == data
