import math

import numpy as np
import pytest

from iqp_circuit import (Distribution, IqpCircuit, distribution_from_state, iqp_distribution,
                         iqp_state, random_iqp, z_eigenvalues)
from iqp_to_ucj import (PairEncoding, coded_operator, compile_iqp, decode_distribution,
                        decode_outcome, decode_state, leaked_indices)
from jw_fermion import GivensGate, NumberDiagonalGate
from ucj_ansatz import simulate_ucj, ucj_unitary
from ucj_errors import InputError, LeakageError, SubspaceViolation

COS2 = math.cos(math.pi / 8) ** 2
SIN2 = math.sin(math.pi / 8) ** 2


def test_pair_encoding():
    enc = PairEncoding(2)
    assert enc.modes == 4
    assert enc.pairs == ((1, 2), (0, 3))
    np.testing.assert_array_equal(PairEncoding(1).coded_indices(), [2, 1])
    assert int(enc.valid_mask().sum()) == 4
    assert leaked_indices(enc).size == 16 - 4
    with pytest.raises(InputError):
        PairEncoding(0)
    with pytest.raises(InputError):
        enc.pair(2)


def test_compile_zero_circuit():
    compiled = compile_iqp(IqpCircuit(n=3))
    assert len(compiled.givens) == 3
    assert all(d.theta == 0.0 for d in compiled.diagonal)
    assert compiled.global_phase == 0.0


def test_compile_single_z():
    compiled = compile_iqp(IqpCircuit(n=1, v=(math.pi / 8,)))
    assert compiled.givens == (GivensGate(0, 1, -math.pi / 4),)
    assert compiled.diagonal == (NumberDiagonalGate(0, 0, -math.pi / 8), NumberDiagonalGate(1, 1, math.pi / 8))
    decoded, leakage = decode_distribution(distribution_from_state(simulate_ucj(compiled)))
    assert decoded.get("0") == pytest.approx(COS2, abs=1e-12)
    assert decoded.get("1") == pytest.approx(SIN2, abs=1e-12)
    assert leakage < 1e-14


def test_compile_single_coupling():
    compiled = compile_iqp(IqpCircuit(n=2, w={(0, 1): math.pi / 8}))
    eighth = math.pi / 8
    assert set(compiled.diagonal) == {
        NumberDiagonalGate(1, 1, -eighth), NumberDiagonalGate(2, 2, eighth),
        NumberDiagonalGate(0, 0, -eighth), NumberDiagonalGate(3, 3, eighth),
        NumberDiagonalGate(0, 1, math.pi / 2),
    }
    assert compiled.global_phase == pytest.approx(-eighth)

    decoded, leakage = decode_distribution(distribution_from_state(simulate_ucj(compiled)))
    assert set(decoded.probs) == {"00", "11"}
    assert decoded.get("00") == pytest.approx(COS2, abs=1e-12)
    assert decoded.get("11") == pytest.approx(SIN2, abs=1e-12)
    assert leakage < 1e-14


@pytest.mark.parametrize("bits, expected", [("0011", "00"), ("0101", "10"), ("1010", "01"), ("1100", "11")])
def test_decode_outcome(bits, expected):
    assert decode_outcome(bits, PairEncoding(2)) == expected


def test_decode_outcome_violation():
    with pytest.raises(SubspaceViolation) as excinfo:
        decode_outcome("0110", PairEncoding(2))
    assert 0 in excinfo.value.pairs
    with pytest.raises(InputError):
        decode_outcome("011", PairEncoding(2))


def test_decode_point_masses():
    decoded, leakage = decode_distribution(Distribution(4, {"0011": 1.0}))
    assert decoded.to_dict() == {"00": 1.0}
    assert leakage == 0.0

    with pytest.raises(LeakageError):
        decode_distribution(Distribution(4, {"0000": 1.0}))
    decoded, leakage = decode_distribution(Distribution(4, {"0000": 1.0}), strict=False)
    assert leakage == 1.0
    assert decoded.probs == {}


def test_decode_renormalizes_small_leakage():
    d = Distribution(2, {"01": 1.0 - 1e-11, "00": 1e-11})
    decoded, leakage = decode_distribution(d)
    assert leakage == pytest.approx(1e-11)
    assert decoded.get("0") == pytest.approx(1.0, abs=1e-15)
    raw, _ = decode_distribution(d, renormalize=False)
    assert raw.get("0") == 1.0 - 1e-11


def test_decode_width_checks():
    with pytest.raises(InputError):
        decode_distribution(Distribution(3, {"011": 1.0}))
    with pytest.raises(InputError):
        decode_distribution(Distribution(4, {"0011": 1.0}), PairEncoding(1))


@pytest.mark.parametrize("n, alpha", [(1, 0), (3, 0), (3, 2)])
def test_z_rotation_gadget(n, alpha):
    v_prime = 0.41
    enc = PairEncoding(n)
    upper, lower = enc.pair(alpha)
    gadget = [NumberDiagonalGate(upper, upper, -v_prime), NumberDiagonalGate(lower, lower, v_prime)]
    np.testing.assert_allclose(coded_operator(gadget, n), np.exp(1j * v_prime * z_eigenvalues(n)[alpha]), atol=1e-15)


def test_controlled_phase_gadget():
    n, theta = 3, 0.9
    gadget = [NumberDiagonalGate(n - 2 - 1, n - 0 - 1, theta)]
    ones = (1 - z_eigenvalues(n)) / 2
    np.testing.assert_allclose(coded_operator(gadget, n), np.exp(1j * theta * ones[0] * ones[2]), atol=1e-15)


@pytest.mark.parametrize("random_seed", range(20))
def test_decoded_state_equals_iqp_state(random_seed):
    c = random_iqp(1 + random_seed % 5, random_seed)
    compiled = compile_iqp(c)
    decoded = decode_state(simulate_ucj(compiled), PairEncoding(c.n))
    np.testing.assert_allclose(decoded.amplitudes, iqp_state(c).amplitudes, atol=1e-10)


@pytest.mark.parametrize("random_seed", range(20))
def test_compiled_distribution_matches_iqp(random_seed):
    c = random_iqp(1 + random_seed % 6, random_seed, density=0.6)
    decoded, leakage = decode_distribution(distribution_from_state(simulate_ucj(compile_iqp(c))))
    target = iqp_distribution(c)
    keys = set(decoded.probs) | set(target.probs)
    assert max(abs(decoded.get(k) - target.get(k)) for k in keys) < 1e-10
    assert leakage < 1e-12


@pytest.mark.parametrize("a, b", [(0, 1), (0, 2), (1, 2)])
def test_coupling_order_does_not_change_compiled_unitary(a, b):
    v = (0.3, -0.1, 0.25)
    forward = compile_iqp(IqpCircuit.from_weights(3, v, [(a, b, math.pi / 7)]))
    backward = compile_iqp(IqpCircuit.from_weights(3, v, [(b, a, math.pi / 7)]))
    np.testing.assert_allclose(ucj_unitary(forward), ucj_unitary(backward), atol=1e-14)
