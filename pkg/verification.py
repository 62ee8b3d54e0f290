"""
Confronto quantitativo di stati e distribuzioni, errore moltiplicativo,
campionamento deterministico e sonde sugli invarianti del circuito compilato.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from iqp_circuit import (Distribution, IqpCircuit, diagonal_phases, distribution_from_state,
                         iqp_distribution, iqp_state, load_iqp, random_iqp, reconstruct_diagonal,
                         decompose_diagonal)
from iqp_to_ucj import PairEncoding, compile_iqp, decode_distribution, decode_state, leaked_indices
from jw_fermion import (Gate, GivensGate, NumberDiagonalGate, StateVector, apply_gate, basis_indices,
                        between_mask, fock_oracle_unitary, jw_dense_ladder, popcount)
from ucj_ansatz import (Ucj1Compiled, decompose_givens, embed_full_spin, load_ucj,
                        orbital_rotation_matrix, recover_k, simulate_ucj)
from ucj_config import get_config
from ucj_errors import InputError

logger = logging.getLogger(__name__)

# Soglia di difficolta' per simulatori classici (solo contesto, mai pass/fail)
HARDNESS_BOUND = math.sqrt(2)

# Anticommutazione densa verificata fino a questo numero di modi
ANTICOMMUTATION_MAX_MODES = 6

# Scarto ammesso sulla massa totale di una distribuzione da campionare
NORMALIZATION_TOLERANCE = 1e-9

COMPILED_THRESHOLDS = {
    'distribution_linf': 1e-10,
    'multiplicative': 1e-8,
    'state_residual': 1e-10,
    'phase': 1e-10,
    'leakage': 1e-12,
    'parity': 1e-12,
    'particle_number': 1e-12,
    'p_le_q': 0.5,
    'diagonal_identity': 1e-12,
    'v_order': 1e-12,
}


@dataclass(frozen=True)
class VerifyReport:
    linf: float
    tvd: float
    mult_error: float
    phase: Optional[float]
    leakage: float
    tolerance: float
    passed: bool
    phase_gap: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'linf': self.linf,
            'tvd': self.tvd,
            'mult_error': 'inf' if math.isinf(self.mult_error) else self.mult_error,
            'phase': self.phase,
            'leakage': self.leakage,
            'pass': self.passed,
            'tolerance': self.tolerance,
            'phase_gap': self.phase_gap,
        }


def wrap_angle(angle: float) -> float:
    """Riporta l'angolo in (-pi, pi]"""
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def _check_widths(p: Distribution, q: Distribution) -> None:
    if p.width != q.width:
        raise InputError(f"larghezze diverse: {p.width} e {q.width}")


def linf_distance(p: Distribution, q: Distribution) -> float:
    _check_widths(p, q)
    keys = set(p.probs) | set(q.probs)
    return max((abs(p.get(k) - q.get(k)) for k in keys), default=0.0)


def total_variation_distance(p: Distribution, q: Distribution) -> float:
    _check_widths(p, q)
    keys = set(p.probs) | set(q.probs)
    return min(1.0, 0.5 * sum(abs(p.get(k) - q.get(k)) for k in keys))


def multiplicative_error(p: Distribution, q: Distribution, threshold: Optional[float] = None) -> float:
    """Il piu' piccolo c con p/c <= q <= c p; infinito se i supporti differiscono"""
    _check_widths(p, q)
    if threshold is None:
        threshold = get_config().zero_threshold
    worst = 1.0
    for key in set(p.probs) | set(q.probs):
        a, b = p.get(key), q.get(key)
        a_zero, b_zero = a < threshold, b < threshold
        if a_zero and b_zero:
            continue
        if a_zero or b_zero:
            return math.inf
        worst = max(worst, a / b, b / a)
    return worst


def _vector(state: Union[StateVector, np.ndarray]) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def compare_states(a: Union[StateVector, np.ndarray],
                   b: Union[StateVector, np.ndarray]) -> Tuple[Optional[float], float]:
    """(fase, residuo) con fase = arg<a|b> e residuo = ||a - exp(-i fase) b||"""
    va, vb = _vector(a), _vector(b)
    if va.shape != vb.shape:
        raise InputError(f"dimensioni diverse: {va.shape} e {vb.shape}")
    overlap = np.vdot(va, vb)
    if abs(overlap) < 1e-15:
        # Fase indefinita: il residuo non dipende dalla fase
        return None, float(math.sqrt(np.vdot(va, va).real + np.vdot(vb, vb).real))
    phase = float(np.angle(overlap))
    residual = float(np.linalg.norm(va - np.exp(-1j * phase) * vb))
    return phase, residual


# --- Campionamento ---

def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise InputError(f"seed deve essere un intero a 64 bit, trovato {seed!r}")
    return int(seed)


def uniform01(seed: int, counter: int) -> float:
    """Uniforme in [0, 1) funzione solo di (seed, counter)"""
    h = hashlib.blake2b(digest_size=8)
    h.update(seed.to_bytes(8, 'little', signed=False))
    h.update(counter.to_bytes(8, 'little', signed=False))
    return (int.from_bytes(h.digest(), 'little') >> 11) * 2.0 ** -53


def sample(d: Distribution, shots: int, seed: int) -> Dict[str, int]:
    """Conteggi per shots estrazioni; lo shot i usa solo (seed, i)"""
    seed = _check_seed(seed)
    if shots < 0:
        raise InputError(f"shots negativo: {shots}")
    if any(p < 0 for p in d.probs.values()):
        raise InputError("distribuzione con probabilita' negative")
    total = d.total()
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise InputError(f"distribuzione non normalizzata: massa totale {total!r}")
    if shots == 0:
        return {}

    keys = sorted(d.probs)
    cdf = np.cumsum([d.probs[k] for k in keys])
    cdf /= cdf[-1]
    draws = np.array([uniform01(seed, i) for i in range(shots)])
    picks = np.minimum(np.searchsorted(cdf, draws, side='right'), len(keys) - 1)

    counts = np.bincount(picks, minlength=len(keys))
    return {keys[i]: int(c) for i, c in enumerate(counts) if c}


# --- Sonde ---

def subspace_leak(state: StateVector, enc: PairEncoding) -> float:
    """Massima ampiezza fuori dal sottospazio codificato"""
    if state.modes != enc.modes:
        raise InputError(f"stato su {state.modes} modi, attesi {enc.modes}")
    outside = state.amplitudes[leaked_indices(enc)]
    return float(np.max(np.abs(outside))) if outside.size else 0.0


def intervening_weight_leak(state: StateVector, gate: GivensGate, expected: int) -> float:
    """Massima ampiezza su stati il cui peso tra p e q differisce da expected"""
    weights = popcount(basis_indices(state.modes) & between_mask(gate.p, gate.q))
    outside = state.amplitudes[weights != expected]
    return float(np.max(np.abs(outside))) if outside.size else 0.0


def particle_number_leak(state: StateVector, count: int) -> float:
    outside = state.amplitudes[popcount(basis_indices(state.modes)) != count]
    return float(np.max(np.abs(outside))) if outside.size else 0.0


class CircuitProbe:
    """Osservatore per simulate_ucj: raccoglie leakage, parita' e numero di particelle"""

    def __init__(self, enc: PairEncoding):
        self.enc = enc
        self.max_leak = 0.0
        self.max_parity = 0.0
        self.max_number = 0.0
        self.steps = 0

    def _record(self, state: StateVector) -> None:
        self.max_leak = max(self.max_leak, subspace_leak(state, self.enc))
        self.max_number = max(self.max_number, particle_number_leak(state, self.enc.n))

    def __call__(self, stage: str, index: int, gate, state: StateVector) -> None:
        self.steps += 1
        self._record(state)
        if stage in ('v', 'v_dag'):
            # V_a agisce su (n-a-1, n+a): in mezzo ci sono a coppie
            alpha = gate.q - self.enc.n
            self.max_parity = max(self.max_parity, intervening_weight_leak(state, gate, alpha))

    def finish(self, state: StateVector) -> None:
        self._record(state)


def measure_compiled_invariants(c: IqpCircuit) -> Dict[str, float]:
    """Scarti misurati per un circuito compilato (confrontati con COMPILED_THRESHOLDS)"""
    compiled = compile_iqp(c)
    enc = PairEncoding(c.n)
    probe = CircuitProbe(enc)
    raw = simulate_ucj(compiled, observer=probe, apply_global_phase=False)
    probe.finish(raw)

    target = iqp_distribution(c)
    decoded, _ = decode_distribution(distribution_from_state(raw), enc)
    phase, residual = compare_states(decode_state(raw, enc), iqp_state(c))

    reversed_v = Ucj1Compiled(compiled.modes, compiled.givens[::-1], compiled.diagonal,
                              compiled.reference_n, compiled.global_phase)
    phased = raw.with_phase(compiled.global_phase)
    v_order = float(np.max(np.abs(simulate_ucj(reversed_v).amplitudes - phased.amplitudes)))

    gaps = {
        'distribution_linf': linf_distance(decoded, target),
        'multiplicative': multiplicative_error(decoded, target) - 1.0,
        'state_residual': residual,
        'phase': math.inf if phase is None else abs(wrap_angle(phase - compiled.global_phase)),
        'leakage': probe.max_leak,
        'parity': probe.max_parity,
        'particle_number': probe.max_number,
        'p_le_q': float(sum(d.p > d.q for d in compiled.diagonal)),
        'v_order': v_order,
    }
    if c.n <= 4:
        exact = np.exp(1j * diagonal_phases(c))
        gaps['diagonal_identity'] = float(np.max(np.abs(reconstruct_diagonal(decompose_diagonal(c), c.n) - exact)))
    return gaps


def random_antisymmetric(modes: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(modes, modes))
    return A - A.T


def givens_round_trip_gap(K: np.ndarray) -> float:
    """max |exp(recover_k(decompose_givens(e^K))) - e^K|"""
    Q = orbital_rotation_matrix(K)
    recovered = recover_k(decompose_givens(Q), Q.shape[0])
    return float(np.max(np.abs(orbital_rotation_matrix(recovered) - Q)))


class PropertyTally:
    """Conteggio pass/totale e caso peggiore per ogni proprieta'"""

    def __init__(self):
        self.properties: Dict[str, Dict] = {}

    def record(self, name: str, gap: float, threshold: float) -> bool:
        entry = self.properties.setdefault(name, {'passed': 0, 'total': 0, 'worst': 0.0, 'threshold': threshold})
        ok = gap < threshold
        entry['total'] += 1
        entry['passed'] += int(ok)
        entry['worst'] = max(entry['worst'], gap)
        if not ok:
            logger.warning(f"Proprieta' {name} violata: scarto {gap:.3e} >= {threshold:.1e}")
        return ok

    def all_passed(self) -> bool:
        return all(e['passed'] == e['total'] for e in self.properties.values())

    def to_dict(self) -> Dict:
        return {name: {k: ('inf' if isinstance(v, float) and math.isinf(v) else v) for k, v in entry.items()}
                for name, entry in self.properties.items()}


def run_invariant_suite(n: int, seed: int, trials: int) -> Dict:
    """Proprieta' del compilatore e dell'ansatz su istanze casuali di n qubit"""
    if n < 1 or trials < 0:
        raise InputError(f"parametri non validi: n={n}, trials={trials}")
    rng = np.random.default_rng(_check_seed(seed))
    tally = PropertyTally()

    for trial in range(trials):
        circuit = random_iqp(n, rng)
        for name, gap in measure_compiled_invariants(circuit).items():
            tally.record(name, gap, COMPILED_THRESHOLDS[name])
        tally.record('givens_round_trip', givens_round_trip_gap(random_antisymmetric(2 * n, rng)), 1e-8)
        if n <= 2:
            _, residual = embed_full_spin(compile_iqp(circuit), compile_iqp(random_iqp(n, rng)))
            tally.record('spin_factorization', residual, 1e-10)
        logger.debug(f"Prova {trial + 1}/{trials} completata")

    return {'n': n, 'seed': seed, 'trials': trials,
            'properties': tally.to_dict(), 'all_passed': tally.all_passed()}


# --- Oracolo ---

def random_gate_sequence(modes: int, length: int, rng: np.random.Generator) -> List[Gate]:
    gates: List[Gate] = []
    for _ in range(length):
        theta = float(rng.uniform(-np.pi, np.pi))
        if modes >= 2 and rng.random() < 0.5:
            p, q = sorted(int(x) for x in rng.choice(modes, size=2, replace=False))
            gates.append(GivensGate(p, q, theta))
        else:
            p = int(rng.integers(modes))
            gates.append(NumberDiagonalGate(p, int(rng.integers(p, modes)), theta))
    return gates


def random_state(modes: int, rng: np.random.Generator) -> StateVector:
    amplitudes = rng.normal(size=1 << modes) + 1j * rng.normal(size=1 << modes)
    return StateVector(modes, amplitudes / np.linalg.norm(amplitudes))


def sector_weights(state: StateVector) -> np.ndarray:
    """Probabilita' per numero di particelle"""
    counts = popcount(basis_indices(state.modes))
    return np.bincount(counts, weights=np.abs(state.amplitudes) ** 2, minlength=state.modes + 1)


def kernel_oracle_gap(gates: Sequence[Gate], modes: int, state: StateVector) -> Dict[str, float]:
    """Scarto L-inf kernel/oracolo, deriva della norma e del numero di particelle"""
    unitary = fock_oracle_unitary(gates, modes)
    current = state
    norm_drift = 0.0
    number_drift = 0.0
    initial_sectors = sector_weights(state)
    for gate in gates:
        current = apply_gate(current, gate)
        norm_drift = max(norm_drift, abs(current.norm() - 1.0))
        number_drift = max(number_drift, float(np.max(np.abs(sector_weights(current) - initial_sectors))))
    oracle = unitary @ state.amplitudes
    return {
        'linf': float(np.max(np.abs(current.amplitudes - oracle))),
        'norm': norm_drift,
        'particle_number': number_drift,
        'oracle_unitarity': float(np.max(np.abs(unitary.conj().T @ unitary - np.eye(1 << modes)))),
    }


def anticommutation_gap(modes: int) -> float:
    """max su p, q di |{a_p, a_q}| e |{a_p, a_q^+} - delta_pq I|"""
    ladders = [jw_dense_ladder(p, modes) for p in range(modes)]
    identity = np.eye(1 << modes)
    worst = 0.0
    for p, a_p in enumerate(ladders):
        for q, a_q in enumerate(ladders):
            a_q_dag = a_q.conj().T
            worst = max(worst, float(np.max(np.abs(a_p @ a_q + a_q @ a_p))))
            expected = identity if p == q else 0.0
            worst = max(worst, float(np.max(np.abs(a_p @ a_q_dag + a_q_dag @ a_p - expected))))
    return worst


def run_oracle_suite(modes: int, gates: int, seed: int, trials: int = 1) -> Dict:
    if modes < 1 or gates < 0 or trials < 1:
        raise InputError(f"parametri non validi: modes={modes}, gates={gates}, trials={trials}")
    rng = np.random.default_rng(_check_seed(seed))
    tally = PropertyTally()
    tolerance = get_config().default_tolerance
    for _ in range(trials):
        sequence = random_gate_sequence(modes, gates, rng)
        gaps = kernel_oracle_gap(sequence, modes, random_state(modes, rng))
        tally.record('kernel_oracle', gaps['linf'], tolerance)
        tally.record('norm', gaps['norm'], 1e-12)
        tally.record('particle_number', gaps['particle_number'], 1e-12)
        tally.record('oracle_unitarity', gaps['oracle_unitarity'], 1e-10)
    checked = min(modes, ANTICOMMUTATION_MAX_MODES)
    tally.record('anticommutation', anticommutation_gap(checked), 1e-12)
    return {'modes': modes, 'gates': gates, 'seed': seed, 'trials': trials,
            'anticommutation_modes': checked,
            'linf_gap': tally.properties['kernel_oracle']['worst'],
            'properties': tally.to_dict(), 'all_passed': tally.all_passed()}


# --- Verifica di una coppia IQP / UCJ ---

def verify_circuits(iqp: IqpCircuit, ucj: Ucj1Compiled, tolerance: Optional[float] = None) -> VerifyReport:
    config = get_config()
    tolerance = config.default_tolerance if tolerance is None else tolerance
    if not tolerance > 0:
        raise InputError(f"tolleranza non positiva: {tolerance}")
    if ucj.modes != 2 * iqp.n:
        raise InputError(f"UCJ su {ucj.modes} modi incompatibile con IQP su {iqp.n} qubit")

    enc = PairEncoding(iqp.n)
    target = iqp_distribution(iqp)
    raw = simulate_ucj(ucj, apply_global_phase=False)
    decoded, leakage = decode_distribution(distribution_from_state(raw), enc, strict=False)
    phase, _ = compare_states(decode_state(raw, enc), iqp_state(iqp))

    # Fase richiesta contro quella dichiarata nel file
    phase_gap = None if phase is None else abs(wrap_angle(phase - ucj.global_phase))
    linf = linf_distance(decoded, target)
    report = VerifyReport(
        linf=linf,
        tvd=total_variation_distance(decoded, target),
        mult_error=multiplicative_error(decoded, target),
        phase=phase,
        leakage=leakage,
        tolerance=tolerance,
        passed=linf <= tolerance and leakage < config.leakage_threshold,
        phase_gap=phase_gap,
    )
    logger.info(f"Verifica: linf={report.linf:.3e}, tvd={report.tvd:.3e}, "
                f"c={report.mult_error:.12g}, leakage={report.leakage:.3e} -> "
                f"{'PASS' if report.passed else 'FAIL'}")
    if phase_gap is not None and phase_gap > tolerance:
        logger.warning(f"global_phase del file {ucj.global_phase:.12g} differisce dalla fase "
                       f"richiesta {phase:.12g} (scarto {phase_gap:.3e})")
    return report


def verify_pair(iqp_file: Union[str, Path], ucj_file: Union[str, Path],
                tolerance: Optional[float] = None) -> VerifyReport:
    return verify_circuits(load_iqp(iqp_file), load_ucj(ucj_file), tolerance)


def hardness_context(mult_error: float) -> str:
    if mult_error < HARDNESS_BOUND:
        return f"c = {mult_error:.6g} < sqrt(2): entro il criterio moltiplicativo"
    return f"c = {mult_error:.6g} >= sqrt(2): fuori dal criterio moltiplicativo"


def report_json(report: VerifyReport) -> str:
    payload = report.to_dict()
    payload['hardness_context'] = hardness_context(report.mult_error)
    return json.dumps(payload, indent=2)
