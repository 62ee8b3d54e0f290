"""
Ansatz 1-UCJ e classe ristretta 1-UCJ'.

    U = exp(-K) exp(J) exp(K),  exp(K) = prodotto di R_pq,  exp(J) = prod_{p<=q} D_pq

Convenzione a un corpo: R_pq(theta) agisce sulle coordinate dei modi come
exp(theta (e_pq - e_qp)), cioe' Q[p, q] = +sin(theta). Una schedule applicata
nell'ordine g_1, ..., g_k corrisponde a Q = Q_k ... Q_1.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from jw_fermion import (GivensGate, NumberDiagonalGate, StateVector, apply_givens,
                        apply_number_diagonal, fock_oracle_unitary, reference_state)
from ucj_config import check_capacity
from ucj_errors import InputError, SchemaError

logger = logging.getLogger(__name__)

ANTISYMMETRY_TOLERANCE = 1e-12
ORTHOGONALITY_TOLERANCE = 1e-8
# Sotto questa soglia un elemento e' gia' eliminato
ELIMINATION_SKIP = 1e-14

Observer = Callable[[str, int, object, StateVector], None]


@dataclass(frozen=True)
class UcjParams:
    """K reale antisimmetrica, theta triangolare superiore (p <= q)"""
    modes: int
    K: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        shape = (self.modes, self.modes)
        if K.shape != shape or theta.shape != shape:
            raise InputError(f"K e theta devono essere {shape}")
        if not np.array_equal(K.T, -K):
            raise InputError("K non e' antisimmetrica")
        if np.any(np.tril(theta, -1) != 0):
            raise InputError("theta definita solo per p <= q")
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(theta))):
            raise InputError("parametri non finiti")
        object.__setattr__(self, 'K', K)
        object.__setattr__(self, 'theta', theta)

    @property
    def J(self) -> np.ndarray:
        """J_pp = i theta_pp, J_pq = J_qp = i theta_pq / 2"""
        upper = np.triu(self.theta, 1) / 2
        return 1j * (np.diag(np.diag(self.theta)) + upper + upper.T)


@dataclass(frozen=True)
class Ucj1Compiled:
    modes: int
    givens: Tuple[GivensGate, ...]
    diagonal: Tuple[NumberDiagonalGate, ...]
    reference_n: int
    global_phase: float = 0.0

    def __post_init__(self):
        if isinstance(self.reference_n, bool) or not isinstance(self.reference_n, int) or self.reference_n < 1:
            raise InputError(f"reference_n non valido: {self.reference_n!r}")
        if self.modes != 2 * self.reference_n:
            raise InputError(f"modes={self.modes} diverso da 2 * reference_n={2 * self.reference_n}")
        if not math.isfinite(self.global_phase):
            raise InputError("fase globale non finita")
        object.__setattr__(self, 'givens', tuple(self.givens))
        object.__setattr__(self, 'diagonal', tuple(self.diagonal))
        for gate in self.givens + self.diagonal:
            gate.check_modes(self.modes)

    def is_restricted(self) -> bool:
        """True se le rotazioni sono esattamente la schedule V"""
        return self.givens == tuple(givens_schedule_v(self.reference_n))

    def gate_sequence(self) -> List:
        return list(self.givens) + list(self.diagonal) + [g.adjoint() for g in reversed(self.givens)]


def givens_schedule_v(n: int) -> List[GivensGate]:
    """V_a = R_{n-a-1, n+a}((-1)^{a+1} pi/4), V_{n-1} applicata per prima"""
    if n < 1:
        raise InputError(f"n deve essere >= 1, trovato {n}")
    return [GivensGate(n - alpha - 1, n + alpha, math.pi / 4 if alpha % 2 else -math.pi / 4)
            for alpha in reversed(range(n))]


def simulate_ucj(c: Ucj1Compiled, observer: Optional[Observer] = None,
                 apply_global_phase: bool = True) -> StateVector:
    """V, poi le diagonali, poi V^+ in ordine inverso, sullo stato di riferimento.

    observer(stage, indice, porta, stato) viene chiamato prima di ogni porta.
    """
    check_capacity(c.modes, "simulate_ucj")
    state = reference_state(c.reference_n)

    for i, gate in enumerate(c.givens):
        if observer:
            observer("v", i, gate, state)
        state = apply_givens(state, gate)
    for i, gate in enumerate(c.diagonal):
        if observer:
            observer("diag", i, gate, state)
        state = apply_number_diagonal(state, gate)
    for i, gate in enumerate(reversed(c.givens)):
        adjoint = gate.adjoint()
        if observer:
            observer("v_dag", i, adjoint, state)
        state = apply_givens(state, adjoint)

    if apply_global_phase and c.global_phase:
        state = state.with_phase(c.global_phase)
    return state


def ucj_unitary(c: Ucj1Compiled) -> np.ndarray:
    """Unitaria densa del circuito (oracolo di Fock), fase globale inclusa"""
    return np.exp(1j * c.global_phase) * fock_oracle_unitary(c.gate_sequence(), c.modes)


def v_gate_effective_matrix(n: int, alpha: int) -> np.ndarray:
    """Azione 2x2 di V_a su (|0>_a, |1>_a) con le altre coppie in |0>.

    Il blocco intermedio ha peso a, quindi il risultato e' R_y(-pi/2) = ZH.
    """
    if not 0 <= alpha < n:
        raise InputError(f"alpha={alpha} fuori da [0, {n})")
    upper, lower = n - alpha - 1, n + alpha
    gate = givens_schedule_v(n)[n - 1 - alpha]
    zero_bar = int(reference_state(n).support()[0])
    one_bar = zero_bar ^ ((1 << upper) | (1 << lower))
    rows = [zero_bar, one_bar]
    columns = [apply_givens(StateVector.basis(2 * n, index), gate).amplitudes[rows] for index in rows]
    return np.array(columns).T


# --- Matrici a un corpo ---

def givens_matrix(gate: GivensGate, modes: int) -> np.ndarray:
    gate.check_modes(modes)
    c, s = math.cos(gate.theta), math.sin(gate.theta)
    matrix = np.eye(modes)
    matrix[gate.p, gate.p] = c
    matrix[gate.q, gate.q] = c
    matrix[gate.p, gate.q] = s
    matrix[gate.q, gate.p] = -s
    return matrix


def schedule_matrix(gates: Sequence[GivensGate], modes: int) -> np.ndarray:
    """Q = Q_k ... Q_1 per la schedule applicata nell'ordine g_1, ..., g_k"""
    matrix = np.eye(modes)
    for gate in gates:
        matrix = givens_matrix(gate, modes) @ matrix
    return matrix


def orbital_rotation_matrix(K: np.ndarray) -> np.ndarray:
    """Q = exp(K) per K reale antisimmetrica"""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"K deve essere quadrata, forma {K.shape}")
    asymmetry = float(np.max(np.abs(K + K.T))) if K.size else 0.0
    if asymmetry > ANTISYMMETRY_TOLERANCE:
        raise InputError(f"K non antisimmetrica (scarto {asymmetry:.2e})")
    return scipy.linalg.expm(K)


def decompose_givens(Q: np.ndarray) -> List[GivensGate]:
    """Schedule di Givens che riproduce Q ortogonale con det +1.

    Eliminazione triangolare colonna per colonna: G_k ... G_1 Q = I,
    quindi la schedule e' G_k^+, ..., G_1^+ nell'ordine di applicazione.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InputError(f"Q deve essere quadrata, forma {Q.shape}")
    modes = Q.shape[0]
    deviation = float(np.max(np.abs(Q.T @ Q - np.eye(modes))))
    if deviation > ORTHOGONALITY_TOLERANCE:
        raise InputError(f"Q non ortogonale (scarto {deviation:.2e})")
    if np.linalg.det(Q) < 0:
        raise InputError("Q e' una riflessione (det -1)")

    work = Q.copy()
    eliminations = []
    for j in range(modes - 1):
        for i in range(j + 1, modes):
            a, b = work[j, j], work[i, j]
            if abs(b) <= ELIMINATION_SKIP and a >= 0:
                continue
            gate = GivensGate(j, i, math.atan2(b, a))
            work = givens_matrix(gate, modes) @ work
            eliminations.append(gate)

    schedule = [gate.adjoint() for gate in reversed(eliminations)]
    logger.debug(f"Decomposizione di Givens: {len(schedule)} rotazioni su {modes} modi")
    return schedule


def recover_k(gates: Sequence[GivensGate], modes: int) -> np.ndarray:
    """K antisimmetrica con exp(K) = prodotto della schedule.

    Logaritmo tramite forma di Schur reale: blocchi 2x2 di rotazione con angolo
    nel ramo principale (-pi, pi]; coppie di autovalori -1 diventano rotazioni di pi
    (ambiguita' segnalata nel log).
    """
    Q = schedule_matrix(gates, modes)
    if modes == 0:
        return np.zeros((0, 0))
    T, Z = scipy.linalg.schur(Q, output='real')

    L = np.zeros((modes, modes))
    negatives = []
    idx = 0
    while idx < modes:
        if idx < modes - 1 and abs(T[idx + 1, idx]) > ANTISYMMETRY_TOLERANCE:
            sin_part = (T[idx + 1, idx] - T[idx, idx + 1]) / 2
            cos_part = (T[idx, idx] + T[idx + 1, idx + 1]) / 2
            angle = math.atan2(sin_part, cos_part)
            if abs(abs(angle) - math.pi) < 1e-9:
                logger.warning(f"Rotazione di angolo ~pi nel blocco {idx}: ramo principale")
            L[idx, idx + 1] = -angle
            L[idx + 1, idx] = angle
            idx += 2
        else:
            if T[idx, idx] < 0:
                negatives.append(idx)
            idx += 1

    if len(negatives) % 2:
        raise InputError("numero dispari di autovalori -1: non e' una rotazione")
    if negatives:
        logger.warning(f"Autovalori -1 in {len(negatives)} direzioni: scelto l'angolo pi")
    for i, j in zip(negatives[::2], negatives[1::2]):
        L[i, j] = -math.pi
        L[j, i] = math.pi

    K = Z @ L @ Z.T
    return (K - K.T) / 2


def params_from_compiled(c: Ucj1Compiled) -> UcjParams:
    theta = np.zeros((c.modes, c.modes))
    for gate in c.diagonal:
        theta[gate.p, gate.q] += gate.theta
    return UcjParams(c.modes, recover_k(c.givens, c.modes), theta)


def compiled_from_params(params: UcjParams, reference_n: int) -> Ucj1Compiled:
    """Circuito con rotazioni da decompose_givens(exp(K)) e diagonali theta != 0"""
    givens = decompose_givens(orbital_rotation_matrix(params.K))
    diagonal = [NumberDiagonalGate(p, q, params.theta[p, q])
                for p in range(params.modes) for q in range(p, params.modes)
                if params.theta[p, q] != 0.0]
    return Ucj1Compiled(params.modes, tuple(givens), tuple(diagonal), reference_n)


def embed_full_spin(up: Ucj1Compiled, down: Ucj1Compiled) -> Tuple[StateVector, float]:
    """Circuito sui 4n modi (up 0..2n-1, down 2n..4n-1) con J incrociato nullo.

    Restituisce lo stato completo e lo scarto L-inf rispetto a down (x) up.
    """
    if up.reference_n != down.reference_n:
        raise InputError(f"settori con n diversi: {up.reference_n} e {down.reference_n}")
    offset = up.modes
    modes = 2 * offset
    check_capacity(modes, "embed_full_spin")

    sector_reference = int(reference_state(up.reference_n).support()[0])
    state = StateVector.basis(modes, sector_reference | (sector_reference << offset))
    for sector, shift in ((up, 0), (down, offset)):
        for gate in sector.gate_sequence():
            gate = gate.shifted(shift)
            if isinstance(gate, GivensGate):
                state = apply_givens(state, gate)
            else:
                state = apply_number_diagonal(state, gate)
    state = state.with_phase(up.global_phase + down.global_phase)

    # Indice completo = indice_up + 2^(2n) indice_down
    product = np.kron(simulate_ucj(down).amplitudes, simulate_ucj(up).amplitudes)
    residual = float(np.max(np.abs(state.amplitudes - product)))
    logger.debug(f"Fattorizzazione di spin: residuo {residual:.3e}")
    return state, residual


# --- Formato JSON ---

def ucj_to_dict(c: Ucj1Compiled) -> Dict:
    return {
        'modes': c.modes,
        'reference_n': c.reference_n,
        'givens': [g.to_dict() for g in c.givens],
        'diagonal': [d.to_dict() for d in sorted(c.diagonal, key=lambda d: (d.p, d.q))],
        'global_phase': c.global_phase,
    }


def _field(data: Dict, key: str, kind, where: str = ''):
    name = f"{where}{key}"
    if not isinstance(data, dict):
        raise SchemaError(where.rstrip('.') or "<root>", "atteso un oggetto")
    if key not in data:
        raise SchemaError(name, "mancante")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaError(name, f"tipo non valido ({type(value).__name__})")
    if isinstance(value, (int, float)):
        try:
            finite = math.isfinite(value)
        except OverflowError as e:
            raise SchemaError(name, "intero troppo grande per un float") from e
        if not finite:
            raise SchemaError(name, "atteso un numero finito")
    return value


def ucj_from_dict(data: Dict) -> Ucj1Compiled:
    modes = _field(data, 'modes', int)
    reference_n = _field(data, 'reference_n', int)
    if reference_n < 1 or modes != 2 * reference_n:
        raise SchemaError('modes', f"atteso 2 * reference_n, trovato modes={modes}, reference_n={reference_n}")

    gates = {}
    for key, kind in (('givens', GivensGate), ('diagonal', NumberDiagonalGate)):
        items = []
        for i, entry in enumerate(_field(data, key, list)):
            where = f"{key}[{i}]."
            p = _field(entry, 'p', int, where)
            q = _field(entry, 'q', int, where)
            theta = _field(entry, 'theta', (int, float), where)
            if q >= modes:
                raise SchemaError(f"{key}[{i}]", f"modo {q} fuori da {modes}")
            try:
                items.append(kind(p, q, float(theta)))
            except InputError as e:
                raise SchemaError(f"{key}[{i}]", str(e)) from e
        gates[key] = tuple(items)

    global_phase = _field(data, 'global_phase', (int, float))
    return Ucj1Compiled(modes, gates['givens'], gates['diagonal'], reference_n, float(global_phase))


def ucj_dumps(c: Ucj1Compiled) -> str:
    return json.dumps(ucj_to_dict(c), indent=2)


def load_ucj(path: Union[str, Path]) -> Ucj1Compiled:
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("<root>", f"JSON malformato: {e}") from e
    circuit = ucj_from_dict(data)
    logger.debug(f"UCJ caricato da {path}: {circuit.modes} modi, "
                 f"{len(circuit.givens)} Givens, {len(circuit.diagonal)} diagonali")
    return circuit


def save_ucj(c: Ucj1Compiled, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(ucj_dumps(c) + '\n')
