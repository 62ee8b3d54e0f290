"""
Kernel Jordan-Wigner su statevector e oracolo denso nello spazio di Fock.

Convenzioni:
- il modo g occupa il bit g dell'indice (|b_0 b_1 ...>, b_0 bit meno significativo)
- a_p porta la stringa Z sui modi 0..p-1, quindi il segno di R_pq dipende
  dalla parita' dei bit strettamente compresi tra p e q
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
import scipy.linalg

from ucj_config import check_capacity
from ucj_errors import InputError

logger = logging.getLogger(__name__)


def _check_mode(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InputError(f"indice di modo {name} non intero: {value!r}")
    return int(value)


def _check_angle(theta) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise InputError(f"angolo non finito: {theta}")
    return theta


@dataclass(frozen=True)
class GivensGate:
    """R_pq(theta) = exp[theta (a_p^+ a_q - a_q^+ a_p)], p < q"""
    p: int
    q: int
    theta: float

    def __post_init__(self):
        p, q = _check_mode(self.p, 'p'), _check_mode(self.q, 'q')
        if not 0 <= p < q:
            raise InputError(f"Givens richiede 0 <= p < q, trovato p={p}, q={q}")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'theta', _check_angle(self.theta))

    def adjoint(self) -> 'GivensGate':
        return GivensGate(self.p, self.q, -self.theta)

    def shifted(self, offset: int) -> 'GivensGate':
        return GivensGate(self.p + offset, self.q + offset, self.theta)

    def check_modes(self, modes: int) -> None:
        if self.q >= modes:
            raise InputError(f"Givens ({self.p}, {self.q}) fuori da {modes} modi")

    def to_dict(self) -> Dict:
        return {'p': self.p, 'q': self.q, 'theta': self.theta}


@dataclass(frozen=True)
class NumberDiagonalGate:
    """D_pq(theta) = exp(i theta n_p n_q), p <= q"""
    p: int
    q: int
    theta: float

    def __post_init__(self):
        p, q = _check_mode(self.p, 'p'), _check_mode(self.q, 'q')
        if not 0 <= p <= q:
            raise InputError(f"diagonale richiede 0 <= p <= q, trovato p={p}, q={q}")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'theta', _check_angle(self.theta))

    def shifted(self, offset: int) -> 'NumberDiagonalGate':
        return NumberDiagonalGate(self.p + offset, self.q + offset, self.theta)

    def check_modes(self, modes: int) -> None:
        if self.q >= modes:
            raise InputError(f"diagonale ({self.p}, {self.q}) fuori da {modes} modi")

    def to_dict(self) -> Dict:
        return {'p': self.p, 'q': self.q, 'theta': self.theta}


Gate = Union[GivensGate, NumberDiagonalGate]


@dataclass
class StateVector:
    modes: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.modes,):
            raise InputError(f"attese {1 << self.modes} ampiezze, trovate {self.amplitudes.shape}")

    @classmethod
    def basis(cls, modes: int, index: int) -> 'StateVector':
        check_capacity(modes)
        amplitudes = np.zeros(1 << modes, dtype=complex)
        amplitudes[index] = 1.0
        return cls(modes, amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_phase(self, phase: float) -> 'StateVector':
        return StateVector(self.modes, self.amplitudes * np.exp(1j * phase))

    def support(self, threshold: float = 0.0) -> np.ndarray:
        return np.nonzero(np.abs(self.amplitudes) > threshold)[0]


@functools.lru_cache(maxsize=32)
def basis_indices(modes: int) -> np.ndarray:
    idx = np.arange(1 << modes, dtype=np.int64)
    idx.flags.writeable = False
    return idx


def popcount(values: np.ndarray) -> np.ndarray:
    """Peso di Hamming elemento per elemento"""
    values = np.array(values, dtype=np.int64)
    count = np.zeros_like(values)
    while values.any():
        count += values & 1
        values >>= 1
    return count


def between_mask(p: int, q: int) -> int:
    """Maschera dei bit strettamente compresi tra p e q"""
    return ((1 << q) - 1) ^ ((1 << (p + 1)) - 1)


def reference_state(n: int) -> StateVector:
    """|0_0 ... 0_{n-1} 1_n ... 1_{2n-1}>"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InputError(f"riempimento non valido: {n!r}")
    check_capacity(2 * n, "reference_state")
    index = ((1 << (2 * n)) - 1) ^ ((1 << n) - 1)
    return StateVector.basis(2 * n, index)


def apply_givens(state: StateVector, gate: GivensGate) -> StateVector:
    """Applica R_pq con il segno (-1)^w(b) calcolato per ogni stato di base"""
    gate.check_modes(state.modes)
    p_mask, q_mask = 1 << gate.p, 1 << gate.q
    idx = basis_indices(state.modes)
    x = idx[((idx & p_mask) == 0) & ((idx & q_mask) != 0)]
    y = x ^ (p_mask | q_mask)
    sign = 1 - 2 * (popcount(x & between_mask(gate.p, gate.q)) & 1)

    c, s = math.cos(gate.theta), math.sin(gate.theta)
    amplitudes = state.amplitudes
    out = amplitudes.copy()
    ax, ay = amplitudes[x], amplitudes[y]
    out[x] = c * ax - sign * s * ay
    out[y] = sign * s * ax + c * ay
    return StateVector(state.modes, out)


def apply_number_diagonal(state: StateVector, gate: NumberDiagonalGate) -> StateVector:
    """Fase exp(i theta) sugli stati con b_p = b_q = 1 (b_p = 1 se p == q)"""
    gate.check_modes(state.modes)
    mask = (1 << gate.p) | (1 << gate.q)
    idx = basis_indices(state.modes)
    out = state.amplitudes.copy()
    out[(idx & mask) == mask] *= np.exp(1j * gate.theta)
    return StateVector(state.modes, out)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    if isinstance(gate, GivensGate):
        return apply_givens(state, gate)
    return apply_number_diagonal(state, gate)


def apply_gates(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def restricted_givens_matrix(gate: GivensGate, modes: int, parity: int) -> np.ndarray:
    """Matrice 4x4 di R_pq su (|0 b 0>, |0 b 1>, |1 b 0>, |1 b 1>) per b di parita' fissata.

    Ogni configurazione b con la parita' richiesta (bit fuori da [p, q] a zero)
    viene simulata dal kernel; configurazioni discordi sono un errore.
    """
    gate.check_modes(modes)
    p, q = gate.p, gate.q
    inner = list(range(p + 1, q))
    configurations = []
    for combo in range(1 << len(inner)):
        if bin(combo).count('1') % 2 != parity % 2:
            continue
        configurations.append(sum(1 << inner[k] for k in range(len(inner)) if (combo >> k) & 1))
    if not configurations:
        raise InputError(f"nessuna configurazione intermedia di parita' {parity} tra {p} e {q}")

    reference = None
    for b in configurations:
        columns = []
        rows = [b, b | (1 << q), b | (1 << p), b | (1 << p) | (1 << q)]
        for index in rows:
            out = apply_givens(StateVector.basis(modes, index), gate)
            columns.append(out.amplitudes[rows])
        matrix = np.array(columns).T
        if reference is None:
            reference = matrix
        elif not np.allclose(matrix, reference, atol=1e-14, rtol=0.0):
            raise InputError(f"la matrice di R_{p}{q} dipende da b oltre la parita'")
    return reference


# --- Oracolo denso ---

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
_IDENTITY_2 = np.eye(2, dtype=complex)


def jw_dense_ladder(p: int, modes: int) -> np.ndarray:
    """a_p = Z_0 ... Z_{p-1} (X_p + iY_p)/2 come matrice densa 2^m x 2^m"""
    check_capacity(modes, "oracolo denso", oracle=True)
    if not 0 <= p < modes:
        raise InputError(f"modo {p} fuori da {modes} modi")
    # Il modo 0 e' il bit meno significativo: ultimo fattore del prodotto di Kronecker
    factors = []
    for mode in reversed(range(modes)):
        if mode < p:
            factors.append(_PAULI_Z)
        elif mode == p:
            factors.append(_SIGMA_MINUS)
        else:
            factors.append(_IDENTITY_2)
    return functools.reduce(np.kron, factors)


def gate_generator(gate: Gate, ladders: Sequence[np.ndarray]) -> np.ndarray:
    """Generatore denso: theta(a_p^+ a_q - a_q^+ a_p) oppure i theta n_p n_q"""
    a_p, a_q = ladders[gate.p], ladders[gate.q]
    if isinstance(gate, GivensGate):
        hopping = a_p.conj().T @ a_q
        return gate.theta * (hopping - hopping.conj().T)
    n_p = a_p.conj().T @ a_p
    n_q = a_q.conj().T @ a_q
    return 1j * gate.theta * (n_p @ n_q)


def fock_oracle_unitary(gates: Sequence[Gate], modes: int) -> np.ndarray:
    """Prodotto in ordine di applicazione degli esponenziali densi dei generatori"""
    check_capacity(modes, "oracolo denso", oracle=True)
    ladders: List[np.ndarray] = [jw_dense_ladder(p, modes) for p in range(modes)]
    unitary = np.eye(1 << modes, dtype=complex)
    for gate in gates:
        gate.check_modes(modes)
        unitary = scipy.linalg.expm(gate_generator(gate, ladders)) @ unitary
    logger.debug(f"Oracolo denso: {len(gates)} porte su {modes} modi")
    return unitary
