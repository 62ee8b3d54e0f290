"""
Compilazione IQP -> 1-UCJ' tramite la codifica a coppie:
    |0>_a = |0>_{n-a-1} |1>_{n+a},   |1>_a = |1>_{n-a-1} |0>_{n+a}

Gadget usati:
    F_a(-2 v'_a) = D_{n-a-1,n-a-1}(-v'_a) D_{n+a,n+a}(+v'_a)  ->  exp(i v'_a Z_a)
    D_{n-b-1,n-a-1}(4 w_ab)                                   ->  CP_ab(4 w_ab)
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from iqp_circuit import Distribution, IqpCircuit, decompose_diagonal
from jw_fermion import NumberDiagonalGate, StateVector, basis_indices
from ucj_ansatz import Ucj1Compiled, givens_schedule_v
from ucj_config import get_config
from ucj_errors import InputError, LeakageError, SubspaceViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairEncoding:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InputError(f"n deve essere >= 1, trovato {self.n!r}")

    @property
    def modes(self) -> int:
        return 2 * self.n

    def pair(self, alpha: int) -> Tuple[int, int]:
        """(modo superiore n-a-1, modo inferiore n+a)"""
        if not 0 <= alpha < self.n:
            raise InputError(f"qubit IQP {alpha} fuori da [0, {self.n})")
        return self.n - alpha - 1, self.n + alpha

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(self.pair(alpha) for alpha in range(self.n))

    def coded_indices(self) -> np.ndarray:
        """Indice a 2n modi di ogni stato di base IQP (ordinati per indice IQP)"""
        xbar = np.arange(1 << self.n, dtype=np.int64)
        indices = np.zeros_like(xbar)
        for alpha, (upper, lower) in enumerate(self.pairs):
            bit = (xbar >> alpha) & 1
            indices |= np.where(bit == 1, 1 << upper, 1 << lower)
        return indices

    def valid_mask(self) -> np.ndarray:
        """True sugli stati di base con esattamente un'eccitazione per coppia"""
        mask = np.zeros(1 << self.modes, dtype=bool)
        mask[self.coded_indices()] = True
        return mask


def compile_iqp(c: IqpCircuit) -> Ucj1Compiled:
    """Circuito 1-UCJ' equivalente su 2n modi, con fase globale tracciata"""
    n = c.n
    encoding = PairEncoding(n)
    spec = decompose_diagonal(c)

    diagonal = []
    for alpha, v_prime in enumerate(spec.v_prime):
        upper, lower = encoding.pair(alpha)
        diagonal.append(NumberDiagonalGate(upper, upper, -v_prime))
        diagonal.append(NumberDiagonalGate(lower, lower, v_prime))
    for alpha, beta, theta in spec.cp_terms:
        # modi superiori: n-b-1 < n-a-1 per a < b
        diagonal.append(NumberDiagonalGate(n - beta - 1, n - alpha - 1, theta))

    compiled = Ucj1Compiled(
        modes=2 * n,
        givens=tuple(givens_schedule_v(n)),
        diagonal=tuple(diagonal),
        reference_n=n,
        global_phase=spec.global_phase,
    )
    logger.debug(f"Compilato IQP n={n}: {len(compiled.givens)} Givens, {len(diagonal)} diagonali")
    return compiled


def violating_pairs(bits: str, enc: PairEncoding) -> list:
    return [alpha for alpha, (upper, lower) in enumerate(enc.pairs)
            if int(bits[upper]) + int(bits[lower]) != 1]


def decode_outcome(bits: str, enc: PairEncoding) -> str:
    """Esito a 2n bit -> esito IQP a n bit (x_a = b_{n-a-1})"""
    if len(bits) != enc.modes or any(ch not in '01' for ch in bits):
        raise InputError(f"attesa stringa di {enc.modes} bit, trovata {bits!r}")
    bad = violating_pairs(bits, enc)
    if bad:
        raise SubspaceViolation(bits, bad)
    return ''.join(bits[upper] for upper, _ in enc.pairs)


def decode_distribution(d: Distribution, enc: PairEncoding = None, renormalize: bool = True,
                        strict: bool = True) -> Tuple[Distribution, float]:
    """Distribuzione su 2n bit -> distribuzione su n bit piu' la massa fuori codice.

    strict: leakage oltre soglia solleva LeakageError invece di essere solo riportato.
    """
    if enc is None:
        if d.width % 2:
            raise InputError(f"larghezza {d.width} dispari")
        enc = PairEncoding(d.width // 2)
    if d.width != enc.modes:
        raise InputError(f"larghezza {d.width} diversa da {enc.modes}")

    threshold = get_config().leakage_threshold
    decoded: Dict[str, float] = {}
    leakage = 0.0
    for bits, prob in d.probs.items():
        try:
            key = decode_outcome(bits, enc)
        except SubspaceViolation:
            leakage += prob
            continue
        decoded[key] = decoded.get(key, 0.0) + prob

    if leakage >= threshold:
        if strict:
            raise LeakageError(leakage, threshold)
        logger.warning(f"Leakage {leakage:.3e} oltre la soglia, distribuzione non rinormalizzata")
    elif leakage > 0:
        log = logger.warning if leakage > 1e-12 else logger.debug
        log(f"Leakage {leakage:.3e} sotto soglia, rinormalizzo")
        if renormalize:
            decoded = {key: prob / (1.0 - leakage) for key, prob in decoded.items()}
    return Distribution(enc.n, decoded), leakage


def decode_state(state: StateVector, enc: PairEncoding) -> StateVector:
    """Ampiezze sul sottospazio codificato come stato a n qubit (non rinormalizzato)"""
    if state.modes != enc.modes:
        raise InputError(f"stato su {state.modes} modi, attesi {enc.modes}")
    return StateVector(enc.n, state.amplitudes[enc.coded_indices()])


def coded_operator(gates: Sequence[NumberDiagonalGate], n: int) -> np.ndarray:
    """Diagonale a n qubit indotta da porte D_pq ristrette al sottospazio codificato"""
    enc = PairEncoding(n)
    indices = enc.coded_indices()
    phases = np.zeros(indices.size)
    for gate in gates:
        gate.check_modes(enc.modes)
        mask = (1 << gate.p) | (1 << gate.q)
        phases += np.where((indices & mask) == mask, gate.theta, 0.0)
    return np.exp(1j * phases)


def leaked_indices(enc: PairEncoding) -> np.ndarray:
    return basis_indices(enc.modes)[~enc.valid_mask()]
