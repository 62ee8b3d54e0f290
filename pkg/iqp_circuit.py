"""
Circuiti IQP con generatore diagonale quadratico:
    U = H^n exp(i D) H^n,   D = sum_{a<b} w_ab Z_a Z_b + sum_a v_a Z_a

Convenzione sugli indici: il qubit g occupa il bit g dell'indice intero,
le stringhe di visualizzazione stampano b_0 per primo.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np

from jw_fermion import StateVector
from ucj_config import check_capacity, get_config
from ucj_errors import CapacityError, InputError, SchemaError

logger = logging.getLogger(__name__)

# Oltre questa soglia la matrice densa di iqp_unitary non ha senso
DENSE_MAX_QUBITS = 12


def bit_string(index: int, width: int) -> str:
    """Stringa b_0 b_1 ... b_{width-1} dell'indice"""
    return ''.join('1' if (index >> k) & 1 else '0' for k in range(width))


def bit_index(bits: str) -> int:
    """Inverso di bit_string"""
    if any(ch not in '01' for ch in bits):
        raise InputError(f"stringa di bit non valida: {bits!r}")
    return sum(1 << k for k, ch in enumerate(bits) if ch == '1')


@dataclass(frozen=True)
class IqpCircuit:
    n: int
    w: Dict[Tuple[int, int], float] = field(default_factory=dict)
    v: Tuple[float, ...] = ()

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InputError(f"numero di qubit non valido: {self.n!r}")
        v = tuple(float(x) for x in self.v) if len(self.v) else (0.0,) * int(self.n)
        if len(v) != self.n:
            raise InputError(f"v ha lunghezza {len(v)}, attesa {self.n}")
        if not all(math.isfinite(x) for x in v):
            raise InputError("v contiene valori non finiti")

        w = {}
        for key, value in dict(self.w).items():
            a, b = int(key[0]), int(key[1])
            if not 0 <= a < b < self.n:
                raise InputError(f"coppia ({a}, {b}) fuori da 0 <= a < b < {self.n}")
            if not math.isfinite(float(value)):
                raise InputError(f"peso w[{a},{b}] non finito")
            w[(a, b)] = float(value)

        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'v', v)
        object.__setattr__(self, 'w', dict(sorted(w.items())))

    @classmethod
    def from_weights(cls, n: int, v: Iterable[float],
                     weights: Iterable[Tuple[int, int, float]]) -> 'IqpCircuit':
        """Costruisce il circuito accettando le coppie in qualunque ordine.

        w_ab = w_ba: (b, a) viene ricondotta a (a, b); i duplicati sono rifiutati.
        """
        w = {}
        for a, b, value in weights:
            if a == b:
                raise InputError(f"coppia degenere ({a}, {b})")
            key = (min(a, b), max(a, b))
            if key in w:
                raise InputError(f"coppia duplicata {key}")
            w[key] = value
        return cls(n=n, w=w, v=tuple(v))

    def total_coupling(self) -> float:
        return float(sum(self.w.values()))


@dataclass(frozen=True)
class DiagonalSpec:
    v_prime: Tuple[float, ...]
    cp_terms: Tuple[Tuple[int, int, float], ...]
    global_phase: float


@dataclass(frozen=True)
class Distribution:
    """Mappa sparsa stringa di bit -> probabilita'"""
    width: int
    probs: Dict[str, float]

    def __post_init__(self):
        for key in self.probs:
            if len(key) != self.width:
                raise InputError(f"chiave {key!r} di larghezza diversa da {self.width}")

    def get(self, key: str) -> float:
        return self.probs.get(key, 0.0)

    def total(self) -> float:
        return float(sum(self.probs.values()))

    def to_dict(self) -> Dict[str, float]:
        return dict(sorted(self.probs.items()))


def distribution_from_state(state: StateVector) -> Distribution:
    """Probabilita' |amp|^2 sulla base computazionale, forma sparsa"""
    floor = get_config().probability_floor
    probs = np.abs(state.amplitudes) ** 2
    support = np.nonzero(probs > floor)[0]
    return Distribution(state.modes, {bit_string(int(i), state.modes): float(probs[i]) for i in support})


def z_eigenvalues(n: int) -> np.ndarray:
    """Matrice (n, 2^n): z_g = +1 se il bit g e' 0, -1 se e' 1"""
    idx = np.arange(1 << n)
    return np.array([1 - 2 * ((idx >> g) & 1) for g in range(n)], dtype=float)


def diagonal_phases(c: IqpCircuit) -> np.ndarray:
    """Autovalori di D per ogni stato di base"""
    z = z_eigenvalues(c.n)
    phases = np.asarray(c.v) @ z
    for (a, b), value in c.w.items():
        phases = phases + value * z[a] * z[b]
    return phases


def _walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Trasformata di Walsh-Hadamard non normalizzata (butterfly a+b, a-b)"""
    out = np.array(vec, dtype=complex)
    n = out.size.bit_length() - 1
    for k in range(n):
        view = out.reshape(-1, 2, 1 << k)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = a + b
        view[:, 1, :] = a - b
    return out


def iqp_state(c: IqpCircuit) -> StateVector:
    """H^n exp(iD) H^n |0^n>"""
    check_capacity(c.n, "iqp_state")
    amplitudes = _walsh_hadamard(np.exp(1j * diagonal_phases(c))) / (1 << c.n)
    return StateVector(c.n, amplitudes)


def iqp_distribution(c: IqpCircuit) -> Distribution:
    return distribution_from_state(iqp_state(c))


def iqp_unitary(c: IqpCircuit) -> np.ndarray:
    """Matrice densa di H^n exp(iD) H^n"""
    if c.n > DENSE_MAX_QUBITS:
        raise CapacityError(f"iqp_unitary: {c.n} qubit oltre il limite denso di {DENSE_MAX_QUBITS}")
    idx = np.arange(1 << c.n)
    signs = np.ones((1 << c.n, 1 << c.n))
    for g in range(c.n):
        bits = (idx >> g) & 1
        signs *= 1 - 2 * np.outer(bits, bits)
    hadamard = signs / math.sqrt(1 << c.n)
    return hadamard @ np.diag(np.exp(1j * diagonal_phases(c))) @ hadamard


def decompose_diagonal(c: IqpCircuit) -> DiagonalSpec:
    """exp(iD) = exp(i phi) prod_a exp(i v'_a Z_a) prod_{a<b} CP_ab(4 w_ab)

    con z_a z_b = (1-z_a)(1-z_b) - 1 + z_a + z_b; (1-z)(1-z) vale 4 solo su |11>.
    """
    v_prime = list(c.v)
    cp_terms = []
    for (a, b), value in c.w.items():
        v_prime[a] += value
        v_prime[b] += value
        cp_terms.append((a, b, 4.0 * value))
    spec = DiagonalSpec(tuple(v_prime), tuple(cp_terms), -c.total_coupling())
    logger.debug(f"Decomposizione diagonale: {len(cp_terms)} CP, fase globale {spec.global_phase:.6f}")
    return spec


def reconstruct_diagonal(spec: DiagonalSpec, n: int) -> np.ndarray:
    """Diagonale complessa del prodotto fattorizzato, per il confronto con exp(iD)"""
    z = z_eigenvalues(n)
    phases = np.full(1 << n, spec.global_phase) + np.asarray(spec.v_prime) @ z
    ones = (1 - z) / 2
    for a, b, theta in spec.cp_terms:
        phases = phases + theta * ones[a] * ones[b]
    return np.exp(1j * phases)


def random_iqp(n: int, seed: Union[int, np.random.Generator], density: float = 1.0) -> IqpCircuit:
    """Circuito IQP casuale con angoli uniformi in (-pi, pi]"""
    if not 0.0 <= density <= 1.0:
        raise InputError(f"densita' {density} fuori da [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    # pi - U[0, 2pi) sta in (-pi, pi]
    v = np.pi - rng.uniform(0.0, 2 * np.pi, size=n)
    w = {}
    for a in range(n):
        for b in range(a + 1, n):
            include = rng.random() < density
            value = np.pi - rng.uniform(0.0, 2 * np.pi)
            if include:
                w[(a, b)] = float(value)
    return IqpCircuit(n=n, w=w, v=tuple(float(x) for x in v))


# --- Formato JSON ---

def iqp_to_dict(c: IqpCircuit) -> Dict:
    return {
        'n': c.n,
        'v': list(c.v),
        'w': [{'a': a, 'b': b, 'val': value} for (a, b), value in c.w.items()],
    }


def _require(data: Dict, key: str, kind):
    if key not in data:
        raise SchemaError(key, "mancante")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaError(key, f"tipo non valido ({type(value).__name__})")
    return value


def _finite_real(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(field, f"tipo non valido ({type(value).__name__})")
    try:
        x = float(value)
    except OverflowError as e:
        raise SchemaError(field, "intero troppo grande per un float") from e
    if not math.isfinite(x):
        raise SchemaError(field, "atteso un numero finito")
    return x


def iqp_from_dict(data: Dict) -> IqpCircuit:
    if not isinstance(data, dict):
        raise SchemaError("<root>", "atteso un oggetto JSON")
    n = _require(data, 'n', int)
    if n < 1:
        raise SchemaError('n', f"deve essere >= 1, trovato {n}")
    v = _require(data, 'v', list)
    if len(v) != n:
        raise SchemaError('v', f"lunghezza {len(v)}, attesa {n}")
    v = [_finite_real(x, f"v[{i}]") for i, x in enumerate(v)]

    w = {}
    for i, term in enumerate(_require(data, 'w', list)):
        if not isinstance(term, dict):
            raise SchemaError(f'w[{i}]', "atteso un oggetto")
        a = _require(term, 'a', int)
        b = _require(term, 'b', int)
        value = _finite_real(_require(term, 'val', (int, float)), f"w[{i}].val")
        if not 0 <= a < b < n:
            raise SchemaError(f'w[{i}]', f"richiesto 0 <= a < b < n, trovato a={a}, b={b}")
        if (a, b) in w:
            raise SchemaError(f'w[{i}]', f"coppia duplicata ({a}, {b})")
        w[(a, b)] = value

    return IqpCircuit(n=n, w=w, v=tuple(v))


def iqp_dumps(c: IqpCircuit) -> str:
    return json.dumps(iqp_to_dict(c), indent=2)


def load_iqp(path: Union[str, Path]) -> IqpCircuit:
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("<root>", f"JSON malformato: {e}") from e
    circuit = iqp_from_dict(data)
    logger.debug(f"IQP caricato da {path}: n={circuit.n}, {len(circuit.w)} accoppiamenti")
    return circuit


def save_iqp(c: IqpCircuit, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(iqp_dumps(c) + '\n')
