"""
Configurazione del simulatore: budget di memoria, soglie numeriche.
Il file ucj_compiler_config.json nella directory dello script, se presente,
sovrascrive i valori di default.
"""

import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from ucj_errors import CapacityError, SchemaError

logger = logging.getLogger(__name__)

CONFIG_FILENAME = "ucj_compiler_config.json"

# Limite fisso dell'oracolo denso (4096 x 4096)
ORACLE_MAX_MODES = 12


@dataclass(frozen=True)
class SimulationConfig:
    max_modes: int = 24
    oracle_max_modes: int = ORACLE_MAX_MODES
    zero_threshold: float = 1e-14
    leakage_threshold: float = 1e-9
    probability_floor: float = 1e-16
    default_tolerance: float = 1e-10

    def __post_init__(self):
        if self.max_modes < 1:
            raise SchemaError("max_modes", "deve essere positivo")
        if not 1 <= self.oracle_max_modes <= ORACLE_MAX_MODES:
            raise SchemaError("oracle_max_modes", f"deve stare in [1, {ORACLE_MAX_MODES}]")
        for name in ("zero_threshold", "leakage_threshold", "default_tolerance"):
            if not getattr(self, name) > 0:
                raise SchemaError(name, "deve essere > 0")
        if self.probability_floor < 0:
            raise SchemaError("probability_floor", "non puo' essere negativo")


_current = SimulationConfig()


def get_config() -> SimulationConfig:
    return _current


def set_config(config: SimulationConfig) -> SimulationConfig:
    """Sostituisce la configurazione di processo, restituisce la precedente"""
    global _current
    previous = _current
    _current = config
    return previous


def get_script_directory() -> Path:
    """Restituisce la directory dove si trova lo script"""
    if hasattr(sys, '_MEIPASS'):
        # Eseguibile PyInstaller
        return Path(sys.executable).parent
    return Path(__file__).parent.absolute()


def load_config(path: Optional[str] = None) -> SimulationConfig:
    """Carica la configurazione da JSON.

    Con path esplicito un file malformato e' un errore; il file implicito
    nella directory dello script produce solo un avviso.
    """
    explicit = path is not None
    config_file = Path(path) if explicit else get_script_directory() / CONFIG_FILENAME

    if not config_file.exists():
        if explicit:
            raise SchemaError("config", f"file {config_file} non trovato")
        logger.debug("Nessun file di configurazione trovato, uso i default")
        return SimulationConfig()

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise SchemaError("config", "atteso un oggetto JSON")

        known = {f.name for f in fields(SimulationConfig)}
        overrides = {}
        for key, value in data.items():
            if key not in known:
                logger.warning(f"Chiave di configurazione sconosciuta ignorata: {key}")
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(key, "atteso un numero")
            overrides[key] = int(value) if key.endswith("modes") else float(value)

        config = replace(SimulationConfig(), **overrides)
        logger.info(f"Configurazione caricata da: {config_file}")
        return config

    except (json.JSONDecodeError, SchemaError) as e:
        if explicit:
            if isinstance(e, SchemaError):
                raise
            raise SchemaError("config", f"JSON malformato: {e}") from e
        logger.warning(f"Errore caricamento configurazione {config_file}: {e}")
        return SimulationConfig()


def check_capacity(modes: int, what: str = "statevector", oracle: bool = False) -> None:
    """Solleva CapacityError se modes supera il budget"""
    config = get_config()
    limit = config.oracle_max_modes if oracle else config.max_modes
    if modes > limit:
        raise CapacityError(f"{what}: {modes} modi oltre il limite di {limit}")
    logger.debug(f"Capacita' ok per {what}: {modes} modi (limite {limit})")
