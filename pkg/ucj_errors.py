"""
Errori del compilatore IQP -> 1-UCJ'.
Ogni eccezione porta il codice di uscita usato dalla CLI.
"""


class UcjCompilerError(Exception):
    """Radice della gerarchia"""
    exit_code = 1


class InputError(UcjCompilerError, ValueError):
    """Oggetto di dominio non valido (indici, angoli, matrici)"""
    exit_code = 2


class SchemaError(InputError):
    """JSON non conforme: il messaggio nomina il campo incriminato"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"campo '{field}': {message}")


class CapacityError(UcjCompilerError):
    """Numero di modi oltre il budget di memoria configurato"""
    exit_code = 3


class SubspaceViolation(UcjCompilerError):
    """Esito a 2n bit fuori dal sottospazio codificato"""

    def __init__(self, bits: str, pairs: list):
        self.bits = bits
        self.pairs = pairs
        super().__init__(f"esito {bits} fuori dal sottospazio codificato (coppie {pairs})")


class LeakageError(UcjCompilerError):
    """Massa di probabilita' fuori dal sottospazio oltre la soglia"""

    def __init__(self, leakage: float, threshold: float):
        self.leakage = leakage
        self.threshold = threshold
        super().__init__(f"leakage {leakage:.3e} >= soglia {threshold:.1e}")
