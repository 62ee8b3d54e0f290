# Note v01:
# Compilatore IQP -> 1-UCJ' con codifica Jordan-Wigner a coppie di modi
# Sottocomandi: gen-iqp, compile, simulate, sample, verify, check-invariants, oracle-check

# Gestione Log
# Console su stderr (stdout riservato al JSON), file di log opzionale con --log-file
# Il log INFO riassume i passi, i dettagli tecnici restano sul DEBUG

# Codici di uscita: 0 ok, 1 verifica fallita, 2 input non valido, 3 capacita' superata

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from iqp_circuit import (Distribution, bit_string, distribution_from_state, iqp_distribution,
                         iqp_dumps, iqp_from_dict, iqp_state, random_iqp)
from iqp_to_ucj import PairEncoding, compile_iqp, decode_distribution
from jw_fermion import StateVector
from ucj_ansatz import simulate_ucj, ucj_dumps, ucj_from_dict
from ucj_config import check_capacity, get_config, load_config, set_config
from ucj_errors import InputError, SchemaError, UcjCompilerError
from verification import report_json, run_invariant_suite, run_oracle_suite, sample, verify_pair

COMMANDS = ('gen-iqp', 'compile', 'simulate', 'sample', 'verify', 'check-invariants', 'oracle-check')


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    n: Optional[int] = None
    seed: Optional[int] = None
    shots: Optional[int] = None
    tolerance: Optional[float] = None
    density: float = 1.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"comando sconosciuto: {self.command}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise InputError(f"la tolleranza deve essere > 0, trovato {self.tolerance}")
        if not 0.0 <= self.density <= 1.0:
            raise InputError(f"density deve stare in [0, 1], trovato {self.density}")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise InputError(f"seed deve essere un intero a 64 bit, trovato {self.seed}")
        if self.n is not None and self.n < 1:
            raise InputError(f"n deve essere >= 1, trovato {self.n}")
        if self.shots is not None and self.shots < 0:
            raise InputError(f"shots non puo' essere negativo: {self.shots}")


def state_to_dict(state: StateVector) -> Dict:
    """Ampiezze non trascurabili come [re, im], chiavi ordinate"""
    floor = get_config().probability_floor
    amplitudes = {}
    for index in state.support():
        amp = state.amplitudes[index]
        if abs(amp) ** 2 > floor:
            amplitudes[bit_string(int(index), state.modes)] = [float(amp.real), float(amp.imag)]
    return {'width': state.modes, 'amplitudes': dict(sorted(amplitudes.items()))}


def load_circuit(path: str):
    """Carica un file IQP o UCJ riconoscendo il formato dalle chiavi"""
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("<root>", f"JSON malformato: {e}") from e
    if isinstance(data, dict) and 'modes' in data:
        return 'ucj', ucj_from_dict(data)
    return 'iqp', iqp_from_dict(data)


class UcjCompilerApp:
    def __init__(self, log_level=logging.INFO, log_file: Optional[str] = None):
        self.verbose = log_level == logging.DEBUG
        self.handlers: List[logging.Handler] = []
        self.setup_logging(log_level, log_file)

        # Statistiche
        self.circuits_loaded = 0
        self.gates_emitted = 0
        self.outputs_written = 0
        self.start_time = time.time()

    def setup_logging(self, level, log_file: Optional[str]):
        """Configura il logging: console su stderr, file opzionale"""
        root_logger = logging.getLogger()
        root_logger.handlers.clear()

        formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        self.handlers.append(console_handler)

        if log_file:
            try:
                file_handler = logging.FileHandler(log_file, encoding='utf-8')
                file_handler.setLevel(level)
                file_handler.setFormatter(formatter)
                self.handlers.append(file_handler)
            except OSError as e:
                print(f"Avviso: Impossibile creare file di log: {e}", file=sys.stderr)

        for handler in self.handlers:
            root_logger.addHandler(handler)
        root_logger.setLevel(level)

        self.logger = logging.getLogger(__name__)
        self.logger.debug(f"Livello logging: {logging.getLevelName(level)}")

    def apply_config(self, config_path: Optional[str]):
        """Configurazione da file (esplicito o implicito) resa globale"""
        set_config(load_config(config_path))

    def close_logging(self):
        root_logger = logging.getLogger()
        for handler in self.handlers:
            root_logger.removeHandler(handler)
            handler.close()
        self.handlers.clear()

    def write_output(self, text: str, path: Optional[str]):
        """JSON su file se richiesto, altrimenti su stdout"""
        if path:
            Path(path).write_text(text + '\n', encoding='utf-8')
            self.logger.info(f"Output salvato in: {path}")
        else:
            sys.stdout.write(text + '\n')
        self.outputs_written += 1

    def cmd_gen_iqp(self, run: RunConfig) -> int:
        if run.n is None or run.seed is None:
            raise InputError("gen-iqp richiede --n e --seed")
        circuit = random_iqp(run.n, run.seed, run.density)
        self.logger.info(f"Generato IQP n={circuit.n} con {len(circuit.w)} accoppiamenti (seed {run.seed})")
        self.write_output(iqp_dumps(circuit), run.output)
        return 0

    def cmd_compile(self, run: RunConfig) -> int:
        kind, circuit = load_circuit(run.input)
        self.circuits_loaded += 1
        if kind != 'iqp':
            raise InputError(f"{run.input} non contiene un circuito IQP")
        compiled = compile_iqp(circuit)
        self.gates_emitted += len(compiled.givens) + len(compiled.diagonal)
        self.logger.info(f"Compilazione completata: {compiled.modes} modi, {len(compiled.givens)} Givens, "
                         f"{len(compiled.diagonal)} diagonali, fase globale {compiled.global_phase:.6f}")
        self.write_output(ucj_dumps(compiled), run.output)
        return 0

    def _distribution(self, kind: str, circuit, decode: bool) -> Distribution:
        if kind == 'iqp':
            return iqp_distribution(circuit)
        raw = distribution_from_state(simulate_ucj(circuit))
        if not decode:
            return raw
        decoded, leakage = decode_distribution(raw, PairEncoding(circuit.reference_n))
        self.logger.info(f"Decodifica su {circuit.reference_n} qubit, leakage {leakage:.3e}")
        return decoded

    def cmd_simulate(self, run: RunConfig, expected_kind: str, as_state: bool, decode: bool) -> int:
        kind, circuit = load_circuit(run.input)
        self.circuits_loaded += 1
        if kind != expected_kind:
            raise InputError(f"{run.input} contiene un circuito {kind.upper()}, atteso {expected_kind.upper()}")
        if as_state:
            if decode:
                raise InputError("--decode vale solo con --dist")
            state = iqp_state(circuit) if kind == 'iqp' else simulate_ucj(circuit)
            payload = state_to_dict(state)
        else:
            payload = self._distribution(kind, circuit, decode).to_dict()
        self.logger.info(f"Simulazione {kind.upper()} completata")
        self.write_output(json.dumps(payload, indent=2), run.output)
        return 0

    def cmd_sample(self, run: RunConfig, raw: bool) -> int:
        if run.shots is None or run.seed is None:
            raise InputError("sample richiede --shots e --seed")
        kind, circuit = load_circuit(run.input)
        self.circuits_loaded += 1
        distribution = self._distribution(kind, circuit, decode=not raw)
        counts = sample(distribution, run.shots, run.seed)
        self.logger.info(f"Campionati {run.shots} shot da {kind.upper()} ({len(counts)} esiti distinti)")
        self.write_output(json.dumps(dict(sorted(counts.items())), indent=2), run.output)
        return 0

    def cmd_verify(self, run: RunConfig, ucj_path: str) -> int:
        report = verify_pair(run.input, ucj_path, run.tolerance)
        self.circuits_loaded += 2
        self.write_output(report_json(report), run.output)
        if report.passed:
            self.logger.info("Verifica superata")
            return 0
        self.logger.error(f"Verifica fallita: linf={report.linf:.3e}, leakage={report.leakage:.3e}")
        return 1

    def cmd_check_invariants(self, run: RunConfig, trials: int) -> int:
        if run.n is None or run.seed is None:
            raise InputError("check-invariants richiede --n e --seed")
        result = run_invariant_suite(run.n, run.seed, trials)
        self._log_properties(result)
        self.write_output(json.dumps(result, indent=2), run.output)
        return 0 if result['all_passed'] else 1

    def cmd_oracle_check(self, run: RunConfig, modes: int, gates: int, trials: int) -> int:
        if run.seed is None:
            raise InputError("oracle-check richiede --seed")
        check_capacity(modes, "oracle-check", oracle=True)
        result = run_oracle_suite(modes, gates, run.seed, trials)
        self.logger.info(f"Scarto L-inf kernel/oracolo: {result['linf_gap']:.3e}")
        self._log_properties(result)
        self.write_output(json.dumps(result, indent=2), run.output)
        return 0 if result['all_passed'] else 1

    def _log_properties(self, result: Dict):
        for name, entry in result['properties'].items():
            self.logger.info(f"  {name}: {entry['passed']}/{entry['total']} (peggiore {entry['worst']})")

    def log_summary(self):
        elapsed = time.time() - self.start_time
        self.logger.debug(f"Riepilogo: {self.circuits_loaded} circuiti letti, {self.gates_emitted} porte emesse, "
                          f"{self.outputs_written} output scritti in {elapsed:.2f}s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Compilatore IQP -> 1-UCJ con codifica Jordan-Wigner e verifica per simulazione',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Esempi:
  %(prog)s gen-iqp --n 3 --seed 1 -o iqp.json          # IQP casuale
  %(prog)s compile iqp.json -o ucj.json                # Compilazione
  %(prog)s simulate ucj ucj.json --dist --decode       # Distribuzione decodificata
  %(prog)s sample iqp.json --shots 1000 --seed 5       # Campionamento deterministico
  %(prog)s verify iqp.json ucj.json --tol 1e-10        # Confronto IQP / UCJ
  %(prog)s oracle-check --modes 6 --gates 20 --seed 7  # Kernel contro oracolo denso

Note:
  - Il JSON va su stdout, i messaggi di log su stderr
  - Codici di uscita: 0 ok, 1 verifica fallita, 2 input non valido, 3 capacita' superata
        '''
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Output dettagliato (debug)')
    parser.add_argument('--log-file', help='Salva anche il log su file')
    parser.add_argument('--config', help='File JSON di configurazione (default: ucj_compiler_config.json)')

    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen-iqp', help='Genera un circuito IQP casuale')
    gen.add_argument('--n', type=int, required=True, help='Numero di qubit')
    gen.add_argument('--seed', type=int, required=True, help='Seed a 64 bit')
    gen.add_argument('--density', type=float, default=1.0, help='Frazione di coppie con peso (default 1)')
    gen.add_argument('-o', '--output', help='File di uscita')

    comp = sub.add_parser('compile', help='Compila IQP in 1-UCJ')
    comp.add_argument('input', help='File IQP JSON')
    comp.add_argument('-o', '--output', help='File UCJ di uscita')

    sim = sub.add_parser('simulate', help='Simula un circuito IQP o UCJ')
    sim.add_argument('kind', choices=['iqp', 'ucj'])
    sim.add_argument('input', help='File JSON del circuito')
    mode = sim.add_mutually_exclusive_group()
    mode.add_argument('--state', action='store_true', help='Stato (ampiezze)')
    mode.add_argument('--dist', action='store_true', help='Distribuzione (default)')
    sim.add_argument('--decode', action='store_true', help='Per UCJ: decodifica su n qubit')
    sim.add_argument('-o', '--output', help='File di uscita')

    smp = sub.add_parser('sample', help='Campiona esiti da un circuito')
    smp.add_argument('input', help='File IQP o UCJ JSON')
    smp.add_argument('--shots', type=int, required=True)
    smp.add_argument('--seed', type=int, required=True)
    smp.add_argument('--raw', action='store_true', help='Per UCJ: esiti a 2n bit senza decodifica')
    smp.add_argument('-o', '--output', help='File di uscita')

    ver = sub.add_parser('verify', help='Confronta un IQP con la sua compilazione')
    ver.add_argument('iqp', help='File IQP JSON')
    ver.add_argument('ucj', help='File UCJ JSON')
    ver.add_argument('--tol', type=float, default=None, help='Tolleranza L-inf (default 1e-10)')
    ver.add_argument('-o', '--output', help='File del report')

    inv = sub.add_parser('check-invariants', help='Proprieta del compilatore su istanze casuali')
    inv.add_argument('--n', type=int, required=True)
    inv.add_argument('--seed', type=int, required=True)
    inv.add_argument('--trials', type=int, default=10)
    inv.add_argument('-o', '--output', help='File del report')

    orc = sub.add_parser('oracle-check', help='Kernel JW contro oracolo denso')
    orc.add_argument('--modes', type=int, required=True)
    orc.add_argument('--gates', type=int, required=True)
    orc.add_argument('--seed', type=int, required=True)
    orc.add_argument('--trials', type=int, default=1)
    orc.add_argument('-o', '--output', help='File del report')

    return parser


def run_command(app: UcjCompilerApp, args: argparse.Namespace) -> int:
    run = RunConfig(
        command=args.command,
        input=getattr(args, 'input', None) or getattr(args, 'iqp', None),
        output=getattr(args, 'output', None),
        n=getattr(args, 'n', None),
        seed=getattr(args, 'seed', None),
        shots=getattr(args, 'shots', None),
        tolerance=getattr(args, 'tol', None),
        density=getattr(args, 'density', 1.0),
    )
    if run.command == 'gen-iqp':
        return app.cmd_gen_iqp(run)
    if run.command == 'compile':
        return app.cmd_compile(run)
    if run.command == 'simulate':
        return app.cmd_simulate(run, args.kind, args.state, args.decode)
    if run.command == 'sample':
        return app.cmd_sample(run, args.raw)
    if run.command == 'verify':
        return app.cmd_verify(run, args.ucj)
    if run.command == 'check-invariants':
        return app.cmd_check_invariants(run, args.trials)
    return app.cmd_oracle_check(run, args.modes, args.gates, args.trials)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log_level = logging.DEBUG if args.verbose else logging.INFO

    app = UcjCompilerApp(log_level, args.log_file)

    try:
        app.apply_config(args.config)
        code = run_command(app, args)
        app.log_summary()
        return code
    except KeyboardInterrupt:
        app.logger.info("Operazione interrotta dall'utente")
        return 130
    except UcjCompilerError as e:
        app.logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        app.logger.error(f"Errore di I/O: {e}")
        return 2
    except Exception as e:
        app.logger.error(f"Errore inatteso: {e}")
        if app.verbose:
            import traceback
            app.logger.error(traceback.format_exc())
        return 1
    finally:
        app.close_logging()


if __name__ == "__main__":
    sys.exit(main())
