"""
Command-line front end for qgm

Every subcommand reads its inputs through FileParser, calls one library
operation and writes a schema-checked document through FormatExporter.
"""

import argparse
import logging
import sys
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import config
from src.core import (
    graph_hamiltonians,
    is_tree,
    qcmi,
    rel_entropy,
    simultaneous_diag,
    stab_dimension,
    stabilizer_group,
    von_neumann,
)
from src.io import FileParser, FormatExporter, load_graph, to_plain, validate_document
from src.models import (
    IdealPresentation,
    KernelReport,
    ProjectionResult,
    RunRecord,
    SampleSet,
    SubsystemShape,
    SymMat,
)
from src.utils.constants import EXPORT_FORMATS, MAX_HYPERCUBE_N, SAMPLERS
from src.utils.errors import GraphError, QGMError, ShapeError
from src.utils.helpers import canonical_json_dumps, file_digest, resolve_seed
from src.varieties import (
    DecomposableParametrisation,
    ExpSymParametrisation,
    LSSMParametrisation,
    QCMIParametrisation,
    add_ones_row,
    certify_projection,
    gibbs_sample_commuting_tree,
    gibbs_sample_decomposable,
    gibbs_sample_lssm,
    gv_equations,
    hypercube_matrix,
    ideal_cache,
    info_project,
    manifold_dim,
    marginal_pack,
    membership,
    petz_tree,
    sample_petz,
    sample_qcmi_chain3,
    toric_ideal,
    vandermonde_kernel,
)
from src.varieties.samplers import QCMI_STRUCTURES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_USAGE = 2

# Argument names whose values are input files, digested into the RunRecord
INPUT_ARGS = ('rho', 'sigma', 'samples', 'polys', 'gens', 'graph')

VERSIONED_PACKAGES = ('numpy', 'scipy', 'sympy', 'networkx', 'pandas', 'openpyxl', 'jsonschema', 'pyyaml')

DIM_FAMILIES = ('lssm', 'dec', 'qcmi', 'exp-sym')

TABULAR_TYPES = (pd.DataFrame, SampleSet, KernelReport, IdealPresentation, ProjectionResult)

EPILOG = (
    "Results go to stdout, or to --out. Error documents always go to stdout, never to --out, "
    "so they share the stream with results when piping; logs go to stderr. "
    "A failed run prints {\"error\": code, \"detail\": ...} and exits 1 and a usage error exits 2, "
    "so check the exit code before parsing the output."
)


class UsageError(Exception):
    """Bad command line; reported with exit code 2"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _fraction_arg(text: str) -> float:
    value = _positive_float(text)
    if value >= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _index_list(text: str) -> List[int]:
    """Comma-separated 1-based factor indices, returned 0-based"""
    if not text:
        return []
    try:
        values = [int(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated factor indices, got {text!r}")
    if any(v < 1 for v in values):
        raise UsageError(f"factor indices are 1-based, got {text!r}")
    return [v - 1 for v in values]


def _parse_split(items: Sequence[str]) -> Dict[str, List[int]]:
    parts: Dict[str, List[int]] = {'A': [], 'B': [], 'C': []}
    for item in items:
        key, sep, value = item.partition('=')
        key = key.strip().upper()
        if not sep or key not in parts:
            raise UsageError(f"--split entries look like A=1 B=2 C=3, got {item!r}")
        parts[key] = _index_list(value)
    if not parts['A'] or not parts['C']:
        raise UsageError("--split needs nonempty A and C")
    return parts


def build_parser() -> argparse.ArgumentParser:
    """Parser for every qgm subcommand"""
    common = _Parser(add_help=False)
    common.add_argument('--out', help='Write the result here instead of stdout')
    common.add_argument('--format', choices=EXPORT_FORMATS,
                        default=config.get('export.default_format', 'json'), help='Output format')
    common.add_argument('--seed', type=int, help='Run seed (default: QGM_SEED, then the configured seed)')
    common.add_argument('--threads', type=_positive_int, help='Cap on worker threads')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')

    parser = _Parser(prog='qgm', description=config.get('app.description', 'qgm'), epilog=EPILOG)
    parser.add_argument('--version', action='version', version=f"qgm {config.get('app.version', '')}")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('entropy', parents=[common], help='Von Neumann entropy in bits')
    p.add_argument('--rho', required=True, help='Matrix JSON')
    p.add_argument('--tol', type=_positive_float, help='PSD tolerance')
    p.add_argument('--no-trace-check', action='store_true', help='Accept states whose trace is not 1')
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser('qcmi', parents=[common], help='Quantum conditional mutual information I(A:C|B)')
    p.add_argument('--rho', required=True, help='Matrix JSON')
    p.add_argument('--split', nargs='+', required=True, metavar='X=i,j', help='Subsets, e.g. A=1 B=2 C=3')
    p.add_argument('--dims', help='Comma-separated local dimensions (default: qubits)')
    p.add_argument('--tol', type=_positive_float, help='PSD tolerance')
    p.set_defaults(handler=cmd_qcmi)

    p = sub.add_parser('dkl', parents=[common], help='Quantum relative entropy D(rho || sigma)')
    p.add_argument('--rho', required=True, help='Matrix JSON')
    p.add_argument('--sigma', required=True, help='Matrix JSON')
    p.add_argument('--generalized', action='store_true', help='Unnormalised form, for traces other than 1')
    p.add_argument('--tol', type=_positive_float, help='PSD tolerance')
    p.set_defaults(handler=cmd_dkl)

    p = sub.add_parser('sample', parents=[common], help='Sample points of a variety or Gibbs manifold')
    p.add_argument('sampler', choices=SAMPLERS)
    p.add_argument('--graph', default='chain3', help='Built-in graph name or edge-list file')
    p.add_argument('--count', type=_positive_int, default=1, help='Number of points')
    p.add_argument('--structure', choices=QCMI_STRUCTURES, default='generic', help='QCMI sampler variant')
    p.add_argument('--positive', action='store_true', help='QCMI sampler: PSD factors only')
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser('implicitize', parents=[common], help='Vanishing polynomials of a sample')
    p.add_argument('--samples', required=True, help='SampleSet JSON')
    p.add_argument('--degree', type=_positive_int, required=True, help='Degree bound')
    p.add_argument('--tol', type=_positive_float, help='Relative singular value cutoff')
    p.add_argument('--holdout', type=_fraction_arg, help='Fraction of points held out for checking')
    p.add_argument('--no-quotient', action='store_true', help='Keep linear relations in the higher-degree basis')
    p.set_defaults(handler=cmd_implicitize)

    p = sub.add_parser('membership', parents=[common], help='Residuals of candidate relations on a sample')
    p.add_argument('--samples', required=True, help='SampleSet JSON')
    p.add_argument('--polys', required=True, help='Poly, ideal or kernel JSON')
    p.add_argument('--tol', type=_positive_float, help='Relative residual threshold')
    p.set_defaults(handler=cmd_membership)

    p = sub.add_parser('stab', help='Stabiliser groups')
    stab = p.add_subparsers(dest='action', metavar='ACTION')
    stab.required = True
    q = stab.add_parser('dim', parents=[common], help='Dimension of the stabilised space')
    q.add_argument('--gens', required=True, help='Pauli word file')
    q.set_defaults(handler=cmd_stab_dim)
    q = stab.add_parser('diag', parents=[common], help='Simultaneous diagonalisation (toric model)')
    _model_source(q)
    q.set_defaults(handler=cmd_stab_diag)

    p = sub.add_parser('toric', help='Toric ideals and Gibbs variety equations')
    toric = p.add_subparsers(dest='action', metavar='ACTION')
    toric.required = True
    q = toric.add_parser('ideal', parents=[common], help='Toric ideal of the hypercube independence model')
    q.add_argument('--N', type=_positive_int, required=True, dest='N', help='Number of binary factors')
    q.add_argument('--degree', type=_positive_int, default=2, help='Degree bound')
    q.add_argument('--unsigned', action='store_true', help='0/1 hypercube instead of +-1')
    q.add_argument('--ones-row', action='store_true', help='Prepend a row of ones')
    q.add_argument('--no-verify', action='store_true', help='Skip the degree+1 completeness check')
    q.set_defaults(handler=cmd_toric_ideal)
    q = toric.add_parser('gv', parents=[common], help='Gibbs variety equations of a commuting family')
    _model_source(q)
    q.add_argument('--degree', type=_positive_int, default=2, help='Degree bound')
    q.set_defaults(handler=cmd_toric_gv)

    p = sub.add_parser('project', parents=[common], help='Information projection onto a commuting Gibbs manifold')
    p.add_argument('--rho', required=True, help='Matrix JSON (positive definite)')
    _model_source(p)
    p.add_argument('--tol', type=_positive_float, help='Moment residual tolerance')
    p.add_argument('--max-iter', type=_positive_int, help='Newton iteration cap')
    p.add_argument('--certify', action='store_true', help='Run the entropy, minimality and uniqueness checks')
    p.add_argument('--n-probe', type=_positive_int, help='Probes per certificate')
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser('petz', parents=[common], help='Petz recovery of a state from its edge marginals')
    p.add_argument('--rho', required=True, help='Matrix JSON')
    p.add_argument('--graph', default='chain3', help='Tree: built-in name or edge-list file')
    p.add_argument('--primed', action='store_true', help='Use the primed map at every recovery step')
    p.add_argument('--tol', type=_positive_float, help='Marginal compatibility tolerance')
    p.set_defaults(handler=cmd_petz)

    p = sub.add_parser('dim', parents=[common], help='Dimension of a parametrised manifold')
    p.add_argument('family', choices=DIM_FAMILIES)
    p.add_argument('--graph', default='chain3', help='Built-in graph name or edge-list file')
    p.add_argument('--d', type=_positive_int, default=2, help='Matrix size for exp-sym')
    p.add_argument('--retries', type=_positive_int, help='Generic points that must agree')
    p.add_argument('--fd-step', type=_positive_float, help='Central difference step')
    p.set_defaults(handler=cmd_dim)

    p = sub.add_parser('replay', help='Re-run the command stored in a RunRecord')
    p.add_argument('record', help='RunRecord JSON written next to an --out file')
    p.add_argument('-v', '--verbose', action='count', default=0)
    p.set_defaults(handler=None)

    return parser


def _model_source(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--graph', help='Graph whose Hamiltonians form the family')
    group.add_argument('--gens', help='Pauli word file')


# Command handlers: each returns (result, schema kind)

Result = Tuple[Any, str]


def _read_matrix(path: str) -> SymMat:
    return FileParser().parse_matrix(path)


def _shape_for(n: int, dims: Optional[str] = None) -> SubsystemShape:
    if dims:
        try:
            shape = SubsystemShape(tuple(int(d) for d in dims.split(',')))
        except ValueError:
            raise UsageError(f"--dims expects comma-separated integers, got {dims!r}")
    else:
        n_factors = int(round(np.log2(n)))
        if 2 ** n_factors != n:
            raise ShapeError(f"a {n}x{n} matrix is not a qubit state; pass --dims")
        shape = SubsystemShape.qubits(n_factors)
    if shape.n != n:
        raise ShapeError(f"dims {shape.dims} give size {shape.n}, matrix has size {n}")
    return shape


def _model(args: argparse.Namespace):
    if args.gens:
        gens = FileParser.parse_paulis(args.gens)
    else:
        gens = graph_hamiltonians(load_graph(args.graph))
    return simultaneous_diag(gens)


def cmd_entropy(args: argparse.Namespace) -> Result:
    report = von_neumann(_read_matrix(args.rho).matrix, args.tol, check_trace=not args.no_trace_check)
    return {**report.to_dict(), 'unit': 'bits'}, 'entropy'


def cmd_qcmi(args: argparse.Namespace) -> Result:
    rho = _read_matrix(args.rho)
    parts = _parse_split(args.split)
    shape = _shape_for(rho.n, args.dims)
    if max(i for p in parts.values() for i in p) >= shape.n_factors:
        raise UsageError(f"--split refers to factors beyond the {shape.n_factors} available")
    value = qcmi(rho.matrix, shape, parts['A'], parts['C'], parts['B'], args.tol)
    details = {k: [i + 1 for i in v] for k, v in parts.items()}
    details['unit'] = 'bits'
    return {'quantity': 'qcmi', 'value': value, 'details': details}, 'scalar'


def cmd_dkl(args: argparse.Namespace) -> Result:
    rho, sigma = _read_matrix(args.rho), _read_matrix(args.sigma)
    value = rel_entropy(rho.matrix, sigma.matrix, args.tol, generalized=args.generalized)
    return {'quantity': 'rel_entropy', 'value': value,
            'details': {'generalized': args.generalized, 'unit': 'bits'}}, 'scalar'


def cmd_sample(args: argparse.Namespace) -> Result:
    g = load_graph(args.graph)
    if args.sampler == 'qcmi':
        if g.n_vertices != 3 or not is_tree(g):
            raise GraphError(f"the qcmi sampler needs the 3-chain, got {g.n_vertices} vertices")
        return sample_qcmi_chain3(args.seed, args.count, args.structure, args.positive, args.threads), 'sampleset'
    samplers = {
        'gibbs-lssm': gibbs_sample_lssm,
        'gibbs-dec': gibbs_sample_decomposable,
        'gibbs-tree': gibbs_sample_commuting_tree,
        'petz': sample_petz,
    }
    return samplers[args.sampler](g, args.seed, args.count, args.threads), 'sampleset'


def cmd_implicitize(args: argparse.Namespace) -> Result:
    samples = FileParser().parse_sample_set(args.samples)
    report = vandermonde_kernel(samples, args.degree, args.tol, quotient_linear=not args.no_quotient,
                                holdout_fraction=args.holdout)
    return report, 'kernel'


def cmd_membership(args: argparse.Namespace) -> Result:
    parser = FileParser()
    samples = parser.parse_sample_set(args.samples)
    return membership(samples, parser.parse_poly_list(args.polys), args.tol), 'membership'


def cmd_stab_dim(args: argparse.Namespace) -> Result:
    group = stabilizer_group(FileParser.parse_paulis(args.gens))
    return {'quantity': 'stab_dimension', 'value': stab_dimension(group),
            'details': {'n': group.n, 'k': group.k, 'gens': [str(w) for w in group.gens]}}, 'scalar'


def cmd_stab_diag(args: argparse.Namespace) -> Result:
    return _model(args), 'toric_model'


def cmd_toric_ideal(args: argparse.Namespace) -> Result:
    if args.N > MAX_HYPERCUBE_N:
        raise UsageError(f"--N must be at most {MAX_HYPERCUBE_N}")
    A = hypercube_matrix(args.N, signed=not args.unsigned)
    if args.ones_row:
        A = add_ones_row(A)
    if args.no_verify:
        return toric_ideal(A, args.degree, verify=False), 'ideal'
    return ideal_cache.get_or_compute(A, args.degree), 'ideal'


def cmd_toric_gv(args: argparse.Namespace) -> Result:
    return gv_equations(_model(args), args.degree, args.threads), 'ideal'


def cmd_project(args: argparse.Namespace) -> Result:
    rho = _read_matrix(args.rho).to_float()
    model = _model(args)
    result = info_project(rho, model, args.tol, args.max_iter)
    if args.certify:
        certify_projection(rho, result, model, args.n_probe, args.seed, args.threads)
    return result, 'projection'


def cmd_petz(args: argparse.Namespace) -> Result:
    rho = _read_matrix(args.rho).to_float()
    g = load_graph(args.graph)
    recovered = petz_tree(g, marginal_pack(rho, g), args.tol, primed=args.primed)
    doc = SymMat(recovered).to_dict()
    doc['distance'] = float(np.linalg.norm(recovered - rho))
    return doc, 'matrix'


def cmd_dim(args: argparse.Namespace) -> Result:
    if args.family == 'exp-sym':
        param = ExpSymParametrisation(args.d)
    elif args.family == 'qcmi':
        param = QCMIParametrisation(args.seed)
    else:
        g = load_graph(args.graph)
        param = LSSMParametrisation(g) if args.family == 'lssm' else DecomposableParametrisation(g)
    value = manifold_dim(param, fd_step=args.fd_step, seed=args.seed, retries=args.retries)
    return {'quantity': 'manifold_dim', 'value': value,
            'details': {'family': args.family, 'n_params': param.n_params}}, 'scalar'


# Output and run records

def render(result: Any, kind: str, output_format: str) -> bytes:
    """Validate the JSON view of a result and export it in the requested format"""
    doc = {'rows': to_plain(result)} if isinstance(result, pd.DataFrame) else to_plain(result)
    validate_document(doc, kind)
    exporter = FormatExporter()
    if output_format == 'json':
        return exporter.export_json(doc)
    table = result if isinstance(result, TABULAR_TYPES) else doc
    return exporter.export(table, output_format)


def package_versions() -> Dict[str, str]:
    versions = {'qgm': str(config.get('app.version', 'unknown'))}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'unknown'
    return versions


def input_digests(args: argparse.Namespace) -> Dict[str, str]:
    digests = {}
    for name in INPUT_ARGS:
        value = getattr(args, name, None)
        if value and Path(value).is_file():
            digests[value] = file_digest(value)
    return digests


def write_run_record(args: argparse.Namespace, argv: List[str], seed: int, started: float,
                     started_at: str) -> Path:
    record = RunRecord(
        argv=list(argv),
        seed=seed,
        versions=package_versions(),
        input_digests=input_digests(args),
        outputs=[args.out],
        wall_time=time.perf_counter() - started,
        started_at=started_at,
        exit_code=EXIT_OK,
    )
    doc = to_plain(record)
    validate_document(doc, 'runrecord')
    path = Path(f"{args.out}.run.json")
    path.write_text(canonical_json_dumps(doc), encoding='utf-8')
    return path


def replay(record_path: str) -> int:
    """Re-run a recorded command, warning when an input file has changed since"""
    record = FileParser().parse_run_record(record_path)
    for path, digest in sorted(record.input_digests.items()):
        if not Path(path).is_file():
            logger.warning("replay input %s no longer exists", path)
        elif file_digest(path) != digest:
            logger.warning("replay input %s changed since the recorded run", path)
    logger.info("replaying: qgm %s", ' '.join(record.argv))
    argv = list(record.argv)
    if record.seed is not None and '--seed' not in argv:
        argv += ['--seed', str(record.seed)]
    return dispatch(argv)


def setup_logging(verbosity: int) -> None:
    settings = config.get_logging_config()
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(settings.get('level', 'WARNING')).upper(), logging.WARNING)
    logging.basicConfig(level=level, format=settings.get('format'), stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _emit_error(doc: Dict[str, Any]) -> None:
    sys.stdout.write(canonical_json_dumps(doc))
    sys.stdout.flush()


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one qgm command.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        0 on success, 1 on computation errors, 2 on usage errors
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        _emit_error({'error': 'usage', 'detail': str(e)})
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    setup_logging(args.verbose)
    if args.command == 'replay':
        try:
            return replay(args.record)
        except QGMError as e:
            _emit_error(e.to_dict())
            return EXIT_COMPUTATION

    started, started_at = time.perf_counter(), datetime.now(timezone.utc).isoformat()
    args.seed = resolve_seed(args.seed, config.get('sampling.default_seed', 0))
    if args.format == 'xlsx' and not args.out:
        _emit_error({'error': 'usage', 'detail': 'xlsx output needs --out'})
        return EXIT_USAGE

    try:
        result, kind = args.handler(args)
        payload = render(result, kind, args.format)
        if args.out:
            Path(args.out).write_bytes(payload)
            record = write_run_record(args, argv, args.seed, started, started_at)
            logger.info("wrote %s and %s", args.out, record)
        else:
            sys.stdout.write(payload.decode(config.get('export.csv_encoding', 'utf-8')))
            sys.stdout.flush()
    except UsageError as e:
        _emit_error({'error': 'usage', 'detail': str(e)})
        return EXIT_USAGE
    except QGMError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        _emit_error(e.to_dict())
        return EXIT_COMPUTATION
    except Exception as e:
        logger.debug("unexpected failure in %s", args.command, exc_info=True)
        _emit_error({'error': 'internal', 'detail': f"{type(e).__name__}: {e}"})
        return EXIT_COMPUTATION
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())


if __name__ == '__main__':
    main()
