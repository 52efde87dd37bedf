"""
Nonlocal SIR Lab - Command Line Entry Point

Handles:
- run / run-neumann / run-dirichlet / run-stefan: one configuration
- sweep: one field over a list of values
- eigen: principal eigenvalue, R02 and l* for given coefficients
- report: aggregate check reports below a directory
- presets: list the shipped scenarios

Exit codes: 0 ok, 2 invalid configuration, 3 solver error, 4 failed check.
"""

import argparse
import logging
import sys
from typing import List, Optional

from .harness import (
    aggregate, build_run_config, exit_code, list_presets, load_run_config, load_sweep_config,
    run, run_sweep,
)
from .harness.presets import load_yaml
from .shared.config import get_output_root, initialize_directories, validate_paths
from .shared.errors import ConfigInvalid, NsirError
from .shared.models import ModelKind, RunSummary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4

EIGEN_PRESET = 'eigen'


# ============================================================================
# OUTPUT
# ============================================================================

def _banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


def _print_summary(summary: RunSummary) -> None:
    _banner(f"📊 RUN '{summary.name}' ({summary.model})")
    for key, value in summary.results.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"   - {key}: {value}")
    print(f"\n⏱️  Wall time: {summary.wall_time:.2f}s")
    print(f"📁 Output: {summary.directory}")
    if summary.checks_passed:
        print("✅ All checks passed")
    else:
        print("❌ Failed checks:")
        for name in summary.failed_checks:
            print(f"   - {name}")
    print("=" * 70)


def _summary_exit(summary: RunSummary) -> int:
    return EXIT_OK if summary.checks_passed else EXIT_CHECK


# ============================================================================
# COMMANDS
# ============================================================================

def _run_config(args: argparse.Namespace, model: Optional[ModelKind] = None):
    if args.config:
        data = load_yaml(args.config)
    elif getattr(args, 'preset', None):
        data = {'preset': args.preset}
    else:
        raise ConfigInvalid("give a config file or --preset")
    if getattr(args, 'preset', None) and args.config:
        data.setdefault('preset', args.preset)
    config = build_run_config(data, args.set)
    if model is not None and config.model != model:
        raise ConfigInvalid(f"expected a {model.value} configuration, got {config.model.value}", 'model')
    if args.out:
        config.outputs.directory = args.out
    return config


def cmd_run(args: argparse.Namespace, model: Optional[ModelKind] = None) -> int:
    config = _run_config(args, model)
    summary = run(config)
    _print_summary(summary)
    return _summary_exit(summary)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_sweep_config(args.config, args.set)
    records = run_sweep(config, directory=args.out, workers=args.workers)
    _banner(f"📈 SWEEP '{config.name}' over {config.axis}")
    for record in records:
        marker = "❌" if record["error"] else ("✅" if record["checks_passed"] else "⚠️ ")
        detail = record["error"] or ", ".join(str(v) for v in record["row"])
        print(f"   {marker} {record['value']:.6g}: {detail}")
    print("=" * 70)
    if any(r["error"] for r in records):
        return EXIT_SOLVER
    return EXIT_OK if all(r["checks_passed"] for r in records) else EXIT_CHECK


def cmd_eigen(args: argparse.Namespace) -> int:
    overrides = list(args.set)
    flags = {
        'eigen.c1': args.c1, 'eigen.c2': args.c2, 'eigen.length': args.length, 'eigen.d': args.d,
        'kernel.family': args.kernel, 'kernel.width': args.width, 'kernel.normalization': args.normalization,
        'numerics.eigen_n': args.n,
    }
    overrides.extend(f"{path}={value}" for path, value in flags.items() if value is not None)
    if args.oracle:
        overrides.append('eigen.oracle=true')
    if args.dump:
        overrides.append('eigen.dump_eigenfunction=true')
    config = build_run_config({'preset': EIGEN_PRESET}, overrides)
    if args.out:
        config.outputs.directory = args.out
    summary = run(config)
    _print_summary(summary)
    return _summary_exit(summary)


def cmd_report(args: argparse.Namespace) -> int:
    summary = aggregate(args.directory)
    _banner(f"📋 CHECK REPORT: {args.directory}")
    print(f"   - Checks: {summary['total']} in {len(summary['reports'])} report(s)")
    if summary['passed']:
        print("✅ All checks passed")
    else:
        print(f"❌ {len(summary['failed'])} check(s) failed:")
        for name in summary['failed']:
            print(f"   - {name}")
    print("=" * 70)
    return exit_code(summary)


def cmd_presets(args: argparse.Namespace) -> int:
    _banner("📦 SHIPPED PRESETS")
    for name, description in list_presets():
        print(f"   - {name:<10} {description}")
    print("=" * 70)
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================

def _add_config_args(parser: argparse.ArgumentParser, positional: bool) -> None:
    if positional:
        parser.add_argument('config', nargs='?', help="YAML run configuration")
    else:
        parser.add_argument('--config', help="YAML run configuration")
    parser.add_argument('--preset', help="Shipped preset to start from")
    parser.add_argument('--set', action='append', default=[], metavar='PATH=VALUE',
                        help="Override one field, e.g. params.mu=0.5 (repeatable)")
    parser.add_argument('--out', help="Output directory (default <output root>/<name>)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='nsir', description="Nonlocal-infection SIR numerical lab")
    parser.add_argument('-v', '--verbose', action='store_true', help="Debug logging")
    sub = parser.add_subparsers(dest='command', required=True)

    p_run = sub.add_parser('run', help="Run one configuration")
    _add_config_args(p_run, positional=True)
    for name, help_text in (('run-neumann', "Neumann problem on a fixed interval"),
                            ('run-dirichlet', "Dirichlet problem and steady states"),
                            ('run-stefan', "Free-boundary problem")):
        _add_config_args(sub.add_parser(name, help=help_text), positional=True)

    p_sweep = sub.add_parser('sweep', help="Sweep one field")
    p_sweep.add_argument('config', help="YAML sweep configuration")
    p_sweep.add_argument('--set', action='append', default=[], metavar='PATH=VALUE')
    p_sweep.add_argument('--workers', type=int, help="Process pool size (1 runs inline)")
    p_sweep.add_argument('--out', help="Sweep directory")

    p_eigen = sub.add_parser('eigen', help="Principal eigenvalue, R02 and l*")
    p_eigen.add_argument('--c1', type=float, help="Nonlocal coefficient")
    p_eigen.add_argument('--c2', type=float, help="Local coefficient")
    p_eigen.add_argument('--length', type=float, help="Interval length")
    p_eigen.add_argument('--d', type=float, help="Diffusivity")
    p_eigen.add_argument('--kernel', choices=['Uniform', 'TopHat', 'TruncatedGaussian'])
    p_eigen.add_argument('--width', type=float, help="Kernel half-width / sigma")
    p_eigen.add_argument('--normalization', choices=['None', 'ColumnStochastic', 'SinkhornSymmetric'])
    p_eigen.add_argument('--n', type=int, help="Grid nodes")
    p_eigen.add_argument('--oracle', action='store_true', help="Also run the dense eigensolver")
    p_eigen.add_argument('--dump', action='store_true', help="Write eigenfunction.csv")
    p_eigen.add_argument('--set', action='append', default=[], metavar='PATH=VALUE')
    p_eigen.add_argument('--out', help="Output directory")

    p_report = sub.add_parser('report', help="Aggregate check reports")
    p_report.add_argument('directory', help="Run or sweep directory")

    sub.add_parser('presets', help="List shipped presets")
    return parser


COMMANDS = {
    'run': lambda args: cmd_run(args),
    'run-neumann': lambda args: cmd_run(args, ModelKind.NEUMANN),
    'run-dirichlet': lambda args: cmd_run(args, ModelKind.DIRICHLET),
    'run-stefan': lambda args: cmd_run(args, ModelKind.STEFAN),
    'sweep': cmd_sweep,
    'eigen': cmd_eigen,
    'report': cmd_report,
    'presets': cmd_presets,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    initialize_directories()
    for missing in validate_paths():
        logger.warning("missing configuration path: %s", missing)
    logger.debug("output root: %s", get_output_root())

    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as e:
        print(f"❌ Invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NsirError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == '__main__':
    sys.exit(main())
