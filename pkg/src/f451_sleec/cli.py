"""Command line interface for f451 Labs SLEEC runtime.

Subcommands:

    parse          parse a ruleset and list its rules
    fmt            print a ruleset in canonical form
    analyze        static checks (well-formedness, dead clauses, invariants)
    simulate       step the reference interpreter over random snapshots
    step           one-shot snapshot -> obligations
    serve          run the model server
    loop           run the enforcement loop from a config file
    gen-tests      write seeded test cases with expected obligations
    gen-synthetic  write an r x c synthetic ruleset
    bench          differential suite with latency stats and fits

Exit codes: 0 on success, 1 on mismatches, violations, or errors, and
2 on usage errors.
"""

from __future__ import annotations

import json
import sys

from pathlib import Path

from rich.console import Console
from rich.traceback import install as install_rich_traceback

from . import __app_name__, __version__
from .analysis import EXHAUSTIVE, Sampled, analyze, random_simulate
from .bench import (
    TRANSPORT_IN_PROCESS,
    TRANSPORTS,
    SuiteResult,
    run_grid,
    run_suite,
    write_reports,
)
from .cli_ui import ConsoleUI
from .common import SleecError, init_cli_parser, load_settings
from .config import LoopConfig
from .diagnostics import DEF_SOURCE_NAME, SleecSemanticError, SleecSyntaxError, has_errors
from .engine import compile as compile_ruleset
from .engine import step as engine_step
from .enforcement import ProbeSample, run_loop
from .formatter import format_ruleset
from .logger import KWD_LOG_FILE, KWD_LOG_LEVEL, LOG_DEBUG, Logger
from .obligations import ConditionSnapshot
from .parser import parse_ruleset
from .scenario import (
    SCENARIO_CONFIG,
    SCENARIO_FILE,
    SYNTHETIC_CLAUSES,
    SYNTHETIC_RULES,
    SyntheticSpec,
    generate_synthetic_ruleset,
    generate_test_cases,
    load_test_cases,
    save_test_cases,
)
from .server import KWD_HOST, KWD_PORT, serve

__all__ = ['main', 'build_parser']


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

APP_NAME = 'f451_sleec'

DEF_CASES = 750
DEF_SIM_STEPS = 100
DEF_OUT_DIR = 'bench-out'


# =========================================================
#              H E L P E R   F U N C T I O N S
# =========================================================
def _read_source(path):
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise SleecError(f"Cannot read '{path}': {e.strerror}", 'FILE_ERROR') from e


def _load_ruleset(path, strict=True):
    return parse_ruleset(_read_source(path), strict)


def _ruleset_path(args):
    """Positional ruleset path, or the shipped scenario with '--scenario'."""
    if getattr(args, 'scenario', False) or not args.ruleset:
        return SCENARIO_FILE
    return Path(args.ruleset)


def _print_json(data):
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + '\n')


def _report_error(err, sourceName, console):
    if isinstance(err, SleecSyntaxError):
        console.print(err.render(sourceName), markup=False, highlight=False)
    elif isinstance(err, SleecSemanticError):
        for d in err.diagnostics:
            console.print(d.render(sourceName), markup=False, highlight=False)
    else:
        console.print(f'error: {err.message} [{err.code}]', markup=False, highlight=False)


# =========================================================
#                  S U B C O M M A N D S
# =========================================================
def cmd_parse(args, ui, log):
    ruleset = _load_ruleset(args.ruleset)
    if args.json:
        _print_json(
            {
                'rules': [
                    {
                        'id': r.ruleId,
                        'scope': r.scope,
                        'labels': list(r.labels),
                        'clauses': len(r.clauses),
                    }
                    for r in ruleset.rules
                ],
                'monitored': [m.name for m in ruleset.vocabulary.monitored],
                'capabilities': list(ruleset.vocabulary.capabilities),
                'invariants': [i.name for i in ruleset.invariants],
            }
        )
        return EXIT_OK

    for r in ruleset.rules:
        labels = f" [{', '.join(r.labels)}]" if r.labels else ''
        scope = f' (scope {r.scope})' if r.scope else ''
        ui.print(
            f'{r.ruleId}{scope}: {len(r.clauses)} clause(s){labels}', markup=False, highlight=False
        )
    ui.print(
        f'{len(ruleset.rules)} rule(s), {ruleset.clause_count} clause(s), {len(ruleset.invariants)} invariant(s)',
        highlight=False,
    )
    return EXIT_OK


def cmd_fmt(args, ui, log):
    source = _read_source(args.ruleset)
    formatted = format_ruleset(parse_ruleset(source, strict=False))
    if args.check:
        if formatted != source:
            ui.print(f'{args.ruleset}: not in canonical form', markup=False)
            return EXIT_FAILED
        return EXIT_OK
    if args.output:
        Path(args.output).write_text(formatted, encoding='utf-8')
    else:
        sys.stdout.write(formatted)
    return EXIT_OK


def cmd_analyze(args, ui, log):
    ruleset = parse_ruleset(_read_source(args.ruleset), strict=False)
    mode = Sampled(args.samples, args.seed) if args.mode == 'sampled' else EXHAUSTIVE
    diagnostics = analyze(ruleset, mode)
    if args.json:
        _print_json(
            {
                'source': str(args.ruleset),
                'mode': args.mode,
                'errors': sum(1 for d in diagnostics if d.is_error),
                'diagnostics': [d.as_dict() for d in diagnostics],
            }
        )
    else:
        ui.show_diagnostics(diagnostics, str(args.ruleset))
    return EXIT_FAILED if has_errors(diagnostics) else EXIT_OK


def cmd_simulate(args, ui, log):
    trace = random_simulate(_load_ruleset(_ruleset_path(args)), args.steps, args.seed)
    if args.json:
        _print_json(trace.to_json())
    else:
        ui.show_trace(trace)
    return EXIT_FAILED if trace.violations else EXIT_OK


def cmd_step(args, ui, log):
    machine = compile_ruleset(_load_ruleset(_ruleset_path(args)), strict=not args.lenient)
    try:
        data = json.loads(_read_source(args.snapshot))
    except ValueError as e:
        raise SleecError(f"Snapshot '{args.snapshot}' is not valid JSON: {e}", 'MALFORMED_SNAPSHOT') from e
    result = engine_step(machine, ConditionSnapshot.from_json(data))
    sys.stdout.write(result.to_canonical() + '\n')
    return EXIT_OK


def cmd_serve(args, ui, log):
    settings = load_settings(args.config) if args.config else {}
    if args.host:
        settings[KWD_HOST] = args.host
    if args.port is not None:
        settings[KWD_PORT] = args.port
    serve(settings, **_log_overrides(args))
    return EXIT_OK


def _read_probes(path):
    """Probe file: one JSON object per line with 'source', 'value', 'timestamp'."""
    for num, line in enumerate(_read_source(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            yield ProbeSample(row['source'], row['value'], int(row['timestamp']))
        except (ValueError, KeyError, TypeError) as e:
            raise SleecError(f'{path}:{num}: invalid probe sample: {e}', 'INVALID_PROBE') from e


def cmd_loop(args, ui, log):
    cfg = LoopConfig.load(args.config, **_log_overrides(args))
    probes = list(_read_probes(args.probes)) if args.probes else None
    records = run_loop(cfg, probes)
    ui.print(f'{len(records)} enforcement record(s)', highlight=False)
    return EXIT_OK


def cmd_gen_tests(args, ui, log):
    ruleset = _load_ruleset(_ruleset_path(args))
    cases = generate_test_cases(ruleset, args.cases, args.seed, include_baseline=args.baseline)
    save_test_cases(args.out, cases, args.seed)
    ui.print(f'Wrote {len(cases)} test case(s) to {args.out}', markup=False, highlight=False)
    return EXIT_OK


def cmd_gen_synthetic(args, ui, log):
    spec = SyntheticSpec(args.rules, args.clauses, args.seed)
    text = format_ruleset(generate_synthetic_ruleset(spec))
    if args.out:
        Path(args.out).write_text(text, encoding='utf-8')
        ui.print(
            f'Wrote {spec.r} x {spec.c} synthetic ruleset to {args.out}',
            markup=False,
            highlight=False,
        )
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args, ui, log):
    if args.grid:
        with ui.progress() as progress:
            progress.add_task('Running synthetic grid ...', total=None)
            points, fits = run_grid(
                args.cases,
                args.transport,
                args.seed,
                args.rules or SYNTHETIC_RULES,
                args.clauses or SYNTHETIC_CLAUSES,
                args.server_url,
                log,
            )
        merged = _merge_results(points, args.transport)
        write_reports(args.out, merged, fits, points, {'seed': args.seed, 'grid': True})
        ui.show_grid(points)
        ui.show_fits(fits)
        ui.print(f'Reports written to {args.out}', markup=False, highlight=False)
        return EXIT_OK if merged.all_matched else EXIT_FAILED

    path = _ruleset_path(args)
    source = _read_source(path)
    ruleset = parse_ruleset(source)
    if args.cases_file:
        cases = load_test_cases(args.cases_file, ruleset)
    else:
        cases = generate_test_cases(ruleset, args.cases, args.seed)

    loopSettings = None
    if args.config:
        loopSettings = load_settings(args.config)
    elif path == SCENARIO_FILE:
        loopSettings = load_settings(SCENARIO_CONFIG)

    result = run_suite(ruleset, cases, args.transport, args.server_url, source, loopSettings, log)
    write_reports(args.out, result, extra={'seed': args.seed, 'source': str(path)})
    ui.show_suite(result)
    ui.print(f'Reports written to {args.out}', markup=False, highlight=False)
    return EXIT_OK if result.all_matched else EXIT_FAILED


def _merge_results(points, transport):
    merged = SuiteResult(transport)
    for p in points:
        merged.total += p.result.total
        merged.matches += p.result.matches
        merged.mismatches.extend(f'r{p.spec.r}c{p.spec.c}:{m}' for m in p.result.mismatches)
    return merged


# =========================================================
#                  A R G U M E N T S
# =========================================================
def _log_overrides(args):
    overrides = {}
    if args.debug:
        overrides[KWD_LOG_LEVEL] = LOG_DEBUG
    if args.log:
        overrides[KWD_LOG_FILE] = args.log
    return overrides


def _add_ruleset_arg(sub, optional=False):
    if optional:
        sub.add_argument(
            'ruleset', nargs='?', help='SLEEC ruleset file (default: shipped scenario)'
        )
        sub.add_argument(
            '--scenario', action='store_true', help='use the AssistiveCareRobot scenario'
        )
    else:
        sub.add_argument('ruleset', help='SLEEC ruleset file')


def build_parser():
    parser = init_cli_parser(APP_NAME, __version__)
    subs = parser.add_subparsers(dest='command', metavar='COMMAND')

    sub = subs.add_parser('parse', help='parse a ruleset and list its rules')
    _add_ruleset_arg(sub)
    sub.add_argument('--json', action='store_true', help='machine-readable output')
    sub.set_defaults(func=cmd_parse)

    sub = subs.add_parser('fmt', help='print ruleset in canonical form')
    _add_ruleset_arg(sub)
    sub.add_argument(
        '--check', action='store_true', help='exit 1 if file is not in canonical form'
    )
    sub.add_argument('-o', '--output', help='write to file instead of stdout')
    sub.set_defaults(func=cmd_fmt)

    sub = subs.add_parser('analyze', help='run static checks')
    _add_ruleset_arg(sub)
    sub.add_argument('--json', action='store_true', help='machine-readable report')
    sub.add_argument('--mode', choices=('exhaustive', 'sampled'), default='exhaustive')
    sub.add_argument('--samples', type=int, default=10_000, help='draws in sampled mode')
    sub.add_argument('--seed', type=int, default=0)
    sub.set_defaults(func=cmd_analyze)

    sub = subs.add_parser('simulate', help='random simulation with invariant checks')
    _add_ruleset_arg(sub, optional=True)
    sub.add_argument('--steps', type=int, default=DEF_SIM_STEPS)
    sub.add_argument('--seed', type=int, default=0)
    sub.add_argument('--json', action='store_true', help='print full trace as JSON')
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser('step', help='compute obligations for one snapshot')
    _add_ruleset_arg(sub, optional=True)
    sub.add_argument('--snapshot', required=True, help='JSON snapshot file')
    sub.add_argument('--lenient', action='store_true', help='missing booleans count as false')
    sub.set_defaults(func=cmd_step)

    sub = subs.add_parser('serve', help='run the model server')
    sub.add_argument('--config', help='settings file (TOML or JSON)')
    sub.add_argument('--host')
    sub.add_argument('--port', type=int)
    sub.set_defaults(func=cmd_serve)

    sub = subs.add_parser('loop', help='run the enforcement loop')
    sub.add_argument('--config', required=True, help='loop settings file (TOML or JSON)')
    sub.add_argument('--probes', help='JSON-lines probe samples to replay instead of waiting')
    sub.set_defaults(func=cmd_loop)

    sub = subs.add_parser('gen-tests', help='generate test cases with expected obligations')
    _add_ruleset_arg(sub, optional=True)
    sub.add_argument('--cases', type=int, default=DEF_CASES)
    sub.add_argument('--seed', type=int, default=0)
    sub.add_argument(
        '--baseline', action='store_true', help='first case is the all-false baseline'
    )
    sub.add_argument('--out', required=True, help='output JSON file')
    sub.set_defaults(func=cmd_gen_tests)

    sub = subs.add_parser('gen-synthetic', help='generate an r x c synthetic ruleset')
    sub.add_argument('-r', '--rules', type=int, required=True)
    sub.add_argument('-c', '--clauses', type=int, required=True, help='clauses per rule')
    sub.add_argument('--seed', type=int, default=0)
    sub.add_argument('--out', help='output file (default: stdout)')
    sub.set_defaults(func=cmd_gen_synthetic)

    sub = subs.add_parser('bench', help='differential suite with latency stats')
    _add_ruleset_arg(sub, optional=True)
    sub.add_argument('--cases', type=int, default=DEF_CASES, help='cases (per model with --grid)')
    sub.add_argument('--cases-file', help='replay saved test cases instead of generating')
    sub.add_argument('--transport', choices=TRANSPORTS, default=TRANSPORT_IN_PROCESS)
    sub.add_argument('--server-url', help='use a running model server (default: start one)')
    sub.add_argument('--config', help='loop settings for the full-loop transport')
    sub.add_argument('--out', default=DEF_OUT_DIR, help='report folder')
    sub.add_argument('--seed', type=int, default=0)
    sub.add_argument('--grid', action='store_true', help='run the synthetic r x c grid')
    sub.add_argument('--rules', type=int, nargs='+', help='grid rule counts')
    sub.add_argument('--clauses', type=int, nargs='+', help='grid clauses per rule')
    sub.set_defaults(func=cmd_bench)

    return parser


# =========================================================
#                      M A I N
# =========================================================
def main(argv=None, console=None):
    """Run CLI and return exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.version:
        print(f'{__app_name__} v{__version__}')
        return EXIT_OK
    if not getattr(args, 'func', None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    if args.debug:
        install_rich_traceback(show_locals=False)

    ui = ConsoleUI(console)
    errConsole = console if console is not None else Console(stderr=True)
    log = Logger(_log_overrides(args))
    sourceName = getattr(args, 'ruleset', None) or DEF_SOURCE_NAME

    try:
        return args.func(args, ui, log)
    except SleecError as e:
        _report_error(e, str(sourceName), errConsole)
        log.log_debug(e.as_dict())
        return EXIT_FAILED
    except KeyboardInterrupt:
        return EXIT_FAILED
