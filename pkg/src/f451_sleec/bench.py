"""Differential test runner and latency bench.

'run_suite()' replays test cases through one of three transports and
compares what gets enforced against the expected obligations:

    in-process   compiled machine called directly
    http         model server '/step' over loopback HTTP
    full-loop    Monitor -> Enforcer -> model server -> Executor -> mock,
                 with the snapshot injected as one perception frame

Each case yields one 'EnforcementRecord' with the stage timestamps, so
the same run feeds the overhead statistics. 'run_grid()' repeats this
over the synthetic r x c models and fits latency against clause count.

Reports go to an output folder as 'report.json' and 'latency.csv'.
"""

from __future__ import annotations

import csv
import json

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List

from .bus import BUS_SYNC, CH_OBLIGATIONS, MessageBus
from .client import ModelServerClient
from .clock import VirtualClock
from .common import SleecError
from .config import LoopConfig
from .engine import compile as compile_ruleset
from .enforcement import Enforcer, EnforcementLoop, LocalStepper, RecordSink, plan_tasks
from .formatter import format_ruleset
from .logger import LOG_ERROR, Logger
from .scenario import (
    SYNTHETIC_CLAUSES,
    SYNTHETIC_RULES,
    SyntheticSpec,
    generate_synthetic_ruleset,
    generate_test_cases,
    synthetic_loop_settings,
)
from .server import ServerThread
from .stats import ALL_MODELS, FitError, compute_stats, fit_models

__all__ = [
    'SuiteResult',
    'GridPoint',
    'SuiteAbortedError',
    'run_suite',
    'run_grid',
    'write_reports',
    'TRANSPORT_IN_PROCESS',
    'TRANSPORT_HTTP',
    'TRANSPORT_FULL_LOOP',
    'TRANSPORTS',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
TRANSPORT_IN_PROCESS = 'in-process'
TRANSPORT_HTTP = 'http'
TRANSPORT_FULL_LOOP = 'full-loop'
TRANSPORTS = (TRANSPORT_IN_PROCESS, TRANSPORT_HTTP, TRANSPORT_FULL_LOOP)

REPORT_JSON = 'report.json'
LATENCY_CSV = 'latency.csv'

STAGES = ('total', 'enforcer', 'server', 'other')

CSV_FIELDS = (
    'case',
    't_probe',
    't_conditions_published',
    't_enforcer_in',
    't_server_in',
    't_server_out',
    't_enforcer_out',
    't_tasks_dispatched',
    'server_us',
    'total_ms',
    'enforcer_ms',
    'server_ms',
    'other_ms',
    'matched',
)


# =========================================================
#                     R E S U L T S
# =========================================================
@dataclass
class SuiteResult:
    transport: str
    total: int = 0
    matches: int = 0
    mismatches: List[str] = field(default_factory=list)
    records: List[object] = field(default_factory=list)

    @property
    def all_matched(self):
        return self.matches == self.total

    def stage_samples(self, stage):
        return [r.stages_ms()[stage] for r in self.records]

    def stage_stats(self):
        if not self.records:
            return {}
        return {stage: compute_stats(self.stage_samples(stage)).to_json() for stage in STAGES}

    def to_json(self):
        return {
            'transport': self.transport,
            'cases': self.total,
            'matches': self.matches,
            'mismatches': list(self.mismatches),
            'stages_ms': self.stage_stats(),
        }


class SuiteAbortedError(SleecError):
    """Transport failed mid-suite; 'partial' holds the results so far."""

    code = 'SUITE_ABORTED'

    def __init__(self, partial, cause, errMsg=None):
        self.partial = partial
        self.cause = cause
        super().__init__(errMsg or f'Suite aborted after {partial.total} case(s): {cause}')


@dataclass(frozen=True)
class GridPoint:
    spec: SyntheticSpec
    result: SuiteResult

    @property
    def server_mean_ms(self):
        samples = self.result.stage_samples('server')
        return compute_stats(samples).mean if samples else None

    def to_json(self):
        return {
            'r': self.spec.r,
            'c': self.spec.c,
            'clauses': self.spec.clauses,
            'cases': self.result.total,
            'matches': self.result.matches,
            'server_mean_ms': self.server_mean_ms,
        }


# =========================================================
#                   T R A N S P O R T S
# =========================================================
class _Harness:
    """Sets up one transport and checks one case at a time."""

    def __init__(
        self, ruleset, transport, serverUrl=None, source=None, loopSettings=None, logger=None
    ):
        self.ruleset = ruleset
        self.transport = transport
        self.log = logger if logger is not None else Logger()
        self._server = None
        self._loop = None
        self._obligations = None

        if transport == TRANSPORT_IN_PROCESS:
            self.client = LocalStepper(compile_ruleset(ruleset))
        else:
            if serverUrl is None:
                self._server = ServerThread()
                self._server.start()
                serverUrl = self._server.url
            self.client = ModelServerClient(SERVER_URL=serverUrl)
            self.client.upload_model(source if source is not None else format_ruleset(ruleset))
            self.client.start()

        if transport == TRANSPORT_FULL_LOOP:
            if loopSettings is None:
                loopSettings = synthetic_loop_settings(ruleset)
            cfg = LoopConfig(loopSettings)
            self.cfg = cfg
            self._loop = EnforcementLoop(
                cfg,
                ruleset=ruleset,
                client=self.client,
                clock=VirtualClock(),
                bus=MessageBus(BUS_SYNC, self.log),
                logger=self.log,
            ).start()
            self._obligations = self._loop.bus.record(cfg.obligations_channel)
        else:
            self._bus = MessageBus(BUS_SYNC, self.log)
            self._enforcer = Enforcer(
                self.client,
                self._bus,
                CH_OBLIGATIONS,
                RecordSink(logger=self.log),
                logger=self.log,
            )

    def close(self):
        if self._loop is not None:
            self._loop.stop()
        else:
            try:
                self.client.stop()
            except SleecError as e:
                self.log.log_json('stop_failed', LOG_ERROR, error=e.code)
        self.client.close()
        if self._server is not None:
            self._server.shutdown()

    def _expected_tasks(self, expected):
        return [
            t.task
            for d in expected.directives
            if not d.is_after
            for t in plan_tasks(d, self.cfg)
        ]

    def check(self, case):
        """Run one case; returns '(matched, record)'."""
        if self._loop is None:
            directives, record = self._enforcer.enforce(case.snapshot, case.caseId)
            matched = tuple(directives) == case.expected.directives
            return matched, replace(record, matched=matched)

        self._loop.mock.clear()
        self._obligations.clear()
        self._loop.executor.cancel_all()
        before = len(self._loop.sink.records)
        self._loop.inject_frame(dict(case.snapshot.values), case.caseId)
        self._loop.drain()

        record = self._loop.sink.records[before]
        published = self._obligations[-1].obligations if self._obligations else None
        if case.expected.is_respectful:
            matched = published is None
        else:
            expectedTasks = self._expected_tasks(case.expected)
            matched = published == case.expected and self._loop.mock.tasks() == expectedTasks
        return matched, replace(record, matched=matched)


# =========================================================
#              P U B L I C   F U N C T I O N S
# =========================================================
def run_suite(
    ruleset,
    cases,
    transport=TRANSPORT_IN_PROCESS,
    serverUrl=None,
    source=None,
    loopSettings=None,
    logger=None,
):
    """Replay test cases and compare enforced obligations with ground truth.

    Args:
        ruleset: 'Ruleset' under test
        cases: 'TestCase' list
        transport: 'in-process', 'http', or 'full-loop'
        serverUrl: model server to use; a loopback server is started if 'None'
        source: SLEEC text to upload (formatted from 'ruleset' if 'None')
        loopSettings: 'LoopConfig' settings for full-loop (placeholder tasks if 'None')

    Returns:
        'SuiteResult'

    Raises:
        SuiteAbortedError: transport failure; carries partial results
    """
    if transport not in TRANSPORTS:
        raise SleecError(f'Unknown transport: {transport!r}', 'INVALID_ARGUMENT')
    result = SuiteResult(transport)
    if not cases:
        return result

    log = logger if logger is not None else Logger()
    harness = _Harness(ruleset, transport, serverUrl, source, loopSettings, log)
    try:
        for case in cases:
            try:
                matched, record = harness.check(case)
            except SleecError as e:
                log.log_json('suite_aborted', LOG_ERROR, case=case.caseId, error=e.code)
                raise SuiteAbortedError(result, e) from e
            result.total += 1
            result.records.append(record)
            if matched:
                result.matches += 1
            else:
                result.mismatches.append(case.caseId)
    finally:
        harness.close()
    return result


def run_grid(
    casesPerModel=50,
    transport=TRANSPORT_IN_PROCESS,
    seed=0,
    rules=None,
    clauses=None,
    serverUrl=None,
    logger=None,
):
    """Run the synthetic r x c grid.

    Returns:
        '(list of GridPoint, list of FitReport)'; fits are over
        (total clauses, mean server ms) and empty when they cannot be made
    """
    points = []
    for r in rules or SYNTHETIC_RULES:
        for c in clauses or SYNTHETIC_CLAUSES:
            spec = SyntheticSpec(r, c, seed)
            ruleset = generate_synthetic_ruleset(spec)
            cases = generate_test_cases(ruleset, casesPerModel, seed)
            result = run_suite(ruleset, cases, transport, serverUrl, logger=logger)
            points.append(GridPoint(spec, result))

    data = [(p.spec.clauses, p.server_mean_ms) for p in points if p.server_mean_ms]
    try:
        fits = fit_models(data, ALL_MODELS)
    except FitError:
        fits = []
    return points, fits


def write_reports(out, result, fits=(), grid=(), extra=None):
    """Write 'report.json' and 'latency.csv' into folder 'out'.

    Returns:
        '(reportPath, csvPath)'
    """
    outDir = Path(out)
    outDir.mkdir(parents=True, exist_ok=True)

    report = {**result.to_json(), **(extra or {})}
    if fits:
        report['fits'] = [f.to_json() for f in fits]
    if grid:
        report['grid'] = [p.to_json() for p in grid]
    reportPath = outDir.joinpath(REPORT_JSON)
    reportPath.write_text(json.dumps(report, indent=2, sort_keys=True) + '\n', encoding='utf-8')

    csvPath = outDir.joinpath(LATENCY_CSV)
    with open(csvPath, mode='w', newline='', encoding='utf-8') as fp:
        writer = csv.DictWriter(fp, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for record in _all_records(result, grid):
            row = record.to_json()
            stages = record.stages_ms()
            writer.writerow(
                {
                    **{k: row[k] for k in CSV_FIELDS if k in row},
                    'case': row['case'],
                    **{f'{s}_ms': stages[s] for s in STAGES},
                }
            )
    return reportPath, csvPath


def _all_records(result, grid) -> List[object]:
    records = list(result.records)
    for point in grid:
        records.extend(point.result.records)
    return records
