"""Enforcement loop configuration.

'LoopConfig' reads the settings of one enforcement loop from a TOML
(or 'config.json') file or from a settings 'dict', and checks them.
All problems are collected and reported together in one
'LoopConfigError'.

Capability mappings list the tasks a capability expands into. A task
is either a plain name or a table with parameters:

    [CAPABILITIES]
    encourage = ["say_encouragement"]
    alertNurse = ["compose_alert", { task = "send_message", params = { channel = "nurse_channel" } }]

Thresholds turn raw probe sources into boolean conditions:

    [THRESHOLDS.heartRate]
    condition = "userDistressed"
    op = ">="
    value = 120
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from frozendict import frozendict

from .bus import BUS_SYNC, BUS_THREADED, CH_ACKS, CH_CONDITIONS, CH_OBLIGATIONS, CH_TASKS
from .client import (
    DEF_BACKOFF_MS,
    DEF_RETRIES,
    DEF_TIMEOUT_S,
    KWD_BACKOFF_MS,
    KWD_RETRIES,
    KWD_SERVER_URL,
    KWD_SESSION,
    KWD_TIMEOUT_S,
)
from .clock import CLOCK_VIRTUAL, CLOCK_WALL
from .common import NOOP, SleecError, convert_to_bool, load_settings, merge_settings
from .ruleset import RELOPS, ValueKind, compare_values

__all__ = [
    'LoopConfig',
    'LoopConfigError',
    'TaskSpec',
    'Threshold',
    'KWD_RULESET',
    'KWD_CHANNELS',
    'KWD_CAPABILITIES',
    'KWD_THRESHOLDS',
    'KWD_INITIAL_CONDITIONS',
    'KWD_CLOCK',
    'KWD_STRICT',
    'KWD_RECORD_LOG',
    'KWD_BUS_MODE',
    'KWD_AUTO_ACK',
]


# =========================================================
#    K E Y W O R D S   F O R   C O N F I G   F I L E S
# =========================================================
KWD_RULESET = 'RULESET'
KWD_CHANNELS = 'CHANNELS'
KWD_CAPABILITIES = 'CAPABILITIES'
KWD_THRESHOLDS = 'THRESHOLDS'
KWD_INITIAL_CONDITIONS = 'INITIAL_CONDITIONS'
KWD_CLOCK = 'CLOCK'
KWD_STRICT = 'STRICT'
KWD_RECORD_LOG = 'RECORD_LOG'
KWD_BUS_MODE = 'BUS_MODE'
KWD_AUTO_ACK = 'AUTO_ACK'

KWD_CH_CONDITIONS = 'CONDITIONS'
KWD_CH_OBLIGATIONS = 'OBLIGATIONS'
KWD_CH_TASKS = 'TASKS'
KWD_CH_ACKS = 'ACKS'


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
DEF_CHANNELS = {
    KWD_CH_CONDITIONS: CH_CONDITIONS,
    KWD_CH_OBLIGATIONS: CH_OBLIGATIONS,
    KWD_CH_TASKS: CH_TASKS,
    KWD_CH_ACKS: CH_ACKS,
}
DEF_CLOCK = CLOCK_WALL
DEF_BUS_MODE = BUS_THREADED


class LoopConfigError(SleecError):
    """Invalid loop configuration; 'problems' lists every issue found."""

    code = 'INVALID_CONFIG'

    def __init__(self, problems, errMsg=None):
        self.problems = tuple(problems)
        super().__init__(errMsg or 'Invalid loop configuration:\n  - ' + '\n  - '.join(self.problems))

    def as_dict(self):
        return {**super().as_dict(), 'problems': list(self.problems)}


@dataclass(frozen=True)
class TaskSpec:
    task: str
    params: frozendict = field(default_factory=frozendict)


@dataclass(frozen=True)
class Threshold:
    """Raw source abstraction: 'condition := raw <op> value'."""

    condition: str
    op: str
    value: float

    def apply(self, raw):
        return compare_values(self.op, raw, self.value)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _freeze(value):
    if isinstance(value, dict):
        return frozendict({k: _freeze(v) for k, v in value.items()})
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _parse_tasks(capability, entries, problems):
    if not isinstance(entries, (list, tuple)):
        problems.append(f"CAPABILITIES.{capability}: expected a list of tasks")
        return ()
    tasks = []
    for entry in entries:
        if isinstance(entry, str) and entry:
            tasks.append(TaskSpec(entry))
        elif isinstance(entry, dict) and isinstance(entry.get('task'), str):
            params = entry.get('params', {})
            if not isinstance(params, dict):
                problems.append(
                    f"CAPABILITIES.{capability}: 'params' of '{entry['task']}' must be a table"
                )
                params = {}
            tasks.append(TaskSpec(entry['task'], _freeze(params)))
        else:
            problems.append(f'CAPABILITIES.{capability}: invalid task entry {entry!r}')
    return tuple(tasks)


def _parse_threshold(source, entry, problems):
    if not isinstance(entry, dict):
        problems.append(f'THRESHOLDS.{source}: expected a table')
        return None
    condition, op, value = entry.get('condition'), entry.get('op'), entry.get('value')
    bad = False
    if not isinstance(condition, str) or not condition:
        problems.append(f"THRESHOLDS.{source}: missing 'condition'")
        bad = True
    if op not in RELOPS:
        problems.append(f"THRESHOLDS.{source}: 'op' must be one of {', '.join(RELOPS)}")
        bad = True
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"THRESHOLDS.{source}: 'value' must be a number")
        bad = True
    return None if bad else Threshold(condition, op, value)


# =========================================================
#                     M A I N   C L A S S
# =========================================================
class LoopConfig:
    """Settings of one enforcement loop.

    NOTE: the raw settings are kept in 'settings' so that they can be
    passed as-is to 'Logger' and 'ModelServerClient'.

    Example:
        cfg = LoopConfig.load('assistive.toml')
        cfg = LoopConfig(settings, CLOCK='virtual')   # keyword overrides
    """

    def __init__(self, *args, baseDir=None, **kwargs):
        settings = merge_settings(*args, **kwargs)
        self.settings = settings
        self.baseDir = Path(baseDir) if baseDir is not None else Path.cwd()
        problems = []

        self.serverUrl = str(settings.get(KWD_SERVER_URL, 'http://127.0.0.1:8451'))
        self.session = settings.get(KWD_SESSION) or None
        self.ruleset = self._resolve(settings.get(KWD_RULESET))
        self.recordLog = self._resolve(settings.get(KWD_RECORD_LOG))
        self.strict = convert_to_bool(settings.get(KWD_STRICT, True))

        self.clock = settings.get(KWD_CLOCK, DEF_CLOCK)
        if self.clock not in (CLOCK_WALL, CLOCK_VIRTUAL):
            problems.append(
                f"CLOCK must be '{CLOCK_WALL}' or '{CLOCK_VIRTUAL}', got {self.clock!r}"
            )
        self.busMode = settings.get(KWD_BUS_MODE, DEF_BUS_MODE)
        if self.busMode not in (BUS_SYNC, BUS_THREADED):
            problems.append(
                f"BUS_MODE must be '{BUS_SYNC}' or '{BUS_THREADED}', got {self.busMode!r}"
            )

        self.retries = self._positive_int(settings, KWD_RETRIES, DEF_RETRIES, problems, minimum=1)
        self.backoffMs = self._positive_int(settings, KWD_BACKOFF_MS, DEF_BACKOFF_MS, problems)
        self.timeoutS = settings.get(KWD_TIMEOUT_S, DEF_TIMEOUT_S)
        if not _is_number(self.timeoutS) or self.timeoutS <= 0:
            problems.append(f'{KWD_TIMEOUT_S} must be a positive number')

        channels = settings.get(KWD_CHANNELS, {})
        if not isinstance(channels, dict):
            problems.append(f'{KWD_CHANNELS} must be a table')
            channels = {}
        unknown = sorted(set(channels) - set(DEF_CHANNELS))
        if unknown:
            problems.append(f"{KWD_CHANNELS}: unknown channel key(s) {', '.join(unknown)}")
        self.channels = frozendict(
            {**DEF_CHANNELS, **{k: v for k, v in channels.items() if k in DEF_CHANNELS}}
        )

        capabilities = settings.get(KWD_CAPABILITIES, {})
        if not isinstance(capabilities, dict):
            problems.append(f'{KWD_CAPABILITIES} must be a table')
            capabilities = {}
        mapping = {NOOP: ()}
        for cap, entries in capabilities.items():
            mapping[cap] = _parse_tasks(cap, entries, problems)
        if mapping[NOOP]:
            problems.append(f"CAPABILITIES.{NOOP} must map to an empty task list")
        self.capabilities = frozendict(mapping)

        thresholds = settings.get(KWD_THRESHOLDS, {})
        if not isinstance(thresholds, dict):
            problems.append(f'{KWD_THRESHOLDS} must be a table')
            thresholds = {}
        parsed = {src: _parse_threshold(src, entry, problems) for src, entry in thresholds.items()}
        self.thresholds = frozendict({k: v for k, v in parsed.items() if v is not None})

        initial = settings.get(KWD_INITIAL_CONDITIONS, {})
        if not isinstance(initial, dict):
            problems.append(f'{KWD_INITIAL_CONDITIONS} must be a table')
            initial = {}
        self.initialConditions = frozendict(initial)

        autoAck = settings.get(KWD_AUTO_ACK, {})
        if not isinstance(autoAck, dict) or any(
            not _is_number(v) or v < 0 for v in autoAck.values()
        ):
            problems.append(f'{KWD_AUTO_ACK} must map capabilities to non-negative delays (ms)')
            autoAck = {}
        self.autoAck = frozendict(autoAck)

        if problems:
            raise LoopConfigError(problems)

    def _resolve(self, value):
        if not value:
            return None
        path = Path(value)
        return path if path.is_absolute() else self.baseDir.joinpath(path)

    @staticmethod
    def _positive_int(settings, key, default, problems, minimum=0):
        value = settings.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            problems.append(f'{key} must be an integer >= {minimum}')
            return default
        return value

    @classmethod
    def load(cls, path, **overrides):
        """Load config file; relative paths in it resolve against its folder."""
        path = Path(path)
        return cls(load_settings(path), baseDir=path.parent, **overrides)

    @property
    def conditions_channel(self):
        return self.channels[KWD_CH_CONDITIONS]

    @property
    def obligations_channel(self):
        return self.channels[KWD_CH_OBLIGATIONS]

    @property
    def tasks_channel(self):
        return self.channels[KWD_CH_TASKS]

    @property
    def acks_channel(self):
        return self.channels[KWD_CH_ACKS]

    def tasks_for(self, capability):
        return self.capabilities.get(capability)

    def check_ruleset(self, ruleset):
        """Check mappings against the active ruleset.

        Every declared capability needs a task mapping, threshold
        targets must be monitored booleans, and initial conditions must
        be valid monitored values.

        Raises:
            LoopConfigError: listing every problem
        """
        vocab = ruleset.vocabulary
        problems = [
            f"Capability '{cap}' has no task mapping in {KWD_CAPABILITIES}"
            for cap in vocab.capabilities
            if cap not in self.capabilities
        ]
        monitored = vocab.monitored_map
        for source, threshold in self.thresholds.items():
            decl = monitored.get(threshold.condition)
            if decl is None or decl.kind is not ValueKind.BOOLEAN:
                problems.append(
                    f"THRESHOLDS.{source}: '{threshold.condition}' is not a monitored boolean condition"
                )
        for name, value in self.initialConditions.items():
            decl = monitored.get(name)
            if decl is None:
                problems.append(f"{KWD_INITIAL_CONDITIONS}: '{name}' is not a monitored variable")
            elif not decl.accepts(value):
                problems.append(
                    f"{KWD_INITIAL_CONDITIONS}: {value!r} is not a valid value for '{name}'"
                )
        if problems:
            raise LoopConfigError(problems)

    def client_settings(self):
        return {
            KWD_SERVER_URL: self.serverUrl,
            KWD_SESSION: self.session,
            KWD_RETRIES: self.retries,
            KWD_BACKOFF_MS: self.backoffMs,
            KWD_TIMEOUT_S: self.timeoutS,
        }


