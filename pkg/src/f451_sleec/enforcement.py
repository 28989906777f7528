"""SLEEC enforcement loop.

The loop wraps a managed system in a Monitor, Analyze/Plan, Execute
cycle. Its components only talk through the bus:

    probe --> Monitor --/conditions--> Enforcer --/obligations--> Executor --/tasks--> system
                                          |                          ^
                                     model server                    +---/acks---- system

 - 'Monitor' turns raw probe samples into condition values, keeps the
   condition cache, and publishes the full snapshot whenever some
   condition actually changed.
 - 'Enforcer' posts each snapshot to the model server '/step' endpoint
   and publishes non-empty obligation sets. Every step produces one
   'EnforcementRecord' with seven monotonic timestamps.
 - 'Executor' expands obligations into task requests and owns all
   timers: AFTER delays dispatch, WITHIN arms a deadline that an ack
   cancels and whose expiry dispatches the OTHERWISE capability.
 - 'ManagedSystemMock' stands in for the robot: it collects task
   requests and acknowledges capabilities after configured delays.

Task issue times come from the injected clock (virtual in tests).
Record timestamps always come from the monotonic wall clock since they
measure overhead.

Dependencies:
 - frozendict
"""

from __future__ import annotations

import signal
import threading
import time

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

from frozendict import frozendict

from .bus import MessageBus
from .client import ModelServerClient, StepReply
from .clock import make_clock
from .common import NOOP, NS_PER_MS, NS_PER_US, SleecError
from .config import LoopConfigError
from .engine import compile as compile_ruleset
from .engine import compile_condition
from .logger import LOG_DEBUG, LOG_WARNING, JsonLinesWriter, Logger
from .obligations import ConditionSnapshot, InvalidSnapshotError
from .parser import parse_ruleset
from .ruleset import After, Within, referenced_names

__all__ = [
    'ProbeSample',
    'ConditionUpdate',
    'TaskRequest',
    'Ack',
    'DispatchPlan',
    'EnforcementRecord',
    'ObligationMessage',
    'UnknownSourceError',
    'UnmappedCapabilityError',
    'Monitor',
    'Enforcer',
    'Executor',
    'ManagedSystemMock',
    'LocalStepper',
    'RecordSink',
    'EnforcementLoop',
    'plan_tasks',
    'schedule_temporal',
    'run_loop',
]


# =========================================================
#                        E R R O R S
# =========================================================
class UnknownSourceError(SleecError):
    code = 'UNKNOWN_SOURCE'

    def __init__(self, source, errMsg=None):
        self.source = source
        super().__init__(errMsg or f"Probe source '{source}' is neither a monitored variable nor a threshold source")


class UnmappedCapabilityError(SleecError):
    code = 'UNMAPPED_CAPABILITY'

    def __init__(self, capability, errMsg=None):
        self.capability = capability
        super().__init__(errMsg or f"Capability '{capability}' has no task mapping")


# =========================================================
#                     M E S S A G E S
# =========================================================
@dataclass(frozen=True)
class ProbeSample:
    source: str
    value: object
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class ConditionUpdate:
    """'/conditions' message: full snapshot plus what changed."""

    snapshot: ConditionSnapshot
    delta: frozendict
    caseId: Optional[str] = None
    tProbe: int = 0
    tPublished: int = 0


@dataclass(frozen=True)
class TaskRequest:
    """One concrete task for the managed system.

    Attributes:
        task: task name
        params: task parameters
        capability: capability the task implements
        provenance: '(ruleId, clauseIndex)' pairs of the directive
        issuedAt: dispatch time on the loop clock (ns)
        stepId: enforcement step that produced the directive
    """

    task: str
    params: frozendict = field(default_factory=frozendict)
    capability: str = ''
    provenance: Tuple[Tuple[str, int], ...] = ()
    issuedAt: int = 0
    stepId: int = 0

    def to_json(self):
        return {
            'task': self.task,
            'params': dict(self.params),
            'capability': self.capability,
            'provenance': [{'rule': r, 'clause': c} for r, c in self.provenance],
            'issued_at': self.issuedAt,
            'step': self.stepId,
        }


@dataclass(frozen=True)
class Ack:
    """Fulfillment acknowledgment for a capability."""

    capability: str
    provenance: Tuple[Tuple[str, int], ...] = ()
    timestamp: int = 0


@dataclass(frozen=True)
class EnforcementRecord:
    """Timing of one enforcement step (monotonic ns).

    Timestamps are non-decreasing in field order. When a step yields no
    obligation, 'tTasksDispatched' equals 'tEnforcerOut'. 'tServerIn' and
    'tServerOut' are derived from 'serverUs' by centering it in the round
    trip, since the server clock is never read.
    """

    caseId: Optional[str]
    stepId: int
    tProbe: int
    tConditionsPublished: int
    tEnforcerIn: int
    tServerIn: int
    tServerOut: int
    tEnforcerOut: int
    tTasksDispatched: int
    serverUs: int = 0
    capabilities: Tuple[str, ...] = ()
    tasks: Tuple[str, ...] = ()
    matched: Optional[bool] = None

    @property
    def timestamps(self):
        return (
            self.tProbe,
            self.tConditionsPublished,
            self.tEnforcerIn,
            self.tServerIn,
            self.tServerOut,
            self.tEnforcerOut,
            self.tTasksDispatched,
        )

    @property
    def is_monotonic(self):
        stamps = self.timestamps
        return all(a <= b for a, b in zip(stamps, stamps[1:]))

    def stages_ms(self):
        """Overhead decomposition in ms: total, enforcer, server, and the rest."""
        total = (self.tTasksDispatched - self.tProbe) / NS_PER_MS
        enforcer = (self.tEnforcerOut - self.tEnforcerIn) / NS_PER_MS
        server = (self.tServerOut - self.tServerIn) / NS_PER_MS
        return {'total': total, 'enforcer': enforcer, 'server': server, 'other': total - enforcer}

    def to_json(self):
        return {
            'case': self.caseId,
            'step': self.stepId,
            't_probe': self.tProbe,
            't_conditions_published': self.tConditionsPublished,
            't_enforcer_in': self.tEnforcerIn,
            't_server_in': self.tServerIn,
            't_server_out': self.tServerOut,
            't_enforcer_out': self.tEnforcerOut,
            't_tasks_dispatched': self.tTasksDispatched,
            'server_us': self.serverUs,
            'capabilities': list(self.capabilities),
            'tasks': list(self.tasks),
            'matched': self.matched,
        }


@dataclass(frozen=True)
class ObligationMessage:
    """'/obligations' message."""

    obligations: object
    record: EnforcementRecord


@dataclass(frozen=True)
class DispatchPlan:
    """When the tasks of one directive go out.

    Attributes:
        immediate: tasks to dispatch now
        delayed: tasks to dispatch at 'delayedAt' (AFTER)
        delayedAt: absolute clock time, or 'None'
        deadlineAt: absolute WITHIN deadline, or 'None'
        fallback: capability to enforce if the deadline passes without ack
    """

    immediate: Tuple[TaskRequest, ...] = ()
    delayed: Tuple[TaskRequest, ...] = ()
    delayedAt: Optional[int] = None
    deadlineAt: Optional[int] = None
    fallback: Optional[str] = None


# =========================================================
#              P L A N N I N G   H E L P E R S
# =========================================================
def plan_tasks(directive, capabilities, issuedAt=0, stepId=0, capability=None):
    """Expand a directive into its configured task sequence.

    Args:
        directive: 'ObligationDirective'
        capabilities: 'LoopConfig' or capability -> 'TaskSpec' sequence mapping
        capability: expand this capability instead (fallbacks) but keep provenance

    Raises:
        UnmappedCapabilityError: capability has no mapping
    """
    mapping = getattr(capabilities, 'capabilities', capabilities)
    cap = capability or directive.capability
    if cap == NOOP:
        return []
    specs = mapping.get(cap)
    if specs is None:
        raise UnmappedCapabilityError(cap)
    return [
        TaskRequest(s.task, s.params, cap, directive.provenance, issuedAt, stepId) for s in specs
    ]


def schedule_temporal(directive, clock, tasks, stepId=0):
    """Build dispatch plan for a directive's temporal modifier.

    Plain and WITHIN directives dispatch at once (WITHIN also gets a
    deadline); AFTER directives dispatch at 'now + t'.
    """
    now = clock.now()
    modifier = directive.modifier
    if isinstance(modifier, After):
        at = now + modifier.duration.nanos
        return DispatchPlan(
            delayed=tuple(replace(t, issuedAt=at, stepId=stepId) for t in tasks), delayedAt=at
        )
    immediate = tuple(replace(t, issuedAt=now, stepId=stepId) for t in tasks)
    if isinstance(modifier, Within):
        return DispatchPlan(
            immediate, deadlineAt=now + modifier.duration.nanos, fallback=modifier.fallback
        )
    return DispatchPlan(immediate)


def _server_window(tSend, tRecv, serverUs):
    """Place the server interval inside the round trip, centered.

    The server only reports its processing time, so the two returned
    stamps are estimates on the enforcer clock and not measurements.
    """
    serverNs = min(serverUs * NS_PER_US, tRecv - tSend)
    tServerIn = tSend + (tRecv - tSend - serverNs) // 2
    return tServerIn, tServerIn + serverNs


# =========================================================
#                     C O M P O N E N T S
# =========================================================
class RecordSink:
    """Collects completed enforcement records and writes them as JSON lines."""

    def __init__(self, path=None, logger=None):
        self._writer = JsonLinesWriter(path)
        self._records = []
        self._lock = threading.Lock()
        self._log = logger if logger is not None else Logger()
        self._done = threading.Condition(self._lock)

    @property
    def records(self):
        with self._lock:
            return list(self._records)

    def add(self, record):
        with self._lock:
            self._records.append(record)
            self._writer.write(record.to_json())
            self._done.notify_all()
        self._log.log_json('enforcement_record', LOG_DEBUG, **record.to_json())

    def wait_for(self, count, timeout=None):
        with self._lock:
            return self._done.wait_for(lambda: len(self._records) >= count, timeout)

    def close(self):
        with self._lock:
            self._writer.close()


class Monitor:
    """Condition abstraction and caching.

    The cache starts with the configured initial conditions; other
    variables are unknown until first observed. Derived predicates are
    recomputed whenever all the variables they read are known.
    """

    def __init__(
        self,
        ruleset,
        bus,
        channel,
        thresholds=None,
        initial=None,
        stamp=time.monotonic_ns,
        logger=None,
    ):
        self._bus = bus
        self._channel = channel
        self._thresholds = dict(thresholds or {})
        self._initial = dict(initial or {})
        self._stamp = stamp
        self._log = logger if logger is not None else Logger()
        self._lastSeen = {}
        self.set_ruleset(ruleset)
        self.cache = dict(self._initial)
        self._derivedCache = {}
        self._refresh_derived()

    def set_ruleset(self, ruleset):
        self.ruleset = ruleset
        vocab = ruleset.vocabulary
        self._monitored = vocab.monitored_map
        self._derived = [
            (d.name, compile_condition(d.expr), referenced_names(d.expr)) for d in vocab.derived
        ]

    def _refresh_derived(self):
        changed = {}
        for name, fn, reads in self._derived:
            if all(r in self.cache for r in reads):
                value = fn(self.cache)
                if self._derivedCache.get(name) != value:
                    changed[name] = value
                self._derivedCache[name] = value
        return changed

    def snapshot(self):
        return ConditionSnapshot(dict(self.cache))

    def _abstract(self, sample):
        threshold = self._thresholds.get(sample.source)
        if threshold is not None:
            return threshold.condition, threshold.apply(sample.value)
        decl = self._monitored.get(sample.source)
        if decl is None:
            raise UnknownSourceError(sample.source)
        if not decl.accepts(sample.value):
            raise InvalidSnapshotError(
                f"Value {sample.value!r} is not a valid {decl.kind.value} for '{sample.source}'",
                'INVALID_VALUE',
                sample.source,
            )
        return sample.source, sample.value

    def process_probe(self, sample, caseId=None):
        """Ingest one probe sample.

        Returns:
            'ConditionSnapshot' holding only the changed conditions, or
            'None' when nothing changed (nothing is published then)

        Raises:
            UnknownSourceError: sample source is not known
        """
        tProbe = self._stamp()
        if sample.timestamp is not None:
            last = self._lastSeen.get(sample.source)
            if last is not None and sample.timestamp < last:
                self._log.log_json(
                    'stale_probe', LOG_WARNING, source=sample.source, timestamp=sample.timestamp
                )
                return None
            self._lastSeen[sample.source] = sample.timestamp

        name, value = self._abstract(sample)
        delta = {}
        if name not in self.cache or self.cache[name] != value:
            self.cache[name] = value
            delta[name] = value
            delta.update(self._refresh_derived())
        if not delta:
            return None

        self._publish(delta, caseId, tProbe)
        return ConditionSnapshot(delta)

    def process_frame(self, values, caseId=None):
        """Replace the whole cache with one perception frame and publish it."""
        tProbe = self._stamp()
        self.cache = dict(values)
        self._derivedCache = {}
        delta = {**self.cache, **self._refresh_derived()}
        self._publish(delta, caseId, tProbe)
        return ConditionSnapshot(delta)

    def _publish(self, delta, caseId, tProbe):
        update = ConditionUpdate(self.snapshot(), frozendict(delta), caseId, tProbe, self._stamp())
        self._bus.publish(self._channel, update)


class LocalStepper:
    """In-process stand-in for 'ModelServerClient'.

    Steps a compiled machine directly and reports the same
    'StepReply' the HTTP client does.
    """

    def __init__(self, machine):
        self.machine = machine
        self.sessionId = 'local'
        self._count = 0
        self._lock = threading.Lock()

    def upload_model(self, source, sessionId=None, strict=True):
        with self._lock:
            self.machine = compile_ruleset(parse_ruleset(source), strict)
            self._count = 0
        return self.sessionId

    def start(self):
        return 'running'

    def stop(self):
        return 'stopped'

    def close(self):
        pass

    def step(self, snapshot):
        with self._lock:
            start = time.perf_counter_ns()
            result = self.machine.step(snapshot)
            serverUs = (time.perf_counter_ns() - start) // NS_PER_US
            self._count += 1
            return StepReply(result, serverUs, self._count, result.to_canonical())


class Enforcer:
    """Analysis and planning through the model server."""

    def __init__(self, client, bus, channel, sink, stamp=time.monotonic_ns, logger=None):
        self._client = client
        self._bus = bus
        self._channel = channel
        self._sink = sink
        self._stamp = stamp
        self._log = logger if logger is not None else Logger()
        self._steps = 0

    def on_conditions(self, update):
        self.enforce(update.snapshot, update.caseId, update.tProbe, update.tPublished)

    def enforce(self, snapshot, caseId=None, tProbe=None, tPublished=None):
        """Run one step and publish non-empty obligation sets.

        Returns:
            '(directives, EnforcementRecord)'; for published steps the
            final record (with dispatch time) is added by the Executor

        Raises:
            ServerUnreachableError, StepRejectedError
        """
        tIn = self._stamp()
        tProbe = tIn if tProbe is None else tProbe
        tPublished = tProbe if tPublished is None else tPublished
        try:
            reply = self._client.step(snapshot)
        except SleecError as e:
            self._log.log_json(
                'enforce_failed', LOG_WARNING, case=caseId, error=e.code, message=e.message
            )
            raise
        tOut = self._stamp()
        self._steps += 1

        tServerIn, tServerOut = _server_window(tIn, tOut, reply.serverUs)
        record = EnforcementRecord(
            caseId,
            self._steps,
            tProbe,
            tPublished,
            tIn,
            tServerIn,
            tServerOut,
            tOut,
            tOut,
            reply.serverUs,
            reply.obligations.capabilities,
        )
        if reply.obligations.is_respectful:
            self._sink.add(record)
        else:
            self._bus.publish(self._channel, ObligationMessage(reply.obligations, record))
        return list(reply.obligations.directives), record


class Executor:
    """Turns obligations into task requests and owns all timers."""

    def __init__(
        self, capabilities, bus, channel, clock, sink, stamp=time.monotonic_ns, logger=None
    ):
        self._capabilities = capabilities
        self._bus = bus
        self._channel = channel
        self._clock = clock
        self._sink = sink
        self._stamp = stamp
        self._log = logger if logger is not None else Logger()
        self._deadlines = {}
        self._delayed = []
        self._lock = threading.Lock()

    @property
    def armed(self):
        with self._lock:
            return {cap: h for cap, h in self._deadlines.items() if h.active}

    def _dispatch(self, tasks):
        for task in tasks:
            self._bus.publish(self._channel, task)

    def _on_deadline(self, directive, stepId):
        with self._lock:
            self._deadlines.pop(directive.capability, None)
        fallback = directive.modifier.fallback
        tasks = plan_tasks(
            directive, self._capabilities, self._clock.now(), stepId, capability=fallback
        )
        self._log.log_json(
            'deadline_missed',
            LOG_WARNING,
            capability=directive.capability,
            fallback=fallback,
            at=self._clock.now(),
        )
        self._dispatch(tasks)

    def on_obligations(self, message):
        record = message.record
        directives = message.obligations.directives
        emitted = {d.capability for d in directives}
        for cap in self.armed:
            if cap not in emitted:
                self._log.log_json('timer_kept', LOG_DEBUG, capability=cap, step=record.stepId)

        dispatched = []
        for directive in directives:
            tasks = plan_tasks(directive, self._capabilities, stepId=record.stepId)
            plan = schedule_temporal(directive, self._clock, tasks, record.stepId)
            self._dispatch(plan.immediate)
            dispatched.extend(t.task for t in plan.immediate)
            if plan.delayedAt is not None:
                handle = self._clock.call_later(
                    plan.delayedAt - self._clock.now(), self._dispatch, plan.delayed
                )
                with self._lock:
                    self._delayed = [h for h in self._delayed if h.active] + [handle]
            if plan.deadlineAt is not None:
                with self._lock:
                    previous = self._deadlines.get(directive.capability)
                    if previous is not None:
                        previous.cancel()
                    self._deadlines[directive.capability] = self._clock.call_later(
                        plan.deadlineAt - self._clock.now(),
                        self._on_deadline,
                        directive,
                        record.stepId,
                    )

        tDispatched = max(self._stamp(), record.tEnforcerOut)
        self._sink.add(replace(record, tTasksDispatched=tDispatched, tasks=tuple(dispatched)))

    def on_ack(self, ack):
        with self._lock:
            handle = self._deadlines.pop(ack.capability, None)
        if handle is not None and handle.active:
            handle.cancel()
            self._log.log_json(
                'deadline_met', LOG_DEBUG, capability=ack.capability, at=self._clock.now()
            )
        else:
            self._log.log_json(
                'late_ack', LOG_WARNING, capability=ack.capability, at=self._clock.now()
            )

    def cancel_all(self):
        """Cancel armed deadlines and AFTER dispatches that have not fired yet."""
        with self._lock:
            handles = list(self._deadlines.values()) + self._delayed
            self._deadlines, self._delayed = {}, []
        for handle in handles:
            handle.cancel()


class ManagedSystemMock:
    """In-process managed system.

    Records every task request it receives (with the loop clock time)
    and acknowledges a capability 'AUTO_ACK[cap]' ms after its first
    task of a step arrives.
    """

    def __init__(self, bus, acksChannel, clock, autoAck=None):
        self._bus = bus
        self._channel = acksChannel
        self._clock = clock
        self._autoAck = dict(autoAck or {})
        self._acked = set()
        self._lock = threading.Lock()
        self.received = []

    def on_task(self, task):
        with self._lock:
            self.received.append((self._clock.now(), task))
            key = (task.capability, task.stepId, task.issuedAt)
            delay = self._autoAck.get(task.capability)
            if delay is None or key in self._acked:
                return
            self._acked.add(key)
        self._clock.call_later(int(delay * NS_PER_MS), self.ack, task.capability, task.provenance)

    def ack(self, capability, provenance=()):
        self._bus.publish(self._channel, Ack(capability, tuple(provenance), self._clock.now()))

    def tasks(self):
        with self._lock:
            return [t.task for _, t in self.received]

    def clear(self):
        with self._lock:
            self.received.clear()
            self._acked.clear()


# =========================================================
#                     M A I N   C L A S S
# =========================================================
class EnforcementLoop:
    """Wires Monitor, Enforcer, Executor, and bus for one configuration.

    Args:
        cfg: 'LoopConfig'
        ruleset: active 'Ruleset' (read from 'cfg.ruleset' if omitted)
        client: model server client ('ModelServerClient' or 'LocalStepper')
        clock / bus / logger: injectable collaborators
        mock: attach a 'ManagedSystemMock'
    """

    def __init__(
        self, cfg, ruleset=None, client=None, clock=None, bus=None, logger=None, mock=True
    ):
        self.cfg = cfg
        self.log = logger if logger is not None else Logger(cfg.settings)
        self.source = None
        if ruleset is None:
            if cfg.ruleset is None:
                raise LoopConfigError(['RULESET is not set'])
            self.source = Path(cfg.ruleset).read_text(encoding='utf-8')
            ruleset = parse_ruleset(self.source)
        cfg.check_ruleset(ruleset)
        self.ruleset = ruleset

        self.clock = clock if clock is not None else make_clock(cfg.clock)
        self.bus = bus if bus is not None else MessageBus(cfg.busMode, self.log)
        self.client = client if client is not None else ModelServerClient(cfg.client_settings())
        self.sink = RecordSink(cfg.recordLog, self.log)

        self.monitor = Monitor(
            ruleset,
            self.bus,
            cfg.conditions_channel,
            cfg.thresholds,
            cfg.initialConditions,
            logger=self.log,
        )
        self.enforcer = Enforcer(
            self.client, self.bus, cfg.obligations_channel, self.sink, logger=self.log
        )
        self.executor = Executor(
            cfg, self.bus, cfg.tasks_channel, self.clock, self.sink, logger=self.log
        )
        self.mock = None
        if mock:
            self.mock = ManagedSystemMock(self.bus, cfg.acks_channel, self.clock, cfg.autoAck)
        self._unsubscribe = []
        self._running = False

    @property
    def records(self):
        return self.sink.records

    def start(self):
        """Upload model (if source known), start session, and subscribe components."""
        if self.source is not None:
            self.client.upload_model(self.source, strict=self.cfg.strict)
        self.client.start()

        subscriptions = [
            (self.cfg.conditions_channel, self.enforcer.on_conditions),
            (self.cfg.obligations_channel, self.executor.on_obligations),
            (self.cfg.acks_channel, self.executor.on_ack),
        ]
        if self.mock is not None:
            subscriptions.append((self.cfg.tasks_channel, self.mock.on_task))
        self._unsubscribe = [self.bus.subscribe(ch, fn) for ch, fn in subscriptions]
        self._running = True
        self.log.log_json(
            'loop_started', session=getattr(self.client, 'sessionId', None), clock=self.cfg.clock
        )
        return self

    def inject(self, sample, caseId=None):
        return self.monitor.process_probe(sample, caseId)

    def inject_frame(self, values, caseId=None):
        return self.monitor.process_frame(values, caseId)

    def reload(self, source):
        """Hot-swap the ruleset on the server without restarting the loop."""
        ruleset = parse_ruleset(source)
        self.cfg.check_ruleset(ruleset)
        self.bus.drain()
        self.client.upload_model(source, strict=self.cfg.strict)
        self.monitor.set_ruleset(ruleset)
        self.ruleset = ruleset
        self.source = source
        self.log.log_json('model_reloaded', rules=len(ruleset.rules))

    def drain(self):
        self.bus.drain()

    def stop(self):
        if not self._running:
            return
        self._running = False
        self.bus.drain()
        for unsubscribe in self._unsubscribe:
            unsubscribe()
        self._unsubscribe = []
        self.executor.cancel_all()
        try:
            self.client.stop()
        except SleecError as e:
            self.log.log_json('stop_failed', LOG_WARNING, error=e.code)
        self.bus.close()
        self.sink.close()
        self.log.log_json('loop_stopped', records=len(self.sink.records))
        self.log.flush()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def run_loop(cfg, probes=None, stopEvent=None):
    """Service main for the enforcement loop.

    Uploads the model, subscribes all components, then feeds 'probes'
    (an iterable of 'ProbeSample') if given, or waits until SIGINT/SIGTERM
    or 'stopEvent' is set. Shutdown drains the bus and flushes logs.

    Returns:
        'list' of 'EnforcementRecord'
    """
    stopEvent = stopEvent or threading.Event()
    loop = EnforcementLoop(cfg)

    previous = {}
    if threading.current_thread() is threading.main_thread():
        for sig in (signal.SIGINT, signal.SIGTERM):
            previous[sig] = signal.signal(sig, lambda *_: stopEvent.set())

    try:
        loop.start()
        if probes is not None:
            for sample in probes:
                if stopEvent.is_set():
                    break
                try:
                    loop.inject(sample)
                except SleecError as e:
                    loop.log.log_json(
                        'probe_rejected', LOG_WARNING, source=sample.source, error=e.code
                    )
        else:
            stopEvent.wait()
    finally:
        loop.stop()
        for sig, handler in previous.items():
            signal.signal(sig, handler)
    return loop.records
