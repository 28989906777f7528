"""In-process publish/subscribe bus with named channels.

Each channel ('/conditions', '/obligations', '/tasks', '/acks') is a
blinker 'Signal'. In 'sync' mode a publish calls every subscriber
before returning, which keeps tests deterministic. In 'threaded' mode
every subscriber gets its own queue and worker thread, so components
run as independent activities and only exchange messages; 'drain()'
waits until every queue is empty.

How to use:
    bus = MessageBus(mode='threaded')
    unsubscribe = bus.subscribe('/obligations', executor.on_obligations)
    bus.publish('/obligations', directives)
    bus.drain()

Dependencies:
 - blinker
"""

from __future__ import annotations

import queue
import threading

from blinker import Namespace

from .logger import LOG_ERROR, Logger

__all__ = [
    'MessageBus',
    'BUS_SYNC',
    'BUS_THREADED',
    'CH_CONDITIONS',
    'CH_OBLIGATIONS',
    'CH_TASKS',
    'CH_ACKS',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
BUS_SYNC = 'sync'
BUS_THREADED = 'threaded'

CH_CONDITIONS = '/conditions'
CH_OBLIGATIONS = '/obligations'
CH_TASKS = '/tasks'
CH_ACKS = '/acks'

_STOP = object()


class _Worker:
    def __init__(self, channel, handler, bus):
        self.channel = channel
        self.handler = handler
        self.inbox = queue.Queue()
        self._bus = bus
        self._thread = threading.Thread(target=self._run, name=f'bus{channel}', daemon=True)
        self._thread.start()

    def _run(self):
        while True:
            message = self.inbox.get()
            try:
                if message is _STOP:
                    return
                self.handler(message)
            except Exception as e:  # noqa: BLE001
                self._bus._handler_failed(self.channel, e)
            finally:
                self.inbox.task_done()

    def stop(self, timeout=None):
        self.inbox.put(_STOP)
        self._thread.join(timeout)


class MessageBus:
    """Named-channel bus backed by blinker signals.

    Attributes:
        mode: 'sync' or 'threaded'
        errors: '(channel, exception)' pairs raised by threaded handlers
    """

    def __init__(self, mode=BUS_SYNC, logger=None):
        if mode not in (BUS_SYNC, BUS_THREADED):
            raise ValueError(f'Unknown bus mode: {mode!r}')
        self.mode = mode
        self.errors = []
        self._signals = Namespace()
        self._workers = []
        self._lock = threading.Lock()
        self._log = logger if logger is not None else Logger()

    def _handler_failed(self, channel, err):
        self.errors.append((channel, err))
        self._log.log_json('bus_handler_error', LOG_ERROR, channel=channel, error=repr(err))

    def publish(self, channel, message):
        self._signals.signal(channel).send(self, message=message)

    def subscribe(self, channel, handler):
        """Attach handler to channel.

        Returns:
            callable that detaches the handler again
        """
        if self.mode == BUS_THREADED:
            worker = _Worker(channel, handler, self)
            with self._lock:
                self._workers.append(worker)
            deliver = worker.inbox.put
        else:
            worker = None
            deliver = handler

        def _receiver(sender, *, message):
            deliver(message)

        signal = self._signals.signal(channel)
        signal.connect(_receiver, weak=False)

        def _unsubscribe():
            signal.disconnect(_receiver)
            if worker is not None:
                with self._lock:
                    if worker in self._workers:
                        self._workers.remove(worker)
                worker.stop(timeout=1)

        return _unsubscribe

    def record(self, channel):
        """Subscribe a list that collects every message on channel."""
        seen = []
        self.subscribe(channel, seen.append)
        return seen

    def drain(self):
        """Block until all queued messages are handled.

        Handlers may publish while draining, so we loop until every
        inbox is empty in one pass.
        """
        while True:
            with self._lock:
                workers = list(self._workers)
            for worker in workers:
                worker.inbox.join()
            if all(w.inbox.unfinished_tasks == 0 for w in workers):
                return

    def close(self):
        with self._lock:
            workers, self._workers = self._workers, []
        for worker in workers:
            worker.stop(timeout=1)
