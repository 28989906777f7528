"""Injectable clocks for the enforcement loop.

Both clocks count integer nanoseconds and share one small interface:

    now()                          -> current time (ns)
    call_later(delayNs, fn, *args) -> 'TimerHandle'

'VirtualClock' only moves when told to ('advance()'), which makes
MINUTE-scale AFTER/WITHIN behavior testable in microseconds and
bit-exact. Timers due at the same instant fire in the order they were
scheduled. 'WallClock' uses the monotonic clock and 'threading.Timer'.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time

__all__ = [
    'TimerHandle',
    'VirtualClock',
    'WallClock',
    'make_clock',
    'CLOCK_VIRTUAL',
    'CLOCK_WALL',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
CLOCK_VIRTUAL = 'virtual'
CLOCK_WALL = 'wall'


class TimerHandle:
    """Pending call registered with a clock."""

    def __init__(self, when, fn, args):
        self.when = when
        self.fn = fn
        self.args = args
        self.cancelled = False
        self.called = False
        self._timer = None

    @property
    def active(self):
        return not (self.cancelled or self.called)

    def cancel(self):
        if self.active:
            self.cancelled = True
            if self._timer is not None:
                self._timer.cancel()

    def _fire(self):
        if self.active:
            self.called = True
            self.fn(*self.args)

    def __repr__(self):
        state = 'cancelled' if self.cancelled else 'called' if self.called else 'pending'
        return f'TimerHandle(when={self.when}, {state})'


# =========================================================
#                  V I R T U A L   C L O C K
# =========================================================
class VirtualClock:
    """Deterministic clock driven by 'advance()'.

    Attributes:
        calls: heap of '(when, seq, TimerHandle)' entries
    """

    def __init__(self, start=0):
        self._now = int(start)
        self._seq = itertools.count()
        self._lock = threading.RLock()
        self.calls = []

    def now(self):
        return self._now

    def call_later(self, delayNs, fn, *args):
        if delayNs < 0:
            raise ValueError('Timer delay must not be negative')
        with self._lock:
            handle = TimerHandle(self._now + int(delayNs), fn, args)
            heapq.heappush(self.calls, (handle.when, next(self._seq), handle))
            return handle

    def pending(self):
        with self._lock:
            return [h for _, _, h in sorted(self.calls) if h.active]

    def _pop_due(self, until):
        with self._lock:
            while self.calls and self.calls[0][0] <= until:
                _, _, handle = heapq.heappop(self.calls)
                if handle.active:
                    self._now = max(self._now, handle.when)
                    return handle
            return None

    def advance(self, amountNs):
        """Move time forward, firing due timers in (time, schedule) order.

        Each callback sees 'now()' equal to its own due time. Timers a
        callback schedules inside the window fire in the same call.
        """
        if amountNs < 0:
            raise ValueError('Cannot move virtual clock backwards')
        target = self._now + int(amountNs)
        while True:
            handle = self._pop_due(target)
            if handle is None:
                break
            handle._fire()
        self._now = target

    def advance_to(self, when):
        self.advance(max(0, int(when) - self._now))

    def pump(self, amounts):
        for amount in amounts:
            self.advance(amount)


# =========================================================
#                     W A L L   C L O C K
# =========================================================
class WallClock:
    """Monotonic wall clock with thread-based timers."""

    def __init__(self):
        self._handles = []
        self._lock = threading.Lock()

    def now(self):
        return time.monotonic_ns()

    def call_later(self, delayNs, fn, *args):
        handle = TimerHandle(self.now() + int(delayNs), fn, args)
        timer = threading.Timer(max(0, delayNs) / 1e9, handle._fire)
        timer.daemon = True
        handle._timer = timer
        with self._lock:
            self._handles = [h for h in self._handles if h.active]
            self._handles.append(handle)
        timer.start()
        return handle

    def pending(self):
        with self._lock:
            return [h for h in self._handles if h.active]

    def cancel_all(self):
        for handle in self.pending():
            handle.cancel()


def make_clock(mode):
    if mode == CLOCK_VIRTUAL:
        return VirtualClock()
    if mode == CLOCK_WALL:
        return WallClock()
    raise ValueError(f'Unknown clock mode: {mode!r}')
