"""Test cases for the in-process message bus."""

import pytest

from src.f451_sleec.bus import (
    BUS_SYNC,
    BUS_THREADED,
    CH_ACKS,
    CH_OBLIGATIONS,
    CH_TASKS,
    MessageBus,
)
from src.f451_sleec.logger import LOG_CRITICAL, Logger


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
@pytest.fixture
def threadedBus():
    bus = MessageBus(BUS_THREADED, Logger(LOGNAME='test-bus', LOGLVL=LOG_CRITICAL))
    yield bus
    bus.close()


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.smoke
def test_sync_publish_is_immediate():
    bus = MessageBus(BUS_SYNC)
    seen = bus.record(CH_OBLIGATIONS)
    other = bus.record(CH_TASKS)

    bus.publish(CH_OBLIGATIONS, 'hello')
    assert seen == ['hello']
    assert other == []


def test_sync_unsubscribe():
    bus = MessageBus()
    seen = []
    unsubscribe = bus.subscribe(CH_ACKS, seen.append)
    bus.publish(CH_ACKS, 1)
    unsubscribe()
    bus.publish(CH_ACKS, 2)
    assert seen == [1]


def test_publish_without_subscribers():
    MessageBus().publish('/nobody', object())


@pytest.mark.exception
def test_sync_handler_error_propagates():
    bus = MessageBus()

    def boom(message):
        raise RuntimeError(message)

    bus.subscribe(CH_TASKS, boom)
    with pytest.raises(RuntimeError):
        bus.publish(CH_TASKS, 'x')


def test_threaded_delivery_keeps_order(threadedBus):
    seen = threadedBus.record(CH_TASKS)
    for i in range(50):
        threadedBus.publish(CH_TASKS, i)
    threadedBus.drain()
    assert seen == list(range(50))


def test_threaded_chained_publish(threadedBus):
    acks = threadedBus.record(CH_ACKS)
    threadedBus.subscribe(CH_TASKS, lambda m: threadedBus.publish(CH_ACKS, f'done {m}'))

    threadedBus.publish(CH_TASKS, 'a')
    threadedBus.publish(CH_TASKS, 'b')
    threadedBus.drain()
    assert acks == ['done a', 'done b']


def test_threaded_handler_errors_are_collected(threadedBus):
    def boom(message):
        raise ValueError(message)

    threadedBus.subscribe(CH_TASKS, boom)
    threadedBus.publish(CH_TASKS, 'bad')
    threadedBus.drain()

    assert len(threadedBus.errors) == 1
    channel, err = threadedBus.errors[0]
    assert channel == CH_TASKS
    assert isinstance(err, ValueError)


@pytest.mark.exception
def test_unknown_mode():
    with pytest.raises(ValueError):
        MessageBus('carrier-pigeon')
