"""Test cases for the model server REST client."""

import pytest

from src.f451_sleec.client import ModelServerClient, ServerUnreachableError, StepRejectedError
from src.f451_sleec.common import SleecError
from src.f451_sleec.logger import LOG_CRITICAL, Logger
from src.f451_sleec.obligations import ConditionSnapshot
from src.f451_sleec.server import ServerThread, create_app


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
SMALL = """
MONITORED a : boolean
CAPABILITY x, y
RULE R1 IF a THEN x WITHIN 2 SEC OTHERWISE y
"""


@pytest.fixture(scope='module')
def server():
    app = create_app(logger=Logger(LOGNAME='test-client', LOGLVL=LOG_CRITICAL))
    with ServerThread(app) as server:
        yield server


@pytest.fixture
def client(server):
    with ModelServerClient(SERVER_URL=server.url, RETRIES=1) as client:
        yield client


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.http
def test_upload_start_step(client):
    sessionId = client.upload_model(SMALL)
    assert client.sessionId == sessionId
    assert client.start() == 'running'

    reply = client.step(ConditionSnapshot({'a': True}))
    assert reply.step == 1
    assert reply.serverUs >= 0
    assert reply.obligations.capabilities == ('x',)
    assert reply.obligations.get('x').is_within
    assert reply.body.startswith('{"directives":[')

    assert client.describe()['step'] == 1
    assert client.stop() == 'stopped'


@pytest.mark.http
def test_upload_to_named_session_swaps(client):
    assert client.upload_model(SMALL, sessionId='named') == 'named'
    client.start()
    assert client.upload_model(SMALL.replace('IF a', 'IF NOT a')) == 'named'

    reply = client.step(ConditionSnapshot({'a': False}))
    assert reply.obligations.capabilities == ('x',)
    assert reply.step == 1


@pytest.mark.http
@pytest.mark.exception
def test_rejected_step_carries_server_error(client):
    client.upload_model(SMALL)
    client.start()
    with pytest.raises(StepRejectedError) as e:
        client.step(ConditionSnapshot({}))

    assert e.value.status == 422
    assert e.value.server_code == 'MISSING_BINDING'
    assert e.value.as_dict()['server']['variable'] == 'a'


@pytest.mark.exception
def test_no_session_yet():
    with pytest.raises(SleecError) as e:
        ModelServerClient().start()
    assert e.value.code == 'NO_SESSION'


@pytest.mark.http
@pytest.mark.exception
def test_unreachable_server_retries():
    with ServerThread() as gone:
        url = gone.url

    pauses = []
    client = ModelServerClient(
        SERVER_URL=url, SESSION='s-1', RETRIES=3, BACKOFF_MS=25, sleep=pauses.append
    )
    with pytest.raises(ServerUnreachableError) as e:
        client.step(ConditionSnapshot({'a': True}))

    assert e.value.attempts == 3
    assert pauses == [0.025, 0.025]


def test_settings_dict_and_overrides():
    client = ModelServerClient({'SERVER_URL': 'http://robot:9000/', 'RETRIES': 0}, SESSION='abc')
    assert client.baseUrl == 'http://robot:9000'
    assert client.retries == 1
    assert client.sessionId == 'abc'
