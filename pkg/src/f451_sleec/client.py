"""REST client for the SLEEC model server.

'ModelServerClient' wraps a 'requests.Session' and applies the
enforcer retry policy: connection failures and timeouts are retried
'RETRIES' times with a fixed 'BACKOFF_MS' pause, after which
'ServerUnreachableError' is raised. Any 4xx/5xx answer is turned into
'StepRejectedError' carrying the server's JSON error payload.

How to use:
    client = ModelServerClient(config)
    client.upload_model(Path('assistive.sleec').read_bytes())
    client.start()
    reply = client.step(snapshot)
    reply.obligations.capabilities

Dependencies:
 - requests
"""

from __future__ import annotations

import json
import time

from dataclasses import dataclass

import requests

from .common import SleecError, merge_settings
from .obligations import ObligationSet

__all__ = [
    'ModelServerClient',
    'StepReply',
    'ServerUnreachableError',
    'StepRejectedError',
    'KWD_SERVER_URL',
    'KWD_SESSION',
    'KWD_RETRIES',
    'KWD_BACKOFF_MS',
    'KWD_TIMEOUT_S',
    'DEF_RETRIES',
    'DEF_BACKOFF_MS',
    'DEF_TIMEOUT_S',
]


# =========================================================
#    K E Y W O R D S   F O R   C O N F I G   F I L E S
# =========================================================
KWD_SERVER_URL = 'SERVER_URL'
KWD_SESSION = 'SESSION'
KWD_RETRIES = 'RETRIES'
KWD_BACKOFF_MS = 'BACKOFF_MS'
KWD_TIMEOUT_S = 'TIMEOUT_S'


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
DEF_SERVER_URL = 'http://127.0.0.1:8451'
DEF_RETRIES = 3
DEF_BACKOFF_MS = 100
DEF_TIMEOUT_S = 5.0


# =========================================================
#                        E R R O R S
# =========================================================
class ServerUnreachableError(SleecError):
    code = 'SERVER_UNREACHABLE'

    def __init__(self, errMsg='Model server is unreachable', attempts=0):
        super().__init__(errMsg)
        self.attempts = attempts


class StepRejectedError(SleecError):
    """Server answered with an error status.

    Attributes:
        status: HTTP status code
        payload: decoded JSON error body ('{"error": ..., "message": ...}')
    """

    code = 'STEP_REJECTED'

    def __init__(self, status, payload=None, errMsg=None, code=None):
        self.status = status
        self.payload = payload or {}
        super().__init__(
            errMsg or f"Server rejected request ({status}): {self.payload.get('message', 'no details')}",
            code,
        )

    @property
    def server_code(self):
        return self.payload.get('error')

    def as_dict(self):
        return {**super().as_dict(), 'status': self.status, 'server': self.payload}


@dataclass(frozen=True)
class StepReply:
    """Decoded '/step' response.

    Attributes:
        obligations: 'ObligationSet'
        serverUs: server-side processing time (us)
        step: server step counter after this step
        body: raw response text (canonical JSON)
    """

    obligations: ObligationSet
    serverUs: int
    step: int
    body: str


# =========================================================
#                     M A I N   C L A S S
# =========================================================
class ModelServerClient:
    """Client for one model server session.

    NOTE: attributes follow same naming convention as used in the
    settings file, so the 'config' object can be passed in as is.

    Attributes:
        SERVER_URL: base URL of model server
        SESSION:    session id (set by 'upload_model()' if not given)
        RETRIES:    attempts per request on connection failure
        BACKOFF_MS: pause between attempts
        TIMEOUT_S:  per-request timeout
    """

    def __init__(self, *args, sleep=time.sleep, **kwargs):
        settings = merge_settings(*args, **kwargs)
        self.baseUrl = str(settings.get(KWD_SERVER_URL, DEF_SERVER_URL)).rstrip('/')
        self.sessionId = settings.get(KWD_SESSION) or None
        self.retries = max(1, int(settings.get(KWD_RETRIES, DEF_RETRIES)))
        self.backoffMs = int(settings.get(KWD_BACKOFF_MS, DEF_BACKOFF_MS))
        self.timeout = float(settings.get(KWD_TIMEOUT_S, DEF_TIMEOUT_S))
        self._sleep = sleep
        self._http = requests.Session()

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _session_url(self, action=''):
        if self.sessionId is None:
            raise SleecError('No model session; upload a model first', 'NO_SESSION')
        return f'{self.baseUrl}/sessions/{self.sessionId}{action}'

    def _request(self, method, url, **kwargs):
        """Send request with retry policy and return 'requests.Response'.

        Raises:
            ServerUnreachableError: all attempts failed to connect
            StepRejectedError: server answered 4xx/5xx
        """
        lastErr = None
        for attempt in range(1, self.retries + 1):
            try:
                resp = self._http.request(method, url, timeout=self.timeout, **kwargs)
                break
            except (requests.ConnectionError, requests.Timeout) as e:
                lastErr = e
                if attempt < self.retries:
                    self._sleep(self.backoffMs / 1000)
        else:
            raise ServerUnreachableError(
                f'Model server at {self.baseUrl} unreachable after {self.retries} attempt(s): {lastErr}',
                self.retries,
            )

        if resp.status_code >= 400:
            try:
                payload = resp.json()
            except ValueError:
                payload = {'message': resp.text}
            raise StepRejectedError(resp.status_code, payload if isinstance(payload, dict) else {})
        return resp

    def upload_model(self, source, sessionId=None, strict=True):
        """Upload SLEEC source and return the session id.

        Uploading to an existing id hot-swaps the model on the server.
        """
        params = {'strict': 'true' if strict else 'false'}
        target = sessionId or self.sessionId
        if target:
            params['session'] = target
        data = source.encode('utf-8') if isinstance(source, str) else source
        resp = self._request('POST', f'{self.baseUrl}/upload-model', data=data, params=params)
        self.sessionId = resp.json()['session']
        return self.sessionId

    def start(self):
        return self._request('POST', self._session_url('/start')).json()['status']

    def stop(self):
        return self._request('POST', self._session_url('/stop')).json()['status']

    def describe(self):
        return self._request('GET', self._session_url()).json()

    def step(self, snapshot):
        """Post one snapshot to '/step' and decode the reply."""
        resp = self._request(
            'POST',
            self._session_url('/step'),
            data=json.dumps(snapshot.to_json()),
            headers={'Content-Type': 'application/json'},
        )
        data = resp.json()
        return StepReply(
            ObligationSet.from_json(data), int(data['server_us']), int(data['step']), resp.text
        )
