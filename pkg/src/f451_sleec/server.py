"""SLEEC model server.

A small Flask application that hosts compiled rule machines and runs
enforcement steps on request. Each uploaded ruleset lives in a
session with a simple lifecycle:

    loaded --start--> running --stop--> stopped --start--> running

Endpoints:

    POST /upload-model[?session=ID][&strict=false]   body: SLEEC source
    POST /sessions/<ID>/start
    POST /sessions/<ID>/stop
    POST /sessions/<ID>/step                       body: snapshot JSON
    GET  /sessions/<ID>

Uploading to an existing session id swaps the model in place (same id,
step counter reset, lifecycle status kept), so a running enforcement
loop picks up the new rules on its next step.

Step responses are canonical JSON (sorted keys, compact separators)
holding the obligation set plus 'server_us' and 'step'. Requests on
one session are serialized; different sessions step concurrently.

Dependencies:
 - flask
 - werkzeug (ships with flask)
"""

from __future__ import annotations

import json
import threading
import time

from flask import Flask, Response, g, request
from werkzeug.serving import make_server

from .common import NS_PER_US, SleecError, canonical_json, convert_to_bool, merge_settings
from .diagnostics import SleecSemanticError, SleecSyntaxError
from .engine import compile as compile_ruleset
from .logger import Logger
from .obligations import (
    CompileError,
    ConditionSnapshot,
    ConflictingConstraintsError,
    InvalidSnapshotError,
    InvariantViolationError,
    MissingBindingError,
)
from .parser import parse_ruleset
from .stats import compute_stats

__all__ = [
    'create_app',
    'ModelSession',
    'SessionRegistry',
    'SessionError',
    'ServerThread',
    'serve',
    'http_status',
    'SESSION_LOADED',
    'SESSION_RUNNING',
    'SESSION_STOPPED',
    'KWD_HOST',
    'KWD_PORT',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
SESSION_LOADED = 'loaded'
SESSION_RUNNING = 'running'
SESSION_STOPPED = 'stopped'

DEF_HOST = '127.0.0.1'
DEF_PORT = 8451

MIME_JSON = 'application/json'


# =========================================================
#    K E Y W O R D S   F O R   C O N F I G   F I L E S
# =========================================================
KWD_HOST = 'HOST'
KWD_PORT = 'PORT'


# =========================================================
#                        E R R O R S
# =========================================================
class SessionError(SleecError):
    """Unknown session or wrong lifecycle state."""

    code = 'SESSION_ERROR'

    def __init__(self, errMsg='Session error', code=None, status=400):
        super().__init__(errMsg, code)
        self.status = status


def _unknown_session(sessionId):
    return SessionError(f"Unknown session '{sessionId}'", 'UNKNOWN_SESSION', 404)


def http_status(err):
    """Map a runtime error to its HTTP status code."""
    if isinstance(err, SessionError):
        return err.status
    if isinstance(
        err, (MissingBindingError, InvariantViolationError, ConflictingConstraintsError)
    ):
        return 422
    if isinstance(err, (SleecSyntaxError, SleecSemanticError, CompileError, InvalidSnapshotError)):
        return 400
    return 400 if isinstance(err, SleecError) else 500


# =========================================================
#                      S E S S I O N S
# =========================================================
class ModelSession:
    """One hosted rule machine.

    Attributes:
        sessionId: session id
        machine: compiled 'RuleMachine'
        status: 'loaded', 'running', or 'stopped'
        stepCount: number of evaluated steps since (re-)upload
        latencies: server-side step latency log (us)
    """

    def __init__(self, sessionId, machine):
        self.sessionId = sessionId
        self.machine = machine
        self.status = SESSION_LOADED
        self.stepCount = 0
        self.latencies = []
        self._lock = threading.Lock()

    def swap(self, machine):
        with self._lock:
            self.machine = machine
            self.stepCount = 0
            self.latencies = []

    def start(self):
        with self._lock:
            self.status = SESSION_RUNNING
            return self.status

    def stop(self):
        with self._lock:
            if self.status == SESSION_RUNNING:
                self.status = SESSION_STOPPED
            return self.status

    def step(self, snapshot):
        """Evaluate one step; returns '(ObligationSet, server_us, stepIndex)'."""
        with self._lock:
            if self.status != SESSION_RUNNING:
                raise SessionError(
                    f"Session '{self.sessionId}' is {self.status}, not running", 'SESSION_NOT_RUNNING', 409
                )
            start = time.perf_counter_ns()
            result = self.machine.step(snapshot)
            serverUs = (time.perf_counter_ns() - start) // NS_PER_US
            self.stepCount += 1
            self.latencies.append(serverUs)
            return result, serverUs, self.stepCount

    def describe(self):
        with self._lock:
            data = {
                'session': self.sessionId,
                'status': self.status,
                'step': self.stepCount,
                'rules': len(self.machine.rules),
                'clauses': self.machine.ruleset.clause_count,
                'latency_ms': None,
            }
            if self.latencies:
                data['latency_ms'] = compute_stats([us / 1000 for us in self.latencies]).to_json()
            return data


class SessionRegistry:
    """Thread-safe map of session id to 'ModelSession'."""

    def __init__(self):
        self._sessions = {}
        self._counter = 0
        self._lock = threading.Lock()

    def __contains__(self, sessionId):
        return sessionId in self._sessions

    def __len__(self):
        return len(self._sessions)

    def upload(self, source, sessionId=None, strict=True):
        """Parse, compile, and install a ruleset.

        Returns:
            '(ModelSession, created)' where 'created' is 'False' on hot-swap

        Raises:
            SleecSyntaxError, SleecSemanticError, CompileError
        """
        machine = compile_ruleset(parse_ruleset(source), strict)
        with self._lock:
            if sessionId is None:
                self._counter += 1
                sessionId = f's-{self._counter}'
                while sessionId in self._sessions:
                    self._counter += 1
                    sessionId = f's-{self._counter}'

            session = self._sessions.get(sessionId)
            if session is not None:
                session.swap(machine)
                return session, False

            session = ModelSession(sessionId, machine)
            self._sessions[sessionId] = session
            return session, True

    def get(self, sessionId):
        session = self._sessions.get(sessionId)
        if session is None:
            raise _unknown_session(sessionId)
        return session


# =========================================================
#                   F L A S K   A P P
# =========================================================
def _json_response(data, status=200):
    return Response(canonical_json(data), status=status, mimetype=MIME_JSON)


def create_app(*args, registry=None, logger=None, **kwargs):
    """Create model server Flask app.

    Args:
        args/kwargs: settings ('LOGLVL', 'LOGFILE', 'LOGNAME', ...)
        registry: optional 'SessionRegistry' to share between apps
        logger: optional 'Logger' for the request log
    """
    settings = merge_settings(*args, **kwargs)
    app = Flask(__name__)
    app.config['SESSIONS'] = registry if registry is not None else SessionRegistry()
    log = logger if logger is not None else Logger(settings)
    sessions = app.config['SESSIONS']

    @app.errorhandler(SleecError)
    def handle_sleec_error(err):
        g.errorCode = err.code
        return _json_response(err.as_dict(), http_status(err))

    @app.after_request
    def log_request(response):
        log.log_json(
            'request',
            method=request.method,
            path=request.path,
            status=response.status_code,
            session=g.get('sessionId'),
            step=g.get('step'),
            server_us=g.get('serverUs'),
            error=g.get('errorCode'),
        )
        return response

    @app.post('/upload-model')
    def upload_model():
        sessionId = request.args.get('session') or None
        strict = convert_to_bool(request.args.get('strict', 'true'))
        session, created = sessions.upload(request.get_data(), sessionId, strict)
        g.sessionId = session.sessionId
        return _json_response(
            {
                'session': session.sessionId,
                'status': session.status,
                'rules': len(session.machine.rules),
                'swapped': not created,
            },
            201 if created else 200,
        )

    @app.post('/sessions/<sessionId>/start')
    def start_session(sessionId):
        g.sessionId = sessionId
        return _json_response({'session': sessionId, 'status': sessions.get(sessionId).start()})

    @app.post('/sessions/<sessionId>/stop')
    def stop_session(sessionId):
        g.sessionId = sessionId
        return _json_response({'session': sessionId, 'status': sessions.get(sessionId).stop()})

    @app.post('/sessions/<sessionId>/step')
    def step_session(sessionId):
        g.sessionId = sessionId
        session = sessions.get(sessionId)
        try:
            body = json.loads(request.get_data(as_text=True) or 'null')
        except ValueError as e:
            raise InvalidSnapshotError(f'Snapshot is not valid JSON: {e}', 'MALFORMED_SNAPSHOT')

        result, serverUs, stepIndex = session.step(ConditionSnapshot.from_json(body))
        g.step, g.serverUs = stepIndex, serverUs
        return _json_response({**result.to_json(), 'server_us': serverUs, 'step': stepIndex})

    @app.get('/sessions/<sessionId>')
    def describe_session(sessionId):
        g.sessionId = sessionId
        return _json_response(sessions.get(sessionId).describe())

    return app


# =========================================================
#                  S E R V E R   T H R E A D
# =========================================================
class ServerThread(threading.Thread):
    """Model server running on a background thread.

    Binds to port 0 by default so that tests get a free loopback port.

    Example:
        with ServerThread() as server:
            requests.post(f'{server.url}/upload-model', data=src)
    """

    def __init__(self, app=None, host=DEF_HOST, port=0):
        super().__init__(daemon=True)
        self.app = app if app is not None else create_app()
        self._server = make_server(host, port, self.app, threaded=True)
        self.host = host
        self.port = self._server.server_port

    @property
    def url(self):
        return f'http://{self.host}:{self.port}'

    def run(self):
        self._server.serve_forever()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.shutdown()
        self.join(timeout=5)


def serve(*args, **kwargs):
    """Run model server in the foreground until interrupted."""
    settings = merge_settings(*args, **kwargs)
    log = Logger(settings)
    host = settings.get(KWD_HOST, DEF_HOST)
    port = int(settings.get(KWD_PORT, DEF_PORT))

    server = make_server(host, port, create_app(settings, logger=log), threaded=True)
    log.log_info(f'Model server listening on http://{host}:{server.server_port}')
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        log.log_info('Model server stopped')
    finally:
        server.server_close()
        log.flush()
