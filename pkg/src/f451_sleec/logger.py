"""f451 Labs SLEEC Logger module.

Thin wrapper around the standard 'logging' module, set up from the same
settings (LOGNAME, LOGLVL, LOGFILE) as every other SLEEC component.
Besides plain messages it writes structured events, one JSON object
per line, for the server request log, enforcement records, and timer
events. 'JsonLinesWriter' keeps the per-step enforcement records.

How to use:
    logger = Logger(settings)
    logger = Logger(LOGLVL=logging.ERROR, LOGFILE='path/to/sleec.log')
    logger.log_json('step', session='s-1', step=4, server_us=312)
"""

import json
import logging

from rich.pretty import pprint

__all__ = [
    'Logger',
    'JsonLinesWriter',
    'DEF_LOG_NAME',
    'LOG_NOTSET',
    'LOG_DEBUG',
    'LOG_INFO',
    'LOG_WARNING',
    'LOG_ERROR',
    'LOG_CRITICAL',
    'KWD_LOG_NAME',
    'KWD_LOG_LEVEL',
    'KWD_LOG_FILE',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
DEF_LOG_NAME = 'f451-sleec'
DEF_LOG_LEVEL = logging.WARNING

LOG_NOTSET = logging.NOTSET
LOG_DEBUG = logging.DEBUG
LOG_INFO = logging.INFO
LOG_WARNING = logging.WARNING
LOG_ERROR = logging.ERROR
LOG_CRITICAL = logging.CRITICAL

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s: %(message)s'


# =========================================================
#    K E Y W O R D S   F O R   C O N F I G   F I L E S
# =========================================================
KWD_LOG_NAME = 'LOGNAME'
KWD_LOG_LEVEL = 'LOGLVL'
KWD_LOG_FILE = 'LOGFILE'


# =========================================================
#              H E L P E R   F U N C T I O N S
# =========================================================
def _with_level(handler, logLvl):
    handler.setLevel(logLvl)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    return handler


def _to_json(obj):
    return json.dumps(obj, sort_keys=True, default=str)


# =========================================================
#                     M A I N   C L A S S
# =========================================================
class Logger:
    """Logger shared by all SLEEC components.

    Settings can be given as a 'dict' (e.g. a loaded settings file)
    with keyword arguments taking precedence:

        Logger()                          # defaults
        Logger(settings)                  # LOGNAME/LOGLVL/LOGFILE from 'settings'
        Logger(settings, LOGLVL=10)       # same, but at DEBUG level

    Loggers are shared by name. Creating a second 'Logger' with the same
    LOGNAME reuses the handlers of the first and only updates their level.
    """

    def __init__(self, *args, **kwargs):
        settings = {**args[0], **kwargs} if args and isinstance(args[0], dict) else kwargs
        self._LOG = self._setup(
            settings.get(KWD_LOG_NAME, DEF_LOG_NAME),
            settings.get(KWD_LOG_LEVEL, DEF_LOG_LEVEL),
            settings.get(KWD_LOG_FILE),
        )

    @staticmethod
    def _setup(logName, logLvl, logFile):
        log = logging.getLogger(logName)
        log.setLevel(logLvl)

        if log.handlers:
            for handler in log.handlers:
                handler.setLevel(logLvl)
        else:
            log.addHandler(_with_level(logging.StreamHandler(), logLvl))

        if logFile:
            log.addHandler(_with_level(logging.FileHandler(logFile), logLvl))

        return log

    @property
    def name(self):
        return self._LOG.name

    def set_log_level(self, logLvl):
        """Change level of logger and all its handlers."""
        self._LOG.setLevel(logLvl)
        for handler in self._LOG.handlers:
            handler.setLevel(logLvl)

    def flush(self):
        for handler in self._LOG.handlers:
            handler.flush()

    def debug(self, val, strict=True):
        """Pretty-print value to stdout (via 'rich').

        With 'strict=False', a 'dict' is shown as indented JSON instead,
        which is easier to read for records and server replies.
        """
        if isinstance(val, dict) and not strict:
            val = json.dumps(val, indent=4, default=str)
        pprint(val, expand_all=True)

    def log(self, msg, lvl=LOG_DEBUG):
        self._LOG.log(lvl, msg)

    def log_json(self, event, lvl=LOG_INFO, **fields):
        """Log structured event as one JSON line.

        Args:
            event: event name, stored under the 'event' key
            lvl: logging level (default INFO)
            fields: event payload. Values that are not JSON types are
                written with 'str()'.
        """
        if self._LOG.isEnabledFor(lvl):
            self._LOG.log(lvl, _to_json({'event': event, **fields}))

    def log_debug(self, msg):
        self.log(msg, LOG_DEBUG)

    def log_info(self, msg):
        self.log(msg, LOG_INFO)

    def log_warning(self, msg):
        self.log(msg, LOG_WARNING)

    def log_error(self, msg):
        self.log(msg, LOG_ERROR)


class JsonLinesWriter:
    """Append-only JSON-lines file for enforcement records.

    Rows are always kept in 'rows'. With a path they are also appended
    to that file, one JSON object per line.
    """

    def __init__(self, path=None):
        self.path = path
        self.rows = []
        self._fp = open(path, mode='a', encoding='utf-8') if path else None

    def write(self, row):
        self.rows.append(row)
        if self._fp:
            self._fp.write(_to_json(row) + '\n')

    def flush(self):
        if self._fp:
            self._fp.flush()

    def close(self):
        if self._fp:
            self._fp.close()
            self._fp = None
