"""Helper module for f451 Labs SLEEC runtime.

This module holds common helper functions, constants, and the root
exception class that are used across all modules of the SLEEC runtime
(parser, analysis, rule engine, model server, enforcement loop, and
bench).

Dependencies:
 - tomllib / tomli
 - pyfiglet
"""

import json
import argparse

from collections.abc import Mapping
from pathlib import Path
from pyfiglet import Figlet

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

__all__ = [
    'SleecError',
    'init_cli_parser',
    'load_settings',
    'merge_settings',
    'convert_to_bool',
    'make_logo',
    'canonical_json',
    'FIXTURES_DIR',
    'STATUS_YES',
    'STATUS_ON',
    'STATUS_TRUE',
    'NOOP',
    'NS_PER_US',
    'NS_PER_MS',
]

# fmt: off
# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
APP_DIR = Path(__file__).parent             # Package dir
FIXTURES_DIR = APP_DIR.joinpath('fixtures') # Scenario fixtures ship with package

STATUS_YES = 'yes'
STATUS_ON = 'on'
STATUS_TRUE = 'true'

NOOP = 'noop'           # Reserved "do nothing" capability

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
# fmt: on


# =========================================================
#                   R O O T   E R R O R
# =========================================================
class SleecError(Exception):
    """Root exception class for the f451 Labs SLEEC runtime.

    Every error raised by this package carries a short upper-case
    'code' (e.g. 'MISSING_BINDING'). The model server maps codes to
    HTTP responses, and the CLI prints them, without parsing messages.
    """

    code = 'SLEEC_ERROR'

    def __init__(self, errMsg='SLEEC runtime error', code=None):
        super().__init__(errMsg)
        if code is not None:
            self.code = code

    @property
    def message(self):
        return str(self)

    def as_dict(self):
        return {'error': self.code, 'message': self.message}


# =========================================================
#              H E L P E R   F U N C T I O N S
# =========================================================
def init_cli_parser(appName, appVersion, setDefaults=True):
    """Create CLI parser with the options every f451 app shares.

    Args:
        appName: program name shown in usage
        appVersion: version shown in description
        setDefaults: add '--version', '--debug', and '--log'

    Returns:
        'argparse.ArgumentParser'
    """
    parser = argparse.ArgumentParser(
        prog=appName,
        description=f'{appName} [v{appVersion}] - parse, analyze, serve, and enforce SLEEC rulesets at runtime.',
        epilog='Exit codes: 0 = success, 1 = mismatches/violations/errors, 2 = usage error.',
    )

    if setDefaults:
        parser.add_argument('-V', '--version', action='store_true', help='show version and exit')
        parser.add_argument(
            '-d', '--debug', action='store_true', help='debug logging and full tracebacks'
        )
        parser.add_argument('--log', metavar='FILE', help='also write log to FILE')

    return parser


def load_settings(settingsFile):
    """Load settings file.

    Settings files are TOML by default. A file with a '.json' suffix
    is read as JSON instead, so that a 'config.json' file can be used
    as-is.

    Args:
        settingsFile: path object or string with filename

    Returns:
        'dict' with values from settings file

    Raises:
        SleecError: when file is missing or cannot be decoded
    """
    settingsPath = Path(settingsFile)
    try:
        if settingsPath.suffix.lower() == '.json':
            settings = json.loads(settingsPath.read_text(encoding='utf-8'))
        else:
            settings = tomllib.loads(settingsPath.read_text(encoding='utf-8'))

    except (FileNotFoundError, IsADirectoryError):
        raise SleecError(f"Missing settings file: '{settingsFile}'", 'MISSING_SETTINGS') from None

    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise SleecError(f"Invalid settings file: '{settingsFile}' - {e}", 'INVALID_SETTINGS') from e

    if not isinstance(settings, dict):
        raise SleecError(
            f"Settings file must hold a table/object: '{settingsFile}'", 'INVALID_SETTINGS'
        )

    return settings


def merge_settings(*args, **kwargs):
    """Merge an optional settings mapping with keyword overrides.

    'merge_settings(config, RETRIES=1)' returns a new 'dict' with the
    values of 'config' and 'RETRIES' replaced. The mapping is not changed.
    """
    base = args[0] if args and isinstance(args[0], Mapping) else {}
    return {**base, **kwargs}


def convert_to_bool(inVal):
    """Interpret settings and query-string values as booleans.

    'True'/'False' pass through, numbers are true when non-zero after
    truncation, and strings are true when they read 'on', 'true', or
    'yes' (any case). Everything else is 'False'.
    """
    if isinstance(inVal, bool):
        return inVal
    if isinstance(inVal, (int, float)):
        return int(inVal) != 0
    if isinstance(inVal, str):
        return inVal.strip().lower() in (STATUS_ON, STATUS_TRUE, STATUS_YES)
    return False


def canonical_json(obj):
    """Serialize object as canonical JSON.

    Keys are sorted and separators are compact, so equal objects give
    equal bytes. Every body exchanged between enforcer and model
    server uses this form.
    """
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def make_logo(maxWidth, appName, appVer, default=None, center=True):
    """Render app name as 'slant' ASCII art with the version underneath.

    Returns 'default' when the art does not fit in 'maxWidth' columns.
    """
    lines = Figlet(font='slant').renderText(appName).rstrip('\n').splitlines()
    width = max((len(s) for s in lines), default=0)
    if not lines or width >= maxWidth:
        return default

    lines.append(appVer.rjust(width))
    if center:
        lines = [s.center(maxWidth).rstrip() for s in lines]
    return '\n'.join(lines)
