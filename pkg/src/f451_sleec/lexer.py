"""Lexer for SLEEC rulesets.

Turns SLEEC source text into a flat list of 'Token' objects with 1-based
line/column positions. Keywords are case-insensitive and are reported
with their upper-case name as token kind (e.g. 'IF', 'UNLESS'). Words
that only have a meaning inside a declaration ('MONITORED', 'enforced',
unit names, 'TRUE', etc.) are plain identifiers; the parser decides
what they mean from context.

Dependencies:
 - re (stdlib)
"""

from __future__ import annotations

import re

from typing import NamedTuple, Union

from .diagnostics import SleecSyntaxError

__all__ = [
    'Token',
    'tokenize',
    'KEYWORDS',
    'EOF',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
KEYWORDS = frozenset(
    (
        'SCOPE',
        'RULE',
        'IF',
        'THEN',
        'UNLESS',
        'IN',
        'WHICH',
        'CASE',
        'AND',
        'OR',
        'NOT',
        'AFTER',
        'WITHIN',
        'OTHERWISE',
    )
)

EOF = 'EOF'

# fmt: off
# Order matters: longer operators first, malformed numbers before numbers.
_TOKEN_SPEC = [
    ('COMMENT',   r'//[^\n]*|\#[^\n]*'),
    ('NEWLINE',   r'\n'),
    ('SKIP',      r'[ \t\r\f\v]+'),
    ('BADNUM',    r'[0-9]+(?:\.[0-9]+)?[A-Za-z_][A-Za-z0-9_]*|[0-9]+\.(?![.0-9])'),
    ('REAL',      r'[0-9]+\.[0-9]+'),
    ('INT',       r'[0-9]+'),
    ('STRING',    r'"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\''),
    ('BADSTR',    r'["\']'),
    ('IDENT',     r'[A-Za-z_][A-Za-z0-9_]*'),
    ('ASSIGN',    r':='),
    ('DOTDOT',    r'\.\.'),
    ('RELOP',     r'!=|<=|>=|=|<|>'),
    ('COLON',     r':'),
    ('COMMA',     r','),
    ('LPAREN',    r'\('),
    ('RPAREN',    r'\)'),
    ('LBRACKET',  r'\['),
    ('RBRACKET',  r'\]'),
    ('LBRACE',    r'\{'),
    ('RBRACE',    r'\}'),
    ('MINUS',     r'-'),
    ('MISMATCH',  r'.'),
]
# fmt: on

_MASTER_RE = re.compile('|'.join(f'(?P<{name}>{rx})' for name, rx in _TOKEN_SPEC), re.ASCII)
_ESCAPE_RE = re.compile(r'\\(.)')


class Token(NamedTuple):
    kind: str
    value: Union[str, int, float]
    line: int
    col: int

    def __str__(self):
        return self.kind if self.kind in KEYWORDS else f'{self.kind.lower()}({self.value})'


# =========================================================
#                     T O K E N I Z E R
# =========================================================
def _decode(source):
    if isinstance(source, (bytes, bytearray)):
        try:
            return bytes(source).decode('utf-8')
        except UnicodeDecodeError as e:
            prefix = bytes(source[: e.start]).decode('utf-8', errors='replace')
            line = prefix.count('\n') + 1
            col = len(prefix) - (prefix.rfind('\n') + 1) + 1
            raise SleecSyntaxError('Source is not valid UTF-8', line, col, code='LEXICAL_ERROR')
    return source


def tokenize(source: Union[str, bytes]) -> list:
    """Split SLEEC source into tokens.

    The returned list does not include an end-of-file marker; the parser
    adds its own.

    Args:
        source: UTF-8 text ('str', or 'bytes' that will be decoded)

    Returns:
        'list' of 'Token'

    Raises:
        SleecSyntaxError: on illegal characters, malformed numbers, or
            unterminated strings (code 'LEXICAL_ERROR')
    """
    text = _decode(source)
    tokens = []
    line = 1
    lineStart = 0

    for match in _MASTER_RE.finditer(text):
        kind = match.lastgroup
        raw = match.group()
        col = match.start() - lineStart + 1

        if kind == 'NEWLINE':
            line += 1
            lineStart = match.end()
            continue
        if kind in ('SKIP', 'COMMENT'):
            continue

        if kind == 'MISMATCH':
            raise SleecSyntaxError(f'Illegal character {raw!r}', line, col, code='LEXICAL_ERROR')
        if kind == 'BADNUM':
            raise SleecSyntaxError(f'Malformed number {raw!r}', line, col, code='LEXICAL_ERROR')
        if kind == 'BADSTR':
            raise SleecSyntaxError('Unterminated string literal', line, col, code='LEXICAL_ERROR')

        if kind == 'IDENT' and raw.upper() in KEYWORDS:
            tokens.append(Token(raw.upper(), raw, line, col))
        elif kind == 'INT':
            tokens.append(Token(kind, int(raw), line, col))
        elif kind == 'REAL':
            tokens.append(Token(kind, float(raw), line, col))
        elif kind == 'STRING':
            tokens.append(Token(kind, _ESCAPE_RE.sub(r'\1', raw[1:-1]), line, col))
        else:
            tokens.append(Token(kind, raw, line, col))

    return tokens


def end_position(source):
    """Line/column just past the last character of 'source'."""
    text = _decode(source)
    line = text.count('\n') + 1
    return line, len(text) - (text.rfind('\n') + 1) + 1
