"""Diagnostics for SLEEC rulesets.

Every problem found while lexing, parsing, or analyzing a ruleset is
reported as a 'Diagnostic'. Diagnostics name the rule (and clause) they
concern and, when known, the source position of that rule. They print
as 'file:line:col: severity: message', the format compilers and editors
understand.

Lexical and syntax errors are raised as 'SleecSyntaxError' (they stop
the parser). Name-resolution and typing problems are collected and
raised together as 'SleecSemanticError'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .common import SleecError

__all__ = [
    'Severity',
    'Diagnostic',
    'SleecSyntaxError',
    'SleecSemanticError',
    'has_errors',
    'render_diagnostics',
    'LOC_VOCABULARY',
    'LOC_INVARIANT',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
LOC_VOCABULARY = '<vocabulary>'     # Pseudo rule id for declarations
LOC_INVARIANT = '<invariant:{}>'    # Pseudo rule id for obligation invariants
DEF_SOURCE_NAME = '<input>'


class Severity(str, Enum):
    ERROR = 'error'
    WARNING = 'warning'
    INFO = 'info'


# =========================================================
#                   D I A G N O S T I C S
# =========================================================
@dataclass(frozen=True)
class Diagnostic:
    """Single finding about a ruleset.

    Attributes:
        severity: error, warning, or info
        code: short upper-case code, e.g. 'DEAD_CLAUSE'
        message: human-readable text
        ruleId: rule the finding concerns ('<vocabulary>' or
            '<invariant:name>' for declarations and invariants)
        clause: clause index (0 = base clause), if any
        line/col: 1-based source position, if known
        witness: variable assignment demonstrating the problem, if any
    """

    severity: Severity
    code: str
    message: str
    ruleId: str
    clause: Optional[int] = None
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)
    witness: Optional[tuple] = None

    @property
    def is_error(self):
        return self.severity is Severity.ERROR

    @property
    def location(self):
        return self.ruleId if self.clause is None else f'{self.ruleId}[{self.clause}]'

    def render(self, sourceName=DEF_SOURCE_NAME):
        line = self.line if self.line is not None else 1
        col = self.col if self.col is not None else 1
        return f'{sourceName}:{line}:{col}: {self.severity.value}: {self.location}: {self.message} [{self.code}]'

    def as_dict(self):
        data = {
            'severity': self.severity.value,
            'code': self.code,
            'message': self.message,
            'rule': self.ruleId,
            'clause': self.clause,
            'line': self.line,
            'col': self.col,
        }
        if self.witness is not None:
            data['witness'] = {k: v for k, v in self.witness}
        return data


def has_errors(diagnostics):
    return any(d.is_error for d in diagnostics)


def render_diagnostics(diagnostics, sourceName=DEF_SOURCE_NAME):
    return '\n'.join(d.render(sourceName) for d in diagnostics)


# =========================================================
#                        E R R O R S
# =========================================================
class SleecSyntaxError(SleecError):
    """Lexical or syntax error with position and expected-token set."""

    code = 'SYNTAX_ERROR'

    def __init__(self, errMsg='Invalid SLEEC syntax', line=1, col=1, expected=(), code=None):
        super().__init__(errMsg, code)
        self.line = line
        self.col = col
        self.expected = tuple(expected)

    def render(self, sourceName=DEF_SOURCE_NAME):
        return f'{sourceName}:{self.line}:{self.col}: error: {self.message}'

    def as_dict(self):
        return {
            'error': self.code,
            'message': self.message,
            'diagnostics': [
                {
                    'severity': Severity.ERROR.value,
                    'code': self.code,
                    'message': self.message,
                    'line': self.line,
                    'col': self.col,
                    'expected': list(self.expected),
                }
            ],
        }


class SleecSemanticError(SleecError):
    """Undeclared names, duplicate ids, ill-typed predicates, and the like."""

    code = 'SEMANTIC_ERROR'

    def __init__(self, diagnostics, errMsg=None):
        self.diagnostics = tuple(diagnostics)
        errors = [d for d in self.diagnostics if d.is_error]
        if errMsg is None:
            first = errors[0].message if errors else 'invalid ruleset'
            errMsg = f'{len(errors)} semantic error(s); first: {first}'
        super().__init__(errMsg)

    def as_dict(self):
        return {
            'error': self.code,
            'message': self.message,
            'diagnostics': [d.as_dict() for d in self.diagnostics],
        }
