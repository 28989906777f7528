"""Canonical pretty-printer for SLEEC rulesets.

The layout is fixed: vocabulary declarations first (monitored
variables, capabilities, derived predicates, scopes, invariants), then
one block per rule separated by blank lines:

    SCOPE TrainingTime
    RULE S2 LABELS Ethical, Empathetic
    IF NOT userExercising THEN showNextExercise AFTER 1 MINUTE
    UNLESS fewerExerciseRepetitions IN WHICH CASE encourage

Parentheses are only emitted where precedence (NOT > AND > OR)
requires them, so parsing the output gives back an equal 'Ruleset'.
"""

from __future__ import annotations

import re

from decimal import Decimal

from .lexer import KEYWORDS
from .ruleset import After, And, BoolConst, Compare, Enforced, NameRef, Not, Or, ValueKind

__all__ = [
    'format_ruleset',
    'format_rule',
    'format_condition',
    'format_obligation',
    'format_literal',
]

_IDENT_RE = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_ATOM = 4


def format_literal(value):
    if isinstance(value, bool):
        return 'TRUE' if value else 'FALSE'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = format(Decimal(repr(value)), 'f')
        return text if '.' in text else f'{text}.0'
    reserved = value.upper() in KEYWORDS or value.upper() in ('TRUE', 'FALSE')
    if _IDENT_RE.fullmatch(value) and not reserved:
        return value
    escaped = value.replace('\\', '\\\\').replace('"', '\\"')
    return f'"{escaped}"'


def _precedence(expr):
    if isinstance(expr, Or):
        return _PREC_OR
    if isinstance(expr, And):
        return _PREC_AND
    if isinstance(expr, Not):
        return _PREC_NOT
    return _PREC_ATOM


def _operands(expr):
    """Operands of an n-ary node with same-kind children spliced in."""
    for op in expr.operands:
        if type(op) is type(expr):
            yield from _operands(op)
        else:
            yield op


def _wrap(expr, minPrec):
    text = format_condition(expr)
    return f'({text})' if _precedence(expr) < minPrec else text


def format_condition(expr):
    """Format condition (or invariant expression) with minimal parentheses.

    Nested 'And' in 'And' (and 'Or' in 'Or') is written flat, so the text
    parses back to the flattened tree that 'make_and()' and 'make_or()' build.
    """
    if isinstance(expr, Or):
        return ' OR '.join(_wrap(op, _PREC_AND) for op in _operands(expr))
    if isinstance(expr, And):
        return ' AND '.join(_wrap(op, _PREC_NOT) for op in _operands(expr))
    if isinstance(expr, Not):
        return f'NOT {_wrap(expr.operand, _PREC_NOT)}'
    if isinstance(expr, BoolConst):
        return 'TRUE' if expr.value else 'FALSE'
    if isinstance(expr, NameRef):
        return expr.name
    if isinstance(expr, Compare):
        return f'{expr.var} {expr.op} {format_literal(expr.literal)}'
    if isinstance(expr, Enforced):
        return f'enforced({expr.capability})'
    raise TypeError(f'Cannot format condition node {expr!r}')


def format_obligation(obligation):
    parts = []
    for atom in obligation.atoms:
        mod = atom.modifier
        if mod is None:
            parts.append(atom.capability)
        elif isinstance(mod, After):
            parts.append(f'{atom.capability} AFTER {mod.duration}')
        else:
            parts.append(f'{atom.capability} WITHIN {mod.duration} OTHERWISE {mod.fallback}')
    return ' AND '.join(parts)


def format_rule(rule):
    lines = []
    if rule.scope is not None:
        lines.append(f'SCOPE {rule.scope}')
    header = f'RULE {rule.ruleId}'
    if rule.labels:
        header += f" LABELS {', '.join(rule.labels)}"
    lines.append(header)
    lines.append(
        f'IF {format_condition(rule.baseCondition)} THEN {format_obligation(rule.baseObligation)}'
    )
    for hedge in rule.hedges:
        lines.append(
            f'UNLESS {format_condition(hedge.condition)} IN WHICH CASE {format_obligation(hedge.obligation)}',
        )
    return '\n'.join(lines)


def _format_monitored(decl):
    if decl.kind is ValueKind.ENUM:
        return f"MONITORED {decl.name} : enum {{ {', '.join(decl.domain)} }}"
    text = f'MONITORED {decl.name} : {decl.kind.value}'
    if decl.has_range:
        text += f' [{format_literal(decl.lower)} .. {format_literal(decl.upper)}]'
    return text


def format_ruleset(ruleset):
    """Format a ruleset as canonical SLEEC text.

    'parse_ruleset(format_ruleset(rs))' is structurally equal to 'rs'
    for every parsed ruleset.
    """
    vocab = ruleset.vocabulary
    decls = [_format_monitored(m) for m in vocab.monitored]
    if vocab.capabilities:
        decls.append(f"CAPABILITY {', '.join(vocab.capabilities)}")
    decls += [f'DERIVED {d.name} := {format_condition(d.expr)}' for d in vocab.derived]
    decls += [f'SCOPE {s.name} := {format_condition(s.expr)}' for s in vocab.scopes]
    decls += [f'INVARIANT {i.name} := {format_condition(i.expr)}' for i in ruleset.invariants]

    blocks = []
    if decls:
        blocks.append('\n'.join(decls))
    blocks += [format_rule(r) for r in ruleset.rules]
    return '\n\n'.join(blocks) + '\n' if blocks else ''
