"""SLEEC ruleset model.

Immutable AST for SLEEC rulesets: the vocabulary (monitored variables,
capabilities, scopes, derived predicates), the rules with their ordered
hedge clauses, and the obligation invariants. All nodes are frozen
dataclasses, so two rulesets compare equal iff they are structurally
equal (source positions are ignored).

The module also holds the small tree-walking helpers shared by the
oracle, the analyses, and the monitor: 'evaluate()', 'iter_leaves()',
and 'compare_values()'.
"""

from __future__ import annotations

import operator

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterator, Optional, Tuple, Union

from .common import NOOP

__all__ = [
    'ValueKind',
    'TimeUnit',
    'TimeDuration',
    'After',
    'Within',
    'ObligationAtom',
    'Obligation',
    'BoolConst',
    'NameRef',
    'Compare',
    'Not',
    'And',
    'Or',
    'Enforced',
    'MonitoredDecl',
    'ScopeDecl',
    'DerivedDecl',
    'VocabularyDecl',
    'HedgeClause',
    'Rule',
    'ObligationInvariant',
    'Ruleset',
    'evaluate',
    'iter_leaves',
    'compare_values',
    'make_and',
    'make_or',
    'RELOPS',
    'ORDER_RELOPS',
    'SLEEC_LABELS',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
RELOPS = ('=', '!=', '<', '<=', '>', '>=')
ORDER_RELOPS = ('<', '<=', '>', '>=')

_RELOP_FUNCS = {
    '=': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}

SLEEC_LABELS = ('Social', 'Legal', 'Ethical', 'Empathetic', 'Cultural')

Literal = Union[bool, int, float, str]


class ValueKind(str, Enum):
    BOOLEAN = 'boolean'
    INTEGER = 'integer'
    REAL = 'real'
    ENUM = 'enum'


class TimeUnit(Enum):
    """Timer units. The value is the unit length in nanoseconds."""

    NANOSEC = 1
    MILLISEC = 1_000_000
    SEC = 1_000_000_000
    MINUTE = 60 * 1_000_000_000
    HOUR = 3600 * 1_000_000_000


# =========================================================
#         O B L I G A T I O N S   &   T I M I N G
# =========================================================
@dataclass(frozen=True)
class TimeDuration:
    amount: int
    unit: TimeUnit

    @property
    def nanos(self):
        return self.amount * self.unit.value

    def normalized(self):
        """Same duration in the largest unit that divides it exactly.

        60 SEC and 1 MINUTE both normalize to 1 MINUTE.
        """
        nanos = self.nanos
        for unit in sorted(TimeUnit, key=lambda u: u.value, reverse=True):
            if nanos % unit.value == 0:
                return TimeDuration(nanos // unit.value, unit)
        return self

    def __str__(self):
        return f'{self.amount} {self.unit.name}'


@dataclass(frozen=True)
class After:
    duration: TimeDuration

    def normalized(self):
        return After(self.duration.normalized())


@dataclass(frozen=True)
class Within:
    duration: TimeDuration
    fallback: str

    def normalized(self):
        return Within(self.duration.normalized(), self.fallback)


@dataclass(frozen=True)
class ObligationAtom:
    capability: str
    modifier: Optional[Union[After, Within]] = None

    @property
    def is_noop(self):
        return self.capability == NOOP


@dataclass(frozen=True)
class Obligation:
    atoms: Tuple[ObligationAtom, ...]

    @property
    def capabilities(self):
        return tuple(a.capability for a in self.atoms)


# =========================================================
#                    C O N D I T I O N S
# =========================================================
@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class NameRef:
    """Reference to a boolean monitored variable or derived predicate."""

    name: str


@dataclass(frozen=True)
class Compare:
    """Relational predicate 'var relop literal'."""

    var: str
    op: str
    literal: Literal


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class And:
    operands: tuple


@dataclass(frozen=True)
class Or:
    operands: tuple


@dataclass(frozen=True)
class Enforced:
    """'enforced(capability)' atom, only valid inside invariants."""

    capability: str


def make_and(operands):
    """Build n-ary 'And', splicing nested 'And' nodes."""
    flat = []
    for op in operands:
        flat.extend(op.operands if isinstance(op, And) else (op,))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def make_or(operands):
    """Build n-ary 'Or', splicing nested 'Or' nodes."""
    flat = []
    for op in operands:
        flat.extend(op.operands if isinstance(op, Or) else (op,))
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def compare_values(op, left, right):
    return _RELOP_FUNCS[op](left, right)


def evaluate(expr, leaf: Callable[[object], bool]) -> bool:
    """Evaluate condition tree, delegating leaves to 'leaf()'.

    Leaves are 'NameRef', 'Compare', and 'Enforced' nodes. Connectives
    are evaluated without short-circuiting so that every leaf is
    visited; callers that need speed compile the tree instead.
    """
    if isinstance(expr, BoolConst):
        return expr.value
    if isinstance(expr, Not):
        return not evaluate(expr.operand, leaf)
    if isinstance(expr, And):
        values = [evaluate(op, leaf) for op in expr.operands]
        return all(values)
    if isinstance(expr, Or):
        values = [evaluate(op, leaf) for op in expr.operands]
        return any(values)
    return bool(leaf(expr))


def iter_leaves(expr) -> Iterator[object]:
    if isinstance(expr, Not):
        yield from iter_leaves(expr.operand)
    elif isinstance(expr, (And, Or)):
        for op in expr.operands:
            yield from iter_leaves(op)
    elif isinstance(expr, (NameRef, Compare, Enforced)):
        yield expr


def referenced_names(expr):
    """Names of variables/predicates read by a condition."""
    names = []
    for leaf in iter_leaves(expr):
        name = leaf.name if isinstance(leaf, NameRef) else getattr(leaf, 'var', None)
        if name is not None and name not in names:
            names.append(name)
    return names


# =========================================================
#                    V O C A B U L A R Y
# =========================================================
@dataclass(frozen=True)
class MonitoredDecl:
    name: str
    kind: ValueKind
    domain: Tuple[str, ...] = ()
    lower: Optional[Union[int, float]] = None
    upper: Optional[Union[int, float]] = None
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)

    @property
    def has_range(self):
        return self.lower is not None and self.upper is not None

    def accepts(self, value):
        """Check that a runtime value has this variable's kind."""
        if self.kind is ValueKind.BOOLEAN:
            return isinstance(value, bool)
        if self.kind is ValueKind.INTEGER:
            return isinstance(value, int) and not isinstance(value, bool)
        if self.kind is ValueKind.REAL:
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        return isinstance(value, str) and value in self.domain


@dataclass(frozen=True)
class ScopeDecl:
    name: str
    expr: object
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class DerivedDecl:
    name: str
    expr: object
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class VocabularyDecl:
    monitored: Tuple[MonitoredDecl, ...] = ()
    capabilities: Tuple[str, ...] = ()
    scopes: Tuple[ScopeDecl, ...] = ()
    derived: Tuple[DerivedDecl, ...] = ()

    @cached_property
    def monitored_map(self):
        return {m.name: m for m in self.monitored}

    @cached_property
    def scope_map(self):
        return {s.name: s for s in self.scopes}

    @cached_property
    def derived_map(self):
        return {d.name: d for d in self.derived}

    @cached_property
    def capability_set(self):
        return frozenset(self.capabilities) | {NOOP}

    def kind_of(self, name):
        """Value kind of a monitored or derived name, or 'None'."""
        if name in self.monitored_map:
            return self.monitored_map[name].kind
        if name in self.derived_map:
            return ValueKind.BOOLEAN
        return None


# =========================================================
#                    R U L E S E T S
# =========================================================
@dataclass(frozen=True)
class HedgeClause:
    condition: object
    obligation: Obligation


@dataclass(frozen=True)
class Rule:
    ruleId: str
    scope: Optional[str]
    baseCondition: object
    baseObligation: Obligation
    hedges: Tuple[HedgeClause, ...] = ()
    labels: Tuple[str, ...] = ()
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)

    @property
    def clauses(self):
        """Clauses as '(condition, obligation)' pairs; index 0 is the base clause."""
        return ((self.baseCondition, self.baseObligation),) + tuple(
            (h.condition, h.obligation) for h in self.hedges
        )

    @property
    def obligations(self):
        return tuple(o for _, o in self.clauses)


@dataclass(frozen=True)
class ObligationInvariant:
    name: str
    expr: object
    line: Optional[int] = field(default=None, compare=False)
    col: Optional[int] = field(default=None, compare=False)

    @property
    def capabilities(self):
        return tuple(dict.fromkeys(leaf.capability for leaf in iter_leaves(self.expr)))


@dataclass(frozen=True)
class Ruleset:
    vocabulary: VocabularyDecl = field(default_factory=VocabularyDecl)
    rules: Tuple[Rule, ...] = ()
    invariants: Tuple[ObligationInvariant, ...] = ()

    @cached_property
    def rule_map(self):
        return {r.ruleId: r for r in self.rules}

    def with_rules(self, rules):
        """Same vocabulary and invariants, different rule list."""
        return Ruleset(self.vocabulary, tuple(rules), self.invariants)

    def emitters_of(self, capability):
        """Rules with at least one clause that can emit 'capability'."""
        return tuple(
            r for r in self.rules if any(capability in o.capabilities for o in r.obligations)
        )

    @property
    def clause_count(self):
        return sum(len(r.clauses) for r in self.rules)
