"""Runtime values exchanged by the rule engine.

This module holds the types that cross every boundary of the SLEEC
runtime: the condition snapshot going into a step, the obligation set
coming out of it, and the errors a step can raise. Both have a fixed
JSON encoding (field names 'values', 'directives', 'status',
'provenance') that is shared verbatim by the model server, the client,
and the bus.

Dependencies:
 - frozendict
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from frozendict import frozendict

from .common import NOOP, SleecError, canonical_json
from .ruleset import After, TimeDuration, TimeUnit, ValueKind, Within, evaluate

__all__ = [
    'ConditionSnapshot',
    'ObligationDirective',
    'ObligationSet',
    'EngineError',
    'CompileError',
    'MissingBindingError',
    'InvalidSnapshotError',
    'InvariantViolationError',
    'ConflictingConstraintsError',
    'merge_directives',
    'violated_invariants',
    'modifier_to_json',
    'modifier_from_json',
    'STATUS_RESPECTFUL',
    'STATUS_CRITICAL',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
STATUS_RESPECTFUL = 'respectful'
STATUS_CRITICAL = 'critical'

KWD_VALUES = 'values'
KWD_TIMESTAMP = 'timestamp'
KWD_DIRECTIVES = 'directives'
KWD_STATUS = 'status'
KWD_PROVENANCE = 'provenance'

MOD_AFTER = 'AFTER'
MOD_WITHIN = 'WITHIN'


# =========================================================
#                        E R R O R S
# =========================================================
class EngineError(SleecError):
    code = 'ENGINE_ERROR'

    def __init__(self, errMsg='Rule engine error', code=None):
        super().__init__(errMsg, code)


class CompileError(EngineError):
    """Ruleset has error diagnostics and cannot be compiled."""

    code = 'COMPILE_ERROR'

    def __init__(self, diagnostics, errMsg=None):
        self.diagnostics = tuple(diagnostics)
        if errMsg is None:
            errors = [d for d in self.diagnostics if d.is_error]
            errMsg = f'Cannot compile ruleset with {len(errors)} error(s)'
            if errors:
                errMsg += f'; first: {errors[0].message}'
        super().__init__(errMsg)

    def as_dict(self):
        return {**super().as_dict(), 'diagnostics': [d.as_dict() for d in self.diagnostics]}


class MissingBindingError(EngineError):
    code = 'MISSING_BINDING'

    def __init__(self, name, errMsg=None):
        self.name = name
        super().__init__(errMsg or f"Snapshot has no binding for monitored variable '{name}'")

    def as_dict(self):
        return {**super().as_dict(), 'variable': self.name}


class InvalidSnapshotError(EngineError):
    """Snapshot is malformed, names an unknown variable, or has an ill-typed value."""

    code = 'INVALID_SNAPSHOT'

    def __init__(self, errMsg='Invalid condition snapshot', code=None, name=None):
        super().__init__(errMsg, code)
        self.name = name


class InvariantViolationError(EngineError):
    code = 'INVARIANT_VIOLATION'

    def __init__(self, invariants, obligations, errMsg=None):
        self.invariants = tuple(invariants)
        self.obligations = obligations
        super().__init__(errMsg or f"Obligation invariant(s) violated: {', '.join(self.invariants)}")

    def as_dict(self):
        return {
            **super().as_dict(),
            'invariants': list(self.invariants),
            'obligations': self.obligations.to_json(),
        }


class ConflictingConstraintsError(EngineError):
    code = 'CONFLICTING_CONSTRAINTS'

    def __init__(self, capability, provenance=(), errMsg=None):
        self.capability = capability
        self.provenance = tuple(provenance)
        super().__init__(
            errMsg or f"Capability '{capability}' enforced with conflicting temporal constraints in one step"
        )

    def as_dict(self):
        return {
            **super().as_dict(),
            'capability': self.capability,
            'provenance': [{'rule': r, 'clause': c} for r, c in self.provenance],
        }


# =========================================================
#                  S N A P S H O T S
# =========================================================
def _default_for(decl):
    return False if decl.kind is ValueKind.BOOLEAN else None


@dataclass(frozen=True)
class ConditionSnapshot:
    """Monitored values at one instant.

    Attributes:
        values: name -> value ('bool', 'int', 'float', or enumerant 'str')
        timestamp: optional logical timestamp (ns)
    """

    values: frozendict = field(default_factory=frozendict)
    timestamp: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.values, frozendict):
            object.__setattr__(self, 'values', frozendict(self.values))

    def __getitem__(self, name):
        return self.values[name]

    def __contains__(self, name):
        return name in self.values

    def updated(self, **changes):
        return ConditionSnapshot(frozendict({**self.values, **changes}), self.timestamp)

    def resolve(self, vocabulary, strict=True):
        """Check snapshot against vocabulary and return monitored bindings.

        Keys naming derived predicates are accepted and ignored (derived
        values are always recomputed). In lenient mode missing booleans
        default to 'False'; other missing kinds are still an error.

        Returns:
            'dict' with one entry per monitored variable

        Raises:
            InvalidSnapshotError: unknown name or ill-typed value
            MissingBindingError: a monitored variable is not bound
        """
        monitored = vocabulary.monitored_map
        for name, value in self.values.items():
            decl = monitored.get(name)
            if decl is None:
                if name in vocabulary.derived_map:
                    continue
                raise InvalidSnapshotError(f"Unknown condition '{name}'", 'UNKNOWN_BINDING', name)
            if not decl.accepts(value):
                raise InvalidSnapshotError(
                    f"Value {value!r} is not a valid {decl.kind.value} for '{name}'", 'INVALID_VALUE', name
                )

        bindings = {}
        for name, decl in monitored.items():
            if name in self.values:
                bindings[name] = self.values[name]
                continue
            default = None if strict else _default_for(decl)
            if default is None:
                raise MissingBindingError(name)
            bindings[name] = default
        return bindings

    def to_json(self):
        data = {KWD_VALUES: dict(self.values)}
        if self.timestamp is not None:
            data[KWD_TIMESTAMP] = self.timestamp
        return data

    @classmethod
    def from_json(cls, data):
        """Build snapshot from its JSON encoding ('{"values": {...}}').

        A bare mapping of names to values is also accepted.
        """
        if not isinstance(data, dict):
            raise InvalidSnapshotError('Snapshot must be a JSON object', 'MALFORMED_SNAPSHOT')
        values = data[KWD_VALUES] if KWD_VALUES in data else data
        timestamp = data.get(KWD_TIMESTAMP) if KWD_VALUES in data else None
        if not isinstance(values, dict):
            raise InvalidSnapshotError(
                "Snapshot 'values' must be a JSON object", 'MALFORMED_SNAPSHOT'
            )
        for name, value in values.items():
            if not isinstance(value, (bool, int, float, str)):
                raise InvalidSnapshotError(
                    f"Value for '{name}' must be a boolean, number, or string", 'MALFORMED_SNAPSHOT', name
                )
        if timestamp is not None and type(timestamp) is not int:
            raise InvalidSnapshotError(
                "Snapshot 'timestamp' must be an integer", 'MALFORMED_SNAPSHOT'
            )
        return cls(frozendict(values), timestamp)


# =========================================================
#                O B L I G A T I O N S
# =========================================================
def modifier_to_json(modifier):
    if modifier is None:
        return None
    data = {
        'kind': MOD_AFTER if isinstance(modifier, After) else MOD_WITHIN,
        'amount': modifier.duration.amount,
        'unit': modifier.duration.unit.name,
    }
    if isinstance(modifier, Within):
        data['fallback'] = modifier.fallback
    return data


def modifier_from_json(data):
    if data is None:
        return None
    try:
        duration = TimeDuration(int(data['amount']), TimeUnit[data['unit']])
        if data['kind'] == MOD_AFTER:
            return After(duration)
        if data['kind'] == MOD_WITHIN:
            return Within(duration, data['fallback'])
    except (KeyError, TypeError, ValueError) as e:
        raise EngineError(f'Malformed modifier: {data!r}', 'MALFORMED_OBLIGATIONS') from e
    raise EngineError(f"Unknown modifier kind: {data.get('kind')!r}", 'MALFORMED_OBLIGATIONS')


@dataclass(frozen=True)
class ObligationDirective:
    """One capability to enforce.

    Attributes:
        capability: capability name
        modifier: 'None', 'After', or 'Within' (durations normalized)
        provenance: sorted '(ruleId, clauseIndex)' pairs of emitting clauses
    """

    capability: str
    modifier: Optional[Union[After, Within]] = None
    provenance: Tuple[Tuple[str, int], ...] = ()

    @property
    def is_after(self):
        return isinstance(self.modifier, After)

    @property
    def is_within(self):
        return isinstance(self.modifier, Within)

    def to_json(self):
        return {
            'capability': self.capability,
            'modifier': modifier_to_json(self.modifier),
            KWD_PROVENANCE: [{'rule': r, 'clause': c} for r, c in self.provenance],
        }

    @classmethod
    def from_json(cls, data):
        try:
            provenance = tuple((p['rule'], int(p['clause'])) for p in data.get(KWD_PROVENANCE, ()))
            return cls(data['capability'], modifier_from_json(data.get('modifier')), provenance)
        except (KeyError, TypeError, AttributeError) as e:
            raise EngineError(f'Malformed directive: {data!r}', 'MALFORMED_OBLIGATIONS') from e


@dataclass(frozen=True)
class ObligationSet:
    """Result of one enforcement step.

    Directives are kept sorted by capability (one directive per
    capability), so equal sets have equal encodings.
    """

    directives: Tuple[ObligationDirective, ...] = ()

    @property
    def status(self):
        return STATUS_RESPECTFUL if not self.directives else STATUS_CRITICAL

    @property
    def is_respectful(self):
        return not self.directives

    @property
    def capabilities(self):
        return tuple(d.capability for d in self.directives)

    def enforced(self, capability):
        return any(d.capability == capability for d in self.directives)

    def get(self, capability):
        return next((d for d in self.directives if d.capability == capability), None)

    def to_json(self):
        return {
            KWD_DIRECTIVES: [d.to_json() for d in self.directives],
            KWD_STATUS: self.status,
        }

    def to_canonical(self):
        return canonical_json(self.to_json())

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or not isinstance(data.get(KWD_DIRECTIVES), list):
            raise EngineError('Malformed obligation set', 'MALFORMED_OBLIGATIONS')
        directives = [ObligationDirective.from_json(d) for d in data[KWD_DIRECTIVES]]
        return cls(tuple(sorted(directives, key=lambda d: d.capability)))


def merge_directives(emitted):
    """Union emitted atoms into an 'ObligationSet'.

    Atoms for the same capability with equal (normalized) modifiers are
    merged and their provenance joined. 'noop' atoms are dropped.

    Args:
        emitted: iterable of '(ObligationAtom, ruleId, clauseIndex)'

    Raises:
        ConflictingConstraintsError: same capability, different modifiers
    """
    merged = {}
    for atom, ruleId, clause in emitted:
        if atom.capability == NOOP:
            continue
        modifier = atom.modifier.normalized() if atom.modifier is not None else None
        entry = merged.get(atom.capability)
        if entry is None:
            merged[atom.capability] = (modifier, {(ruleId, clause)})
        elif entry[0] != modifier:
            provenance = sorted(entry[1] | {(ruleId, clause)})
            raise ConflictingConstraintsError(atom.capability, provenance)
        else:
            entry[1].add((ruleId, clause))

    return ObligationSet(
        tuple(
            ObligationDirective(cap, modifier, tuple(sorted(prov)))
            for cap, (modifier, prov) in sorted(merged.items())
        )
    )


def violated_invariants(invariants, obligations):
    """Names of the invariants that do not hold on 'obligations'."""
    def leaf(node):
        return obligations.enforced(node.capability)

    return [inv.name for inv in invariants if not evaluate(inv.expr, leaf)]

