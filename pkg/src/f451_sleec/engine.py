"""SLEEC rule engine.

'compile()' turns a well-formed 'Ruleset' into a 'RuleMachine': every
condition becomes a closure over a flat environment of monitored and
derived values, each rule's scope is folded into its base condition,
and obligation templates have their durations normalized once.

One call to 'step()' is one enforcement step. Outputs start empty, all
rules are evaluated independently, and for each rule the obligation of
its active clause (the last clause of the longest satisfied prefix
C0, C1, ..., Ci) is added. The machine is immutable after compilation,
so 'step()' is reentrant and can be shared across threads.
"""

from __future__ import annotations

import operator

from .analysis import check_well_formed
from .diagnostics import has_errors
from .obligations import (
    CompileError,
    ConditionSnapshot,
    InvariantViolationError,
    merge_directives,
    violated_invariants,
)
from .ruleset import And, BoolConst, Compare, NameRef, Not, ObligationAtom, Or, make_and

__all__ = [
    'RuleMachine',
    'CompiledRule',
    'compile',
    'compile_condition',
    'active_clause_index',
    'step',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
_OPS = {
    '=': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}


# =========================================================
#                 C O M P I L A T I O N
# =========================================================
def _normalized(modifier):
    return modifier.normalized() if modifier is not None else None


def compile_condition(expr):
    """Compile condition tree into a closure 'fn(env) -> bool'."""
    if isinstance(expr, BoolConst):
        value = expr.value
        return lambda env: value
    if isinstance(expr, NameRef):
        name = expr.name
        return lambda env: bool(env[name])
    if isinstance(expr, Compare):
        fn, var, lit = _OPS[expr.op], expr.var, expr.literal
        return lambda env: fn(env[var], lit)
    if isinstance(expr, Not):
        inner = compile_condition(expr.operand)
        return lambda env: not inner(env)
    if isinstance(expr, And):
        parts = tuple(compile_condition(op) for op in expr.operands)
        return lambda env: all(p(env) for p in parts)
    if isinstance(expr, Or):
        parts = tuple(compile_condition(op) for op in expr.operands)
        return lambda env: any(p(env) for p in parts)
    raise TypeError(f'Cannot compile condition node {expr!r}')


class CompiledRule:
    """Guards and obligation templates of one rule.

    Attributes:
        ruleId: rule identifier
        guards: compiled C0..Cn, with the scope folded into C0
        templates: per clause, the obligation atoms with normalized modifiers
    """

    def __init__(self, ruleId, guards, templates, machine):
        self.ruleId = ruleId
        self.guards = tuple(guards)
        self.templates = tuple(templates)
        self._machine = machine

    def __repr__(self):
        return f'CompiledRule({self.ruleId!r}, clauses={len(self.guards)})'

    def active(self, env):
        if not self.guards[0](env):
            return None
        index = 0
        for guard in self.guards[1:]:
            if not guard(env):
                break
            index += 1
        return index


class RuleMachine:
    """Compiled, immutable enforcement model.

    Attributes:
        ruleset: source 'Ruleset'
        rules: 'CompiledRule' objects in ruleset order
        strict: default snapshot mode for 'step()'
    """

    def __init__(self, ruleset, strict=True):
        self.ruleset = ruleset
        self.strict = strict
        vocab = ruleset.vocabulary

        self._derived = tuple((d.name, compile_condition(d.expr)) for d in vocab.derived)
        self.capabilities = vocab.capability_set
        self.invariants = ruleset.invariants

        rules = []
        for rule in ruleset.rules:
            conds = [cond for cond, _ in rule.clauses]
            if rule.scope is not None:
                conds[0] = make_and([vocab.scope_map[rule.scope].expr, conds[0]])
            templates = [
                tuple(
                    ObligationAtom(a.capability, _normalized(a.modifier)) for a in obligation.atoms
                )
                for obligation in rule.obligations
            ]
            guards = [compile_condition(c) for c in conds]
            rules.append(CompiledRule(rule.ruleId, guards, templates, self))
        self.rules = tuple(rules)
        self._ruleMap = {r.ruleId: r for r in self.rules}

    def rule(self, ruleId):
        return self._ruleMap[ruleId]

    def environment(self, snapshot, strict=None):
        """Resolve snapshot into monitored and derived values."""
        env = snapshot.resolve(self.ruleset.vocabulary, self.strict if strict is None else strict)
        for name, fn in self._derived:
            env[name] = fn(env)
        return env

    def step(self, snapshot, strict=None, check_invariants=True):
        env = self.environment(snapshot, strict)

        emitted = []
        for rule in self.rules:
            index = rule.active(env)
            if index is not None:
                emitted.extend((atom, rule.ruleId, index) for atom in rule.templates[index])

        result = merge_directives(emitted)
        if check_invariants and self.invariants:
            violated = violated_invariants(self.invariants, result)
            if violated:
                raise InvariantViolationError(violated, result)
        return result


# =========================================================
#              P U B L I C   F U N C T I O N S
# =========================================================
def compile(ruleset, strict=True):
    """Compile a well-formed ruleset into a 'RuleMachine'.

    Args:
        ruleset: 'Ruleset'
        strict: default snapshot mode ('False' lets missing booleans default to 'False')

    Raises:
        CompileError: the ruleset has error diagnostics
    """
    diagnostics = check_well_formed(ruleset)
    if has_errors(diagnostics):
        raise CompileError([d for d in diagnostics if d.is_error])
    return RuleMachine(ruleset, strict)


def active_clause_index(rule, snapshot, strict=None):
    """Index of the active clause of a compiled rule, or 'None' if not triggered.

    Raises:
        MissingBindingError: the snapshot lacks a monitored variable
    """
    if isinstance(snapshot, ConditionSnapshot):
        return rule.active(rule._machine.environment(snapshot, strict))
    return rule.active(snapshot)


def step(machine, snapshot, strict=None, check_invariants=True):
    """Evaluate one enforcement step; see 'RuleMachine.step()'."""
    return machine.step(snapshot, strict, check_invariants)
