"""Reference interpreter for SLEEC rulesets.

'oracle_step()' evaluates a ruleset straight from its AST: every clause
condition of every rule is evaluated first, then each rule is scanned
for the longest prefix of satisfied clauses. It shares no code with the
compiled engine apart from the obligation merge, and serves as ground
truth for differential tests, test-case generation, and the analyses.
"""

from __future__ import annotations

from .obligations import InvariantViolationError, merge_directives, violated_invariants
from .ruleset import Compare, NameRef, compare_values, evaluate

__all__ = [
    'oracle_step',
    'oracle_clause_truths',
    'longest_true_prefix',
]


class _Interpreter:
    def __init__(self, vocabulary, bindings):
        self._vocabulary = vocabulary
        self._bindings = bindings
        self._derived = {}

    def value_of(self, name):
        if name in self._bindings:
            return self._bindings[name]
        if name not in self._derived:
            self._derived[name] = self.truth(self._vocabulary.derived_map[name].expr)
        return self._derived[name]

    def leaf(self, node):
        if isinstance(node, NameRef):
            return bool(self.value_of(node.name))
        if isinstance(node, Compare):
            return compare_values(node.op, self.value_of(node.var), node.literal)
        raise TypeError(f'Unexpected condition leaf: {node!r}')

    def truth(self, expr):
        return evaluate(expr, self.leaf)


def longest_true_prefix(truths):
    """Index of the last element of the leading run of 'True' values, or 'None'."""
    index = None
    for i, value in enumerate(truths):
        if not value:
            break
        index = i
    return index


def oracle_clause_truths(ruleset, rule, bindings):
    """Truth value of every clause of 'rule' (scope folded into clause 0)."""
    interp = _Interpreter(ruleset.vocabulary, bindings)
    truths = [interp.truth(cond) for cond, _ in rule.clauses]
    if rule.scope is not None:
        truths[0] = truths[0] and interp.truth(ruleset.vocabulary.scope_map[rule.scope].expr)
    return truths


def oracle_step(ruleset, snapshot, strict=True, check_invariants=True):
    """Evaluate one enforcement step by direct AST interpretation.

    Args:
        ruleset: well-formed 'Ruleset'
        snapshot: 'ConditionSnapshot'
        strict: if 'False', missing booleans default to 'False'
        check_invariants: evaluate obligation invariants on the result

    Returns:
        'ObligationSet'

    Raises:
        MissingBindingError, InvalidSnapshotError, ConflictingConstraintsError,
        InvariantViolationError
    """
    bindings = snapshot.resolve(ruleset.vocabulary, strict)

    emitted = []
    for rule in ruleset.rules:
        active = longest_true_prefix(oracle_clause_truths(ruleset, rule, bindings))
        if active is None:
            continue
        _, obligation = rule.clauses[active]
        emitted.extend((atom, rule.ruleId, active) for atom in obligation.atoms)

    result = merge_directives(emitted)
    if check_invariants:
        violated = violated_invariants(ruleset.invariants, result)
        if violated:
            raise InvariantViolationError(violated, result)
    return result
