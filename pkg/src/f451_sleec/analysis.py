"""Static and simulation-based validation of SLEEC rulesets.

The checks in this module are:

    check_well_formed()             name resolution, typing, duplicates, unused entries
    detect_dead_clauses()           clauses that can never be the active clause
    check_obligation_invariants()   invariant violations and conflicting constraints
    random_simulate()               seeded random stepping of the reference interpreter

Dead-clause detection works on the atoms of a rule: boolean variables
and relational predicates after scopes and derived predicates have
been inlined. Distinct predicates are treated as independent, except
that a predicate and its syntactic negation ('t < 5' / 't >= 5') share
one atom. This over-approximates what is reachable, so a clause
reported dead is never active for any real snapshot.

Invariant and conflict checks enumerate concrete snapshots instead,
restricted to the variables read by the rules that can emit the
capabilities involved. Numeric variables contribute one value per
region induced by the literals they are compared with.

Dependencies:
 - random / itertools / math (stdlib)
"""

from __future__ import annotations

import itertools
import math
import random

from dataclasses import dataclass
from typing import Optional, Tuple

from .common import NOOP, SleecError
from .diagnostics import LOC_INVARIANT, LOC_VOCABULARY, Diagnostic, Severity, has_errors
from .obligations import (
    ConditionSnapshot,
    ConflictingConstraintsError,
    ObligationSet,
    violated_invariants,
)
from .oracle import longest_true_prefix, oracle_step
from .ruleset import (
    ORDER_RELOPS,
    SLEEC_LABELS,
    BoolConst,
    Compare,
    NameRef,
    Not,
    ValueKind,
    evaluate,
    iter_leaves,
    make_and,
)

__all__ = [
    'AnalysisError',
    'Sampled',
    'EXHAUSTIVE',
    'MAX_ATOMS',
    'check_well_formed',
    'detect_dead_clauses',
    'check_obligation_invariants',
    'random_simulate',
    'random_snapshot',
    'analyze',
    'SimulationStep',
    'SimulationTrace',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
EXHAUSTIVE = 'exhaustive'
MAX_ATOMS = 24                  # Exhaustive bound (2^24 assignments)

_NEGATED_OPS = {'!=': '=', '<': '>=', '<=': '>'}


class AnalysisError(SleecError):
    """Analysis cannot run (enumeration too large, missing ranges, bad arguments)."""

    code = 'ANALYSIS_ERROR'

    def __init__(self, errMsg='Ruleset analysis failed', code=None):
        super().__init__(errMsg, code)


@dataclass(frozen=True)
class Sampled:
    """Sampled analysis mode: 'n' random draws from a seeded generator."""

    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise AnalysisError('Sample count must be at least 1', 'INVALID_ARGUMENT')


def _is_sampled(mode):
    if isinstance(mode, Sampled):
        return True
    if mode == EXHAUSTIVE:
        return False
    raise AnalysisError(f'Unknown analysis mode: {mode!r}', 'INVALID_ARGUMENT')


# =========================================================
#            W E L L - F O R M E D N E S S
# =========================================================
class _WellFormedChecker:
    def __init__(self, ruleset):
        self._rs = ruleset
        self._vocab = ruleset.vocabulary
        self._diags = []
        self._usedVars = set()
        self._usedCaps = set()
        self._usedScopes = set()

    def _add(self, severity, code, message, ruleId, clause=None, line=None, col=None):
        self._diags.append(Diagnostic(severity, code, message, ruleId, clause, line, col))

    def _error(self, code, message, ruleId, clause=None, line=None, col=None):
        self._add(Severity.ERROR, code, message, ruleId, clause, line, col)

    # ---------------------------------------------------------
    #  Vocabulary
    # ---------------------------------------------------------
    def _check_duplicates(self, names, category, pos):
        seen = set()
        for name in names:
            if name in seen:
                line, col = pos(name)
                self._error(
                    'DUPLICATE_DECLARATION',
                    f"{category} '{name}' declared more than once",
                    LOC_VOCABULARY,
                    line=line,
                    col=col,
                )
            seen.add(name)

    def _check_vocabulary(self):
        vocab = self._vocab
        mpos = {m.name: (m.line, m.col) for m in vocab.monitored}
        dpos = {d.name: (d.line, d.col) for d in vocab.derived}
        spos = {s.name: (s.line, s.col) for s in vocab.scopes}

        self._check_duplicates(
            [m.name for m in vocab.monitored], 'monitored variable', lambda n: mpos[n]
        )
        self._check_duplicates(
            [c for c in vocab.capabilities], 'capability', lambda n: (None, None)
        )
        self._check_duplicates([s.name for s in vocab.scopes], 'scope', lambda n: spos[n])
        self._check_duplicates(
            [d.name for d in vocab.derived], 'derived predicate', lambda n: dpos[n]
        )
        self._check_duplicates(
            [i.name for i in self._rs.invariants], 'invariant', lambda n: (None, None)
        )

        for d in vocab.derived:
            if d.name in mpos:
                self._error(
                    'DUPLICATE_DECLARATION',
                    f"'{d.name}' is declared both monitored and derived",
                    LOC_VOCABULARY,
                    line=d.line,
                    col=d.col,
                )

        for m in vocab.monitored:
            if m.kind is ValueKind.ENUM and len(set(m.domain)) != len(m.domain):
                self._error(
                    'DUPLICATE_DECLARATION',
                    f"enum '{m.name}' lists an enumerant twice",
                    LOC_VOCABULARY,
                    line=m.line,
                    col=m.col,
                )
            if m.kind in (ValueKind.INTEGER, ValueKind.REAL):
                if not m.has_range:
                    self._add(
                        Severity.WARNING,
                        'NO_RANGE',
                        f"numeric variable '{m.name}' has no declared range",
                        LOC_VOCABULARY,
                        line=m.line,
                        col=m.col,
                    )
                elif m.lower > m.upper:
                    self._error(
                        'INVALID_RANGE',
                        f"range of '{m.name}' is empty ({m.lower} > {m.upper})",
                        LOC_VOCABULARY,
                        line=m.line,
                        col=m.col,
                    )

        for d in vocab.derived:
            self._check_condition(d.expr, LOC_VOCABULARY, None, d.line, d.col, inDerived=True)
        for s in vocab.scopes:
            self._check_condition(s.expr, LOC_VOCABULARY, None, s.line, s.col)

    # ---------------------------------------------------------
    #  Conditions
    # ---------------------------------------------------------
    def _check_condition(self, expr, ruleId, clause, line, col, inDerived=False):
        for leaf in iter_leaves(expr):
            name = leaf.name if isinstance(leaf, NameRef) else leaf.var
            if inDerived and name in self._vocab.derived_map:
                self._error(
                    'DERIVED_REFERENCE',
                    f"derived predicate may only read monitored variables, not '{name}'",
                    ruleId,
                    clause,
                    line,
                    col,
                )
                continue
            kind = self._vocab.kind_of(name)
            if kind is None:
                self._error(
                    'UNDECLARED_VARIABLE',
                    f"undeclared condition '{name}'",
                    ruleId,
                    clause,
                    line,
                    col,
                )
                continue
            self._usedVars.add(name)
            if isinstance(leaf, NameRef):
                if kind is not ValueKind.BOOLEAN:
                    self._error(
                        'TYPE_MISMATCH',
                        f"{kind.value} variable '{name}' used as a condition",
                        ruleId,
                        clause,
                        line,
                        col,
                    )
            else:
                self._check_compare(leaf, kind, ruleId, clause, line, col)

    def _check_compare(self, leaf, kind, ruleId, clause, line, col):
        lit = leaf.literal
        where = f"'{leaf.var} {leaf.op} {lit!r}'"
        if kind in (ValueKind.BOOLEAN, ValueKind.ENUM) and leaf.op in ORDER_RELOPS:
            self._error(
                'TYPE_MISMATCH',
                f'ordering operator on {kind.value} in {where}',
                ruleId,
                clause,
                line,
                col,
            )
            return
        if kind is ValueKind.BOOLEAN:
            ok = isinstance(lit, bool)
        elif kind is ValueKind.INTEGER:
            ok = isinstance(lit, int) and not isinstance(lit, bool)
        elif kind is ValueKind.REAL:
            ok = isinstance(lit, (int, float)) and not isinstance(lit, bool)
        else:
            if isinstance(lit, str) and lit not in self._vocab.monitored_map[leaf.var].domain:
                self._error(
                    'UNKNOWN_ENUMERANT',
                    f"'{lit}' is not a value of '{leaf.var}'",
                    ruleId,
                    clause,
                    line,
                    col,
                )
                return
            ok = isinstance(lit, str)
        if not ok:
            self._error(
                'TYPE_MISMATCH',
                f'{kind.value} variable compared with incompatible literal in {where}',
                ruleId,
                clause,
                line,
                col,
            )

    # ---------------------------------------------------------
    #  Rules and invariants
    # ---------------------------------------------------------
    def _check_obligation(self, obligation, rule, clause):
        caps = self._vocab.capability_set
        for atom in obligation.atoms:
            self._usedCaps.add(atom.capability)
            if atom.capability not in caps:
                self._error(
                    'UNDECLARED_CAPABILITY',
                    f"undeclared capability '{atom.capability}'",
                    rule.ruleId,
                    clause,
                    rule.line,
                    rule.col,
                )
            if atom.modifier is None:
                continue
            if atom.modifier.duration.amount <= 0:
                self._error(
                    'INVALID_DURATION',
                    f"duration for '{atom.capability}' must be positive",
                    rule.ruleId,
                    clause,
                    rule.line,
                    rule.col,
                )
            fallback = getattr(atom.modifier, 'fallback', None)
            if fallback is not None:
                self._usedCaps.add(fallback)
                if fallback not in caps:
                    self._error(
                        'UNDECLARED_FALLBACK',
                        f"fallback capability '{fallback}' is not declared",
                        rule.ruleId,
                        clause,
                        rule.line,
                        rule.col,
                    )

    def _check_rules(self):
        seen = set()
        for rule in self._rs.rules:
            if rule.ruleId in seen:
                self._error(
                    'DUPLICATE_RULE_ID',
                    f"rule id '{rule.ruleId}' is used more than once",
                    rule.ruleId,
                    line=rule.line,
                    col=rule.col,
                )
            seen.add(rule.ruleId)

            if rule.scope is not None:
                self._usedScopes.add(rule.scope)
                if rule.scope not in self._vocab.scope_map:
                    self._error(
                        'UNDECLARED_SCOPE',
                        f"undeclared scope '{rule.scope}'",
                        rule.ruleId,
                        0,
                        rule.line,
                        rule.col,
                    )

            for idx, (cond, obligation) in enumerate(rule.clauses):
                self._check_condition(cond, rule.ruleId, idx, rule.line, rule.col)
                self._check_obligation(obligation, rule, idx)
                if idx > 0 and cond == BoolConst(False):
                    self._error(
                        'TRIVIAL_HEDGE',
                        'hedge condition is literally FALSE',
                        rule.ruleId,
                        idx,
                        rule.line,
                        rule.col,
                    )

            if not rule.labels:
                self._add(
                    Severity.INFO,
                    'UNLABELLED_RULE',
                    f"rule has no labels ({', '.join(SLEEC_LABELS)})",
                    rule.ruleId,
                    line=rule.line,
                    col=rule.col,
                )

    def _check_invariants(self):
        caps = self._vocab.capability_set
        for inv in self._rs.invariants:
            for cap in inv.capabilities:
                self._usedCaps.add(cap)
                if cap not in caps:
                    self._error(
                        'UNDECLARED_CAPABILITY',
                        f"undeclared capability '{cap}'",
                        LOC_INVARIANT.format(inv.name),
                        line=inv.line,
                        col=inv.col,
                    )

    def _check_unused(self):
        for m in self._vocab.monitored:
            if m.name not in self._usedVars:
                self._add(
                    Severity.WARNING,
                    'UNUSED_VARIABLE',
                    f"monitored variable '{m.name}' is never read",
                    LOC_VOCABULARY,
                    line=m.line,
                    col=m.col,
                )
        for d in self._vocab.derived:
            if d.name not in self._usedVars:
                self._add(
                    Severity.WARNING,
                    'UNUSED_DERIVED',
                    f"derived predicate '{d.name}' is never read",
                    LOC_VOCABULARY,
                    line=d.line,
                    col=d.col,
                )
        for cap in dict.fromkeys(self._vocab.capabilities):
            if cap not in self._usedCaps and cap != NOOP:
                self._add(
                    Severity.WARNING,
                    'UNUSED_CAPABILITY',
                    f"capability '{cap}' is never used",
                    LOC_VOCABULARY,
                )
        for s in self._vocab.scopes:
            if s.name not in self._usedScopes:
                self._add(
                    Severity.WARNING,
                    'UNUSED_SCOPE',
                    f"scope '{s.name}' is never used",
                    LOC_VOCABULARY,
                    line=s.line,
                    col=s.col,
                )

    def run(self):
        self._check_vocabulary()
        self._check_rules()
        self._check_invariants()
        self._check_unused()
        return self._diags


def check_well_formed(ruleset):
    """Check name resolution, typing, and vocabulary hygiene.

    Returns:
        'list' of 'Diagnostic' (errors, warnings, and infos), in
        declaration order
    """
    return _WellFormedChecker(ruleset).run()


# =========================================================
#          C O N D I T I O N   N O R M A L I Z I N G
# =========================================================
def _inline(expr, vocabulary):
    """Inline derived predicates and turn boolean comparisons into name references."""
    if isinstance(expr, Not):
        return Not(_inline(expr.operand, vocabulary))
    if hasattr(expr, 'operands'):
        return type(expr)(tuple(_inline(op, vocabulary) for op in expr.operands))
    if isinstance(expr, Compare) and vocabulary.kind_of(expr.var) is ValueKind.BOOLEAN:
        ref = _inline(NameRef(expr.var), vocabulary)
        return ref if (expr.op == '=') == expr.literal else Not(ref)
    if isinstance(expr, NameRef) and expr.name in vocabulary.derived_map:
        return _inline(vocabulary.derived_map[expr.name].expr, vocabulary)
    return expr


def _effective_conditions(ruleset, rule):
    vocab = ruleset.vocabulary
    conds = [cond for cond, _ in rule.clauses]
    if rule.scope is not None:
        conds[0] = make_and([vocab.scope_map[rule.scope].expr, conds[0]])
    return [_inline(c, vocab) for c in conds]


def _atom_key(leaf):
    """Atom key and polarity; a predicate and its negation share one key."""
    if isinstance(leaf, NameRef):
        return (leaf.name, None, None), True
    if leaf.op in _NEGATED_OPS:
        return (leaf.var, _NEGATED_OPS[leaf.op], leaf.literal), False
    return (leaf.var, leaf.op, leaf.literal), True


def _read_variables(ruleset, rules):
    names = []
    for rule in rules:
        for cond in _effective_conditions(ruleset, rule):
            for leaf in iter_leaves(cond):
                name = leaf.name if isinstance(leaf, NameRef) else leaf.var
                if name not in names:
                    names.append(name)
    return names


# =========================================================
#              D E A D   C L A U S E S
# =========================================================
def _assignments(keys, mode):
    if _is_sampled(mode):
        rng = random.Random(mode.seed)
        for _ in range(mode.n):
            yield {k: rng.random() < 0.5 for k in keys}
    else:
        for values in itertools.product((False, True), repeat=len(keys)):
            yield dict(zip(keys, values))


def detect_dead_clauses(ruleset, mode=EXHAUSTIVE):
    """Find clauses that can never be the active clause of their rule.

    Args:
        ruleset: well-formed 'Ruleset'
        mode: 'EXHAUSTIVE' or 'Sampled(n, seed)'

    Returns:
        'list' of 'DEAD_CLAUSE' warnings, ordered by rule and clause

    Raises:
        AnalysisError: 'ANALYSIS_TOO_LARGE' if a rule has more than
            'MAX_ATOMS' atoms in exhaustive mode
    """
    sampled = _is_sampled(mode)
    diagnostics = []

    for rule in ruleset.rules:
        conds = _effective_conditions(ruleset, rule)
        keys = list(dict.fromkeys(_atom_key(leaf)[0] for c in conds for leaf in iter_leaves(c)))
        if not sampled and len(keys) > MAX_ATOMS:
            raise AnalysisError(
                f"Rule '{rule.ruleId}' has {len(keys)} atoms; exhaustive analysis is limited to {MAX_ATOMS}",
                'ANALYSIS_TOO_LARGE',
            )

        reached = set()
        for assignment in _assignments(keys, mode):

            def leaf(node, assignment=assignment):
                key, positive = _atom_key(node)
                return assignment[key] == positive

            active = longest_true_prefix(evaluate(c, leaf) for c in conds)
            if active is not None:
                reached.add(active)
                if len(reached) == len(conds):
                    break

        for idx in range(len(conds)):
            if idx in reached:
                continue
            what = 'base clause' if idx == 0 else f'hedge clause {idx}'
            how = f'in {mode.n} samples' if sampled else 'under any assignment'
            diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    'DEAD_CLAUSE',
                    f'{what} is never the active clause {how}',
                    rule.ruleId,
                    idx,
                    rule.line,
                    rule.col,
                )
            )
    return diagnostics


# =========================================================
#         I N V A R I A N T S   &   C O N F L I C T S
# =========================================================
def _default_value(decl):
    if decl.kind is ValueKind.BOOLEAN:
        return False
    if decl.kind is ValueKind.ENUM:
        return decl.domain[0]
    if decl.has_range:
        return decl.lower
    return 0 if decl.kind is ValueKind.INTEGER else 0.0


def _representatives(decl, literals):
    """One value per region induced by comparisons against 'literals'.

    Literals (and the declared bounds, if any) cut the domain into points
    and the open gaps between them. Every point is kept, and each non-empty
    gap contributes one inner value. Literals outside a declared range do
    not cut anything.
    """
    if decl.kind is ValueKind.BOOLEAN:
        return [False, True]
    if decl.kind is ValueKind.ENUM:
        return list(decl.domain)

    isInt = decl.kind is ValueKind.INTEGER
    nums = [v for v in literals if isinstance(v, (int, float)) and not isinstance(v, bool)]
    if isInt:
        cuts = {f(v) for v in nums for f in (math.floor, math.ceil)}
    else:
        cuts = {float(v) for v in nums}
    if decl.has_range:
        cuts = {v for v in cuts if decl.lower <= v <= decl.upper}
    if not cuts:
        return [_default_value(decl)]

    if decl.has_range:
        bounds = (decl.lower, decl.upper) if isInt else (float(decl.lower), float(decl.upper))
        cuts.update(bounds)
    cuts = sorted(cuts)

    values = list(cuts)
    for lo, hi in zip(cuts, cuts[1:]):
        if not isInt:
            values.append((lo + hi) / 2.0)
        elif hi - lo >= 2:
            values.append(lo + 1)
    if not decl.has_range:
        step = 1 if isInt else 1.0
        values += [cuts[0] - step, cuts[-1] + step]
    return sorted(values)


def _slice_domains(ruleset, rules):
    """Representative values for every monitored variable the 'rules' read."""
    vocab = ruleset.vocabulary
    literals = {}
    for rule in rules:
        for cond in _effective_conditions(ruleset, rule):
            for leaf in iter_leaves(cond):
                if isinstance(leaf, Compare):
                    literals.setdefault(leaf.var, []).append(leaf.literal)

    names = [n for n in _read_variables(ruleset, rules) if n in vocab.monitored_map]
    return {n: _representatives(vocab.monitored_map[n], literals.get(n, ())) for n in names}


def _snapshots(ruleset, domains, mode):
    vocab = ruleset.vocabulary
    base = {m.name: _default_value(m) for m in vocab.monitored}
    names = list(domains)

    if _is_sampled(mode):
        rng = random.Random(mode.seed)
        for _ in range(mode.n):
            values = {n: rng.choice(domains[n]) for n in names}
            yield values, ConditionSnapshot({**base, **values})
        return

    bits = sum(math.log2(len(domains[n])) for n in names)
    if bits > MAX_ATOMS:
        raise AnalysisError(
            f'Invariant slice needs {bits:.1f} bits of enumeration; exhaustive analysis is limited to {MAX_ATOMS}',
            'ANALYSIS_TOO_LARGE',
        )
    for combo in itertools.product(*(domains[n] for n in names)):
        values = dict(zip(names, combo))
        yield values, ConditionSnapshot({**base, **values})


def _witness(values):
    return tuple(sorted(values.items()))


def _check_invariant(ruleset, invariant, mode):
    emitters = [r for cap in invariant.capabilities for r in ruleset.emitters_of(cap)]
    emitters = list(dict.fromkeys(emitters))
    sliced = ruleset.with_rules(emitters)
    domains = _slice_domains(ruleset, emitters)

    first = None
    count = total = 0
    for values, snap in _snapshots(ruleset, domains, mode):
        total += 1
        try:
            result = oracle_step(sliced, snap, check_invariants=False)
        except ConflictingConstraintsError:
            continue
        if invariant.name in violated_invariants((invariant,), result):
            count += 1
            if first is None:
                first = values

    if first is None:
        return None
    rules = ', '.join(r.ruleId for r in emitters) or 'none'
    return Diagnostic(
        Severity.ERROR,
        'INVARIANT_VIOLATION',
        f"invariant '{invariant.name}' violated in {count} of {total} snapshots (rules involved: {rules})",
        LOC_INVARIANT.format(invariant.name),
        None,
        invariant.line,
        invariant.col,
        _witness(first),
    )


def _conflict_candidates(ruleset):
    """Capabilities emitted somewhere with two different (normalized) modifiers."""
    modifiers = {}
    for rule in ruleset.rules:
        for obligation in rule.obligations:
            for atom in obligation.atoms:
                if atom.capability == NOOP:
                    continue
                mod = atom.modifier.normalized() if atom.modifier is not None else None
                modifiers.setdefault(atom.capability, set()).add(mod)
    return [cap for cap, mods in modifiers.items() if len(mods) > 1]


def _check_conflict(ruleset, capability, mode):
    emitters = list(ruleset.emitters_of(capability))
    sliced = ruleset.with_rules(emitters)
    domains = _slice_domains(ruleset, emitters)

    for values, snap in _snapshots(ruleset, domains, mode):
        try:
            oracle_step(sliced, snap, check_invariants=False)
        except ConflictingConstraintsError as e:
            if e.capability != capability:
                continue
            ruleId, clause = e.provenance[0]
            rule = ruleset.rule_map.get(ruleId)
            where = ', '.join(f'{r}[{c}]' for r, c in e.provenance)
            return Diagnostic(
                Severity.ERROR,
                'INCONSISTENT_UPDATE',
                f"capability '{capability}' enforced with different temporal constraints by {where}",
                ruleId,
                clause,
                rule.line if rule else None,
                rule.col if rule else None,
                _witness(values),
            )
    return None


def check_obligation_invariants(ruleset, mode=EXHAUSTIVE):
    """Check obligation invariants and conflicting constraints.

    One diagnostic is reported per violated invariant (carrying the
    first violating snapshot as witness) and per capability that can
    be enforced with two different temporal constraints in one step.

    Raises:
        AnalysisError: 'ANALYSIS_TOO_LARGE' when a slice exceeds the
            exhaustive bound
    """
    diagnostics = []
    for invariant in ruleset.invariants:
        diag = _check_invariant(ruleset, invariant, mode)
        if diag is not None:
            diagnostics.append(diag)
    for capability in _conflict_candidates(ruleset):
        diag = _check_conflict(ruleset, capability, mode)
        if diag is not None:
            diagnostics.append(diag)
    return diagnostics


# =========================================================
#              R A N D O M   S I M U L A T I O N
# =========================================================
@dataclass(frozen=True)
class SimulationStep:
    index: int
    snapshot: ConditionSnapshot
    obligations: Optional[ObligationSet]
    violations: Tuple[str, ...] = ()
    error: Optional[str] = None

    def to_json(self):
        return {
            'step': self.index,
            'snapshot': self.snapshot.to_json(),
            'obligations': self.obligations.to_json() if self.obligations is not None else None,
            'violations': list(self.violations),
            'error': self.error,
        }


@dataclass(frozen=True)
class SimulationTrace:
    seed: int
    steps: Tuple[SimulationStep, ...]

    @property
    def violations(self):
        return [s for s in self.steps if s.violations or s.error]

    def to_json(self):
        return {'seed': self.seed, 'steps': [s.to_json() for s in self.steps]}


def require_ranges(vocabulary):
    numeric = (ValueKind.INTEGER, ValueKind.REAL)
    missing = [m.name for m in vocabulary.monitored if m.kind in numeric and not m.has_range]
    if missing:
        raise AnalysisError(
            f"Numeric variables need a declared range: {', '.join(missing)}", 'MISSING_RANGE'
        )


def random_snapshot(vocabulary, rng):
    """Draw one snapshot uniformly from the declared codomains.

    Variables are drawn in declaration order so that a given generator
    state always yields the same snapshot.
    """
    values = {}
    for m in vocabulary.monitored:
        if m.kind is ValueKind.BOOLEAN:
            values[m.name] = rng.random() < 0.5
        elif m.kind is ValueKind.ENUM:
            values[m.name] = rng.choice(m.domain)
        elif m.kind is ValueKind.INTEGER:
            values[m.name] = rng.randint(m.lower, m.upper)
        else:
            values[m.name] = rng.uniform(m.lower, m.upper)
    return ConditionSnapshot(values)


def random_simulate(ruleset, steps, seed=0):
    """Step the reference interpreter over random snapshots.

    Args:
        ruleset: well-formed 'Ruleset'
        steps: number of steps (>= 1)
        seed: generator seed; equal seeds give identical traces

    Returns:
        'SimulationTrace'

    Raises:
        AnalysisError: 'MISSING_RANGE' if a numeric variable has no range
    """
    if steps < 1:
        raise AnalysisError('Simulation needs at least one step', 'INVALID_ARGUMENT')
    require_ranges(ruleset.vocabulary)

    rng = random.Random(seed)
    trace = []
    for index in range(steps):
        snap = random_snapshot(ruleset.vocabulary, rng)
        try:
            result = oracle_step(ruleset, snap, check_invariants=False)
        except ConflictingConstraintsError as e:
            trace.append(SimulationStep(index, snap, None, (), e.code))
            continue
        violations = tuple(violated_invariants(ruleset.invariants, result))
        trace.append(SimulationStep(index, snap, result, violations))
    return SimulationTrace(seed, tuple(trace))


# =========================================================
#                     A N A L Y Z E
# =========================================================
def analyze(ruleset, mode=EXHAUSTIVE):
    """Run all static analyses.

    Dead-clause and invariant checks only run when the ruleset has no
    well-formedness errors.
    """
    diagnostics = check_well_formed(ruleset)
    if has_errors(diagnostics):
        return diagnostics
    diagnostics += detect_dead_clauses(ruleset, mode)
    return diagnostics + check_obligation_invariants(ruleset, mode)
