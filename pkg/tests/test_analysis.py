"""Test cases for SLEEC ruleset analysis."""

import itertools

import pytest

from src.f451_sleec.analysis import (
    EXHAUSTIVE,
    AnalysisError,
    Sampled,
    analyze,
    check_obligation_invariants,
    check_well_formed,
    detect_dead_clauses,
    random_simulate,
)
from src.f451_sleec.diagnostics import Severity, has_errors
from src.f451_sleec.obligations import ConditionSnapshot
from src.f451_sleec.oracle import longest_true_prefix, oracle_clause_truths
from src.f451_sleec.parser import parse_ruleset
from src.f451_sleec.ruleset import ValueKind
from src.f451_sleec.scenario import load_scenario


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
HDR = """
MONITORED a : boolean
MONITORED b : boolean
MONITORED n : integer [0 .. 10]
MONITORED mode : enum { ON, OFF }
CAPABILITY x, y
"""


def _rs(body, header=HDR):
    return parse_ruleset(header + body, strict=False)


def _codes(diagnostics, severity=None):
    return [d.code for d in diagnostics if severity is None or d.severity is severity]


@pytest.fixture
def scenario():
    return load_scenario()


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.smoke
def test_scenario_is_well_formed(scenario):
    diagnostics = check_well_formed(scenario)
    assert not has_errors(diagnostics)


@pytest.mark.parametrize(
    'body, code',
    [
        ('RULE R1 IF a THEN x\nRULE R1 IF b THEN y', 'DUPLICATE_RULE_ID'),
        ('RULE R1 IF a THEN w', 'UNDECLARED_CAPABILITY'),
        ('RULE R1 IF missing THEN x', 'UNDECLARED_VARIABLE'),
        ('RULE R1 IF n THEN x', 'TYPE_MISMATCH'),
        ('RULE R1 IF mode < ON THEN x', 'TYPE_MISMATCH'),
        ('RULE R1 IF n = TRUE THEN x', 'TYPE_MISMATCH'),
        ('RULE R1 IF mode = MAYBE THEN x', 'UNKNOWN_ENUMERANT'),
        ('SCOPE Nope\nRULE R1 IF a THEN x', 'UNDECLARED_SCOPE'),
        ('RULE R1 IF a THEN x WITHIN 1 SEC OTHERWISE w', 'UNDECLARED_FALLBACK'),
        ('RULE R1 IF a THEN x AFTER 0 SEC', 'INVALID_DURATION'),
        ('MONITORED r : real [5 .. 1]\nRULE R1 IF a THEN x', 'INVALID_RANGE'),
        ('DERIVED d := a\nDERIVED e := d\nRULE R1 IF e THEN x', 'DERIVED_REFERENCE'),
        ('MONITORED a : boolean\nRULE R1 IF a THEN x', 'DUPLICATE_DECLARATION'),
        ('RULE R1 IF a THEN x UNLESS FALSE IN WHICH CASE y', 'TRIVIAL_HEDGE'),
        ('INVARIANT i := enforced(w)\nRULE R1 IF a THEN x', 'UNDECLARED_CAPABILITY'),
    ],
)
def test_well_formed_errors(body, code):
    diagnostics = check_well_formed(_rs(body))
    assert code in _codes(diagnostics, Severity.ERROR)


def test_well_formed_warnings_and_infos():
    diagnostics = check_well_formed(_rs('MONITORED k : integer\nRULE R1 IF a THEN x'))
    assert not has_errors(diagnostics)

    warnings = _codes(diagnostics, Severity.WARNING)
    assert 'NO_RANGE' in warnings
    assert 'UNUSED_CAPABILITY' in warnings
    assert warnings.count('UNUSED_VARIABLE') == 4      # b, n, mode, k
    assert _codes(diagnostics, Severity.INFO) == ['UNLABELLED_RULE']


def test_diagnostic_render_and_dict():
    diag = next(d for d in check_well_formed(_rs('RULE R1 IF a THEN w')) if d.is_error)
    assert diag.render('rules.sleec').startswith('rules.sleec:')
    assert '[UNDECLARED_CAPABILITY]' in diag.render()
    assert diag.as_dict()['rule'] == 'R1'
    assert diag.location == 'R1[0]'


# ---------------------------------------------------------
#  Dead clauses
# ---------------------------------------------------------
def test_no_dead_clauses_in_scenario(scenario):
    assert detect_dead_clauses(scenario) == []


def test_dead_hedge_contradicting_base():
    diagnostics = detect_dead_clauses(_rs('RULE R1 IF a THEN x UNLESS NOT a IN WHICH CASE y'))
    assert [(d.code, d.ruleId, d.clause) for d in diagnostics] == [('DEAD_CLAUSE', 'R1', 1)]
    assert diagnostics[0].severity is Severity.WARNING


def test_dead_hedge_negated_predicate_shares_atom():
    diagnostics = detect_dead_clauses(_rs('RULE R1 IF n < 5 THEN x UNLESS n >= 5 IN WHICH CASE y'))
    assert [d.clause for d in diagnostics] == [1]


def test_dead_base_through_scope_and_derived():
    body = (
        'DERIVED notA := NOT a\nSCOPE OnlyA := a\n'
        'SCOPE OnlyA\nRULE R1 IF notA THEN x UNLESS b IN WHICH CASE y'
    )
    diagnostics = detect_dead_clauses(_rs(body))
    assert [d.clause for d in diagnostics] == [0, 1]


def test_reachable_clauses_are_not_reported():
    assert detect_dead_clauses(_rs('RULE R1 IF a THEN x UNLESS b IN WHICH CASE y')) == []


def test_dead_clauses_sampled():
    ruleset = _rs('RULE R1 IF a THEN x UNLESS NOT a IN WHICH CASE y')
    diagnostics = detect_dead_clauses(ruleset, Sampled(50, 1))
    assert [d.clause for d in diagnostics] == [1]
    assert 'in 50 samples' in diagnostics[0].message


def _reachable_clauses(ruleset):
    vocab = ruleset.vocabulary
    domains = []
    for m in vocab.monitored:
        if m.kind is ValueKind.BOOLEAN:
            domains.append((False, True))
        elif m.kind is ValueKind.ENUM:
            domains.append(m.domain)
        else:
            domains.append(range(m.lower, m.upper + 1))

    names = [m.name for m in vocab.monitored]
    reached = set()
    for combo in itertools.product(*domains):
        bindings = ConditionSnapshot(dict(zip(names, combo))).resolve(vocab)
        for rule in ruleset.rules:
            active = longest_true_prefix(oracle_clause_truths(ruleset, rule, bindings))
            if active is not None:
                reached.add((rule.ruleId, active))
    return reached


@pytest.mark.parametrize(
    'body, exact',
    [
        ('RULE R1 IF a THEN x UNLESS NOT a IN WHICH CASE y', True),
        ('RULE R1 IF a THEN x UNLESS b IN WHICH CASE y UNLESS a IN WHICH CASE x', True),
        (
            'DERIVED notA := NOT a\nSCOPE OnlyA := a\n'
            'SCOPE OnlyA\nRULE R1 IF notA THEN x UNLESS b IN WHICH CASE y\n'
            'RULE R2 IF b THEN y',
            True,
        ),
        ('RULE R1 IF n < 5 THEN x UNLESS n >= 5 IN WHICH CASE y UNLESS b IN WHICH CASE y', False),
        ('RULE R1 IF n < 3 THEN x UNLESS n > 7 IN WHICH CASE y', False),
        ('RULE R1 IF mode = ON THEN x UNLESS mode = OFF IN WHICH CASE y', False),
    ],
)
def test_reported_dead_clauses_are_never_active(body, exact):
    ruleset = _rs(body)
    reached = _reachable_clauses(ruleset)
    reported = {(d.ruleId, d.clause) for d in detect_dead_clauses(ruleset)}
    assert not reported & reached

    # boolean atoms only, so the propositional search is exact
    if exact:
        every = {(r.ruleId, i) for r in ruleset.rules for i in range(len(r.clauses))}
        assert reported == every - reached


@pytest.mark.exception
def test_dead_clauses_too_large():
    names = [f'b{i}' for i in range(25)]
    header = '\n'.join(f'MONITORED {n} : boolean' for n in names) + '\nCAPABILITY x\n'
    rs = _rs(f"RULE R1 IF {' AND '.join(names)} THEN x", header)
    with pytest.raises(AnalysisError) as e:
        detect_dead_clauses(rs, EXHAUSTIVE)
    assert e.value.code == 'ANALYSIS_TOO_LARGE'

    assert detect_dead_clauses(rs, Sampled(10)) is not None


@pytest.mark.exception
def test_unknown_mode():
    with pytest.raises(AnalysisError):
        detect_dead_clauses(_rs('RULE R1 IF a THEN x'), 'fast')
    with pytest.raises(AnalysisError):
        Sampled(0)


# ---------------------------------------------------------
#  Invariants and conflicts
# ---------------------------------------------------------
def test_scenario_invariants_hold(scenario):
    assert check_obligation_invariants(scenario) == []


def test_invariant_violation_with_witness():
    body = (
        'INVARIANT never_both := NOT (enforced(x) AND enforced(y))\n'
        'RULE R1 IF a THEN x\nRULE R2 IF b THEN y'
    )
    diagnostics = check_obligation_invariants(_rs(body))

    assert len(diagnostics) == 1
    diag = diagnostics[0]
    assert diag.code == 'INVARIANT_VIOLATION'
    assert diag.is_error
    assert diag.ruleId == '<invariant:never_both>'
    assert diag.witness == (('a', True), ('b', True))
    assert 'violated in 1 of 4 snapshots' in diag.message


def test_invariant_violation_inside_real_range():
    header = 'MONITORED t : real [0 .. 1]\nCAPABILITY openDoor, closeDoor\n'
    body = (
        'INVARIANT not_both := NOT (enforced(openDoor) AND enforced(closeDoor))\n'
        'RULE R1 IF t < 0.5 THEN openDoor\nRULE R2 IF TRUE THEN closeDoor'
    )
    rs = _rs(body, header)

    diagnostics = check_obligation_invariants(rs)
    assert [d.code for d in diagnostics] == ['INVARIANT_VIOLATION']
    assert diagnostics[0].witness == (('t', 0.0),)
    assert 'violated in 2 of 5 snapshots' in diagnostics[0].message
    assert random_simulate(rs, 200, seed=0).violations


def test_invariant_holds_when_literal_is_outside_range():
    header = 'MONITORED t : real [0 .. 1]\nCAPABILITY openDoor, closeDoor\n'
    body = (
        'INVARIANT not_both := NOT (enforced(openDoor) AND enforced(closeDoor))\n'
        'RULE R1 IF t > 2.0 THEN openDoor\nRULE R2 IF TRUE THEN closeDoor'
    )
    rs = _rs(body, header)

    assert check_obligation_invariants(rs) == []
    assert random_simulate(rs, 200, seed=0).violations == []


def test_inconsistent_update():
    body = 'RULE R1 IF a THEN x AFTER 1 MINUTE\nRULE R2 IF b THEN x'
    diagnostics = check_obligation_invariants(_rs(body))

    found = [(d.code, d.ruleId, d.clause) for d in diagnostics]
    assert found == [('INCONSISTENT_UPDATE', 'R1', 0)]
    assert dict(diagnostics[0].witness) == {'a': True, 'b': True}


def test_equal_normalized_durations_do_not_conflict():
    body = 'RULE R1 IF a THEN x AFTER 1 MINUTE\nRULE R2 IF b THEN x AFTER 60 SEC'
    assert check_obligation_invariants(_rs(body)) == []


def test_analyze_stops_after_well_formed_errors():
    diagnostics = analyze(_rs('RULE R1 IF a THEN x UNLESS NOT a IN WHICH CASE w'))
    assert 'UNDECLARED_CAPABILITY' in _codes(diagnostics)
    assert 'DEAD_CLAUSE' not in _codes(diagnostics)


def test_analyze_scenario(scenario):
    assert not has_errors(analyze(scenario))


# ---------------------------------------------------------
#  Random simulation
# ---------------------------------------------------------
def test_random_simulate_is_reproducible(scenario):
    first = random_simulate(scenario, 25, seed=7)
    second = random_simulate(scenario, 25, seed=7)
    assert first == second
    assert len(first.steps) == 25
    assert first.violations == []


def test_random_simulate_finds_violations():
    body = (
        'INVARIANT never_both := NOT (enforced(x) AND enforced(y))\n'
        'RULE R1 IF a THEN x\nRULE R2 IF b THEN y'
    )
    trace = random_simulate(_rs(body), 50, seed=3)
    assert trace.violations
    assert all(s.violations == ('never_both',) for s in trace.violations)
    assert trace.to_json()['seed'] == 3


@pytest.mark.exception
def test_random_simulate_needs_ranges():
    with pytest.raises(AnalysisError) as e:
        random_simulate(_rs('MONITORED k : integer\nRULE R1 IF a THEN x'), 5)
    assert e.value.code == 'MISSING_RANGE'

    with pytest.raises(AnalysisError) as e:
        random_simulate(_rs('RULE R1 IF a THEN x'), 0)
    assert e.value.code == 'INVALID_ARGUMENT'
