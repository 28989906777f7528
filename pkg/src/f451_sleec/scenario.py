"""Scenario fixtures and generators.

 - 'load_scenario()' returns the AssistiveCareRobot ruleset shipped in
   'fixtures/assistive.sleec' (9 rules, 4 scopes, invariant 'inv_1').
 - 'generate_test_cases()' draws seeded random snapshots and pairs each
   with the obligations the reference interpreter computes for it.
 - 'generate_synthetic_ruleset()' builds the r x c scalability models:
   rule 'R<k>' has one base clause and c-1 hedges, clause j guarded by
   its own boolean atom 'a_<k>_<j>' and obliging its own capability
   'o_<k>_<j>', so the expected obligation identifies the active clause.
"""

from __future__ import annotations

import json
import random

from dataclasses import dataclass
from pathlib import Path

from .analysis import random_snapshot, require_ranges
from .common import FIXTURES_DIR, SleecError
from .formatter import format_ruleset
from .obligations import ConditionSnapshot, EngineError, ObligationSet
from .oracle import oracle_step
from .parser import parse_ruleset
from .ruleset import (
    HedgeClause,
    MonitoredDecl,
    NameRef,
    Obligation,
    ObligationAtom,
    Rule,
    Ruleset,
    ValueKind,
    VocabularyDecl,
)

__all__ = [
    'TestCase',
    'SyntheticSpec',
    'ScenarioError',
    'load_scenario',
    'scenario_source',
    'baseline_snapshot',
    'generate_test_cases',
    'verify_test_cases',
    'save_test_cases',
    'load_test_cases',
    'generate_synthetic_ruleset',
    'synthetic_grid',
    'synthetic_loop_settings',
    'SCENARIO_FILE',
    'SCENARIO_CONFIG',
    'SYNTHETIC_RULES',
    'SYNTHETIC_CLAUSES',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
SCENARIO_FILE = FIXTURES_DIR.joinpath('assistive.sleec')
SCENARIO_CONFIG = FIXTURES_DIR.joinpath('assistive.toml')

SYNTHETIC_RULES = tuple(range(10, 61, 5))      # r
SYNTHETIC_CLAUSES = tuple(range(2, 21, 2))     # c (base + hedges)

MAX_DRAWS_PER_CASE = 20


class ScenarioError(SleecError):
    code = 'SCENARIO_ERROR'

    def __init__(self, errMsg='Invalid scenario request', code=None):
        super().__init__(errMsg, code)


# =========================================================
#                      F I X T U R E S
# =========================================================
def scenario_source(path=None):
    return Path(path or SCENARIO_FILE).read_text(encoding='utf-8')


def load_scenario(path=None):
    """Load the AssistiveCareRobot ruleset (or another '.sleec' file)."""
    return parse_ruleset(scenario_source(path))


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@dataclass(frozen=True)
class TestCase:
    """Snapshot plus ground-truth obligations from the reference interpreter."""

    __test__ = False  # not a pytest class

    caseId: str
    snapshot: ConditionSnapshot
    expected: ObligationSet

    def to_json(self):
        return {
            'id': self.caseId,
            'snapshot': self.snapshot.to_json(),
            'expected': self.expected.to_json(),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            data['id'],
            ConditionSnapshot.from_json(data['snapshot']),
            ObligationSet.from_json(data['expected']),
        )


def baseline_snapshot(vocabulary):
    """All booleans false, first enumerant, numeric lower bounds."""
    values = {}
    for m in vocabulary.monitored:
        if m.kind is ValueKind.BOOLEAN:
            values[m.name] = False
        elif m.kind is ValueKind.ENUM:
            values[m.name] = m.domain[0]
        else:
            values[m.name] = m.lower
    return ConditionSnapshot(values)


def _case_id(index):
    return f'case-{index:04d}'


def generate_test_cases(ruleset, n, seed=0, include_baseline=False):
    """Draw 'n' seeded random snapshots with oracle-computed expectations.

    Snapshots for which the interpreter raises (invariant violation or
    conflicting constraints) are redrawn, so every case has a valid
    expected obligation set. Equal '(ruleset, n, seed)' give equal lists.

    Args:
        ruleset: well-formed 'Ruleset' with ranges on numeric variables
        n: number of cases (>= 1)
        seed: generator seed
        include_baseline: make the first case 'baseline_snapshot()'

    Raises:
        ScenarioError: 'n' < 1 or too many snapshots rejected
        AnalysisError: a numeric variable has no declared range
    """
    if n < 1:
        raise ScenarioError('Need at least one test case', 'INVALID_ARGUMENT')
    require_ranges(ruleset.vocabulary)

    rng = random.Random(seed)
    cases = []
    if include_baseline:
        snap = baseline_snapshot(ruleset.vocabulary)
        cases.append(TestCase(_case_id(0), snap, oracle_step(ruleset, snap)))

    draws = 0
    while len(cases) < n:
        draws += 1
        if draws > n * MAX_DRAWS_PER_CASE:
            raise ScenarioError(
                'Too many snapshots rejected by the ruleset invariants', 'GENERATION_FAILED'
            )
        snap = random_snapshot(ruleset.vocabulary, rng)
        try:
            expected = oracle_step(ruleset, snap)
        except EngineError:
            continue
        cases.append(TestCase(_case_id(len(cases)), snap, expected))
    return cases


def verify_test_cases(ruleset, cases):
    """Ids of cases whose expectation differs from a fresh oracle run."""
    return [c.caseId for c in cases if oracle_step(ruleset, c.snapshot) != c.expected]


def save_test_cases(path, cases, seed=None):
    data = {'seed': seed, 'cases': [c.to_json() for c in cases]}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')


def load_test_cases(path, ruleset=None):
    """Read cases written by 'save_test_cases()'.

    With a ruleset, every expectation is recomputed and a mismatch
    raises 'ScenarioError'.
    """
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
        cases = [TestCase.from_json(c) for c in data['cases']]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ScenarioError(f"Cannot read test cases from '{path}': {e}", 'INVALID_CASES') from e
    if ruleset is not None:
        stale = verify_test_cases(ruleset, cases)
        if stale:
            raise ScenarioError(
                f"Expected obligations out of date for: {', '.join(stale[:5])}", 'STALE_CASES'
            )
    return cases


# =========================================================
#                    S Y N T H E T I C
# =========================================================
@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a synthetic ruleset: 'r' rules of 'c' clauses each."""

    r: int
    c: int
    seed: int = 0

    def __post_init__(self):
        if self.r < 1 or self.c < 1:
            raise ScenarioError(
                f'Synthetic spec needs r >= 1 and c >= 1, got r={self.r}, c={self.c}',
                'INVALID_ARGUMENT',
            )

    @property
    def clauses(self):
        return self.r * self.c


def _atom(k, j):
    return f'a_{k}_{j}'


def _capability(k, j):
    return f'o_{k}_{j}'


def generate_synthetic_ruleset(spec):
    """Build an r x c synthetic ruleset.

    Atoms and capabilities are disjoint per clause and there are no
    scopes. The seed only permutes rule order, so different seeds give
    equivalent rulesets laid out differently.
    """
    monitored = []
    capabilities = []
    rules = []
    for k in range(1, spec.r + 1):
        for j in range(spec.c):
            monitored.append(MonitoredDecl(_atom(k, j), ValueKind.BOOLEAN))
            capabilities.append(_capability(k, j))
        hedges = tuple(
            HedgeClause(NameRef(_atom(k, j)), Obligation((ObligationAtom(_capability(k, j)),)))
            for j in range(1, spec.c)
        )
        rules.append(
            Rule(
                f'R{k}',
                None,
                NameRef(_atom(k, 0)),
                Obligation((ObligationAtom(_capability(k, 0)),)),
                hedges,
            )
        )

    random.Random(spec.seed).shuffle(rules)
    vocabulary = VocabularyDecl(tuple(monitored), tuple(capabilities), (), ())
    return Ruleset(vocabulary, tuple(rules), ())


def synthetic_grid(rules=SYNTHETIC_RULES, clauses=SYNTHETIC_CLAUSES, seed=0):
    """Yield '(SyntheticSpec, Ruleset, source)' for every grid point."""
    for r in rules:
        for c in clauses:
            spec = SyntheticSpec(r, c, seed)
            ruleset = generate_synthetic_ruleset(spec)
            yield spec, ruleset, format_ruleset(ruleset)


def synthetic_loop_settings(ruleset, **kwargs):
    """Loop settings mapping every capability to one placeholder task."""
    capabilities = {cap: [f'do_{cap}'] for cap in ruleset.vocabulary.capabilities}
    return {
        'CLOCK': 'virtual',
        'BUS_MODE': 'sync',
        'STRICT': True,
        'CAPABILITIES': capabilities,
        **kwargs,
    }
