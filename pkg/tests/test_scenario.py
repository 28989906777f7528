"""Test cases for scenario fixtures and generators."""

import json

import pytest

from src.f451_sleec.engine import compile, step
from src.f451_sleec.obligations import ConditionSnapshot
from src.f451_sleec.parser import parse_ruleset
from src.f451_sleec.scenario import (
    SCENARIO_FILE,
    SYNTHETIC_CLAUSES,
    SYNTHETIC_RULES,
    ScenarioError,
    SyntheticSpec,
    baseline_snapshot,
    generate_synthetic_ruleset,
    generate_test_cases,
    load_scenario,
    load_test_cases,
    save_test_cases,
    synthetic_grid,
    synthetic_loop_settings,
)


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
@pytest.fixture(scope='module')
def scenario():
    return load_scenario()


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.smoke
def test_load_scenario(scenario):
    ruleIds = [r.ruleId for r in scenario.rules]
    assert ruleIds == ['S1', 'S1a', 'S1b', 'S2', 'S2a', 'S3', 'S4', 'S5', 'S6']
    assert scenario.clause_count == 23
    scopes = [s.name for s in scenario.vocabulary.scopes]
    assert scopes == ['StartTrainingTime', 'TrainingTime', 'Anytime', 'Mealtime']
    assert SCENARIO_FILE.name == 'assistive.sleec'


def test_baseline_snapshot(scenario):
    snap = baseline_snapshot(scenario.vocabulary)
    assert snap['timeOfDay'] == 'OTHER'
    assert snap['roomTemperature'] == 15
    assert snap['userReady'] is False
    assert step(compile(scenario), snap).is_respectful


def test_generate_test_cases_is_seeded(scenario):
    first = generate_test_cases(scenario, 25, seed=7)
    again = generate_test_cases(scenario, 25, seed=7)
    other = generate_test_cases(scenario, 25, seed=8)

    assert first == again
    assert first != other
    assert [c.caseId for c in first][:2] == ['case-0000', 'case-0001']


def test_generated_values_stay_in_range(scenario):
    for case in generate_test_cases(scenario, 100, seed=1):
        assert 15 <= case.snapshot['roomTemperature'] <= 35
        assert case.snapshot['timeOfDay'] in scenario.vocabulary.monitored_map['timeOfDay'].domain


def test_include_baseline(scenario):
    cases = generate_test_cases(scenario, 3, seed=0, include_baseline=True)
    assert len(cases) == 3
    assert cases[0].snapshot == baseline_snapshot(scenario.vocabulary)
    assert cases[0].expected.is_respectful


@pytest.mark.exception
def test_generate_needs_cases(scenario):
    with pytest.raises(ScenarioError) as e:
        generate_test_cases(scenario, 0)
    assert e.value.code == 'INVALID_ARGUMENT'


def test_save_and_load_cases(scenario, tmp_path):
    cases = generate_test_cases(scenario, 10, seed=3)
    path = tmp_path / 'cases.json'
    save_test_cases(path, cases, seed=3)

    data = json.loads(path.read_text())
    assert data['seed'] == 3
    assert load_test_cases(path, scenario) == cases


@pytest.mark.exception
def test_load_cases_detects_stale_expectations(scenario, tmp_path):
    cases = generate_test_cases(scenario, 5, seed=3, include_baseline=True)
    path = tmp_path / 'cases.json'
    save_test_cases(path, cases)

    data = json.loads(path.read_text())
    data['cases'][0]['expected'] = {
        'directives': [{'capability': 'alertNurse', 'modifier': None}],
        'status': 'critical',
    }
    path.write_text(json.dumps(data))

    assert len(load_test_cases(path)) == 5
    with pytest.raises(ScenarioError) as e:
        load_test_cases(path, scenario)
    assert e.value.code == 'STALE_CASES'


@pytest.mark.exception
def test_load_cases_bad_file(tmp_path):
    path = tmp_path / 'cases.json'
    path.write_text('{"nope": 1}')
    with pytest.raises(ScenarioError) as e:
        load_test_cases(path)
    assert e.value.code == 'INVALID_CASES'


# ---------------------------------------------------------
#  Synthetic rulesets
# ---------------------------------------------------------
def test_synthetic_shape():
    rs = generate_synthetic_ruleset(SyntheticSpec(3, 4))
    assert len(rs.rules) == 3
    assert rs.clause_count == 12
    assert len(rs.vocabulary.monitored) == 12
    assert sorted(r.ruleId for r in rs.rules) == ['R1', 'R2', 'R3']


def test_synthetic_active_clause_identifies_obligation():
    rs = generate_synthetic_ruleset(SyntheticSpec(2, 3))
    machine = compile(rs)
    values = {m.name: False for m in rs.vocabulary.monitored}
    values.update(a_1_0=True, a_1_1=True, a_2_0=True, a_2_2=True)

    result = step(machine, ConditionSnapshot(values))
    # R2 has an unbroken prefix of length one only
    assert result.capabilities == ('o_1_1', 'o_2_0')


def test_synthetic_seed_permutes_rule_order():
    a = generate_synthetic_ruleset(SyntheticSpec(10, 2, seed=1))
    b = generate_synthetic_ruleset(SyntheticSpec(10, 2, seed=2))
    assert sorted(r.ruleId for r in a.rules) == sorted(r.ruleId for r in b.rules)
    assert a.rule_map['R4'] == b.rule_map['R4']


def test_synthetic_source_parses_back():
    spec, rs, source = next(synthetic_grid(rules=(2,), clauses=(3,)))
    assert spec == SyntheticSpec(2, 3)
    assert parse_ruleset(source) == rs


def test_synthetic_grid_axes():
    assert SYNTHETIC_RULES == (10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60)
    assert SYNTHETIC_CLAUSES == (2, 4, 6, 8, 10, 12, 14, 16, 18, 20)
    points = [spec for spec, _, _ in synthetic_grid(rules=(1, 2), clauses=(2, 4))]
    assert [(p.r, p.c) for p in points] == [(1, 2), (1, 4), (2, 2), (2, 4)]


@pytest.mark.exception
@pytest.mark.parametrize('r, c', [(0, 2), (2, 0)])
def test_synthetic_spec_rejects_empty(r, c):
    with pytest.raises(ScenarioError):
        SyntheticSpec(r, c)


def test_synthetic_loop_settings():
    rs = generate_synthetic_ruleset(SyntheticSpec(1, 2))
    settings = synthetic_loop_settings(rs, STRICT=False)
    assert settings['CAPABILITIES'] == {'o_1_0': ['do_o_1_0'], 'o_1_1': ['do_o_1_1']}
    assert settings['CLOCK'] == 'virtual'
    assert settings['STRICT'] is False
