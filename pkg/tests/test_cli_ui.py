"""Test cases for terminal rendering."""

from io import StringIO

import pytest

from rich.console import Console

from src.f451_sleec.analysis import SimulationStep, SimulationTrace
from src.f451_sleec.bench import GridPoint, SuiteResult, run_suite
from src.f451_sleec.cli_ui import ConsoleUI, Logo, latency_sparkline, prep_sparkline_data
from src.f451_sleec.diagnostics import Diagnostic, Severity
from src.f451_sleec.logger import LOG_CRITICAL, Logger
from src.f451_sleec.obligations import ConditionSnapshot, ObligationDirective, ObligationSet
from src.f451_sleec.ruleset import TimeDuration, TimeUnit, Within
from src.f451_sleec.scenario import SyntheticSpec, generate_test_cases, load_scenario
from src.f451_sleec.stats import FitReport, compute_stats


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
def _ui(width=120):
    return ConsoleUI(Console(file=StringIO(), width=width, color_system=None))


def _out(ui):
    return ui.console.file.getvalue()


# =========================================================
#                    T E S T   C A S E S
# =========================================================
def test_logo():
    logo = Logo(120, 'f451 Labs SLEEC', 'SLEEC', '0.1.0')
    assert logo.plain == 'f451 Labs SLEEC - v0.1.0'
    assert str(logo) == logo.plain
    assert logo.rows >= 1


def test_show_logo_narrow_is_plain():
    ui = _ui(width=60)
    assert not ui.is_wide
    ui.show_logo('f451 Labs SLEEC', 'SLEEC', '0.1.0')
    assert _out(ui).strip() == 'f451 Labs SLEEC - v0.1.0'


def test_prep_sparkline_data():
    assert prep_sparkline_data([3, 1, 2]) == [3, 1, 2]
    buckets = prep_sparkline_data(range(100), width=10)
    assert len(buckets) == 10
    assert buckets[0] == pytest.approx(4.5)
    assert buckets[-1] == pytest.approx(94.5)


def test_latency_sparkline():
    samples = [1.0, 2.0, 3.0, 2.0, 9.0]
    assert len(latency_sparkline(samples).plain) == 5
    assert len(latency_sparkline(samples, compute_stats(samples)).plain) == 5
    assert latency_sparkline([]).plain == '--'


@pytest.mark.smoke
def test_show_diagnostics():
    ui = _ui()
    ui.show_diagnostics([], 'rules.sleec')
    assert 'rules.sleec: no findings' in _out(ui)

    ui = _ui()
    diagnostics = [
        Diagnostic(Severity.WARNING, 'UNUSED_CAPABILITY', 'y is never used', '<decl:y>', line=2),
        Diagnostic(Severity.ERROR, 'UNDECLARED_CAPABILITY', 'w is not declared', 'R1', 0, 3),
        Diagnostic(Severity.WARNING, 'DEAD_CLAUSE', 'Never active', 'R1', 1, witness=(('a', 1),)),
    ]
    ui.show_diagnostics(diagnostics, 'rules.sleec')
    out = _out(ui)
    assert out.index('UNDECLARED_CAPABILITY') < out.index('UNUSED_CAPABILITY')
    assert 'R1[0]' in out
    assert 'a=1' in out


def test_show_obligations():
    ui = _ui()
    ui.show_obligations(ObligationSet())
    assert 'Obligations: respectful' in _out(ui)

    ui = _ui()
    within = Within(TimeDuration(5, TimeUnit.MINUTE), 'alertNurse')
    directives = (
        ObligationDirective('remindToEat', None, (('S5', 0),)),
        ObligationDirective('wakeUpUser', within, (('S5', 1),)),
    )
    ui.show_obligations(ObligationSet(directives))
    out = _out(ui)
    assert 'Obligations: critical' in out
    assert 'within 5 minute' in out
    assert 'alertNurse' in out
    assert 'S5[1]' in out


def test_show_trace():
    ui = _ui()
    steps = (
        SimulationStep(0, ConditionSnapshot({'a': False}), ObligationSet()),
        SimulationStep(1, ConditionSnapshot({'a': True}), ObligationSet(), ('never_both',)),
    )
    ui.show_trace(SimulationTrace(3, steps))
    out = _out(ui)
    assert 'Simulated 2 step(s) with seed 3: 1 violation(s)' in out
    assert 'step 1: never_both' in out


def test_show_suite():
    ui = _ui()
    ui.show_suite(SuiteResult('http', total=2, matches=1, mismatches=['case-0001']))
    out = _out(ui)
    assert 'http: 1/2 case(s) matched' in out
    assert 'mismatches: case-0001' in out
    assert 'Latency' not in out

    scenario = load_scenario()
    cases = generate_test_cases(scenario, 10, seed=4)
    result = run_suite(scenario, cases, logger=Logger(LOGNAME='test-ui', LOGLVL=LOG_CRITICAL))
    ui = _ui(width=160)
    ui.show_suite(result)
    out = _out(ui)
    assert 'in-process: 10/10 case(s) matched' in out
    assert 'Latency (ms)' in out
    assert 'enforcer' in out


def test_show_fits_and_grid():
    ui = _ui()
    ui.show_fits([])
    assert 'No regression fits' in _out(ui)

    ui = _ui()
    ui.show_fits(
        [FitReport('linear', {'a': 1.0, 'b': 0.5}, 0.9), FitReport('quadratic', {'a': 2.0}, 0.99)]
    )
    out = _out(ui)
    assert 'quadratic' in out
    assert '0.9900' in out

    ui = _ui()
    ui.show_grid([GridPoint(SyntheticSpec(10, 2), SuiteResult('in-process'))])
    out = _out(ui)
    assert 'Mean server latency' in out
    assert '--' in out
