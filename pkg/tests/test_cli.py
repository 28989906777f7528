"""Test cases for the 'f451_sleec' command line."""

import json

from io import StringIO

import pytest

from rich.console import Console

from src.f451_sleec.cli import main
from src.f451_sleec.common import FIXTURES_DIR, load_settings
from src.f451_sleec.logger import LOG_CRITICAL, Logger
from src.f451_sleec.scenario import SCENARIO_CONFIG, SCENARIO_FILE
from src.f451_sleec.server import ServerThread, create_app


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
MESSY = """MONITORED a : boolean
CAPABILITY   x,y
RULE R1 IF (a) THEN x
RULE R2 IF NOT a THEN y
"""


@pytest.fixture
def console():
    return Console(file=StringIO(), width=200, color_system=None)


def _out(console):
    return console.file.getvalue()


def _run(console, *argv):
    return main([str(a) for a in argv], console=console)


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.smoke
def test_version(capsys):
    assert main(['-V']) == 0
    assert capsys.readouterr().out.strip() == 'f451-sleec v0.1.0'


@pytest.mark.parametrize('argv', [[], ['bogus'], ['parse'], ['step', '--lenient']])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_parse_summary(console):
    assert _run(console, 'parse', SCENARIO_FILE) == 0
    out = _out(console)
    labels = '[Social, Ethical, Empathetic, Cultural]'
    assert f'S1 (scope StartTrainingTime): 4 clause(s) {labels}' in out
    assert '9 rule(s), 23 clause(s), 1 invariant(s)' in out


def test_parse_json(console, capsys):
    assert _run(console, 'parse', SCENARIO_FILE, '--json') == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data['rules']) == 9
    assert data['rules'][0] == {
        'id': 'S1',
        'scope': 'StartTrainingTime',
        'labels': ['Social', 'Ethical', 'Empathetic', 'Cultural'],
        'clauses': 4,
    }
    assert data['invariants'] == ['inv_1']


def test_syntax_error_is_rendered(console, tmp_path):
    bad = tmp_path / 'bad.sleec'
    bad.write_text('MONITORED a : boolean\nRULE R1 IF THEN x\n')
    assert _run(console, 'parse', bad) == 1
    assert f'{bad}:2:12: error:' in _out(console)


def test_missing_file(console, tmp_path):
    assert _run(console, 'parse', tmp_path / 'nope.sleec') == 1
    assert '[FILE_ERROR]' in _out(console)


def test_fmt_check_and_write(console, tmp_path, capsys):
    messy = tmp_path / 'messy.sleec'
    messy.write_text(MESSY)
    tidy = tmp_path / 'tidy.sleec'

    assert _run(console, 'fmt', messy, '--check') == 1
    assert _run(console, 'fmt', messy, '-o', tidy) == 0
    assert _run(console, 'fmt', tidy, '--check') == 0

    assert _run(console, 'fmt', messy) == 0
    assert capsys.readouterr().out == tidy.read_text()


def test_analyze_scenario(console, capsys):
    assert _run(console, 'analyze', SCENARIO_FILE) == 0
    argv = ['analyze', SCENARIO_FILE, '--json', '--mode', 'sampled', '--samples', 200]
    assert _run(console, *argv) == 0

    data = json.loads(capsys.readouterr().out)
    assert data['mode'] == 'sampled'
    assert data['errors'] == 0
    assert all(d['severity'] != 'error' for d in data['diagnostics'])


def test_analyze_errors_exit_1(console, tmp_path):
    bad = tmp_path / 'bad.sleec'
    bad.write_text('MONITORED a : boolean\nCAPABILITY x\nRULE R1 IF a THEN nowhere\n')
    assert _run(console, 'analyze', bad) == 1
    assert 'UNDECLARED_CAPABILITY' in _out(console)


def test_simulate_scenario(console, capsys):
    assert _run(console, 'simulate', '--steps', 20, '--seed', 1) == 0
    assert 'Simulated 20 step(s) with seed 1: 0 violation(s)' in _out(console)

    assert _run(console, 'simulate', '--scenario', '--steps', 3, '--json') == 0
    assert len(json.loads(capsys.readouterr().out)['steps']) == 3


def test_step_all_false(console, capsys):
    assert _run(console, 'step', '--snapshot', FIXTURES_DIR / 'all_false.json') == 0
    assert capsys.readouterr().out == '{"directives":[],"status":"respectful"}\n'


def test_step_lenient(console, capsys, tmp_path):
    snap = tmp_path / 'snap.json'
    snap.write_text('{"values": {"timeOfDay": "TRAININGTIME", "roomTemperature": 20}}')

    assert _run(console, 'step', '--snapshot', snap) == 1
    assert '[MISSING_BINDING]' in _out(console)

    assert _run(console, 'step', '--snapshot', snap, '--lenient') == 0
    data = json.loads(capsys.readouterr().out)
    assert [d['capability'] for d in data['directives']] == ['showNextExercise']


def test_gen_tests(console, tmp_path):
    out = tmp_path / 'cases.json'
    assert _run(console, 'gen-tests', '--cases', 5, '--seed', 2, '--baseline', '--out', out) == 0
    data = json.loads(out.read_text())
    assert data['seed'] == 2
    assert len(data['cases']) == 5
    assert f'Wrote 5 test case(s) to {out}' in _out(console)


def test_gen_synthetic(console, capsys, tmp_path):
    assert _run(console, 'gen-synthetic', '-r', 2, '-c', 3) == 0
    text = capsys.readouterr().out
    assert text.count('RULE R') == 2

    rules = tmp_path / 'syn.sleec'
    assert _run(console, 'gen-synthetic', '-r', 2, '-c', 3, '--out', rules) == 0
    assert rules.read_text() == text
    assert _run(console, 'parse', rules) == 0
    assert '2 rule(s), 6 clause(s), 0 invariant(s)' in _out(console)


def test_bench_in_process(console, tmp_path):
    out = tmp_path / 'bench'
    assert _run(console, 'bench', '--cases', 20, '--out', out) == 0
    assert 'in-process: 20/20 case(s) matched' in _out(console)

    report = json.loads((out / 'report.json').read_text())
    assert report['matches'] == 20
    assert report['source'] == str(SCENARIO_FILE)
    assert (out / 'latency.csv').exists()


def test_bench_replays_saved_cases(console, tmp_path):
    cases = tmp_path / 'cases.json'
    _run(console, 'gen-tests', '--cases', 4, '--out', cases)
    assert _run(console, 'bench', '--cases-file', cases, '--out', tmp_path / 'bench') == 0
    assert 'in-process: 4/4 case(s) matched' in _out(console)


@pytest.mark.bench
def test_bench_grid(console, tmp_path):
    out = tmp_path / 'grid'
    argv = ['bench', '--grid', '--cases', 3, '--rules', 1, 2, '--clauses', 2, 4, '--out', out]
    assert _run(console, *argv) == 0
    report = json.loads((out / 'report.json').read_text())
    assert report['cases'] == 12
    assert len(report['grid']) == 4


@pytest.mark.http
def test_loop_replays_probes(console, tmp_path):
    app = create_app(logger=Logger(LOGNAME='test-cli-server', LOGLVL=LOG_CRITICAL))
    with ServerThread(app) as server:
        settings = load_settings(SCENARIO_CONFIG)
        settings.update(
            SERVER_URL=server.url,
            RULESET=str(SCENARIO_FILE),
            RECORD_LOG=str(tmp_path / 'records.jsonl'),
            CLOCK='virtual',
            BUS_MODE='sync',
            LOGNAME='test-cli-loop',
            LOGLVL=LOG_CRITICAL,
        )
        config = tmp_path / 'loop.json'
        config.write_text(json.dumps(settings))

        probes = tmp_path / 'probes.jsonl'
        probes.write_text(
            '{"source": "timeOfDay", "value": "TRAININGTIME", "timestamp": 1}\n'
            '\n'
            '{"source": "userExercising", "value": true, "timestamp": 2}\n'
        )
        assert _run(console, 'loop', '--config', config, '--probes', probes) == 0

    assert '2 enforcement record(s)' in _out(console)
    lines = (tmp_path / 'records.jsonl').read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])['capabilities'] == ['showNextExercise']
