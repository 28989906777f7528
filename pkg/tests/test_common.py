"""Test cases for f451 Labs SLEEC common helpers."""

import json

import pytest
from pathlib import Path
from frozendict import frozendict

import src.f451_sleec.common as common


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
APP_DIR = Path(__file__).parent


# =========================================================
#                    T E S T   C A S E S
# =========================================================
def test_load_settings():
    settings = common.load_settings(APP_DIR.joinpath('test.toml'))
    assert settings.get('FOO') == 'bar'
    assert settings.get('RETRIES') == 2


def test_load_settings_json(tmp_path):
    path = tmp_path.joinpath('config.json')
    path.write_text(json.dumps({'FOO': 'baz'}))
    assert common.load_settings(path) == {'FOO': 'baz'}


@pytest.mark.exception
def test_load_settings_missing(tmp_path):
    with pytest.raises(common.SleecError) as e:
        common.load_settings(tmp_path.joinpath('nope.toml'))
    assert e.value.code == 'MISSING_SETTINGS'


@pytest.mark.exception
def test_load_settings_invalid(tmp_path):
    path = tmp_path.joinpath('bad.toml')
    path.write_text('FOO = \n')
    with pytest.raises(common.SleecError) as e:
        common.load_settings(path)
    assert e.value.code == 'INVALID_SETTINGS'


@pytest.mark.exception
def test_load_settings_json_not_object(tmp_path):
    path = tmp_path.joinpath('list.json')
    path.write_text('[1, 2]')
    with pytest.raises(common.SleecError) as e:
        common.load_settings(path)
    assert e.value.code == 'INVALID_SETTINGS'


def test_merge_settings():
    assert common.merge_settings({'A': 1, 'B': 2}, B=3) == {'A': 1, 'B': 3}
    assert common.merge_settings(B=3) == {'B': 3}

    base = frozendict({'A': 1})
    assert common.merge_settings(base, A=2) == {'A': 2}
    assert base == {'A': 1}


def test_convert_to_bool():
    assert common.convert_to_bool(True)

    assert common.convert_to_bool(1)
    assert common.convert_to_bool(-1)
    assert common.convert_to_bool(1.1)

    assert common.convert_to_bool(common.STATUS_ON)
    assert common.convert_to_bool(common.STATUS_YES)
    assert common.convert_to_bool(common.STATUS_TRUE)
    assert common.convert_to_bool('TRUE')


def test_convert_to_bool_fail():
    assert not common.convert_to_bool(False)

    assert not common.convert_to_bool(0.1)
    assert not common.convert_to_bool(-0.1)
    assert not common.convert_to_bool('ok')
    assert not common.convert_to_bool('off')

    assert not common.convert_to_bool([True])
    assert not common.convert_to_bool((0, 0))
    assert not common.convert_to_bool({'foo': 'bar'})


def test_canonical_json():
    assert common.canonical_json({'b': 1, 'a': [1, 2]}) == '{"a":[1,2],"b":1}'
    assert common.canonical_json({'a': 1, 'b': 2}) == common.canonical_json({'b': 2, 'a': 1})


def test_sleec_error():
    err = common.SleecError('Boom', 'BOOM')
    assert err.code == 'BOOM'
    assert err.message == 'Boom'
    assert err.as_dict() == {'error': 'BOOM', 'message': 'Boom'}

    assert common.SleecError().code == 'SLEEC_ERROR'


def test_make_logo():
    logo = common.make_logo(120, 'SLEEC', 'v0.1.0')
    assert logo is not None
    assert logo.splitlines()[-1].strip() == 'v0.1.0'

    assert common.make_logo(5, 'SLEEC', 'v0.1.0', default='tight') == 'tight'


def test_fixtures_dir():
    assert common.FIXTURES_DIR.joinpath('assistive.sleec').exists()
