"""Test cases for the SLEEC lexer, parser, and formatter."""

import random

import pytest

from src.f451_sleec.common import SleecError
from src.f451_sleec.diagnostics import SleecSemanticError, SleecSyntaxError
from src.f451_sleec.formatter import format_condition, format_literal, format_ruleset
from src.f451_sleec.lexer import tokenize
from src.f451_sleec.parser import DEF_MAX_NESTING, parse_condition, parse_ruleset
from src.f451_sleec.ruleset import (
    After,
    And,
    Compare,
    NameRef,
    Not,
    Or,
    TimeDuration,
    TimeUnit,
    ValueKind,
    Within,
    make_and,
    make_or,
)
from src.f451_sleec.scenario import load_scenario, scenario_source


# =========================================================
#          F I X T U R E S   A N D   H E L P E R S
# =========================================================
SMALL_SRC = """
MONITORED a : boolean
MONITORED b : boolean
MONITORED t : integer [-5 .. 40]
CAPABILITY x, y, z

RULE R1 LABELS social, LEGAL
IF a THEN x
UNLESS b IN WHICH CASE y AFTER 60 SEC
UNLESS t > 30 IN WHICH CASE z WITHIN 2 MINUTE OTHERWISE x
"""


@pytest.fixture
def scenario():
    return load_scenario()


@pytest.fixture
def small():
    return parse_ruleset(SMALL_SRC)


# =========================================================
#                    T E S T   C A S E S
# =========================================================
@pytest.mark.smoke
def test_tokenize_positions():
    tokens = tokenize('RULE R1\n  if a THEN b')
    assert [t.kind for t in tokens] == ['RULE', 'IDENT', 'IF', 'IDENT', 'THEN', 'IDENT']
    assert (tokens[2].line, tokens[2].col) == (2, 3)
    assert tokens[2].value == 'if'


def test_tokenize_literals_and_comments():
    tokens = tokenize('t >= -2.5 // comment\n# other comment\ns = "a b"')
    kinds = [t.kind for t in tokens]
    assert kinds == ['IDENT', 'RELOP', 'MINUS', 'REAL', 'IDENT', 'RELOP', 'STRING']
    assert tokens[3].value == 2.5
    assert tokens[-1].value == 'a b'


def test_tokenize_bytes():
    assert [t.kind for t in tokenize(b'RULE R1')] == ['RULE', 'IDENT']


@pytest.mark.exception
@pytest.mark.parametrize(
    'source, line, col',
    [
        ('RULE R1 IF a @ b', 1, 14),
        ('RULE R1\nIF 12abc THEN x', 2, 4),
        ('s = "open', 1, 5),
    ],
)
def test_tokenize_lexical_errors(source, line, col):
    with pytest.raises(SleecSyntaxError) as e:
        tokenize(source)
    assert e.value.code == 'LEXICAL_ERROR'
    assert (e.value.line, e.value.col) == (line, col)


@pytest.mark.exception
def test_tokenize_invalid_utf8():
    with pytest.raises(SleecSyntaxError) as e:
        tokenize(b'RULE R1\n\xff')
    assert e.value.code == 'LEXICAL_ERROR'
    assert e.value.line == 2


@pytest.mark.smoke
def test_parse_scenario(scenario):
    assert len(scenario.rules) == 9
    assert len(scenario.vocabulary.scopes) == 4
    assert [i.name for i in scenario.invariants] == ['inv_1']
    assert scenario.clause_count == 23

    s1 = scenario.rule_map['S1']
    assert s1.scope == 'StartTrainingTime'
    assert s1.labels == ('Social', 'Ethical', 'Empathetic', 'Cultural')
    assert len(s1.clauses) == 4


def test_parse_temporal_modifiers(scenario):
    s2 = scenario.rule_map['S2']
    assert s2.baseObligation.atoms[0].modifier == After(TimeDuration(1, TimeUnit.MINUTE))

    s5 = scenario.rule_map['S5']
    wake = s5.hedges[0].obligation.atoms[0]
    assert wake.capability == 'wakeUpUser'
    assert wake.modifier == Within(TimeDuration(5, TimeUnit.MINUTE), 'alertNurse')


def test_parse_vocabulary(small):
    vocab = small.vocabulary
    t = vocab.monitored_map['t']
    assert t.kind is ValueKind.INTEGER
    assert (t.lower, t.upper) == (-5, 40)
    assert vocab.capabilities == ('x', 'y', 'z')


def test_parse_labels_are_canonical(small):
    assert small.rules[0].labels == ('Social', 'Legal')


def test_parse_condition_precedence():
    a, b, c = NameRef('a'), NameRef('b'), NameRef('c')
    assert parse_condition('a OR b AND NOT c') == Or((a, And((b, Not(c)))))
    assert parse_condition('(a OR b) AND c') == And((Or((a, b)), c))
    assert parse_condition('t != -3') == Compare('t', '!=', -3)


@pytest.mark.exception
def test_parse_syntax_error_expected_set():
    with pytest.raises(SleecSyntaxError) as e:
        parse_ruleset('RULE R1 IF a b')
    assert (e.value.line, e.value.col) == (1, 14)
    assert e.value.expected == ('THEN',)
    assert "identifier 'b'" in e.value.message


@pytest.mark.exception
def test_parse_error_at_end_of_input():
    with pytest.raises(SleecSyntaxError) as e:
        parse_ruleset('RULE R1 IF a THEN')
    assert 'end of input' in e.value.message


@pytest.mark.exception
def test_parse_after_and_within_on_one_atom():
    src = SMALL_SRC.replace('y AFTER 60 SEC', 'y AFTER 60 SEC WITHIN 1 MINUTE OTHERWISE x')
    with pytest.raises(SleecSyntaxError):
        parse_ruleset(src)


@pytest.mark.exception
def test_parse_deep_parentheses_is_syntax_error():
    src = 'MONITORED a : boolean\nCAPABILITY c\nRULE R IF ' + '(' * 5000 + 'a'
    with pytest.raises(SleecSyntaxError) as e:
        parse_ruleset(src)
    assert (e.value.line, e.value.col) == (3, 11 + DEF_MAX_NESTING)
    assert 'nested deeper' in e.value.message


@pytest.mark.exception
def test_parse_long_not_chain_is_syntax_error():
    with pytest.raises(SleecSyntaxError):
        parse_condition('NOT ' * 5000 + 'a')


def test_parse_nesting_at_limit():
    depth = DEF_MAX_NESTING
    assert parse_condition('(' * depth + 'a' + ')' * depth) == NameRef('a')

    expr = parse_condition('NOT ' * depth + 'a')
    for _ in range(depth):
        assert isinstance(expr, Not)
        expr = expr.operand
    assert expr == NameRef('a')

    with pytest.raises(SleecSyntaxError):
        parse_condition('(' * (depth + 1) + 'a' + ')' * (depth + 1))


@pytest.mark.exception
@pytest.mark.parametrize('seed', range(5))
def test_parse_token_soup_raises_only_sleec_errors(seed):
    words = [
        'RULE', 'SCOPE', 'MONITORED', 'CAPABILITY', 'DERIVED', 'INVARIANT', 'IF', 'THEN',
        'UNLESS', 'IN', 'WHICH', 'CASE', 'AND', 'OR', 'NOT', 'AFTER', 'WITHIN', 'OTHERWISE',
        'LABELS', 'enforced', 'a', 'b', 'x', 'TRUE', 'boolean', 'integer', 'MINUTE', '(',
        ')', '{', '}', '[', ']', '..', ',', ':', ':=', '<', '>=', '=', '-', '3', '2.5',
        '"s"', '@', '"open',
    ]
    rng = random.Random(seed)
    for _ in range(200):
        soup = ' '.join(rng.choice(words) for _ in range(rng.randint(1, 40)))
        for parse in (lambda s: parse_ruleset(s, strict=False), parse_condition):
            try:
                parse(soup)
            except SleecError:
                pass


@pytest.mark.exception
def test_parse_unknown_label():
    with pytest.raises(SleecSyntaxError) as e:
        parse_ruleset(SMALL_SRC.replace('social', 'moral'))
    assert 'Social' in e.value.expected


@pytest.mark.exception
def test_parse_semantic_error():
    src = SMALL_SRC.replace('IF a THEN x', 'IF missing THEN x')
    with pytest.raises(SleecSemanticError) as e:
        parse_ruleset(src)
    codes = [d.code for d in e.value.diagnostics if d.is_error]
    assert codes == ['UNDECLARED_VARIABLE']
    assert e.value.as_dict()['error'] == 'SEMANTIC_ERROR'


def test_parse_lenient_returns_ast():
    rs = parse_ruleset(SMALL_SRC.replace('IF a THEN x', 'IF missing THEN x'), strict=False)
    assert rs.rules[0].baseCondition == NameRef('missing')


def test_syntax_error_as_dict():
    with pytest.raises(SleecSyntaxError) as e:
        parse_ruleset('RULE R1 IF a b')
    data = e.value.as_dict()
    assert data['error'] == 'SYNTAX_ERROR'
    assert data['diagnostics'][0]['line'] == 1
    assert data['diagnostics'][0]['expected'] == ['THEN']


# ---------------------------------------------------------
#  Formatter
# ---------------------------------------------------------
@pytest.mark.smoke
def test_format_round_trip(scenario, small):
    for rs in (scenario, small):
        text = format_ruleset(rs)
        assert parse_ruleset(text) == rs
        assert format_ruleset(parse_ruleset(text)) == text


def test_format_keeps_written_durations(small):
    text = format_ruleset(small)
    assert 'y AFTER 60 SEC' in text
    assert 'z WITHIN 2 MINUTE OTHERWISE x' in text
    assert 'RULE R1 LABELS Social, Legal' in text


def test_format_minimal_parentheses():
    for src in ('(a OR b) AND c', 'NOT (a AND b)', 'a OR b AND c', 'NOT NOT a'):
        assert format_condition(parse_condition(src)) == src


def test_format_flattens_nested_and_or():
    a, b, c, d = (NameRef(n) for n in 'abcd')
    nested = And((And((a, b)), Or((Or((c, d)), a)), c))
    text = format_condition(nested)
    assert text == 'a AND b AND (c OR d OR a) AND c'
    assert parse_condition(text) == make_and([a, b, make_or([c, d, a]), c])

    assert format_condition(Or((Or((a, b)), And((c, d))))) == 'a OR b OR c AND d'


@pytest.mark.parametrize(
    'value, expected',
    [
        (True, 'TRUE'),
        (3, '3'),
        (2.0, '2.0'),
        (1.5, '1.5'),
        ('MEALTIME', 'MEALTIME'),
        ('a b', '"a b"'),
        ('TRUE', '"TRUE"'),
        ('if', '"if"'),
    ],
)
def test_format_literal(value, expected):
    assert format_literal(value) == expected


def test_format_scenario_source_parses_equal(scenario):
    assert parse_ruleset(format_ruleset(parse_ruleset(scenario_source()))) == scenario
