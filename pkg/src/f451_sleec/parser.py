"""Recursive-descent parser for SLEEC rulesets.

Grammar (keywords case-insensitive, contextual words in lower case are
plain identifiers matched case-insensitively):

    file        ::= ( decl | rule )* EOF
    decl        ::= monitored IDENT ':' type
                  | capability IDENT ( ',' IDENT )*
                  | derived IDENT ':=' condition
                  | SCOPE IDENT ':=' condition
                  | invariant IDENT ':=' invExpr
    type        ::= boolean | integer range? | real range? | enum '{' IDENT ( ',' IDENT )* '}'
    range       ::= '[' number '..' number ']'
    rule        ::= ( SCOPE IDENT )? RULE IDENT ( labels IDENT ( ',' IDENT )* )?
                    IF condition THEN obligation
                    ( UNLESS condition IN WHICH CASE obligation )*
    condition   ::= conj ( OR conj )*
    conj        ::= item ( AND item )*
    item        ::= NOT item | '(' condition ')' | true | false | IDENT ( RELOP literal )?
    obligation  ::= oblItem ( AND oblItem )*
    oblItem     ::= IDENT ( AFTER duration | WITHIN duration OTHERWISE IDENT )?
    duration    ::= INT unit

'parse_ruleset()' runs the well-formedness check on the result and
raises 'SleecSemanticError' when it finds errors, unless called with
'strict=False' (the analyzer wants the raw AST).
"""

from __future__ import annotations

from .analysis import check_well_formed
from .diagnostics import SleecSyntaxError, SleecSemanticError, has_errors
from .lexer import EOF, Token, end_position, tokenize
from .ruleset import (
    SLEEC_LABELS,
    After,
    BoolConst,
    Compare,
    DerivedDecl,
    Enforced,
    HedgeClause,
    MonitoredDecl,
    NameRef,
    Not,
    Obligation,
    ObligationAtom,
    ObligationInvariant,
    Rule,
    Ruleset,
    ScopeDecl,
    TimeDuration,
    TimeUnit,
    ValueKind,
    VocabularyDecl,
    Within,
    make_and,
    make_or,
)

__all__ = [
    'parse_ruleset',
    'parse_condition',
    'Parser',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
CTX_MONITORED = 'MONITORED'
CTX_CAPABILITY = 'CAPABILITY'
CTX_DERIVED = 'DERIVED'
CTX_INVARIANT = 'INVARIANT'
CTX_LABELS = 'LABELS'
CTX_ENFORCED = 'ENFORCED'
CTX_TRUE = 'TRUE'
CTX_FALSE = 'FALSE'

_LABEL_MAP = {lbl.upper(): lbl for lbl in SLEEC_LABELS}
_UNIT_MAP = {u.name: u for u in TimeUnit}
_TYPE_MAP = {k.value.upper(): k for k in ValueKind}

DEF_MAX_NESTING = 64     # NOT and parenthesis levels per condition


def _describe(tok):
    if tok.kind == EOF:
        return 'end of input'
    if tok.kind == 'IDENT':
        return f"identifier '{tok.value}'"
    return repr(str(tok.value))


class Parser:
    """Single-use parser over a token list.

    Errors are raised at the first offending token with the set of
    tokens that would have been accepted there.
    """

    def __init__(self, source):
        self._tokens = tokenize(source)
        line, col = end_position(source)
        self._tokens.append(Token(EOF, '', line, col))
        self._pos = 0
        self._nesting = 0

        self._monitored = []
        self._capabilities = []
        self._scopes = []
        self._derived = []
        self._rules = []
        self._invariants = []

    # ---------------------------------------------------------
    #  Token helpers
    # ---------------------------------------------------------
    @property
    def _tok(self):
        return self._tokens[self._pos]

    def _advance(self):
        tok = self._tokens[self._pos]
        if tok.kind != EOF:
            self._pos += 1
        return tok

    def _is_word(self, word, tok=None):
        tok = tok or self._tok
        return tok.kind == 'IDENT' and tok.value.upper() == word

    def _error(self, expected, tok=None):
        tok = tok or self._tok
        expected = tuple(expected)
        wanted = ' or '.join(expected)
        raise SleecSyntaxError(
            f'expected {wanted}, found {_describe(tok)}', tok.line, tok.col, expected
        )

    def _expect(self, kind, *alts):
        if self._tok.kind == kind:
            return self._advance()
        self._error((kind,) + alts)

    def _ident(self, what='identifier'):
        if self._tok.kind == 'IDENT':
            return self._advance()
        self._error((what,))

    # ---------------------------------------------------------
    #  Top level
    # ---------------------------------------------------------
    def parse(self):
        while self._tok.kind != EOF:
            tok = self._tok
            if tok.kind == 'RULE':
                self._rules.append(self._parse_rule(None, None))
            elif tok.kind == 'SCOPE':
                self._parse_scope()
            elif self._is_word(CTX_MONITORED):
                self._monitored.append(self._parse_monitored())
            elif self._is_word(CTX_CAPABILITY):
                self._parse_capabilities()
            elif self._is_word(CTX_DERIVED):
                self._derived.append(self._parse_derived())
            elif self._is_word(CTX_INVARIANT):
                self._invariants.append(self._parse_invariant())
            else:
                self._error(
                    ('RULE', 'SCOPE', CTX_MONITORED, CTX_CAPABILITY, CTX_DERIVED, CTX_INVARIANT)
                )

        vocabulary = VocabularyDecl(
            monitored=tuple(self._monitored),
            capabilities=tuple(self._capabilities),
            scopes=tuple(self._scopes),
            derived=tuple(self._derived),
        )
        return Ruleset(vocabulary, tuple(self._rules), tuple(self._invariants))

    # ---------------------------------------------------------
    #  Declarations
    # ---------------------------------------------------------
    def _parse_scope(self):
        scopeTok = self._advance()
        name = self._ident('scope name')
        if self._tok.kind == 'ASSIGN':
            self._advance()
            expr = self.parse_condition()
            self._scopes.append(ScopeDecl(name.value, expr, scopeTok.line, scopeTok.col))
        elif self._tok.kind == 'RULE':
            self._rules.append(self._parse_rule(name.value, scopeTok))
        else:
            self._error(("':='", 'RULE'))

    def _parse_monitored(self):
        start = self._advance()
        name = self._ident('variable name')
        self._expect('COLON')

        typeTok = self._tok
        kind = _TYPE_MAP.get(typeTok.value.upper()) if typeTok.kind == 'IDENT' else None
        if kind is None:
            self._error(('boolean', 'integer', 'real', 'enum'))
        self._advance()

        domain = ()
        lower = upper = None
        if kind is ValueKind.ENUM:
            self._expect('LBRACE')
            items = [self._ident('enumerant').value]
            while self._tok.kind == 'COMMA':
                self._advance()
                items.append(self._ident('enumerant').value)
            self._expect('RBRACE', 'COMMA')
            domain = tuple(items)
        elif kind in (ValueKind.INTEGER, ValueKind.REAL) and self._tok.kind == 'LBRACKET':
            self._advance()
            lower = self._parse_number(kind)
            self._expect('DOTDOT')
            upper = self._parse_number(kind)
            self._expect('RBRACKET')

        return MonitoredDecl(name.value, kind, domain, lower, upper, start.line, start.col)

    def _parse_number(self, kind):
        negative = False
        if self._tok.kind == 'MINUS':
            self._advance()
            negative = True
        if self._tok.kind == 'INT' or (self._tok.kind == 'REAL' and kind is ValueKind.REAL):
            value = self._advance().value
            return -value if negative else value
        self._error(('integer',) if kind is ValueKind.INTEGER else ('number',))

    def _parse_capabilities(self):
        self._advance()
        self._capabilities.append(self._ident('capability name').value)
        while self._tok.kind == 'COMMA':
            self._advance()
            self._capabilities.append(self._ident('capability name').value)

    def _parse_derived(self):
        start = self._advance()
        name = self._ident('predicate name')
        self._expect('ASSIGN')
        return DerivedDecl(name.value, self.parse_condition(), start.line, start.col)

    def _parse_invariant(self):
        start = self._advance()
        name = self._ident('invariant name')
        self._expect('ASSIGN')
        expr = self._parse_or(self._parse_inv_atom)
        return ObligationInvariant(name.value, expr, start.line, start.col)

    # ---------------------------------------------------------
    #  Rules
    # ---------------------------------------------------------
    def _parse_rule(self, scope, scopeTok):
        ruleTok = self._expect('RULE')
        start = scopeTok or ruleTok
        ruleId = self._ident('rule id').value

        labels = ()
        if self._is_word(CTX_LABELS):
            self._advance()
            labels = [self._parse_label()]
            while self._tok.kind == 'COMMA':
                self._advance()
                labels.append(self._parse_label())
            labels = tuple(dict.fromkeys(labels))

        if self._tok.kind != 'IF':
            self._error(('IF', CTX_LABELS) if not labels else ('IF',))
        self._advance()
        baseCondition = self.parse_condition()
        self._expect('THEN')
        baseObligation = self._parse_obligation()

        hedges = []
        while self._tok.kind == 'UNLESS':
            self._advance()
            condition = self.parse_condition()
            self._expect('IN')
            self._expect('WHICH')
            self._expect('CASE')
            hedges.append(HedgeClause(condition, self._parse_obligation()))

        return Rule(
            ruleId,
            scope,
            baseCondition,
            baseObligation,
            tuple(hedges),
            labels,
            start.line,
            start.col,
        )

    def _parse_label(self):
        tok = self._ident('label')
        label = _LABEL_MAP.get(tok.value.upper())
        if label is None:
            self._error(SLEEC_LABELS, tok)
        return label

    def _parse_obligation(self):
        atoms = [self._parse_obligation_atom()]
        while self._tok.kind == 'AND':
            self._advance()
            atoms.append(self._parse_obligation_atom())
        return Obligation(tuple(atoms))

    def _parse_obligation_atom(self):
        capability = self._ident('capability name').value
        modifier = None
        if self._tok.kind == 'AFTER':
            self._advance()
            modifier = After(self._parse_duration())
        elif self._tok.kind == 'WITHIN':
            self._advance()
            duration = self._parse_duration()
            self._expect('OTHERWISE')
            modifier = Within(duration, self._ident('fallback capability').value)

        if modifier is not None and self._tok.kind in ('AFTER', 'WITHIN'):
            raise SleecSyntaxError(
                'an obligation atom takes at most one of AFTER or WITHIN',
                self._tok.line,
                self._tok.col,
                ('AND', 'UNLESS', 'RULE', 'SCOPE'),
            )
        return ObligationAtom(capability, modifier)

    def _parse_duration(self):
        amount = self._expect('INT').value
        unitTok = self._tok
        unit = _UNIT_MAP.get(unitTok.value.upper()) if unitTok.kind == 'IDENT' else None
        if unit is None:
            self._error(tuple(_UNIT_MAP))
        self._advance()
        return TimeDuration(amount, unit)

    # ---------------------------------------------------------
    #  Conditions
    # ---------------------------------------------------------
    def parse_condition(self):
        return self._parse_or(self._parse_cond_atom)

    def _parse_or(self, atomFn):
        operands = [self._parse_and(atomFn)]
        while self._tok.kind == 'OR':
            self._advance()
            operands.append(self._parse_and(atomFn))
        return make_or(operands)

    def _parse_and(self, atomFn):
        operands = [self._parse_not(atomFn)]
        while self._tok.kind == 'AND':
            self._advance()
            operands.append(self._parse_not(atomFn))
        return make_and(operands)

    def _parse_not(self, atomFn):
        if self._tok.kind not in ('NOT', 'LPAREN'):
            return atomFn()

        if self._nesting >= DEF_MAX_NESTING:
            tok = self._tok
            raise SleecSyntaxError(
                f'condition nested deeper than {DEF_MAX_NESTING} levels', tok.line, tok.col
            )
        self._nesting += 1
        try:
            if self._advance().kind == 'NOT':
                return Not(self._parse_not(atomFn))
            expr = self._parse_or(atomFn)
            self._expect('RPAREN', 'AND', 'OR')
            return expr
        finally:
            self._nesting -= 1

    def _parse_cond_atom(self):
        if self._tok.kind != 'IDENT':
            self._error(('identifier', 'NOT', "'('"))
        tok = self._advance()
        word = tok.value.upper()
        if word in (CTX_TRUE, CTX_FALSE) and self._tok.kind != 'RELOP':
            return BoolConst(word == CTX_TRUE)
        if self._tok.kind != 'RELOP':
            return NameRef(tok.value)
        op = self._advance().value
        return Compare(tok.value, op, self._parse_literal())

    def _parse_literal(self):
        tok = self._tok
        if tok.kind == 'MINUS':
            self._advance()
            if self._tok.kind in ('INT', 'REAL'):
                return -self._advance().value
            self._error(('number',))
        if tok.kind in ('INT', 'REAL', 'STRING'):
            return self._advance().value
        if tok.kind == 'IDENT':
            self._advance()
            word = tok.value.upper()
            if word in (CTX_TRUE, CTX_FALSE):
                return word == CTX_TRUE
            return tok.value
        self._error(('literal',))

    def _parse_inv_atom(self):
        tok = self._tok
        if tok.kind == 'IDENT' and tok.value.upper() in (CTX_TRUE, CTX_FALSE):
            self._advance()
            return BoolConst(tok.value.upper() == CTX_TRUE)
        if self._is_word(CTX_ENFORCED):
            self._advance()
            self._expect('LPAREN')
            capability = self._ident('capability name').value
            self._expect('RPAREN')
            return Enforced(capability)
        self._error(('enforced', 'NOT', "'('"))


# =========================================================
#              P U B L I C   F U N C T I O N S
# =========================================================
def parse_ruleset(source, strict=True):
    """Parse SLEEC source into a 'Ruleset'.

    Args:
        source: SLEEC text ('str' or UTF-8 'bytes')
        strict: if 'True', run well-formedness checks and raise on errors

    Returns:
        'Ruleset'

    Raises:
        SleecSyntaxError: lexical or syntax error
        SleecSemanticError: undeclared names, duplicate ids, type errors
    """
    ruleset = Parser(source).parse()
    if strict:
        diagnostics = check_well_formed(ruleset)
        if has_errors(diagnostics):
            raise SleecSemanticError(diagnostics)
    return ruleset


def parse_condition(source):
    """Parse a single condition expression (used by config thresholds and tests)."""
    parser = Parser(source)
    expr = parser.parse_condition()
    if parser._tok.kind != EOF:
        parser._error(('AND', 'OR', 'end of input'))
    return expr
