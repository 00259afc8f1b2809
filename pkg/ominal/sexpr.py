# sexpr.py - S-expression reader and printer
"""
Surface syntax for terms and formulas.

Contains:
- pyparsing grammar for nested S-expressions (with ; comments)
- read_term / read_formula: S-expression -> Term / Formula
- format_rational / format_term / format_formula: the inverse printers

Grammar:
    term     := RATIONAL | NAME | (+ term...) | (- term...) | (* RATIONAL term) | (/ term RATIONAL)
    formula  := true | false | NAME
              | (< term term...) | (<= ...) | (> ...) | (>= ...) | (= ...) | (!= term term)
              | (and formula...) | (or formula...) | (not formula)
              | (implies formula formula) | (iff formula formula)
              | (exists (NAME...) formula) | (forall (NAME...) formula)
"""

from fractions import Fraction

import pyparsing as pp

from ominal.exceptions import ParseError, ResolutionError
from ominal.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Or,
    Rel,
    Term,
    conj,
    disj,
    eq,
    exists,
    forall,
    ge,
    gt,
    iff,
    implies,
    le,
    lt,
    ne,
    neg,
)

# ===================== GRAMMAR =====================


class Sym(str):
    """A bare token carrying its source position."""

    line = 0
    column = 0

    def __new__(cls, text, line=0, column=0):
        obj = super().__new__(cls, text)
        obj.line = line
        obj.column = column
        return obj


class SList:
    """A parenthesized list carrying its source position."""

    def __init__(self, items=(), line=0, column=0):
        self.items = list(items)
        self.line = line
        self.column = column

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, index):
        return self.items[index]

    def __repr__(self):
        return "(" + " ".join(repr(i) if isinstance(i, SList) else str(i) for i in self.items) + ")"


def _make_sym(s, loc, toks):
    return Sym(toks[0], pp.lineno(loc, s), pp.col(loc, s))


def _make_list(s, loc, toks):
    return SList(list(toks[0]), pp.lineno(loc, s), pp.col(loc, s))


_LPAR, _RPAR = map(pp.Suppress, "()")
_TOKEN = pp.Regex(r"[^\s();]+").set_parse_action(_make_sym)
_SEXPR = pp.Forward()
_SEXPR <<= pp.Group(_LPAR + pp.ZeroOrMore(_SEXPR) + _RPAR).set_parse_action(_make_list) | _TOKEN
_DOCUMENT = pp.ZeroOrMore(_SEXPR) + pp.StringEnd()
_DOCUMENT.ignore(pp.Regex(r";[^\n]*"))


def read_sexprs(text: str) -> list:
    """Parse text into a list of nested SList / Sym values."""
    try:
        return list(_DOCUMENT.parse_string(text, parse_all=True))
    except pp.ParseBaseException as exc:
        raise ParseError(f"syntax error: {exc.msg}", exc.lineno, exc.col) from exc


def read_one(text: str):
    items = read_sexprs(text)
    if len(items) != 1:
        raise ParseError(f"expected one expression, found {len(items)}", 1, 1)
    return items[0]


def where(node):
    return getattr(node, "line", 0), getattr(node, "column", 0)


def fail(node, message):
    line, column = where(node)
    raise ParseError(message, line, column)


# ===================== READERS =====================


def read_rational(node) -> Fraction:
    if isinstance(node, SList):
        fail(node, "expected a rational constant")
    try:
        return Fraction(str(node))
    except (ValueError, ZeroDivisionError):
        fail(node, f"expected a rational constant, got {node!r}")


def is_rational(node) -> bool:
    if isinstance(node, SList):
        return False
    try:
        Fraction(str(node))
    except (ValueError, ZeroDivisionError):
        return False
    return True


def read_name(node) -> str:
    if isinstance(node, SList) or is_rational(node):
        fail(node, "expected a name")
    return str(node)


def read_names(node) -> tuple[str, ...]:
    if not isinstance(node, SList):
        return (read_name(node),)
    return tuple(read_name(n) for n in node)


def read_term(node) -> Term:
    if not isinstance(node, SList):
        if is_rational(node):
            return Term.constant(read_rational(node))
        return Term.var(read_name(node))
    if not node:
        fail(node, "empty term")
    head, args = str(node[0]), node[1:]
    if head == "+":
        out = Term()
        for a in args:
            out = out + read_term(a)
        return out
    if head == "-":
        if not args:
            fail(node, "'-' needs an argument")
        if len(args) == 1:
            return -read_term(args[0])
        out = read_term(args[0])
        for a in args[1:]:
            out = out - read_term(a)
        return out
    if head == "*":
        factors = [read_term(a) for a in args]
        variable = [t for t in factors if not t.is_constant()]
        if len(variable) > 1:
            fail(node, "nonlinear product")
        scale = Fraction(1)
        for t in factors:
            if t.is_constant():
                scale *= t.const
        return (variable[0] if variable else Term.constant(1)) * scale
    if head == "/":
        if len(args) != 2 or not is_rational(args[1]):
            fail(node, "'/' takes a term and a rational")
        divisor = read_rational(args[1])
        if divisor == 0:
            fail(node, "division by zero")
        return read_term(args[0]) / divisor
    fail(node, f"unknown term operator {head!r}")


_COMPARISONS = {"<": lt, "<=": le, ">": gt, ">=": ge, "=": eq}


def read_formula(node, resolve=None) -> Formula:
    """
    Formula from an S-expression.

    Args:
        node: Sym or SList
        resolve: optional callable name -> Formula for declared formula names
    """
    if not isinstance(node, SList):
        text = str(node)
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        if resolve is None:
            fail(node, f"unknown identifier {text!r}")
        try:
            return resolve(text)
        except ResolutionError as exc:
            fail(node, str(exc))
    if not node:
        fail(node, "empty formula")
    head, args = str(node[0]), node[1:]
    if head in _COMPARISONS:
        if len(args) < 2:
            fail(node, f"'{head}' needs at least two terms")
        terms = [read_term(a) for a in args]
        return conj(*(_COMPARISONS[head](a, b) for a, b in zip(terms, terms[1:])))
    if head == "!=":
        if len(args) != 2:
            fail(node, "'!=' takes two terms")
        return ne(read_term(args[0]), read_term(args[1]))
    if head == "and":
        return conj(*(read_formula(a, resolve) for a in args))
    if head == "or":
        return disj(*(read_formula(a, resolve) for a in args))
    if head == "not":
        if len(args) != 1:
            fail(node, "'not' takes one formula")
        return neg(read_formula(args[0], resolve))
    if head in ("implies", "iff"):
        if len(args) != 2:
            fail(node, f"'{head}' takes two formulas")
        left, right = (read_formula(a, resolve) for a in args)
        return implies(left, right) if head == "implies" else iff(left, right)
    if head in ("exists", "forall"):
        if len(args) != 2:
            fail(node, f"'{head}' takes a variable list and a body")
        names = read_names(args[0])
        body = read_formula(args[1], resolve)
        return exists(names, body) if head == "exists" else forall(names, body)
    fail(node, f"unknown formula operator {head!r}")


def parse_term(text: str) -> Term:
    return read_term(read_one(text))


def parse_formula(text: str, resolve=None) -> Formula:
    return read_formula(read_one(text), resolve)


# ===================== PRINTERS =====================


def format_rational(value) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _monomial(name: str, coeff: Fraction) -> str:
    if coeff == 1:
        return name
    if coeff == -1:
        return f"(- {name})"
    return f"(* {format_rational(coeff)} {name})"


def format_term(term: Term) -> str:
    parts = [_monomial(v, c) for v, c in term.coeffs]
    if term.const != 0 or not parts:
        parts.append(format_rational(term.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _sides(term: Term) -> tuple[Term, Term]:
    """Split term into lhs - rhs with positive coefficients on both sides."""
    lhs = Term.build({v: c for v, c in term.coeffs if c > 0}, max(term.const, 0))
    rhs = Term.build({v: -c for v, c in term.coeffs if c < 0}, max(-term.const, 0))
    return lhs, rhs


_REL_TEXT = {Rel.LT: "<", Rel.LE: "<=", Rel.EQ: "="}


def format_formula(f: Formula) -> str:
    match f:
        case Const(value):
            return "true" if value else "false"
        case Atom(rel, term):
            lhs, rhs = _sides(term)
            if rel is Rel.NE:
                return f"(not (= {format_term(lhs)} {format_term(rhs)}))"
            return f"({_REL_TEXT[rel]} {format_term(lhs)} {format_term(rhs)})"
        case And(args):
            return "(and " + " ".join(format_formula(a) for a in args) + ")"
        case Or(args):
            return "(or " + " ".join(format_formula(a) for a in args) + ")"
        case Exists(vs, body):
            return f"(exists ({' '.join(vs)}) {format_formula(body)})"
        case Forall(vs, body):
            return f"(forall ({' '.join(vs)}) {format_formula(body)})"
    raise TypeError(f"not a formula: {f!r}")
