# test_sexpr.py - S-expression reader and printer
"""
Tests for the surface syntax of terms and formulas.
"""

from fractions import Fraction

import pytest

from ominal.exceptions import ParseError
from ominal.logic import Term, equivalent, exists, lt
from ominal.sexpr import (
    format_formula,
    format_rational,
    format_term,
    parse_formula,
    parse_term,
    read_sexprs,
)


def test_parse_term():
    term = parse_term("(+ (* 3/2 x) y 5)")
    assert term.coeff("x") == Fraction(3, 2), "scalar lost"
    assert term.coeff("y") == 1, "second variable lost"
    assert term.const == 5, "constant lost"
    assert parse_term("(/ (- x 1) 2)") == (Term.var("x") - 1) / 2, "division by a rational"


def test_parse_chained_comparison():
    f = parse_formula("(< 0 x 1)")
    assert equivalent(f, parse_formula("(and (< 0 x) (< x 1))")), "chained < should be a conjunction"


def test_format_round_trip():
    for text in (
        "(exists (y) (and (< x y) (< y z)))",
        "(or (= a u) (= b v))",
        "(and (<= (* 2 x) 3) (not (= x 1)))",
        "(forall (t) (implies (< 0 t) (< x t)))",
    ):
        f = parse_formula(text)
        assert equivalent(parse_formula(format_formula(f)), f), f"round trip changed {text}"


def test_format_rational_and_term():
    assert format_rational(Fraction(3, 4)) == "3/4", "fraction printing"
    assert format_rational(Fraction(-2)) == "-2", "integer printing"
    assert format_term(Term.constant(0)) == "0", "zero term"
    assert format_term(Term.var("x")) == "x", "bare variable"


def test_comments_and_multiple_expressions():
    items = read_sexprs("; a comment\n(a b)\n(c) ; trailing\n")
    assert len(items) == 2, f"expected two expressions, got {items}"


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse_formula("(and (< x 1)\n  (< y")
    assert info.value.line >= 1, "syntax errors report a line"
    with pytest.raises(ParseError) as info:
        parse_formula("(and\n  (frobnicate x))")
    assert info.value.line == 2, f"unknown operator reported at line {info.value.line}"
    with pytest.raises(ParseError):
        parse_term("(* x y)")
    with pytest.raises(ParseError):
        parse_formula("undeclared-name")


def test_resolver():
    f = parse_formula("(and half (< x 1))", resolve=lambda name: lt(0, "x"))
    assert equivalent(f, parse_formula("(< 0 x 1)")), "declared names resolve to formulas"


def test_nested_quantifiers():
    f = parse_formula("(exists (y z) (and (< x y) (< y z)))")
    assert f == exists(("y", "z"), parse_formula("(and (< x y) (< y z))")), "variable lists"
