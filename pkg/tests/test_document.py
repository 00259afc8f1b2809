# test_document.py - Declaration documents
"""
Tests for reading declaration documents: kinds, name resolution, positioned
errors and command-line arguments.
"""

from fractions import Fraction

import pytest

from ominal.document import Document, parse_document, read_formula_arg, read_type_arg
from ominal.exceptions import ParseError, ResolutionError
from ominal.families import DefinableFamily
from ominal.logic import Mode, equivalent, evaluate
from ominal.sexpr import parse_formula
from ominal.topology import DefinableCurve, DefinableTopology, ProbeBattery
from ominal.types import Above, CutPlus, Graph, PlusInf, Realized

DOC = """
; a small document
(formula pos (> x 0))
(formula unit (and pos (< x 1)))
(family rays (index t) (object x) (member (>= x t)) (domain (>= t 0)))
(type right-of-one (cut+ 1))
(type above-graph (above (const 0) plus-inf))
(topology line (euclidean (x) true))
(curve walk (param t) (object x) (map (* 2 t)) (interval 0 1))
(battery mixed pos (< x 5) rays)
(battery probes (dd-closed rays) (types plus-inf) (curves walk))
"""


def test_parse_kinds():
    doc = parse_document(DOC)
    assert doc.kind_of("pos") == "formula", "pos is a formula"
    assert isinstance(doc.get("rays", "family"), DefinableFamily), "rays is a family"
    assert isinstance(doc.get("line", "topology"), DefinableTopology), "line is a topology"
    assert isinstance(doc.get("walk", "curve"), DefinableCurve), "walk is a curve"
    assert doc.get("right-of-one") == CutPlus(1), "cut+ reads as CutPlus"
    assert doc.get("above-graph") == Above(0, PlusInf()), "above (const 0) over +inf"
    assert isinstance(doc.get("probes"), ProbeBattery), "sectioned batteries are probe batteries"
    assert doc.names()[:2] == ["pos", "unit"], f"names in declaration order, got {doc.names()}"


def test_formula_names_resolve():
    doc = parse_document(DOC)
    assert equivalent(doc.get("unit"), parse_formula("(< 0 x 1)")), "unit expands pos"
    mixed = doc.get("mixed", "battery")
    assert len(mixed) == 3 and isinstance(mixed[2], DefinableFamily), "batteries mix formulas and families"


def test_family_fields():
    rays = parse_document(DOC).get("rays")
    assert rays.index_vars == ("t",) and rays.object_vars == ("x",), "declared variables"
    assert rays.label == "rays", "families carry their declared name"
    assert evaluate(rays.domain, (2,), ("t",)), "domain t >= 0"


def test_get_errors():
    doc = parse_document(DOC)
    with pytest.raises(ResolutionError):
        doc.get("missing")
    with pytest.raises(ResolutionError):
        doc.get("pos", "family")
    with pytest.raises(ResolutionError):
        doc.add("type", "pos", Realized((0,)))


def test_unknown_identifier_position():
    with pytest.raises(ParseError) as err:
        parse_document("(formula a (> x 0))\n(formula b (and a nope))")
    assert err.value.line == 2, f"error reported on line {err.value.line}"


def test_duplicate_names():
    with pytest.raises(ParseError) as err:
        parse_document("(formula a (> x 0))\n(type a plus-inf)")
    assert "duplicate" in str(err.value), f"unexpected message {err.value}"


def test_declaration_errors():
    bad = [
        "(widget a 1)",
        "(family f (object x))",
        "(family f (object x) (member (> y 0)))",
        "(family f (object x) (member (> x 0)) (colour red))",
        "(type t (cut+ 1 2))",
        "(curve c (param t) (object x y) (map t))",
        "(topology t (carrier (> x 0)))",
    ]
    for text in bad:
        with pytest.raises(ParseError):
            parse_document(text)


def test_mode_is_checked():
    parse_document("(formula f (< x (+ y 1)))", Mode.ODAG)
    with pytest.raises(ParseError):
        parse_document("(formula f (< x (+ y 1)))", Mode.DLO)


def test_graph_type_over_realized():
    doc = parse_document("(type g (graph (affine (+ v1 1)) (realized 2)))")
    assert isinstance(doc.get("g"), Graph), "graph of x + 1 over the point 2"
    assert doc.get("g").arity == 2, "graph types add one coordinate"


def test_command_line_arguments():
    doc = parse_document(DOC)
    assert read_formula_arg(doc, "pos") == doc.get("pos"), "names resolve"
    assert equivalent(read_formula_arg(doc, "(and pos (< x 2))"), parse_formula("(< 0 x 2)")), "inline formulas"
    assert read_type_arg(doc, "right-of-one") == CutPlus(1), "type names resolve"
    assert read_type_arg(doc, "(realized 1/2)") == Realized((Fraction(1, 2),)), "inline types"
    with pytest.raises(ParseError):
        read_type_arg(doc, "pos")


def test_empty_document():
    doc = parse_document("; nothing here\n")
    assert isinstance(doc, Document) and doc.names() == [], "comments only"
