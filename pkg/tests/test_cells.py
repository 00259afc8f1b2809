# test_cells.py - Cell decomposition
"""
Tests for cylindrical decompositions, their certificates and the
derived operations (dimension, projection, extrema, frontier).
"""

from fractions import Fraction

import pytest

from ominal.cells import (
    MINUS_INF,
    PLUS_INF,
    BandLayer,
    Extremum,
    GraphLayer,
    certify,
    decompose,
    dimension,
    frontier,
    infimum,
    project,
    supremum,
    uniform_decompose,
)
from ominal.exceptions import ArityMismatch
from ominal.logic import FALSE, conj, disj, eq, equivalent, evaluate, is_satisfiable, lt
from ominal.sexpr import parse_formula


def test_open_interval_gives_five_cells():
    D = decompose([parse_formula("(< 0 x 1)")], variables=("x",))
    assert len(D.cells) == 5, f"expected 5 cells, got {len(D.cells)}"
    assert [c.schema() for c in D.cells] == ["B", "G", "B", "G", "B"], "cells should alternate band/graph"
    inside = D.cells_in(parse_formula("(< 0 x 1)"))
    assert len(inside) == 1 and inside[0].sample == (Fraction(1, 2),), "only the middle band lies inside"


def test_diagonal_in_the_plane():
    D = decompose([eq("v2", "v1")], n=2)
    assert len(D.cells) == 3, f"expected 3 cells over the line, got {len(D.cells)}"
    schemas = sorted(c.schema() for c in D.cells)
    assert schemas == ["BB", "BB", "BG"], f"unexpected cell shapes {schemas}"
    assert certify(D).ok, f"certificate failed: {certify(D).failures}"


def test_cells_partition_and_sample_inside():
    f = conj(lt(0, "x"), lt("x", "y"))
    D = decompose([f], variables=("x", "y"))
    report = D.certify()
    assert report.disjoint and report.covering, "cells should partition the plane"
    assert report.compatible and report.projections, f"certificate failures: {report.failures}"
    for cell in D.cells:
        assert evaluate(cell.formula(), cell.sample, D.variables), f"sample outside its cell {cell.schema()}"
    assert any(evaluate(f, c.sample, D.variables) for c in D.cells), "the target meets some cell"


def test_first_layer_has_no_free_parameters():
    D = decompose([lt("x", "y")], variables=("x", "y"))
    for cell in D.cells:
        first = cell.layers[0]
        assert isinstance(first, BandLayer) and first.lower is MINUS_INF and first.upper is PLUS_INF, (
            "x is unconstrained, so the base is the whole line"
        )


def test_arity_checks():
    with pytest.raises(ArityMismatch):
        decompose([lt("x", "y")], variables=("x",))
    with pytest.raises(ArityMismatch):
        decompose([lt("x", 0)], n=2, variables=("x",))


def test_dimension_examples():
    assert dimension(eq("x", "y"), ("x", "y")) == 1, "a line in the plane"
    assert dimension(conj(lt(0, "x"), lt("x", 1), lt(0, "y"), lt("y", 1)), ("x", "y")) == 2, "open square"
    assert dimension(conj(eq("x", 0), eq("y", 1)), ("x", "y")) == 0, "a point"
    assert dimension(FALSE, ("x",)) == -1, "the empty set"
    assert dimension(disj(eq("x", 0), lt(1, "x")), ("x",)) == 1, "largest piece decides"


def test_project():
    f = conj(lt(0, "x"), lt("x", 1), eq("y", "x"))
    assert equivalent(project(f, 1, ("x", "y")), parse_formula("(< 0 x 1)")), "projection of a segment"
    with pytest.raises(ArityMismatch):
        project(f, 2, ("x", "y"))


def test_extrema():
    assert supremum(parse_formula("(< 0 x 1)")) == Extremum(Fraction(1), False), "open upper end"
    assert supremum(parse_formula("(and (< 0 x) (<= x 1))")) == Extremum(Fraction(1), True), "closed upper end"
    assert infimum(parse_formula("(< 0 x)")) == Extremum(Fraction(0), False), "open lower end"
    assert supremum(parse_formula("(< 0 x)")) == Extremum(PLUS_INF, False), "unbounded above"
    assert infimum(parse_formula("(< x 5)")) == Extremum(MINUS_INF, False), "unbounded below"
    assert supremum(FALSE, "x") is None, "empty set has no supremum"
    with pytest.raises(ArityMismatch):
        supremum(lt("x", "y"), "x")


def test_frontier():
    out = frontier(parse_formula("(< 0 x 1)"), ("x",))
    assert equivalent(out, disj(eq("x", 0), eq("x", 1))), f"frontier should be the endpoints, got {out}"
    assert not is_satisfiable(frontier(parse_formula("(<= 0 x 1)"), ("x",))), "closed interval has empty frontier"


def test_uniform_fibers():
    U = uniform_decompose(parse_formula("(< u v (+ u 1))"), ("u",), ("v",))
    fiber = U.fiber_cells((2,))
    assert len(fiber) == 5, f"expected 5 cells in the fiber, got {len(fiber)}"
    bands = [c for c in fiber if isinstance(c.layers[0], BandLayer)]
    graphs = [c for c in fiber if isinstance(c.layers[0], GraphLayer)]
    assert len(bands) == 3 and len(graphs) == 2, "two boundary points and three bands"
    assert any(equivalent(c.formula(), parse_formula("(< 2 v 3)")) for c in fiber), "the member at u = 2"
