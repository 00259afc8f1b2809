# test_topology.py - Definable topologies, compactness and curves
"""
Tests for bases, closure and interior, the compactness characterizations,
curve limits and the T1 topology on the half plane below the diagonal.
"""

import pytest

from ominal.cells import PLUS_INF
from ominal.exceptions import ArityMismatch, PreconditionError, SchemaError
from ominal.families import DefinableFamily
from ominal.logic import TRUE, conj, eq, equivalent, is_satisfiable, lt
from ominal.sexpr import parse_formula
from ominal.topology import (
    CHAR_CURVES,
    CHAR_DD_CLOSED,
    CHAR_TYPE_LIMIT,
    LEFT,
    RIGHT,
    DefinableCurve,
    DefinableTopology,
    a_topology as a_topology_space,
    closure,
    compactness_probe_suite,
    curve_limit,
    dd_closed_family_has_common_point,
    euclidean_compact,
    euclidean_topology,
    interior,
    is_basis,
    is_closed,
    is_closed_family,
    is_hausdorff_probe,
    is_t1,
    type_limit_set,
    uniform_curves_complete,
)
from ominal.types import CutPlus, PlusInf

LINE = euclidean_topology(TRUE, ("x",))
PLANE = euclidean_topology(TRUE, ("x", "y"))
UNIT = euclidean_topology(parse_formula("(<= 0 x 1)"), ("x",))


# ===================== BASES =====================


def test_euclidean_bases(boxes):
    assert is_basis(LINE), "open intervals form a basis"
    assert is_basis(boxes.get("square", "topology")), "open boxes cut to the square form a basis"


def test_closed_intervals_form_a_basis():
    intervals = DefinableFamily(parse_formula("(<= s x t)"), ("s", "t"), ("x",), parse_formula("(<= s t)"))
    assert is_basis(DefinableTopology(TRUE, intervals)), "closed intervals generate a finer topology"


def test_basis_must_stay_in_carrier():
    leaking = DefinableFamily(parse_formula("(< s x t)"), ("s", "t"), ("x",), parse_formula("(< s t)"))
    verdict = is_basis(DefinableTopology(parse_formula("(> x 0)"), leaking))
    assert not verdict and "carrier" in verdict.detail, f"unexpected verdict {verdict}"


def test_carrier_schema():
    with pytest.raises(SchemaError):
        DefinableTopology(parse_formula("(> z 0)"), LINE.basis)


# ===================== CLOSURE AND INTERIOR =====================


def test_closure_and_interior():
    assert equivalent(closure(LINE, parse_formula("(< 0 x 1)")), parse_formula("(<= 0 x 1)")), "closure of (0, 1)"
    assert equivalent(interior(LINE, parse_formula("(<= 0 x 1)")), parse_formula("(< 0 x 1)")), "interior of [0, 1]"
    assert is_closed(LINE, parse_formula("(<= 0 x 1)")), "[0, 1] is closed"
    assert not is_closed(LINE, parse_formula("(< 0 x 1)")), "(0, 1) is not closed"
    assert equivalent(closure(UNIT, parse_formula("(< 0 x 1)")), parse_formula("(<= 0 x 1)")), "subspace closure"
    with pytest.raises(PreconditionError):
        closure(UNIT, parse_formula("(< 1 x 2)"))


def test_is_closed_family(boxes):
    assert is_closed_family(LINE, boxes.get("closed-rays", "family")), "[t, +inf) are closed"
    open_rays = DefinableFamily(parse_formula("(> x t)"), ("t",), ("x",))
    assert not is_closed_family(LINE, open_rays), "(t, +inf) are not closed"
    with pytest.raises(ArityMismatch):
        is_closed_family(PLANE, open_rays)


# ===================== COMPACTNESS =====================


def test_dd_closed_family_common_point(boxes):
    square = boxes.get("square", "topology")
    found = dd_closed_family_has_common_point(square, boxes.get("shrinking", "family"))
    assert found and found.witness == (0, 0), f"[0, t]^2 shrink to the origin, got {found}"
    line = boxes.get("line", "topology")
    assert not dd_closed_family_has_common_point(line, boxes.get("rays-in-line", "family")), "rays escape"
    with pytest.raises(PreconditionError):
        dd_closed_family_has_common_point(line, DefinableFamily(parse_formula("(!= x t)"), ("t",), ("x",)))


def test_type_limit_set():
    limit = type_limit_set(UNIT, CutPlus(0))
    assert equivalent(limit, eq("x", 0)), f"0+ converges to 0 in [0, 1], got {limit}"
    assert not is_satisfiable(type_limit_set(LINE, PlusInf())), "+inf has no limit in the line"
    with pytest.raises(PreconditionError):
        type_limit_set(UNIT, PlusInf())


def test_euclidean_compact():
    assert euclidean_compact(parse_formula("(<= 0 x 1)")), "[0, 1] is compact"
    assert not euclidean_compact(parse_formula("(and (< 0 x) (<= x 1))")), "(0, 1] is not closed"
    assert not euclidean_compact(parse_formula("(<= 0 x)")), "[0, +inf) is unbounded"


@pytest.mark.slow
def test_probe_suite_square(boxes):
    square = boxes.get("square", "topology")
    report = compactness_probe_suite(square, boxes.get("square-probes", "battery"))
    assert report.consistent, f"characterizations disagree:\n{report.table}"
    assert report.summary[CHAR_DD_CLOSED] is True, "the square is definably compact"
    assert report.summary[CHAR_CURVES] is True, "curves in the square converge"


def test_probe_suite_line(boxes):
    line = boxes.get("line", "topology")
    report = compactness_probe_suite(line, boxes.get("line-probes", "battery"))
    assert report.consistent, f"characterizations disagree:\n{report.table}"
    assert report.summary[CHAR_DD_CLOSED] is False, "closed rays have empty intersection"
    assert report.summary[CHAR_TYPE_LIMIT] is False, "+inf has no limit"
    assert list(report.table.columns) == ["characterization", "item", "verdict", "detail"], "report columns"


# ===================== CURVES =====================


def test_curve_limit_euclidean():
    gamma = DefinableCurve.from_terms("t", ("t", 0), ("x", "y"), 0, 1)
    at_zero = curve_limit(PLANE, gamma, LEFT)
    assert equivalent(at_zero, conj(eq("x", 0), eq("y", 0))), f"(t, 0) -> (0, 0), got {at_zero}"
    at_one = curve_limit(PLANE, gamma, RIGHT)
    assert equivalent(at_one, conj(eq("x", 1), eq("y", 0))), f"(t, 0) -> (1, 0), got {at_one}"
    escape = DefinableCurve.from_terms("t", ("t",), ("x",), 0, PLUS_INF)
    assert not is_satisfiable(curve_limit(LINE, escape, RIGHT)), "t -> +inf has no limit"
    with pytest.raises(SchemaError):
        curve_limit(LINE, escape, "middle")


def test_curve_checks():
    with pytest.raises(SchemaError):
        DefinableCurve.from_terms("t", ("t",), ("x",), PLUS_INF, 0)
    not_a_curve = DefinableCurve(parse_formula("(<= x t)"), "t", ("x",), 0, 1)
    with pytest.raises(SchemaError):
        curve_limit(LINE, not_a_curve)
    outside = DefinableCurve.from_terms("t", ("t",), ("x",), 0, 2)
    with pytest.raises(PreconditionError):
        curve_limit(UNIT, outside)


def test_uniform_curves_euclidean():
    family = DefinableCurve.from_terms("t", ("t", "c"), ("x", "y"), 0, 1, index_vars=("c",))
    assert uniform_curves_complete(PLANE, family), "bounded segments converge at both ends"
    with pytest.raises(ArityMismatch):
        curve_limit(PLANE, family)
    rays = DefinableCurve.from_terms("t", ("t",), ("x",), "c", PLUS_INF, index_vars=("c",))
    verdict = uniform_curves_complete(LINE, rays)
    assert not verdict and verdict.witness[1] == RIGHT, "rays escape at the right end"


# ===================== THE A-TOPOLOGY =====================


def test_a_topology_basis():
    space, _ = a_topology_space()
    assert is_basis(space), "the basic sets generate a topology on y < x"


def test_a_topology_rays_have_no_common_point():
    space, rays = a_topology_space()
    assert is_closed_family(space, rays), "X & (M x [u, +inf)) are closed"
    verdict = dd_closed_family_has_common_point(space, rays)
    assert not verdict, "the closed downward directed rays have empty intersection"


def test_a_topology_separation():
    space, _ = a_topology_space()
    assert is_t1(space, [(1, 0), (0, -1)]), "points are closed"
    assert not is_hausdorff_probe(space, [(1, 0), (2, 0)]), "points on one horizontal line cannot be separated"


@pytest.mark.slow
def test_a_topology_curve_limits(a_topology):
    space = a_topology.get("A", "topology")
    horizontal = curve_limit(space, a_topology.get("horizontal-at-zero", "curve"), RIGHT)
    assert equivalent(horizontal, conj(eq("y", 0), lt(0, "x"))), f"(t, 0) -> (M x {{0}}) & X, got {horizontal}"
    vertical = curve_limit(space, a_topology.get("vertical-at-zero", "curve"), LEFT)
    assert equivalent(vertical, lt("y", "x")), f"(0, t) -> X as t -> -inf, got {vertical}"
