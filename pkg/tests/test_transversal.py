# test_transversal.py - Intersection properties and tame transversals
"""
Tests for consistency and (p, q) queries, disjoint subfamilies, interval
transversals, finite tame transversals and the VC-style probes.
"""

from fractions import Fraction

import pytest

from ominal.cells import AffineFunc
from ominal.config import Budget, BudgetLimits
from ominal.exceptions import PreconditionError, SchemaError
from ominal.families import DefinableFamily, boundary_family, boundary_functions, critical_constants
from ominal.fixtures import interval_endpoints, lift_agreement, mirsky_agreement
from ominal.logic import FALSE, TRUE, Term, eliminate, evaluate, le
from ominal.sexpr import parse_formula
from ominal.transversal import (
    DisjointWitness,
    OrderCut,
    PreorderedSet,
    TameTransversal,
    dd_transversal_remark,
    dual_shatter_lower_bound,
    fft_partition,
    finite_subfamily,
    finite_transversal,
    fip_transversal,
    greedy_stabbing,
    interval_transversal,
    kplus1_interval_analysis,
    lift_meets,
    max_components,
    max_pairwise_disjoint,
    n_consistent,
    order_transversal,
    pq_from_transversal,
    pq_property,
    product_lift,
    venn_count,
    verify_fft,
)
from ominal.types import Graph, MinusInf, PlusInf, Realized


def family(member, index=("t",), objects=("x",), domain="true", name=""):
    return DefinableFamily(parse_formula(member), index, objects, parse_formula(domain), name=name)


RAYS = family("(> x t)", name="rays")
CLOSED_RAYS = family("(>= x t)", name="closed-rays")
UNIT = family("(<= t x (+ t 1))", name="unit")
GAPS = family("(or (<= x t) (>= x (+ t 1)))", name="gaps")
NESTED = family("(<= (- t) x t)", domain="(> t 0)", name="nested")


# ===================== INTERSECTION PATTERNS =====================


def test_n_consistent(crosses):
    F = crosses.get("crosses")
    assert n_consistent(F, 2), "any two crosses meet"
    three = n_consistent(F, 3)
    assert not three and len(three.witness) == 3, "three generic crosses have no common point"
    assert n_consistent(RAYS, 4), "rays are nested"
    with pytest.raises(SchemaError):
        n_consistent(RAYS, 0)


def test_pq_property(crosses):
    F = crosses.get("crosses")
    assert pq_property(F, 2, 2), "(2, 2) is 2-consistency"
    assert not pq_property(F, 3, 3), "three crosses can miss each other"
    assert pq_property(RAYS, 5, 3), "nested families have every (p, q)-property"
    with pytest.raises(SchemaError):
        pq_property(RAYS, 2, 3)


def test_max_pairwise_disjoint(crosses):
    bound = max_pairwise_disjoint(crosses.get("crosses"))
    assert bound.k == 1 and bound.exact, f"crosses pairwise meet, got {bound}"
    assert max_pairwise_disjoint(CLOSED_RAYS).k == 1, "nested rays"
    spaced = family("(<= t x (+ t 1))", domain="(<= 0 t 3)")
    bound = max_pairwise_disjoint(spaced)
    assert bound.k == 3 and bound.exact, f"[0,1], [3/2,5/2], [3,4] is the most, got {bound}"
    assert len(bound.witness) == 3, "witness lists the disjoint members"
    lo_hi = sorted(interval_endpoints(spaced, u) for u in bound.witness)
    assert all(a[1] < b[0] for a, b in zip(lo_hi, lo_hi[1:])), f"witness members overlap: {lo_hi}"


def test_max_pairwise_disjoint_ten_shifts():
    shifts = family("(<= t x (+ t 1))", domain="(<= 0 t 10)", name="shifts")
    bound = max_pairwise_disjoint(shifts)
    assert bound.k == 10 and bound.exact, f"[t, t+1] for t in [0, 10] has exactly 10 disjoint members, got {bound}"


def test_max_pairwise_disjoint_unbounded():
    bound = max_pairwise_disjoint(UNIT, k_max=3)
    assert bound.k == 3 and not bound.exact, "unit intervals along the line never run out"


def test_finite_subfamily():
    sub = finite_subfamily(UNIT, [(0,), (5,)])
    assert sub.index_vars == ("i",), "re-indexed by position"
    assert evaluate(sub.fiber((1,)), {"x": Fraction(11, 2)}), "second member is [5, 6]"
    assert max_pairwise_disjoint(sub).k == 2, "two disjoint members"


# ===================== INTERVAL TRANSVERSALS =====================


def test_interval_transversal_single_point():
    F = family("(<= t x (+ t 1))", domain="(<= 0 t 1)")
    T = interval_transversal(F)
    assert T.types == (Realized((1,)),), f"only 1 lies in every member, got {T.types}"
    assert len(T.conditions) == 1, "membership conditions are attached"


def test_interval_transversal_nested():
    T = interval_transversal(NESTED)
    assert T.types == (Realized((0,)),), f"every [-t, t] contains 0, got {T.types}"


def test_interval_transversal_two_types():
    F = family("(<= t x (+ t 1))", domain="(or (= t 0) (= t 5))")
    T = interval_transversal(F)
    assert len(T) == 2, f"two far apart intervals need two types, got {T.types}"
    assert verify_fft(F, T), "transversal covers the family"


def test_interval_transversal_unbounded():
    assert interval_transversal(family("(<= t x (* 2 t))", domain="(> t 0)"), k_max=3) is None, "[t, 2t] chains"


def test_interval_transversal_rejects_open_members():
    with pytest.raises(SchemaError):
        interval_transversal(family("(< t x (+ t 1))", domain="(<= 0 t 1)"))
    with pytest.raises(SchemaError):
        interval_transversal(GAPS)


def test_greedy_stabbing():
    assert greedy_stabbing([(0, 1), (Fraction(1, 2), 2), (3, 4)]) == [1, 4], "two points suffice"
    assert greedy_stabbing([]) == [], "nothing to stab"
    assert len(greedy_stabbing([(0, 1), (2, 3), (4, 5)])) == 3, "three disjoint intervals"


# ===================== TAME TRANSVERSALS =====================


def test_verify_fft():
    assert verify_fft(RAYS, TameTransversal((PlusInf(),))), "rays lie in +inf"
    missed = verify_fft(RAYS, TameTransversal((MinusInf(),)))
    assert not missed and missed.witness is not None, "rays miss -inf"
    assert verify_fft(GAPS, TameTransversal((PlusInf(),))), "[t + 1, +inf) lies in +inf"


def test_order_transversal():
    line = PreorderedSet.line("x")
    assert line.check(), "<= is a total preorder"
    T = order_transversal(line, CLOSED_RAYS, 1)
    assert isinstance(T, TameTransversal) and T.types == (PlusInf(),), f"closed rays lie in +inf, got {T}"
    T = order_transversal(line, GAPS, 2)
    assert isinstance(T, TameTransversal) and T.types == (PlusInf(),), f"right rays of the gaps, got {T}"
    with pytest.raises(SchemaError):
        order_transversal(line, GAPS, 1)


REVERSED = PreorderedSet(TRUE, le("y", "x"), ("x",), ("y",))
LEX = PreorderedSet(TRUE, parse_formula("(or (< x1 y1) (and (= x1 y1) (<= x2 y2)))"), ("x1", "x2"), ("y1", "y2"))
FIRST = PreorderedSet(TRUE, le("x1", "y1"), ("x1", "x2"), ("y1", "y2"))
LEFT_RAYS = family("(<= x t)", name="left-rays")
ON_AXIS = family("(and (= a 0) (= b t))", objects=("a", "b"), name="on-axis")


def test_order_transversal_follows_the_relation():
    assert REVERSED.check(), ">= is a total preorder"
    T = order_transversal(PreorderedSet.line("x"), LEFT_RAYS, 1)
    assert T.types == (MinusInf(),), f"left rays lie in -inf, got {T}"
    T = order_transversal(REVERSED, LEFT_RAYS, 1)
    assert [cut.position for cut in T.types] == ["top"], f"left rays reach the top of the reversed line, got {T}"
    assert verify_fft(LEFT_RAYS, T), "the cut covers every ray"


def test_reversed_cuts_swap_sides():
    left = parse_formula("(< x 0)")
    assert eliminate(OrderCut(REVERSED, "above", (0,)).condition(left, ("x",))) == TRUE, "above 0 reversed is 0-"
    assert eliminate(OrderCut(REVERSED, "below", (0,)).condition(left, ("x",))) == FALSE, "below 0 reversed is 0+"
    assert OrderCut(REVERSED, "at", (0,)).proper(), "a point of the carrier gives a proper cut"
    unit = PreorderedSet(parse_formula("(<= 0 x 1)"), le("x", "y"), ("x",), ("y",))
    assert not OrderCut(unit, "top").proper(), "above the maximum 1 only the empty set remains"
    with pytest.raises(SchemaError):
        OrderCut(REVERSED, "beside", (0,))


def test_order_transversal_lexicographic():
    assert LEX.check(), "lexicographic order is a total preorder"
    up = family("(or (< t a) (and (= t a) (<= 0 b)))", objects=("a", "b"), name="lex-up")
    T = order_transversal(LEX, up, 1)
    assert [cut.position for cut in T.types] == ["top"], f"lexicographic up-rays reach the top, got {T}"
    assert verify_fft(up, T), "the top cut covers every up-ray"


def test_order_transversal_depends_on_the_preorder():
    T = order_transversal(FIRST, ON_AXIS, 1)
    assert isinstance(T, TameTransversal), f"points on one vertical line are one class of the first coordinate, got {T}"
    (cut,) = T.types
    assert cut.position == "at" and cut.point[0] == 0, f"the class of x1 = 0, got {cut}"
    assert verify_fft(ON_AXIS, T), "the class meets every point"
    out = order_transversal(LEX, ON_AXIS, 1, Budget(BudgetLimits(disjoint_probe=3)))
    assert isinstance(out, DisjointWitness), f"lexicographically the points stay apart, got {out}"
    assert len(set(out.take(4))) == 4, "distinct disjoint members"


def test_order_transversal_rejects_bad_orders():
    not_total = PreorderedSet(TRUE, parse_formula("(and (<= x1 y1) (<= x2 y2))"), ("x1", "x2"), ("y1", "y2"))
    with pytest.raises(SchemaError):
        order_transversal(not_total, ON_AXIS, 1)
    with pytest.raises(SchemaError):
        order_transversal(REVERSED, GAPS, 1)


def test_order_transversal_disjoint_witness():
    budget = Budget(BudgetLimits(disjoint_probe=3))
    out = order_transversal(PreorderedSet.line("x"), UNIT, 1, budget)
    assert isinstance(out, DisjointWitness), f"spaced unit intervals give a disjoint subfamily, got {out}"
    points = out.take(5)
    ends = sorted(interval_endpoints(UNIT, u) for u in points)
    assert all(a[1] < b[0] for a, b in zip(ends, ends[1:])), f"produced members overlap: {ends}"


def test_max_components():
    assert max_components(GAPS) == 2, "a line minus an interval has two pieces"
    assert max_components(UNIT) == 1, "intervals are connected"


def test_fip_transversal(crosses):
    with pytest.raises(PreconditionError):
        fip_transversal(crosses.get("crosses"))
    T = fip_transversal(GAPS)
    assert T.types == (PlusInf(),), f"gaps are covered by +inf, got {T.types}"


@pytest.mark.slow
def test_fip_transversal_in_the_plane(boxes):
    boxfam = boxes.get("boxfam", "family")
    T = fip_transversal(boxfam)
    assert len(T) == 1 and verify_fft(boxfam, T), "quadrants go to one type at (+inf, +inf)"


SHIFTED = DefinableFamily(
    parse_formula("(or (and (= s 0) (or (= y (+ x a)) (= y (- x a)))) (and (= s 1) (or (= y (+ x a)) (= y (+ x (* 2 a))))))"),
    ("a", "s"),
    ("x", "y"),
    parse_formula("(and (= a 1/2) (or (= s 0) (= s 1)))"),
    name="shifted",
)
HALF_UP = AffineFunc(Term.var("v1") + Term.constant(Fraction(1, 2)))


def test_boundary_family_keeps_index_dependent_lines():
    fixed = boundary_functions(SHIFTED, critical_constants(SHIFTED))
    assert HALF_UP not in fixed, "y = x + a is not index-free"
    H = boundary_family(SHIFTED)
    found = {H.at((j, Fraction(1, 2), s)) for j in range(len(H.roots)) for s in (0, 1)}
    assert HALF_UP in found, f"y = x + 1/2 is the boundary at a = 1/2, got {found}"
    assert verify_fft(SHIFTED, TameTransversal((Graph(HALF_UP, PlusInf()),))), "every member contains y = x + 1/2"


@pytest.mark.slow
def test_fip_transversal_index_dependent_boundary():
    T = fip_transversal(SHIFTED, Budget(BudgetLimits(candidates=200)))
    assert verify_fft(SHIFTED, T), "certified cover"
    assert len(T) == 1 and T.types[0].f == HALF_UP, f"the shared line y = x + 1/2, got {T.types}"


def test_fft_partition(crosses):
    out = fft_partition(RAYS, 3, 2)
    assert out.transversal.types == (PlusInf(),), "rays form one class"
    assert len(out.classes) == 1, "single class"
    out = fft_partition(GAPS, 3, 2)
    assert len(out.transversal) == 1, "one type covers the gaps"
    with pytest.raises(PreconditionError):
        fft_partition(crosses.get("crosses"), 3, 3)
    with pytest.raises(PreconditionError):
        fft_partition(RAYS, 2, 1)


def test_dd_transversal_remark():
    verdict = dd_transversal_remark(RAYS, TameTransversal((MinusInf(), PlusInf())))
    assert verdict and verdict.witness == PlusInf(), "a downward directed family lies in one type"
    assert pq_from_transversal(TameTransversal((MinusInf(), PlusInf())), 2) == (5, 3), "(n*l + 1, n + 1)"


# ===================== VC CONSTRUCTIONS =====================


def test_product_lift():
    assert product_lift(UNIT, 1) is UNIT, "l = 1 leaves the family unchanged"
    lifted = product_lift(UNIT, 2)
    assert lifted.object_vars == ("x_1", "x_2"), f"unexpected coordinates {lifted.object_vars}"
    indices = [(0,), (Fraction(5, 2),), (5,)]
    assert not lift_meets(UNIT, 2, indices), "three disjoint intervals need three points"
    assert lift_meets(UNIT, 3, indices), "three points suffice"
    assert finite_transversal(UNIT, indices, 2) is None, "brute force agrees at l = 2"
    assert len(finite_transversal(UNIT, indices, 3)) == 3, "brute force agrees at l = 3"


def test_venn_count(crosses):
    F = crosses.get("crosses")
    assert venn_count(F, [(0, 0), (1, 1)]) == 3, "two generic crosses"
    assert venn_count(F, [(0, 0)]) == 1, "a single set"
    assert venn_count(RAYS, [(0,), (1,)]) == 2, "two nested rays"


def test_dual_shatter_lower_bound(crosses, rng):
    F = crosses.get("crosses")
    assert dual_shatter_lower_bound(F, 2, trials=5, rng=rng) >= 3, "C(2, 2) + 2"
    assert dual_shatter_lower_bound(F, 3, trials=5, rng=rng) >= 6, "C(3, 2) + 3"
    intervals = family("(< u x v)", index=("u", "v"), domain="(< u v)")
    assert dual_shatter_lower_bound(intervals, 2, trials=10, rng=rng) <= 5, "intervals have dual VC dimension 1"


def test_kplus1_interval_analysis():
    out = kplus1_interval_analysis(CLOSED_RAYS, 1)
    assert out.type == PlusInf(), f"rays give the type +inf, got {out}"
    out = kplus1_interval_analysis(NESTED, 1)
    assert out.points == (0,), f"0 meets every [-t, t], got {out}"
    out = kplus1_interval_analysis(GAPS, 2)
    assert out.type == PlusInf(), f"gaps give the type +inf, got {out}"
    with pytest.raises(SchemaError):
        kplus1_interval_analysis(GAPS, 1)


# ===================== FINITE ORACLES =====================


def test_mirsky_agreement(rng):
    table = mirsky_agreement(families=3, points=4, rng=rng)
    assert len(table) == 3, "one row per family"
    assert table["agree"].all(), f"disagreement:\n{table}"


def test_lift_agreement(rng):
    F = family("(<= t x (+ t 1))", domain="(<= -2 t 2)", name="unit")
    table = lift_agreement(F, instances=4, size=3, l=2, rng=rng)
    assert table["agree"].all(), f"lift and brute force disagree:\n{table}"


@pytest.mark.slow
def test_mirsky_agreement_full(rng):
    table = mirsky_agreement(families=30, points=30, rng=rng)
    assert len(table) == 30, "one row per family"
    assert table["agree"].all(), f"disagreement:\n{table}"


@pytest.mark.slow
def test_lift_agreement_full(rng):
    F = family("(<= t x (+ t 1))", domain="(<= -2 t 2)", name="unit")
    table = lift_agreement(F, instances=20, size=3, l=2, rng=rng)
    assert len(table) == 20, "one row per instance"
    assert table["agree"].all(), f"lift and brute force disagree:\n{table}"
