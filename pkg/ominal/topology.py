# topology.py - Definable topologies, limits and compactness probes
"""
Definable topological spaces given by a definable basis.

Contains:
- DefinableTopology / DefinableCurve: carrier + basis family; curves (or uniform curve families)
- is_basis, closure, interior, is_closed, is_closed_family: first-order, via quantifier elimination
- euclidean_topology, a_topology: the box topology and a curve-compact space that is not definably compact
- dd_closed_family_has_common_point, type_limit_set, curve_limit, uniform_curves_complete
- euclidean_compact, is_t1, is_hausdorff_probe
- compactness_probe_suite: one pandas row per battery item and characterization
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import pandas as pd

from ominal.cells import MINUS_INF, PLUS_INF, Infinity, decompose
from ominal.config import ensure_budget
from ominal.exceptions import ArityMismatch, PreconditionError, SchemaError
from ominal.families import (
    DefinableFamily,
    as_family,
    extend_to_definable_type,
    is_downward_directed,
    sat_within,
)
from ominal.logic import (
    TRUE,
    Formula,
    Mode,
    Term,
    Verdict,
    as_mode,
    as_term,
    atoms,
    conj,
    disj,
    eliminate,
    entails,
    eq,
    equivalent,
    exists,
    forall,
    free_vars,
    fresh,
    gt,
    implies,
    le,
    lt,
    neg,
    rename,
    substitute,
)
from ominal.transversal import pq_property
from ominal.types import DefinableType, membership_condition, type_member

logger = logging.getLogger(__name__)

LEFT = "left"
RIGHT = "right"
ENDPOINTS = (LEFT, RIGHT)


# ===================== SPACES =====================


@dataclass(frozen=True)
class DefinableTopology:
    """
    The topology on `carrier` generated by the members of `basis`.

    The carrier is a formula in the basis object variables.
    """

    carrier: Formula
    basis: DefinableFamily
    name: str = ""

    def __post_init__(self):
        extra = free_vars(self.carrier) - set(self.basis.object_vars)
        if extra:
            raise SchemaError(f"carrier uses {sorted(extra)} outside {self.basis.object_vars}")

    @property
    def object_vars(self) -> tuple[str, ...]:
        return self.basis.object_vars

    @property
    def mode(self) -> Mode:
        return self.basis.mode

    @property
    def label(self) -> str:
        return self.name or "space"

    def carrier_at(self, xs) -> Formula:
        return rename(self.carrier, dict(zip(self.object_vars, xs)))

    def basic(self, us, xs) -> Formula:
        return self.basis.instance(us, xs)

    def over(self, A) -> Formula:
        """A set (formula over these or the default variables) written over the space's variables."""
        return as_family(A, self.object_vars).instance((), self.object_vars)


def euclidean_topology(X: Formula, variables, mode=Mode.ODAG) -> DefinableTopology:
    """Subspace topology of X with the open boxes as basis."""
    variables = tuple(variables)
    lows, highs = [], []
    for i in range(1, len(variables) + 1):
        a, b = f"a{i}", f"b{i}"
        if a in variables or b in variables:
            a, b = fresh("a"), fresh("b")
        lows.append(a)
        highs.append(b)
    box = conj(*(conj(lt(a, x), lt(x, b)) for a, x, b in zip(lows, variables, highs)))
    index = tuple(v for pair in zip(lows, highs) for v in pair)
    domain = conj(*(lt(a, b) for a, b in zip(lows, highs)))
    basis = DefinableFamily(conj(box, X), index, variables, domain, name="boxes", mode=mode)
    return DefinableTopology(X, basis, name="euclidean")


def a_topology(mode=Mode.ODAG) -> tuple[DefinableTopology, DefinableFamily]:
    """
    A T1, non-Hausdorff topology on X = {(x, y) : y < x} in (M, <).

    Basic sets, for y1 < y2 < y3 < x1 < x2 < x3:
        {y < y1, y < x} u {y2 < y < y3 and (y < x < y3 or x1 < x < x2 or x3 < x)}

    Returns:
        (space, family): the family {X & (M x [u, +inf))} is downward directed,
        closed and has empty intersection
    """
    x, y = "x", "y"
    x1, x2, x3, y1, y2, y3 = "x1", "x2", "x3", "y1", "y2", "y3"
    lower_part = conj(lt(y, y1), lt(y, x))
    band = conj(lt(y2, y), lt(y, y3), disj(conj(lt(y, x), lt(x, y3)), conj(lt(x1, x), lt(x, x2)), lt(x3, x)))
    domain = conj(lt(y1, y2), lt(y2, y3), lt(y3, x1), lt(x1, x2), lt(x2, x3))
    basis = DefinableFamily(disj(lower_part, band), (x1, x2, x3, y1, y2, y3), (x, y), domain, name="A", mode=mode)
    space = DefinableTopology(lt(y, x), basis, name="a-topology")
    upper_rays = DefinableFamily(conj(le("u", y), lt(y, x)), ("u",), (x, y), name="upper-rays", mode=mode)
    return space, upper_rays


def is_basis(tau: DefinableTopology, budget=None) -> Verdict:
    """
    Basic sets lie in X, cover X, and around every point of an intersection of two
    basic sets some basic set lies inside the intersection.
    """
    budget = ensure_budget(budget)
    B, mode = tau.basis, tau.mode
    xs = tau.object_vars
    u, w, z = B.fresh_index(), B.fresh_index(), B.fresh_index()
    ys = B.fresh_objects()
    outside = conj(B.domain_at(u), tau.basic(u, xs), neg(tau.carrier))
    bad = sat_within(outside, mode, budget)
    if bad:
        return Verdict(False, bad.point(u), "a basic set leaves the carrier")
    uncovered = conj(tau.carrier, neg(exists(u, conj(B.domain_at(u), tau.basic(u, xs)))))
    bad = sat_within(uncovered, mode, budget)
    if bad:
        return Verdict(False, bad.point(xs), "a point of the carrier is in no basic set")
    inside = forall(ys, implies(tau.basic(z, ys), conj(tau.basic(u, ys), tau.basic(w, ys))))
    refined = exists(z, conj(B.domain_at(z), tau.basic(z, xs), inside))
    query = conj(B.domain_at(u), B.domain_at(w), tau.basic(u, xs), tau.basic(w, xs), neg(refined))
    bad = sat_within(query, mode, budget)
    if bad:
        return Verdict(False, (bad.point(u), bad.point(w), bad.point(xs)), "an intersection has no basic set around a point")
    return Verdict(True)


# ===================== CLOSURE AND INTERIOR =====================


def _closure_formula(tau: DefinableTopology, A: Formula) -> Formula:
    """x in X such that every basic set around x meets A; A may carry parameters."""
    B = tau.basis
    u, ys = B.fresh_index(), B.fresh_objects()
    xs = tau.object_vars
    meets = exists(ys, conj(tau.basic(u, ys), rename(A, dict(zip(xs, ys)))))
    return conj(tau.carrier, forall(u, implies(conj(B.domain_at(u), tau.basic(u, xs)), meets)))


def _interior_formula(tau: DefinableTopology, A: Formula) -> Formula:
    B = tau.basis
    u, ys = B.fresh_index(), B.fresh_objects()
    xs = tau.object_vars
    inside = forall(ys, implies(tau.basic(u, ys), rename(A, dict(zip(xs, ys)))))
    return conj(tau.carrier, exists(u, conj(B.domain_at(u), tau.basic(u, xs), inside)))


def _require_subset(tau: DefinableTopology, A: Formula, what="set"):
    if not entails(A, tau.carrier, tau.mode):
        raise PreconditionError(f"{what} is not contained in the carrier of {tau.label}")


def closure(tau: DefinableTopology, A) -> Formula:
    """Quantifier-free closure of A in the space."""
    A = tau.over(A)
    _require_subset(tau, A)
    return eliminate(_closure_formula(tau, A), tau.mode)


def interior(tau: DefinableTopology, A) -> Formula:
    """Quantifier-free interior of A in the space."""
    A = tau.over(A)
    _require_subset(tau, A)
    return eliminate(_interior_formula(tau, A), tau.mode)


def is_closed(tau: DefinableTopology, A) -> bool:
    return entails(closure(tau, A), tau.over(A), tau.mode)


def is_closed_family(tau: DefinableTopology, F: DefinableFamily, budget=None) -> Verdict:
    """Every member is closed, decided by one query in the index."""
    budget = ensure_budget(budget)
    if F.object_arity != len(tau.object_vars):
        raise ArityMismatch(f"family of arity {F.object_arity} in a space of arity {len(tau.object_vars)}")
    member = F.instance(None, tau.object_vars)
    leaves = sat_within(conj(F.domain, member, neg(tau.carrier)), tau.mode, budget)
    if leaves:
        raise PreconditionError(f"a member of {F.label} leaves the carrier", leaves.point(F.index_vars))
    bad = sat_within(conj(F.domain, _closure_formula(tau, member), neg(member)), tau.mode, budget)
    if bad:
        return Verdict(False, bad.point(F.index_vars), "member is not closed")
    return Verdict(True)


# ===================== COMPACTNESS =====================


def dd_closed_family_has_common_point(tau: DefinableTopology, F: DefinableFamily, budget=None) -> Verdict:
    """
    A downward directed family of nonempty closed sets has a common point.

    Raises:
        PreconditionError: F is not downward directed, or a member is not closed
    """
    budget = ensure_budget(budget)
    dd = is_downward_directed(F, budget)
    if not dd:
        raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    closed = is_closed_family(tau, F, budget)
    if not closed:
        raise PreconditionError(f"{F.label} has a member that is not closed", closed.witness)
    xs = tau.object_vars
    common = conj(tau.carrier, forall(F.index_vars, implies(F.domain, F.instance(None, xs))))
    found = sat_within(common, tau.mode, budget)
    if found:
        return Verdict(True, found.point(xs))
    return Verdict(False, detail="empty intersection")


def type_limit_set(tau: DefinableTopology, p: DefinableType) -> Formula:
    """
    Points lying in every basic closed set that belongs to p.

    Raises:
        PreconditionError: the carrier is not in p
    """
    xs = tau.object_vars
    if not type_member(p, tau.carrier, xs, tau.mode):
        raise PreconditionError(f"{tau.label} is not in {p}")
    B = tau.basis
    u = B.fresh_index()
    basic_closed = conj(tau.carrier, neg(tau.basic(u, xs)))
    in_type = membership_condition(p, basic_closed, xs, tau.mode)
    limit = conj(tau.carrier, forall(u, implies(conj(B.domain_at(u), in_type), neg(tau.basic(u, xs)))))
    return eliminate(limit, tau.mode)


def type_compactness_probe(tau: DefinableTopology, types, budget=None) -> list[Verdict]:
    """Per type: None when the carrier is not in it, else whether its limit set is nonempty."""
    budget = ensure_budget(budget)
    out = []
    for p in types:
        if not type_member(p, tau.carrier, tau.object_vars, tau.mode):
            out.append(None)
            continue
        limit = type_limit_set(tau, p)
        found = sat_within(limit, tau.mode, budget)
        out.append(Verdict(True, found.point(tau.object_vars)) if found else Verdict(False, detail="no limit"))
    return out


def closed_type_family_probe(tau: DefinableTopology, F: DefinableFamily, budget=None) -> Verdict | None:
    """A closed family contained in a definable type has a common point; None if no such type is found."""
    budget = ensure_budget(budget)
    closed = is_closed_family(tau, F, budget)
    if not closed:
        raise PreconditionError(f"{F.label} has a member that is not closed", closed.witness)
    p = extend_to_definable_type(F, budget)
    if p is None:
        return None
    xs = tau.object_vars
    found = sat_within(conj(tau.carrier, forall(F.index_vars, implies(F.domain, F.instance(None, xs)))), tau.mode, budget)
    return Verdict(True, found.point(xs)) if found else Verdict(False, p, "contained in a type, empty intersection")


def _sample_points(tau: DefinableTopology, F: DefinableFamily):
    """Cell samples inside the carrier, cut by the carrier and the index-free atoms of F."""
    xs = tau.object_vars
    member = F.instance(None, xs)
    cuts = [a for a in atoms(eliminate(member, tau.mode)) if free_vars(a) <= set(xs)]
    decomposition = decompose([tau.carrier, *cuts], variables=xs, mode=tau.mode)
    return [c.sample for c in decomposition.cells_in(tau.carrier)]


def transversal_probe(tau: DefinableTopology, F: DefinableFamily, m: int, n: int, budget=None, max_points=2) -> Verdict | None:
    """
    A closed family with the (m, n)-property has a finite transversal in X.

    Returns None when the (m, n)-property fails; otherwise searches point sets
    of size <= max_points among cell samples.
    """
    budget = ensure_budget(budget)
    if not pq_property(F, m, n, budget):
        return None
    xs = tau.object_vars
    member = F.instance(None, xs)
    samples = _sample_points(tau, F)
    for size in range(1, max_points + 1):
        for combo in combinations(samples, size):
            budget.spend("candidates")
            hit = disj(*(substitute(member, dict(zip(xs, pt))) for pt in combo))
            if not sat_within(conj(F.domain, neg(hit)), tau.mode, budget):
                return Verdict(True, combo)
    return Verdict(False, detail=f"no transversal of at most {max_points} sample points")


def euclidean_compact(X: Formula, variables=None, mode=Mode.ODAG) -> bool:
    """Closed and bounded in the euclidean topology."""
    variables = tuple(variables) if variables is not None else tuple(sorted(free_vars(X)))
    tau = euclidean_topology(TRUE, variables, mode)
    if not entails(closure(tau, X), X, mode):
        return False
    a, b = fresh("a"), fresh("b")
    bounded = exists((a, b), forall(variables, implies(X, conj(*(conj(lt(a, v), lt(v, b)) for v in variables)))))
    return eliminate(bounded, mode) == TRUE


# ===================== CURVES =====================


@dataclass(frozen=True)
class DefinableCurve:
    """
    A definable curve t -> xs on (lower, upper), or a family of them over index_vars.

    graph is a formula in index_vars + (t,) + xs; the bounds are rational,
    +-inf, or terms in the index variables.
    """

    graph: Formula
    t: str
    xs: tuple[str, ...]
    lower: Term | Infinity = MINUS_INF
    upper: Term | Infinity = PLUS_INF
    index_vars: tuple[str, ...] = ()
    domain: Formula = TRUE
    name: str = ""
    mode: Mode = Mode.ODAG

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "index_vars", tuple(self.index_vars))
        object.__setattr__(self, "mode", as_mode(self.mode))
        for side in ("lower", "upper"):
            value = getattr(self, side)
            if not isinstance(value, Infinity):
                object.__setattr__(self, side, as_term(value))
        if self.lower is PLUS_INF or self.upper is MINUS_INF:
            raise SchemaError("curve interval runs the wrong way")
        extra = free_vars(self.graph) - set(self.index_vars) - {self.t} - set(self.xs)
        if extra:
            raise SchemaError(f"curve graph uses undeclared variables {sorted(extra)}")

    @classmethod
    def from_terms(cls, t, terms, xs, lower=MINUS_INF, upper=PLUS_INF, **kwargs) -> DefinableCurve:
        graph = conj(*(eq(x, term) for x, term in zip(xs, terms)))
        return cls(graph, t, tuple(xs), lower, upper, **kwargs)

    @property
    def label(self) -> str:
        return self.name or "curve"

    def _index(self, ks) -> dict:
        return dict(zip(self.index_vars, ks))

    def interval_at(self, ks, s) -> Formula:
        parts = []
        mapping = {u: Term.var(k) for u, k in self._index(ks).items()}
        if not isinstance(self.lower, Infinity):
            parts.append(lt(self.lower.substitute(mapping), s))
        if not isinstance(self.upper, Infinity):
            parts.append(lt(s, self.upper.substitute(mapping)))
        return conj(*parts)

    def at(self, ks, s, ys) -> Formula:
        mapping = self._index(ks)
        mapping[self.t] = s
        mapping.update(zip(self.xs, ys))
        return rename(self.graph, mapping)

    def fresh_index(self) -> tuple[str, ...]:
        return tuple(fresh(u) for u in self.index_vars)

    def check(self, budget=None) -> Verdict:
        """Nonempty interval and exactly one image point for each t of it."""
        budget = ensure_budget(budget)
        ks = self.fresh_index()
        s = fresh("t")
        ys, zs = tuple(fresh("y") for _ in self.xs), tuple(fresh("z") for _ in self.xs)
        domain = rename(self.domain, self._index(ks))
        empty = sat_within(conj(domain, neg(exists(s, self.interval_at(ks, s)))), self.mode, budget)
        if empty:
            return Verdict(False, empty.point(ks), "empty parameter interval")
        undefined = conj(domain, self.interval_at(ks, s), neg(exists(ys, self.at(ks, s, ys))))
        bad = sat_within(undefined, self.mode, budget)
        if bad:
            return Verdict(False, bad.point(ks + (s,)), "no image point")
        apart = disj(*(neg(eq(y, z)) for y, z in zip(ys, zs)))
        bad = sat_within(conj(domain, self.interval_at(ks, s), self.at(ks, s, ys), self.at(ks, s, zs), apart), self.mode, budget)
        if bad:
            return Verdict(False, bad.point(ks + (s,)), "two image points")
        return Verdict(True)


def _check_curve(tau: DefinableTopology, gamma: DefinableCurve, budget):
    if len(gamma.xs) != len(tau.object_vars):
        raise ArityMismatch(f"curve into M^{len(gamma.xs)} in a space of arity {len(tau.object_vars)}")
    verdict = gamma.check(budget)
    if not verdict:
        raise SchemaError(f"{gamma.label} is not a curve: {verdict.detail}")
    ks, s = gamma.fresh_index(), fresh("t")
    ys = tuple(fresh("y") for _ in gamma.xs)
    domain = rename(gamma.domain, gamma._index(ks))
    leaves = conj(domain, gamma.interval_at(ks, s), gamma.at(ks, s, ys), neg(tau.carrier_at(ys)))
    if sat_within(leaves, tau.mode, budget):
        raise PreconditionError(f"{gamma.label} leaves the carrier of {tau.label}")


def _limit_formula(tau: DefinableTopology, gamma: DefinableCurve, endpoint: str, ks) -> Formula:
    """Points x of X such that every basic set around x traps the curve's tail at the endpoint."""
    if endpoint not in ENDPOINTS:
        raise SchemaError(f"endpoint must be one of {ENDPOINTS}, got {endpoint!r}")
    B = tau.basis
    u, ys = B.fresh_index(), B.fresh_objects()
    s, t = fresh("s"), fresh("t")
    xs = tau.object_vars
    near = lt(t, s) if endpoint == LEFT else gt(t, s)
    trapped = forall(t, implies(conj(gamma.interval_at(ks, t), near), exists(ys, conj(gamma.at(ks, t, ys), tau.basic(u, ys)))))
    eventually = exists(s, conj(gamma.interval_at(ks, s), trapped))
    return conj(tau.carrier, forall(u, implies(conj(B.domain_at(u), tau.basic(u, xs)), eventually)))


def curve_limit(tau: DefinableTopology, gamma: DefinableCurve, endpoint: str = RIGHT, budget=None) -> Formula:
    """
    All limits of the curve at one end of its interval, as a set.

    Empty when the curve does not converge; more than one point in a non-Hausdorff space.
    """
    budget = ensure_budget(budget)
    if gamma.index_vars:
        raise ArityMismatch("curve_limit takes a single curve; use uniform_curves_complete for families")
    _check_curve(tau, gamma, budget)
    return eliminate(_limit_formula(tau, gamma, endpoint, ()), tau.mode)


def uniform_curves_complete(tau: DefinableTopology, gamma: DefinableCurve, budget=None) -> Verdict:
    """Every curve of the family converges at both ends; the witness is (index point, endpoint)."""
    budget = ensure_budget(budget)
    _check_curve(tau, gamma, budget)
    ks = gamma.fresh_index()
    domain = rename(gamma.domain, gamma._index(ks))
    for endpoint in ENDPOINTS:
        converges = exists(tau.object_vars, _limit_formula(tau, gamma, endpoint, ks))
        bad = sat_within(conj(domain, neg(converges)), tau.mode, budget)
        if bad:
            return Verdict(False, (bad.point(ks), endpoint), f"no limit at the {endpoint} end")
    return Verdict(True)


# ===================== SEPARATION =====================


def is_t1(tau: DefinableTopology, points) -> Verdict:
    """Each sampled singleton is closed."""
    xs = tau.object_vars
    for pt in points:
        singleton = conj(*(eq(x, c) for x, c in zip(xs, pt)))
        if not equivalent(closure(tau, singleton), singleton, tau.mode):
            return Verdict(False, tuple(pt), "singleton is not closed")
    return Verdict(True)


def _around(tau: DefinableTopology, u, point) -> Formula:
    return substitute(tau.basic(u, tau.object_vars), dict(zip(tau.object_vars, point)))


def is_hausdorff_probe(tau: DefinableTopology, points, budget=None) -> Verdict:
    """Every two distinct sampled points have disjoint basic neighbourhoods."""
    budget = ensure_budget(budget)
    B = tau.basis
    for p, q in combinations(points, 2):
        if tuple(p) == tuple(q):
            continue
        u, w = B.fresh_index(), B.fresh_index()
        ys = B.fresh_objects()
        apart = neg(exists(ys, conj(tau.basic(u, ys), tau.basic(w, ys))))
        if not sat_within(conj(B.domain_at(u), B.domain_at(w), _around(tau, u, p), _around(tau, w, q), apart), tau.mode, budget):
            return Verdict(False, (tuple(p), tuple(q)), "points cannot be separated")
    return Verdict(True)


# ===================== PROBE SUITE =====================

CHAR_DD_CLOSED = "dd-closed-common-point"
CHAR_TYPE_LIMIT = "type-has-limit"
CHAR_TYPE_FAMILY = "closed-type-family"
CHAR_TRANSVERSAL = "finite-transversal"
CHAR_CURVES = "curves-converge"
CHARACTERIZATIONS = (CHAR_DD_CLOSED, CHAR_TYPE_LIMIT, CHAR_TYPE_FAMILY, CHAR_TRANSVERSAL, CHAR_CURVES)
REPORT_COLUMNS = ["characterization", "item", "verdict", "detail"]


@dataclass
class ProbeBattery:
    """
    Inputs of the compactness probes.

    closed_families holds (family, m, n) triples: closed families with a claimed (m, n)-property.
    """

    dd_closed: list = field(default_factory=list)
    types: list = field(default_factory=list)
    closed_families: list = field(default_factory=list)
    curves: list = field(default_factory=list)


@dataclass(frozen=True)
class ProbeReport:
    """Probe rows, the verdict of each characterization over the battery, and their agreement."""

    table: pd.DataFrame
    summary: dict
    consistent: bool


def _row(char, item, verdict, detail=""):
    value = None if verdict is None else bool(verdict)
    if not detail and verdict is not None:
        detail = verdict.detail or ("" if verdict.witness is None else str(verdict.witness))
    return {"characterization": char, "item": item, "verdict": value, "detail": detail}


def _guarded(char, item, probe):
    try:
        verdict = probe()
        return _row(char, item, verdict, "" if verdict is not None else "not applicable")
    except PreconditionError as exc:
        return _row(char, item, None, f"not applicable: {exc}")


def summarize(table: pd.DataFrame) -> dict:
    """Per characterization: True/False over the applicable rows, None when no row applies."""
    summary = {}
    for char in CHARACTERIZATIONS:
        decided = table.loc[(table["characterization"] == char) & table["verdict"].notna(), "verdict"]
        summary[char] = None if decided.empty else bool(decided.astype(bool).all())
    return summary


def _consistent(summary: dict) -> bool:
    levels = {summary[c] for c in (CHAR_DD_CLOSED, CHAR_TYPE_LIMIT, CHAR_TYPE_FAMILY, CHAR_TRANSVERSAL)} - {None}
    curves_fail = summary[CHAR_CURVES] is False
    return len(levels) <= 1 and not (summary[CHAR_DD_CLOSED] is True and curves_fail)


def compactness_probe_suite(tau: DefinableTopology, battery: ProbeBattery, budget=None) -> ProbeReport:
    """
    Run every compactness characterization on the battery.

    The characterizations agree on definable compactness, and definable
    compactness implies that curves converge; a disagreement is logged as a
    warning and reported through `consistent`.
    """
    budget = ensure_budget(budget)
    rows = []
    for F in battery.dd_closed:
        rows.append(_guarded(CHAR_DD_CLOSED, F.label, lambda F=F: dd_closed_family_has_common_point(tau, F, budget)))
    for p, verdict in zip(battery.types, type_compactness_probe(tau, battery.types, budget)):
        rows.append(_row(CHAR_TYPE_LIMIT, str(p), verdict, "" if verdict is not None else "carrier not in type"))
    families = list(battery.dd_closed) + [F for F, _, _ in battery.closed_families]
    for F in families:
        rows.append(_guarded(CHAR_TYPE_FAMILY, F.label, lambda F=F: closed_type_family_probe(tau, F, budget)))
    for F, m, n in battery.closed_families:
        rows.append(_guarded(CHAR_TRANSVERSAL, f"{F.label} ({m},{n})", lambda F=F, m=m, n=n: transversal_probe(tau, F, m, n, budget)))
    for gamma in battery.curves:
        rows.append(_guarded(CHAR_CURVES, gamma.label, lambda g=gamma: uniform_curves_complete(tau, g, budget)))
    table = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    summary = summarize(table)
    consistent = _consistent(summary)
    if not consistent:
        logger.warning("compactness probes disagree on %s: %s", tau.label, summary)
    else:
        logger.info("compactness probes on %s: %s", tau.label, summary)
    return ProbeReport(table, summary, consistent)
