# transversal.py - Intersection properties and finite tame transversals
"""
Intersection-property analysis and finite tame transversal algorithms.

Contains:
- n_consistent, pq_property, max_pairwise_disjoint: finite intersection patterns as QE queries
- interval_transversal: definable Mirsky theorem for closed interval families
- PreorderedSet, OrderCut: definable total preorders and their cuts
- order_transversal, small_transversal_or_disjoint: transversal or infinite disjoint subfamily
- fip_transversal, fft_partition, verify_fft: finite tame transversals of definable families
- product_lift, venn_count, dual_shatter_lower_bound: VC-style constructions and probes
- kplus1_interval_analysis: rational transversal or one type for (k+1)-consistent families
- greedy_stabbing, finite_transversal: finite oracles used to cross-check the symbolic answers
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from itertools import chain, combinations, product

import numpy as np

from ominal.cells import MINUS_INF, PLUS_INF, decompose, dimension, infimum, supremum
from ominal.config import SEED, SHATTER_GRID, SHATTER_TRIALS, Budget, ensure_budget
from ominal.exceptions import ArityMismatch, CertificationError, PreconditionError, SchemaError
from ominal.families import (
    BoundaryFamily,
    DefinableFamily,
    boundary_family,
    boundary_functions,
    contains_family,
    critical_constants,
    extend_dd_to_type,
    extend_to_definable_type,
    is_downward_directed,
    is_nonempty_all,
    one_type_candidates,
    pairwise_family,
    project_family,
    require_index,
    sat_within,
    types_over,
)
from ominal.logic import (
    FALSE,
    TRUE,
    Formula,
    Mode,
    Term,
    Verdict,
    as_fraction,
    as_mode,
    atom_count,
    atoms,
    between,
    conj,
    disj,
    eliminate,
    eq,
    equivalent,
    evaluate,
    exists,
    forall,
    fresh,
    ge,
    gt,
    implies,
    is_satisfiable,
    le,
    lt,
    neg,
    rename,
    substitute,
)
from ominal.sexpr import format_rational
from ominal.types import (
    Above,
    Below,
    CutMinus,
    CutPlus,
    DefinableType,
    Graph,
    LimitBelow,
    MinusInf,
    PlusInf,
    Realized,
    induced_preorder,
    membership_condition,
    validate_type,
)

logger = logging.getLogger(__name__)


# ===================== RESULT TYPES =====================


@dataclass(frozen=True)
class TameTransversal:
    """
    Finitely many definable types covering a family: every member lies in one of them.

    conditions[i] is the membership condition of types[i] in the family's index.
    Over a preordered set other than the line the types are OrderCut values.
    coordinates, when set, means the types describe the first `coordinates`
    object coordinates only (the sets p x M^(n-k)).
    """

    types: tuple[DefinableType, ...]
    conditions: tuple[Formula, ...] = ()
    coordinates: int | None = None

    def __len__(self):
        return len(self.types)

    def __iter__(self):
        return iter(self.types)


@dataclass(frozen=True)
class DisjointBound:
    """Largest number of pairwise disjoint members found; exact=False means "at least k"."""

    k: int
    exact: bool
    witness: tuple = ()


@dataclass
class DisjointWitness:
    """
    Pairwise disjoint members produced on demand.

    Every new index point is found by one satisfiability query against the
    members already produced, so each finite prefix is certified.
    """

    family: DefinableFamily
    prefix: list = field(default_factory=list)
    budget: Budget | None = None

    def extend(self) -> tuple:
        F = self.family
        budget = ensure_budget(self.budget)
        u = F.fresh_index()
        member = F.instance(u)
        parts = [F.domain_at(u), exists(F.object_vars, member)]
        for point in self.prefix:
            parts.append(neg(exists(F.object_vars, conj(member, F.fiber(point)))))
        found = sat_within(conj(*parts), F.mode, budget)
        if not found:
            raise PreconditionError(f"no member of {F.label} is disjoint from the {len(self.prefix)} found", tuple(self.prefix))
        point = found.point(u)
        self.prefix.append(point)
        return point

    def take(self, n: int) -> tuple:
        while len(self.prefix) < n:
            self.extend()
        return tuple(self.prefix[:n])

    def __iter__(self):
        i = 0
        while True:
            if i == len(self.prefix):
                self.extend()
            yield self.prefix[i]
            i += 1


@dataclass(frozen=True)
class PreorderedSet:
    """A definable set with a definable total preorder relation(left, right)."""

    carrier: Formula
    relation: Formula
    left: tuple[str, ...]
    right: tuple[str, ...]
    mode: Mode = Mode.ODAG

    @classmethod
    def line(cls, x="x", mode=Mode.ODAG) -> PreorderedSet:
        y = fresh("y")
        return cls(TRUE, le(x, y), (x,), (y,), as_mode(mode))

    @property
    def arity(self) -> int:
        return len(self.left)

    def at(self, a, b) -> Formula:
        """a <= b; a and b are variable names or rationals."""
        mapping = dict(zip(self.left, a))
        mapping.update(zip(self.right, b))
        return substitute(self.relation, mapping)

    def strictly(self, a, b) -> Formula:
        return conj(self.at(a, b), neg(self.at(b, a)))

    def same_class(self, a, b) -> Formula:
        return conj(self.at(a, b), self.at(b, a))

    def holds(self, a, b) -> bool:
        values = dict(zip(self.left, a))
        values.update(zip(self.right, b))
        return evaluate(self.relation, values, mode=self.mode)

    def inside(self, vs) -> Formula:
        return substitute(self.carrier, dict(zip(self.left, vs)))

    def is_line(self) -> bool:
        """The carrier is all of M with its usual order."""
        if self.arity != 1 or eliminate(self.carrier, self.mode) != TRUE:
            return False
        return equivalent(self.relation, le(self.left[0], self.right[0]), self.mode)

    def check(self) -> Verdict:
        """Reflexive, transitive and total on the carrier."""
        xs, ys, zs = (tuple(fresh(v) for v in self.left) for _ in range(3))
        inside = self.inside
        axioms = {
            "reflexive": forall(xs, implies(inside(xs), self.at(xs, xs))),
            "transitive": forall(
                xs + ys + zs,
                implies(conj(inside(xs), inside(ys), inside(zs), self.at(xs, ys), self.at(ys, zs)), self.at(xs, zs)),
            ),
            "total": forall(xs + ys, implies(conj(inside(xs), inside(ys)), disj(self.at(xs, ys), self.at(ys, xs)))),
        }
        for name, axiom in axioms.items():
            if eliminate(axiom, self.mode) != TRUE:
                return Verdict(False, detail=f"relation is not {name}")
        return Verdict(True)


CUT_POSITIONS = ("top", "bottom", "above", "below", "at")


@dataclass(frozen=True)
class OrderCut:
    """
    A cut of a preordered set: at a point, just above or just below it, or at an end.

    A set lies in the cut "at" a when it meets the class of a, "above" a when
    it contains every element strictly between a and some b above a, and "top"
    when it contains every element above some b. "below" and "bottom" mirror
    these. On the line the cuts are the 1-types of line_type().
    """

    order: PreorderedSet
    position: str
    point: tuple = ()

    def __post_init__(self):
        if self.position not in CUT_POSITIONS:
            raise SchemaError(f"unknown cut position {self.position!r}")
        object.__setattr__(self, "point", tuple(as_fraction(v) for v in self.point))

    @property
    def arity(self) -> int:
        return self.order.arity

    def condition(self, phi: Formula, xs) -> Formula:
        """phi(params, xs) lies in the cut, as a formula in the parameters of phi."""
        P, a = self.order, self.point
        b, c = (tuple(fresh(v) for v in P.left) for _ in range(2))
        member = rename(phi, dict(zip(xs, c)))
        match self.position:
            case "at":
                return exists(c, conj(P.inside(c), P.same_class(a, c), member))
            case "above":
                inner = conj(P.inside(c), P.strictly(a, c), P.strictly(c, b))
                return exists(b, conj(P.inside(b), P.strictly(a, b), forall(c, implies(inner, member))))
            case "below":
                inner = conj(P.inside(c), P.strictly(b, c), P.strictly(c, a))
                return exists(b, conj(P.inside(b), P.strictly(b, a), forall(c, implies(inner, member))))
            case "top":
                return exists(b, conj(P.inside(b), forall(c, implies(conj(P.inside(c), P.strictly(b, c)), member))))
            case "bottom":
                return exists(b, conj(P.inside(b), forall(c, implies(conj(P.inside(c), P.strictly(c, b)), member))))

    def proper(self) -> bool:
        """The empty set is outside the cut and the carrier inside it."""
        P = self.order
        xs = tuple(fresh(v) for v in P.left)
        empty = eliminate(self.condition(FALSE, xs), P.mode)
        whole = eliminate(self.condition(P.inside(xs), xs), P.mode)
        return empty == FALSE and whole == TRUE

    def line_type(self) -> DefinableType:
        """The 1-type of this cut when the order is the line."""
        match self.position:
            case "top":
                return PlusInf()
            case "bottom":
                return MinusInf()
            case "above":
                return CutPlus(self.point[0])
            case "below":
                return CutMinus(self.point[0])
        return Realized(self.point)

    def __str__(self):
        if not self.point:
            return f"({self.position})"
        return f"({self.position} {' '.join(format_rational(v) for v in self.point)})"


@dataclass(frozen=True)
class FFTPartition:
    """Index classes covering the index domain, class i lying in transversal.types[i]."""

    classes: tuple[Formula, ...]
    transversal: TameTransversal


@dataclass(frozen=True)
class KPlusOneResult:
    """Either finitely many rational points meeting every member, or one type containing them all."""

    points: tuple | None = None
    type: DefinableType | None = None


# ===================== INTERSECTION PATTERNS =====================


def _copies(F: DefinableFamily, count: int) -> list[tuple[str, ...]]:
    return [F.fresh_index() for _ in range(count)]


def _sorted_copies(F: DefinableFamily, us) -> Formula:
    """Order the copies by their first index coordinate; every symmetric query may assume it."""
    if not F.index_arity:
        return TRUE
    return conj(*(le(a[0], b[0]) for a, b in combinations(us, 2)))


def _meet(F: DefinableFamily, us, budget) -> Formula:
    """Quantifier-free condition on the copies: their members share a point."""
    xs = F.fresh_objects()
    query = exists(xs, conj(*(F.instance(u, xs) for u in us)))
    budget.require("qe_atoms", atom_count(query))
    return eliminate(query, F.mode)


def _domains(F: DefinableFamily, us) -> Formula:
    return conj(*(F.domain_at(u) for u in us))


def n_consistent(F: DefinableFamily, n: int, budget=None) -> Verdict:
    """
    Any n members share a point.

    Returns:
        Verdict: on failure the witness is an n-tuple of index points with empty intersection
    """
    budget = ensure_budget(budget)
    if n < 1:
        raise SchemaError(f"consistency order must be positive, got {n}")
    require_index(F, budget)
    us = _copies(F, n)
    bad = sat_within(conj(_domains(F, us), _sorted_copies(F, us), neg(_meet(F, us, budget))), F.mode, budget)
    if bad:
        return Verdict(False, tuple(bad.point(u) for u in us), f"{n} members with empty intersection")
    return Verdict(True)


def pq_property(F: DefinableFamily, m: int, n: int, budget=None) -> Verdict:
    """
    Among any m members some n share a point.

    Returns:
        Verdict: on failure the witness is an m-tuple of index points that is n-inconsistent
    """
    budget = ensure_budget(budget)
    if not 1 <= n <= m:
        raise SchemaError(f"(m, n) = ({m}, {n}) needs 1 <= n <= m")
    require_index(F, budget)
    us = _copies(F, m)
    apart = [neg(_meet(F, subset, budget)) for subset in combinations(us, n)]
    bad = sat_within(conj(_domains(F, us), _sorted_copies(F, us), *apart), F.mode, budget)
    if bad:
        return Verdict(False, tuple(bad.point(u) for u in us), f"{m} members, no {n} of which meet")
    return Verdict(True)


def finite_subfamily(F: DefinableFamily, points) -> DefinableFamily:
    """The members at the given index points, re-indexed by their position."""
    i = "i" if "i" not in F.object_vars else fresh("i")
    fibers = [F.fiber(u) for u in points]
    return DefinableFamily(
        disj(*(conj(eq(i, j), fib) for j, fib in enumerate(fibers))),
        (i,),
        F.object_vars,
        disj(*(eq(i, j) for j in range(len(fibers)))),
        name=f"{F.label}[{len(fibers)}]",
        mode=F.mode,
    )


def max_pairwise_disjoint(F: DefinableFamily, k_max: int | None = None, budget=None) -> DisjointBound:
    """
    Largest k <= k_max with k pairwise disjoint nonempty members, one QE query per k.

    Args:
        F: definable family
        k_max: probe limit (default: the disjoint_probe budget)
        budget: Budget

    Returns:
        DisjointBound: exact when the query at k + 1 was refuted
    """
    budget = ensure_budget(budget)
    k_max = k_max or budget.limits.disjoint_probe
    require_index(F, budget)
    pool = _copies(F, k_max + 1)
    nonempty = [eliminate(exists(F.object_vars, F.instance(u)), F.mode) for u in pool]
    disjoint = {}
    witness = ()
    for k in range(1, k_max + 2):
        us = pool[:k]
        for a, b in combinations(range(k), 2):
            if (a, b) not in disjoint:
                disjoint[a, b] = neg(_meet(F, (us[a], us[b]), budget))
        query = conj(_domains(F, us), _sorted_copies(F, us), *nonempty[:k], *disjoint.values())
        found = sat_within(query, F.mode, budget)
        if not found:
            logger.debug("%s: %d pairwise disjoint members, exact", F.label, k - 1)
            return DisjointBound(k - 1, True, witness)
        witness = tuple(found.point(u) for u in us)
    logger.info("%s: at least %d pairwise disjoint members", F.label, k_max)
    return DisjointBound(k_max, False, witness[:k_max])


# ===================== INTERVAL TRANSVERSALS =====================


def _check_closed_intervals(F: DefinableFamily, budget):
    if F.object_arity != 1:
        raise ArityMismatch(f"interval families live in M, not M^{F.object_arity}")
    if not is_nonempty_all(F, budget):
        raise SchemaError(f"{F.label} has an empty member")
    (v,) = F.object_vars
    x, y, z, a, b = (fresh(n) for n in "xyzab")
    def at(w):
        return rename(F.member, {v: w})

    gap = exists((x, y, z), conj(lt(x, y), lt(y, z), at(x), at(z), neg(at(y))))
    near = forall((a, b), implies(conj(lt(a, x), lt(x, b)), exists(y, conj(lt(a, y), lt(y, b), at(y)))))
    limit_outside = exists(x, conj(neg(at(x)), near))
    for name, bad in (("convex", gap), ("closed", limit_outside)):
        if sat_within(conj(F.domain, bad), F.mode, budget):
            raise SchemaError(f"a member of {F.label} is not {name}")


def _endpoint_bound(F: DefinableFamily, upper: bool, budget):
    """inf of the right endpoints (upper) or sup of the left endpoints, over the members."""
    (v,) = F.object_vars
    t, u = fresh("t"), F.fresh_index()
    side = le(v, t) if upper else ge(v, t)
    query = exists(u, conj(F.domain_at(u), forall(v, implies(F.instance(u), side))))
    budget.require("qe_atoms", atom_count(query))
    H = eliminate(query, F.mode)
    return infimum(H, t, F.mode) if upper else supremum(H, t, F.mode)


def _pairwise_type(S0: DefinableFamily, budget) -> DefinableType:
    """A 1-type containing every member of a pairwise intersecting interval family."""
    low = _endpoint_bound(S0, upper=False, budget=budget)
    if low is None:
        # every member is unbounded below
        high = _endpoint_bound(S0, upper=True, budget=budget)
        candidates = [MinusInf(), Realized((0,))]
        if high is not None and high.value is not PLUS_INF:
            candidates.insert(0, Realized((high.value,)))
    elif low.value is PLUS_INF:
        candidates = [PlusInf()]
    else:
        a = low.value
        candidates = [Realized((a,)), CutMinus(a), CutPlus(a)]
    for p in candidates:
        if contains_family(p, S0, budget):
            return p
    raise CertificationError(f"no 1-type at the endpoint bounds contains {S0.label}")


def interval_transversal(F: DefinableFamily, budget=None, k_max: int | None = None) -> TameTransversal | None:
    """
    Tame transversal of a closed-interval family, of size max_pairwise_disjoint(F).

    The interval whose right endpoint is least fixes a point (or the cut just
    right of it when no interval attains it); every interval starting at or
    before it forms a pairwise intersecting subfamily covered by one type, and
    the rest is treated the same way.

    Returns:
        TameTransversal, or None when the family has unboundedly many disjoint members

    Raises:
        SchemaError: a member is empty, not convex or not closed
    """
    budget = ensure_budget(budget)
    require_index(F, budget)
    _check_closed_intervals(F, budget)
    bound = max_pairwise_disjoint(F, k_max, budget)
    if not bound.exact:
        logger.info("%s has at least %d disjoint members; no finite transversal found", F.label, bound.k)
        return None
    (v,) = F.object_vars
    types = []
    rest = F
    for _ in range(bound.k):
        if not sat_within(rest.domain, F.mode, budget):
            break
        right = _endpoint_bound(rest, upper=True, budget=budget)
        if right is None or right.value is PLUS_INF:
            head, tail = rest.domain, None
        else:
            starts_before = eliminate(exists(v, conj(le(v, right.value), rest.member)), F.mode)
            head = conj(rest.domain, starts_before)
            tail = conj(rest.domain, neg(starts_before))
        types.append(_pairwise_type(replace(rest, domain=head), budget))
        if tail is None:
            rest = None
            break
        rest = replace(rest, domain=tail)
    if rest is not None and sat_within(rest.domain, F.mode, budget):
        raise CertificationError(f"{len(types)} types leave members of {F.label} uncovered")
    out = _with_conditions(F, TameTransversal(tuple(types)))
    logger.info("%s: tame transversal of size %d", F.label, len(out))
    return _certified(F, out, budget)


def greedy_stabbing(intervals) -> list:
    """Fewest points meeting every closed interval (lo, hi): repeatedly take the least right endpoint."""
    points = []
    last = None
    for lo, hi in sorted(((as_fraction(lo), as_fraction(hi)) for lo, hi in intervals), key=lambda iv: iv[1]):
        if last is None or lo > last:
            last = hi
            points.append(hi)
    return points


# ===================== COVERS BY TYPES =====================


def _condition(F: DefinableFamily, p) -> Formula:
    """Membership condition of a type or an order cut in F's index."""
    if isinstance(p, OrderCut):
        return eliminate(p.condition(F.member, F.object_vars), F.mode)
    return membership_condition(p, F.member, F.object_vars, F.mode)


def _admissible(p, mode) -> bool:
    if isinstance(p, OrderCut):
        return p.proper()
    try:
        validate_type(p, mode)
    except (PreconditionError, SchemaError) as exc:
        logger.debug("skipping candidate %s: %s", p, exc)
        return False
    return True


def _with_conditions(F: DefinableFamily, T: TameTransversal) -> TameTransversal:
    return replace(T, conditions=tuple(_condition(F, p) for p in T.types))


def _certified(F: DefinableFamily, T: TameTransversal, budget) -> TameTransversal:
    verdict = verify_fft(F, T, budget)
    if not verdict:
        raise CertificationError(f"transversal misses the member of {F.label} at {verdict.witness}")
    return T


def _cover(F: DefinableFamily, candidates, budget) -> TameTransversal | None:
    """First-fit cover of the index domain by membership conditions, then drop redundant types."""
    chosen = []
    uncovered = F.domain
    seen = set()
    for p in candidates:
        if p in seen:
            continue
        seen.add(p)
        budget.spend("candidates")
        if not _admissible(p, F.mode):
            continue
        condition = _condition(F, p)
        if not sat_within(conj(uncovered, condition), F.mode, budget):
            continue
        chosen.append((p, condition))
        uncovered = eliminate(conj(uncovered, neg(condition)), F.mode)
        if not sat_within(uncovered, F.mode, budget):
            break
    else:
        return None
    kept = list(chosen)
    for item in chosen:
        rest = [c for c in kept if c is not item]
        if rest and not sat_within(conj(F.domain, *(neg(c) for _, c in rest)), F.mode, budget):
            kept = rest
    logger.debug("%s covered by %d of %d chosen types", F.label, len(kept), len(chosen))
    return TameTransversal(tuple(p for p, _ in kept), tuple(c for _, c in kept))


def _cover_candidates(F: DefinableFamily, constants=None):
    """1-types at the critical constants, then types over them along the boundary functions."""
    constants = critical_constants(F) if constants is None else constants
    if F.object_arity == 1:
        yield from one_type_candidates(constants)
        return
    funcs = boundary_functions(F, constants)
    for base in _cover_candidates(project_family(F), constants):
        yield from types_over(base, funcs)


def verify_fft(F: DefinableFamily, T: TameTransversal, budget=None) -> Verdict:
    """
    Every member lies in one of the transversal's types (or its projection does, for a coordinate transversal).

    The types may also be cuts of a preordered set containing the members.

    Returns:
        Verdict: on failure the witness is an index point whose member no type contains
    """
    budget = ensure_budget(budget)
    target = F
    if T.coordinates is not None and T.coordinates != F.object_arity:
        target = project_family(F, T.coordinates)
    for p in T.types:
        if p.arity != target.object_arity:
            raise ArityMismatch(f"type of arity {p.arity} for a family of arity {target.object_arity}")
    covered = disj(*(_condition(target, p) for p in T.types))
    bad = sat_within(conj(F.domain, neg(covered)), F.mode, budget)
    if bad:
        return Verdict(False, bad.point(F.index_vars), "member outside every type")
    return Verdict(True)


def max_components(F: DefinableFamily) -> int:
    """Most maximal intervals (points included) in one member of a family in M."""
    if F.object_arity != 1:
        raise ArityMismatch(f"component counts need a family in M, not M^{F.object_arity}")
    variables = F.index_vars + F.object_vars
    decomposition = decompose([F.member, F.domain], variables=variables, mode=F.mode)
    k = F.index_arity
    stacks = {}
    for cell in decomposition.cells:
        stacks.setdefault(cell.layers[:k], []).append(cell)
    best = 0
    for cells in stacks.values():
        if not evaluate(F.domain, cells[0].sample[:k], F.index_vars, F.mode):
            continue
        runs, inside = 0, False
        for cell in cells:
            now = evaluate(F.member, cell.sample, variables, F.mode)
            runs += now and not inside
            inside = now
        best = max(best, runs)
    return best


# ===================== ORDER TRANSVERSALS =====================


def _more_intervals_than(P: PreorderedSet, F: DefinableFamily, l: int, budget):
    """Index point of a member with more than l intervals of P, or None."""
    points = [tuple(fresh(v) for v in P.left) for _ in range(2 * l + 1)]
    picks = [F.instance(None, x) if i % 2 == 0 else neg(F.instance(None, x)) for i, x in enumerate(points)]
    steps = [P.strictly(a, b) for a, b in zip(points, points[1:])]
    found = sat_within(conj(F.domain, *(P.inside(x) for x in points), *steps, *picks), F.mode, budget)
    return found.point(F.index_vars) if found else None


def _saturation(P: PreorderedSet, F: DefinableFamily) -> DefinableFamily:
    """{x in P : x is equivalent to a point of S} for every member S."""
    xs, ys = F.object_vars, tuple(fresh(v) for v in F.object_vars)
    grown = conj(P.inside(xs), exists(ys, conj(P.inside(ys), F.instance(None, ys), P.same_class(xs, ys))))
    return replace(F, member=eliminate(grown, F.mode), name=f"sat({F.label})")


def _cut_points(P: PreorderedSet, F: DefinableFamily) -> list[tuple]:
    """Points of P where a cut may sit: critical constants on the line, cell samples otherwise."""
    if P.arity == 1:
        return [(c,) for c in critical_constants(F) if evaluate(P.carrier, (c,), P.left, P.mode)]
    xs = F.object_vars
    union = exists(F.index_vars, conj(F.domain, F.member))
    targets = [P.inside(xs), union]
    for a in atoms(eliminate(F.member, F.mode)):
        if a.term.variables() <= set(xs):
            targets.append(a)
    decomposition = decompose(targets, variables=xs, mode=F.mode)
    cells = sorted(decomposition.cells_in(P.inside(xs)), key=lambda cell: cell.dimension())
    return [cell.sample for cell in cells]


def _cut_candidates(P: PreorderedSet, F: DefinableFamily):
    yield OrderCut(P, "top")
    yield OrderCut(P, "bottom")
    for a in _cut_points(P, F):
        for position in ("above", "below", "at"):
            yield OrderCut(P, position, a)


def _order_dichotomy(P: PreorderedSet, F: DefinableFamily, budget):
    """Bound the disjoint members in the sense of P, then cover F by cuts of P."""
    bound = max_pairwise_disjoint(_saturation(P, F), budget=budget)
    if not bound.exact:
        logger.info("%s: disjoint members exceed the search limit; returning a disjoint subfamily", F.label)
        return DisjointWitness(F, list(bound.witness), budget)
    line = P.is_line()
    cuts = _cut_candidates(P, F)
    T = _cover(F, (cut.line_type() for cut in cuts) if line else cuts, budget)
    if T is None:
        logger.warning("%s has at most %d disjoint members but no cut of the order covered it", F.label, bound.k)
        return None
    return _certified(F, T, budget)


def order_transversal(P: PreorderedSet, F: DefinableFamily, l: int, budget=None):
    """
    A tame transversal of F, or an infinite pairwise disjoint subfamily.

    F's members are unions of at most l intervals of P. Members are first
    closed under the equivalence of P and searched for disjoint ones; if their
    number is bounded, F is covered by cuts of P, at the top and bottom and
    around the points where the members' boundaries sit.

    Returns:
        TameTransversal of 1-types when P is the line, of OrderCut otherwise;
        DisjointWitness; or None when the disjoint count is bounded but no
        cover was found among the cuts

    Raises:
        SchemaError: P is not a total preorder, or a member leaves the carrier
            or has more than l intervals
    """
    budget = ensure_budget(budget)
    if F.object_arity != P.arity:
        raise ArityMismatch(f"family of arity {F.object_arity} in a preordered set of arity {P.arity}")
    require_index(F, budget)
    verdict = P.check()
    if not verdict:
        raise SchemaError(verdict.detail)
    if sat_within(conj(F.domain, F.member, neg(P.inside(F.object_vars))), F.mode, budget):
        raise SchemaError(f"a member of {F.label} leaves the carrier")
    bad = _more_intervals_than(P, F, l, budget)
    if bad is not None:
        raise SchemaError(f"the member of {F.label} at {bad} has more than {l} intervals")
    return _order_dichotomy(P, F, budget)


def small_transversal_or_disjoint(F: DefinableFamily, budget=None):
    """
    An infinite pairwise disjoint subfamily, or a tame transversal of the first coordinate.

    A transversal of the first-coordinate projections by 1-types xi gives the
    sets xi x M^(n-1); it is returned with coordinates=1.
    """
    budget = ensure_budget(budget)
    P = F if F.object_arity == 1 else project_family(F, keep=1)
    result = order_transversal(PreorderedSet.line(P.object_vars[0], F.mode), P, max_components(P), budget)
    if isinstance(result, DisjointWitness):
        return DisjointWitness(F, list(result.prefix), budget)
    if result is not None and F.object_arity > 1:
        return replace(result, coordinates=1)
    return result


def dd_transversal_remark(F: DefinableFamily, T: TameTransversal, budget=None) -> Verdict:
    """A downward directed family with a finite tame transversal lies in one of its types."""
    budget = ensure_budget(budget)
    dd = is_downward_directed(F, budget)
    if not dd:
        raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    covered = verify_fft(F, T, budget)
    if not covered:
        raise PreconditionError(f"the transversal does not cover {F.label}", covered.witness)
    for p in T.types:
        if contains_family(p, F, budget):
            return Verdict(True, p)
    logger.warning("no single type of the transversal contains the downward directed family %s", F.label)
    return Verdict(False, detail="no type contains every member")


def pq_from_transversal(T: TameTransversal, n: int) -> tuple[int, int]:
    """A tame transversal of size l gives the (n*l + 1, n + 1)-property."""
    if n < 1:
        raise SchemaError(f"n must be positive, got {n}")
    return n * len(T) + 1, n + 1


# ===================== FINITE TAME TRANSVERSALS =====================


def _near_root(member: Formula, z: str, root: Term, side: str) -> Formula:
    """The fiber of member on the graph of root, or filling an interval just above or below it."""
    s = fresh("s")
    match side:
        case "graph":
            return substitute(member, {z: root})
        case "above":
            return exists(s, conj(gt(s, root), forall(z, implies(between(root, z, s), member))))
    return exists(s, conj(lt(s, root), forall(z, implies(between(s, z, root), member))))


def _touching_family(F: DefinableFamily, H: BoundaryFamily, p: DefinableType) -> DefinableFamily | None:
    """
    For each member S, the boundary functions h with S in h|p or just above or below h over p.

    Each such set is a union of intervals of the preorder p induces on H.
    """
    ys, z = F.object_vars[:-1], F.object_vars[-1]
    j = H.index_vars[0]
    parts = []
    for side in ("graph", "above", "below"):
        phi = disj(*(conj(eq(j, i), _near_root(F.member, z, r, side)) for i, r in enumerate(H.roots)))
        parts.append(membership_condition(p, phi, ys, F.mode))
    member = eliminate(conj(H.functions.domain, disj(*parts)), F.mode)
    domain = eliminate(conj(F.domain, exists(H.index_vars, member)), F.mode)
    if not is_satisfiable(domain, F.mode):
        return None
    return DefinableFamily(member, F.index_vars, H.index_vars, domain, name=f"touch({F.label})", mode=F.mode)


def _types_at_cut(cut: OrderCut, H: BoundaryFamily, p: DefinableType):
    """Types over p read off a cut of the boundary preorder: a least function if the cut has one, a limit otherwise."""
    match cut.position:
        case "at":
            f = H.at(cut.point)
            yield from (Graph(f, p), Above(f, p), Below(f, p))
        case "above":
            yield Above(H.at(cut.point), p)
            yield LimitBelow(H.functions, cut.order.strictly(cut.point, H.index_vars), p)
        case "below":
            yield Below(H.at(cut.point), p)
        case "bottom":
            yield Above(MINUS_INF, p)
            yield LimitBelow(H.functions, TRUE, p)
        case "top":
            yield Below(PLUS_INF, p)


def _boundary_cut_types(F: DefinableFamily, H: BoundaryFamily, p: DefinableType, budget):
    try:
        validate_type(p, F.mode)
        rho = induced_preorder(p, H.functions, F.mode)
    except (PreconditionError, SchemaError) as exc:
        logger.debug("no boundary preorder over %s: %s", p, exc)
        return
    P = PreorderedSet(H.functions.domain, rho.formula, rho.left, rho.right, F.mode)
    B = _touching_family(F, H, p)
    if B is None:
        return
    result = _order_dichotomy(P, B, budget)
    if not isinstance(result, TameTransversal):
        logger.info("boundary preorder over %s gave no cut cover of %s", p, F.label)
        return
    for cut in result.types:
        yield from _types_at_cut(cut, H, p)


def _index_samples(F: DefinableFamily) -> list[tuple]:
    decomposition = decompose([F.domain], variables=F.index_vars, mode=F.mode)
    cells = sorted(decomposition.cells_in(F.domain), key=lambda cell: cell.dimension())
    return [cell.sample for cell in cells]


def _fip_candidates(F: DefinableFamily, base: TameTransversal, budget):
    """
    Types over each base type: at the infinities, at the cuts of the boundary
    preorder, then along the boundary functions (index-free ones and the
    index-dependent ones at sample index points).
    """
    H = boundary_family(F)
    funcs = boundary_functions(F, critical_constants(F))
    if H is not None:
        samples = _index_samples(F)
        funcs += [H.at((j, *u)) for j in range(len(H.roots)) for u in samples]
    for p in base.types:
        yield Below(PLUS_INF, p)
        yield Above(MINUS_INF, p)
        if H is not None:
            yield from _boundary_cut_types(F, H, p, budget)
        yield from types_over(p, funcs)


def fip_transversal(F: DefinableFamily, budget=None) -> TameTransversal:
    """
    Finite tame transversal of a 2^n-consistent family in M^n.

    Downward directed families extend to one type. Otherwise the pairwise
    projections {pi(S & S')} (2^(n-1)-consistent) are covered first. Over each
    base type p the boundary functions of the last coordinate, index-dependent
    ones included, are preordered by p; the sets of functions each member
    touches are covered by cuts of that preorder, and every cut gives the
    types along its least function or the limit type below the cut. In M the
    types are cuts at the critical constants.

    Raises:
        PreconditionError: F is not 2^n-consistent (witness: the first inconsistent tuple)
        CertificationError: the candidate types did not cover F
    """
    budget = ensure_budget(budget)
    require_index(F, budget)
    n = F.object_arity
    for m in range(2, 2**n + 1):
        verdict = n_consistent(F, m, budget)
        if not verdict:
            raise PreconditionError(f"{F.label} is not {2**n}-consistent: {m} members have empty intersection", verdict.witness)
    if is_downward_directed(F, budget):
        try:
            p = extend_dd_to_type(F, budget)
        except CertificationError as exc:
            logger.warning("direct extension of %s failed (%s); covering instead", F.label, exc)
        else:
            return _certified(F, _with_conditions(F, TameTransversal((p,))), budget)
    if n == 1:
        T = order_transversal(PreorderedSet.line(F.object_vars[0], F.mode), F, max_components(F), budget)
        if not isinstance(T, TameTransversal):
            raise CertificationError(f"no cover of {F.label} by cut types was found")
        return T
    base = fip_transversal(project_family(pairwise_family(F)), budget)
    T = _cover(F, _fip_candidates(F, base, budget), budget)
    if T is None:
        raise CertificationError(f"types over {len(base)} base types do not cover {F.label}")
    return _certified(F, T, budget)


def fft_partition(F: DefinableFamily, m: int, n: int, budget=None) -> FFTPartition | None:
    """
    Definable index classes, each contained in one definable type.

    Requires n > dim(union of F) and the (m, n)-property.

    Returns:
        FFTPartition, or None when the candidate search found no cover
    """
    budget = ensure_budget(budget)
    require_index(F, budget)
    union = exists(F.index_vars, conj(F.domain, F.member))
    d = dimension(union, F.object_vars, F.mode)
    if n <= d:
        raise PreconditionError(f"n = {n} must exceed the dimension {d} of the union of {F.label}")
    verdict = pq_property(F, m, n, budget)
    if not verdict:
        raise PreconditionError(f"{F.label} lacks the ({m}, {n})-property", verdict.witness)
    first = []
    if is_downward_directed(F, budget):
        try:
            first.append(extend_dd_to_type(F, budget))
        except CertificationError as exc:
            logger.debug("no direct extension of %s: %s", F.label, exc)
    T = _cover(F, chain(first, _cover_candidates(F)), budget)
    if T is None:
        logger.warning("a finite tame transversal of %s exists but the candidate types did not cover it", F.label)
        return None
    T = _certified(F, T, budget)
    classes, earlier = [], []
    for condition in T.conditions:
        classes.append(eliminate(conj(F.domain, condition, *(neg(c) for c in earlier)), F.mode))
        earlier.append(condition)
    return FFTPartition(tuple(classes), T)


# ===================== VC CONSTRUCTIONS =====================


def product_lift(F: DefinableFamily, l: int) -> DefinableFamily:
    """
    {S x M^(l-1) u M x S x M^(l-2) u ... : S in F} in M^(k*l).

    Finitely many members of F have a transversal of at most l points exactly
    when their lifts share a point.
    """
    if l < 1:
        raise SchemaError(f"lift order must be positive, got {l}")
    if l == 1:
        return F
    taken = set(F.index_vars) | set(F.object_vars)
    blocks = []
    for i in range(1, l + 1):
        names = tuple(f"{v}_{i}" for v in F.object_vars)
        if set(names) & taken:
            names = tuple(fresh(v) for v in F.object_vars)
        taken |= set(names)
        blocks.append(names)
    member = disj(*(F.instance(None, block) for block in blocks))
    return DefinableFamily(
        member, F.index_vars, tuple(chain.from_iterable(blocks)), F.domain, name=f"{F.label}^{l}", mode=F.mode
    )


def lift_meets(F: DefinableFamily, l: int, indices, budget=None) -> bool:
    """The lifts of the members at `indices` share a point."""
    budget = ensure_budget(budget)
    lifted = product_lift(F, l)
    return bool(sat_within(conj(*(lifted.fiber(u) for u in indices)), F.mode, budget))


def finite_transversal(F: DefinableFamily, indices, size: int, budget=None):
    """
    At most `size` points meeting each member at `indices`, by brute force over cell samples.

    Returns:
        tuple of points, or None when no such set exists
    """
    budget = ensure_budget(budget)
    fibers = [F.fiber(u) for u in indices]
    decomposition = decompose(fibers, variables=F.object_vars, mode=F.mode)
    samples = [c.sample for c in decomposition.cells]
    hits = [frozenset(i for i, fib in enumerate(fibers) if evaluate(fib, s, F.object_vars, F.mode)) for s in samples]
    everything = frozenset(range(len(fibers)))
    for k in range(1, size + 1):
        for combo in combinations(range(len(samples)), k):
            budget.spend("candidates")
            if frozenset().union(*(hits[i] for i in combo)) == everything:
                return tuple(samples[i] for i in combo)
    return None


def venn_count(F: DefinableFamily, indices, budget=None) -> int:
    """Nonempty regions of the Venn diagram of the members at `indices`, the outside excluded."""
    budget = ensure_budget(budget)
    indices = list(indices)
    budget.require("venn", len(indices))
    fibers = [F.fiber(u) for u in indices]
    count = 0
    for pattern in product((True, False), repeat=len(fibers)):
        if not any(pattern):
            continue
        region = conj(*(fib if inside else neg(fib) for fib, inside in zip(fibers, pattern)))
        if sat_within(region, F.mode, budget):
            count += 1
    return count


def _grid_points(F: DefinableFamily, grid):
    return [pt for pt in product(grid, repeat=F.index_arity) if evaluate(F.domain, pt, F.index_vars, F.mode)]


def dual_shatter_lower_bound(F: DefinableFamily, n: int, trials=SHATTER_TRIALS, rng=None, grid=SHATTER_GRID, budget=None) -> int:
    """
    Best Venn count over n-tuples of grid index points: a lower bound for the dual shatter function at n.

    The diagonal tuple (g, .., g) for the first n grid values is tried first,
    then `trials` random tuples drawn with the seeded generator.
    """
    budget = ensure_budget(budget)
    rng = rng if rng is not None else np.random.default_rng(SEED)
    points = _grid_points(F, grid)
    if not points:
        raise PreconditionError(f"no grid point lies in the index domain of {F.label}")
    n = min(n, len(points))
    diagonal = [pt for pt in points if len(set(pt)) <= 1][:n]
    tried = [tuple(diagonal)] if len(diagonal) == n else []
    for _ in range(trials):
        picks = rng.choice(len(points), size=n, replace=False)
        tried.append(tuple(points[i] for i in sorted(picks)))
    best = 0
    for indices in dict.fromkeys(tried):
        best = max(best, venn_count(F, indices, budget))
    logger.debug("%s: dual shatter at %d is at least %d", F.label, n, best)
    return best


# ===================== (k+1)-CONSISTENT INTERVAL UNIONS =====================


def kplus1_interval_analysis(F: DefinableFamily, k: int, budget=None) -> KPlusOneResult | None:
    """
    Rational points meeting every member, or a definable type containing every member.

    Members are unions of at most k intervals or points of M and F is
    (k+1)-consistent. Point sets of size <= k drawn from the critical
    constants are tried before the type search.

    Returns:
        KPlusOneResult, or None when neither search succeeded
    """
    budget = ensure_budget(budget)
    require_index(F, budget)
    components = max_components(F)
    if components > k:
        raise SchemaError(f"a member of {F.label} has {components} intervals, more than {k}")
    verdict = n_consistent(F, k + 1, budget)
    if not verdict:
        raise PreconditionError(f"{F.label} is not {k + 1}-consistent", verdict.witness)
    (v,) = F.object_vars
    constants = critical_constants(F)
    for size in range(1, k + 1):
        for combo in combinations(constants, size):
            budget.spend("candidates")
            hit = disj(*(substitute(F.member, {v: c}) for c in combo))
            if not sat_within(conj(F.domain, neg(hit)), F.mode, budget):
                logger.info("%s: rational transversal %s", F.label, [str(c) for c in combo])
                return KPlusOneResult(points=tuple(combo))
    p = extend_to_definable_type(F, budget)
    if p is not None:
        return KPlusOneResult(type=p)
    logger.warning("%s: neither a rational transversal nor a type was found", F.label)
    return None
