# families.py - Definable families and downward directed constructions
"""
Definable families of sets and the constructions around downward directed families.

Contains:
- DefinableFamily: member formula phi(u, v) over an index domain Omega(u)
- CellFamily: a family of cells of one layer schema, with its construction trace
- Predicates: is_nonempty_all, is_downward_directed, is_finer, is_complete_for, check_facts
- Family algebra: fiber, intersect_family, project_family, pairwise_family, rename_index
- complete_dd_cells: complete downward directed cell family finer than a DD family
- refine_within_type: DD family inside a type that is complete for a given family
- extend_dd_to_type: a definable type containing every member of a DD family
- extend_to_definable_type: bounded search for a type containing a family
- boundary_functions, boundary_family: boundary functions of the last coordinate
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction

from ominal.cells import (
    MINUS_INF,
    PLUS_INF,
    AffineFunc,
    BandLayer,
    GraphLayer,
    Infinity,
    UniformDecomposition,
    cell_to_formula,
    decompose,
    default_variables,
    layer_formula,
    supremum,
)
from ominal.config import BATTERY_FORMULAS, ensure_budget
from ominal.exceptions import ArityMismatch, CertificationError, PreconditionError, SchemaError
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
    check_mode,
    conj,
    disj,
    eliminate,
    entails,
    eq,
    evaluate,
    exists,
    forall,
    free_vars,
    fresh,
    ge,
    gt,
    implies,
    is_satisfiable,
    le,
    lt,
    natural_key,
    neg,
    ordered_free_vars,
    point_mapping,
    primed,
    rename,
    substitute,
)
from ominal.sexpr import format_formula
from ominal.types import (
    Above,
    Below,
    CutMinus,
    CutPlus,
    DefinableType,
    FunctionFamily,
    Graph,
    GraphFunction,
    LimitBelow,
    MinusInf,
    PlusInf,
    Realized,
    SupremumFamily,
    membership_condition,
    project_type,
    random_formula_battery,
    realized_point,
    type_member,
    validate_type,
)

logger = logging.getLogger(__name__)


# ===================== FAMILIES =====================


@dataclass(frozen=True)
class DefinableFamily:
    """
    The family {member(u, M^n) : u in domain}.

    Args:
        member: formula in index_vars + object_vars
        index_vars: index variable names u
        object_vars: object variable names v
        domain: index domain formula in u
        name: label used in reports
        mode: structure mode
    """

    member: Formula
    index_vars: tuple[str, ...]
    object_vars: tuple[str, ...]
    domain: Formula = TRUE
    name: str = ""
    mode: Mode = Mode.ODAG

    def __post_init__(self):
        object.__setattr__(self, "index_vars", tuple(self.index_vars))
        object.__setattr__(self, "object_vars", tuple(self.object_vars))
        object.__setattr__(self, "mode", as_mode(self.mode))
        names = self.index_vars + self.object_vars
        if len(set(names)) != len(names):
            raise SchemaError(f"index and object variables must be distinct: {names}")
        if not self.object_vars:
            raise SchemaError("a family needs at least one object variable")
        extra = free_vars(self.member) - set(names)
        if extra:
            raise SchemaError(f"member formula uses undeclared variables {sorted(extra)}")
        extra = free_vars(self.domain) - set(self.index_vars)
        if extra:
            raise SchemaError(f"index domain uses {sorted(extra)} outside the index")
        check_mode(self.member, self.mode)
        check_mode(self.domain, self.mode)

    @property
    def index_arity(self) -> int:
        return len(self.index_vars)

    @property
    def object_arity(self) -> int:
        return len(self.object_vars)

    @property
    def label(self) -> str:
        return self.name or "family"

    def instance(self, ks=None, xs=None) -> Formula:
        """Member formula with the index renamed to ks and the objects to xs."""
        mapping = {}
        if ks is not None:
            mapping.update(zip(self.index_vars, ks))
        if xs is not None:
            mapping.update(zip(self.object_vars, xs))
        return rename(self.member, mapping)

    def domain_at(self, ks) -> Formula:
        return rename(self.domain, dict(zip(self.index_vars, ks)))

    def fresh_index(self) -> tuple[str, ...]:
        return tuple(fresh(u) for u in self.index_vars)

    def fresh_objects(self) -> tuple[str, ...]:
        return tuple(fresh(v) for v in self.object_vars)

    def fiber(self, u) -> Formula:
        """The member at a rational index point, as a formula in the object variables."""
        values = point_mapping(self.domain, u, self.index_vars)
        return substitute(self.member, values)

    def __str__(self):
        return format_family(self)


def format_family(F: DefinableFamily) -> str:
    name = F.name or "_"
    return (
        f"(family {name} (index {' '.join(F.index_vars)}) (object {' '.join(F.object_vars)}) "
        f"(member {format_formula(F.member)}) (domain {format_formula(F.domain)}))"
    )


def fiber(F: DefinableFamily, u) -> Formula:
    return F.fiber(u)


def rename_index(F: DefinableFamily, names) -> DefinableFamily:
    names = tuple(names)
    if len(names) != F.index_arity:
        raise ArityMismatch(f"{len(names)} names for an index of arity {F.index_arity}")
    return replace(F, member=F.instance(names), index_vars=names, domain=F.domain_at(names))


def _apart(F: DefinableFamily, taken) -> DefinableFamily:
    """F with its index renamed away from the names in `taken`."""
    if set(F.index_vars) & set(taken):
        return rename_index(F, F.fresh_index())
    return F


def as_family(X, object_vars) -> DefinableFamily:
    """A formula (or family) as a family over `object_vars`-arity objects."""
    if isinstance(X, DefinableFamily):
        if X.object_arity != len(object_vars):
            raise ArityMismatch(f"object arity {X.object_arity} against {len(object_vars)}")
        return X
    object_vars = tuple(object_vars)
    n = len(object_vars)
    names = ordered_free_vars(X)
    if set(names) <= set(object_vars):
        return DefinableFamily(X, (), object_vars)
    if set(names) <= set(default_variables(n)):
        return DefinableFamily(X, (), default_variables(n))
    if len(names) == n:
        return DefinableFamily(X, (), names)
    raise ArityMismatch(f"set in {names} against object arity {n}")


def _object_formula(X: Formula, F: DefinableFamily) -> Formula:
    """X written over F's object variables."""
    target = as_family(X, F.object_vars)
    return target.instance((), F.object_vars)


def sat_within(f: Formula, mode, budget):
    budget.require("qe_atoms", atom_count(f))
    return is_satisfiable(f, mode)


def require_index(F: DefinableFamily, budget):
    if not sat_within(F.domain, F.mode, budget):
        raise PreconditionError(f"index domain of {F.label} is empty")


# ===================== PREDICATES =====================


def is_nonempty_all(F: DefinableFamily, budget=None) -> Verdict:
    """Every member is nonempty; the witness is an index with an empty member."""
    budget = ensure_budget(budget)
    require_index(F, budget)
    empty = sat_within(conj(F.domain, neg(exists(F.object_vars, F.member))), F.mode, budget)
    if empty:
        return Verdict(False, empty.point(F.index_vars), "a member is empty")
    return Verdict(True)


def is_downward_directed(F: DefinableFamily, budget=None) -> Verdict:
    """
    Any two members contain a third, and no member is empty.

    Returns:
        Verdict: on failure the witness is a pair of index points (or one point
        when a member is empty)
    """
    budget = ensure_budget(budget)
    nonempty = is_nonempty_all(F, budget)
    if not nonempty:
        return Verdict(False, (nonempty.witness,), nonempty.detail)
    u1, u2, u3 = F.fresh_index(), F.fresh_index(), F.fresh_index()
    xs = F.fresh_objects()
    inside = forall(xs, implies(F.instance(u3, xs), conj(F.instance(u1, xs), F.instance(u2, xs))))
    below = exists(u3, conj(F.domain_at(u3), inside))
    bad = sat_within(conj(F.domain_at(u1), F.domain_at(u2), neg(below)), F.mode, budget)
    if bad:
        return Verdict(False, (bad.point(u1), bad.point(u2)), "no member lies inside this pair's intersection")
    return Verdict(True)


def is_finer(F: DefinableFamily, G: DefinableFamily, budget=None) -> Verdict:
    """Every member of G contains a member of F; the witness is an index of G without one."""
    budget = ensure_budget(budget)
    if F.object_arity != G.object_arity:
        raise ArityMismatch(f"object arities {F.object_arity} and {G.object_arity}")
    require_index(F, budget)
    require_index(G, budget)
    w, u, xs = F.fresh_index(), G.fresh_index(), F.fresh_objects()
    inside = forall(xs, implies(F.instance(w, xs), G.instance(u, xs)))
    bad = sat_within(conj(G.domain_at(u), neg(exists(w, conj(F.domain_at(w), inside)))), F.mode, budget)
    if bad:
        return Verdict(False, bad.point(u), f"a member of {G.label} contains no member of {F.label}")
    return Verdict(True)


def is_complete_for(F: DefinableFamily, X, budget=None, assume_dd=False) -> Verdict:
    """
    For every member of X (a formula or a family) some member of F is inside it or disjoint from it.

    Raises:
        PreconditionError: F is not downward directed
    """
    budget = ensure_budget(budget)
    if not assume_dd:
        dd = is_downward_directed(F, budget)
        if not dd:
            raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    target = as_family(X, F.object_vars)
    w, u, xs = F.fresh_index(), target.fresh_index(), F.fresh_objects()
    member = F.instance(w, xs)
    inside = forall(xs, implies(member, target.instance(u, xs)))
    outside = forall(xs, implies(member, neg(target.instance(u, xs))))
    decided = exists(w, conj(F.domain_at(w), disj(inside, outside)))
    bad = sat_within(conj(target.domain_at(u), neg(decided)), F.mode, budget)
    if bad:
        return Verdict(False, bad.point(u), f"every member of {F.label} straddles this set")
    return Verdict(True)


@dataclass(frozen=True)
class FactReport:
    """Finite-cover facts for a downward directed family."""

    met_by_all: tuple[int, ...]
    containing: tuple[int, ...]
    complete: bool


def check_facts(F: DefinableFamily, cover, budget=None) -> FactReport:
    """
    Which cover elements every member meets, which contain a member, and whether F decides them all.

    For a DD family and a cover of a set met by every member, some cover
    element is met by every member; when F is also complete for the cover
    (and the cover is a partition) exactly one element contains a member.
    """
    budget = ensure_budget(budget)
    dd = is_downward_directed(F, budget)
    if not dd:
        raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    u = F.fresh_index()
    met, containing, complete = [], [], True
    for i, X in enumerate(cover):
        X = _object_formula(X, F)
        member = F.instance(u)
        missed = sat_within(conj(F.domain_at(u), neg(exists(F.object_vars, conj(member, X)))), F.mode, budget)
        if not missed:
            met.append(i)
        if sat_within(conj(F.domain_at(u), forall(F.object_vars, implies(member, X))), F.mode, budget):
            containing.append(i)
        complete = complete and bool(is_complete_for(F, X, budget, assume_dd=True))
    return FactReport(tuple(met), tuple(containing), complete)


# ===================== FAMILY ALGEBRA =====================


def intersect_family(F: DefinableFamily, X: Formula) -> DefinableFamily:
    """{S & X : S in F}."""
    X = _object_formula(X, F)
    return replace(F, member=conj(F.member, X), name=f"{F.label}&")


def project_family(F: DefinableFamily, keep: int | None = None) -> DefinableFamily:
    """{pi(S) : S in F}, keeping the first `keep` object coordinates (default n-1)."""
    keep = F.object_arity - 1 if keep is None else keep
    if not 1 <= keep < F.object_arity:
        raise ArityMismatch(f"cannot project arity {F.object_arity} onto {keep} coordinates")
    member = eliminate(exists(F.object_vars[keep:], F.member), F.mode)
    return replace(F, member=member, object_vars=F.object_vars[:keep], name=f"pi({F.label})")


def pairwise_family(F: DefinableFamily) -> DefinableFamily:
    """{S & S' : S, S' in F}, indexed by pairs."""
    other = primed(F.index_vars, F.object_vars)
    return DefinableFamily(
        conj(F.member, F.instance(other)),
        F.index_vars + other,
        F.object_vars,
        conj(F.domain, F.domain_at(other)),
        name=f"{F.label}^2",
        mode=F.mode,
    )


# ===================== CELL FAMILIES =====================

BRANCH_MINUS_INF = "minus-inf"
BRANCH_PLUS_INF = "plus-inf"
BRANCH_RIGHT_OF_MAX = "right-of-max"
BRANCH_LEFT_APPROACH = "left-approach"
BRANCH_INTERSECTION = "intersection"


@dataclass(frozen=True)
class BaseCaseTrace:
    """
    One-dimensional step: H = {t : some member lies right of t}, its supremum and the branch taken.

    supremum is None when H is empty.
    """

    lower_set: Formula
    supremum: Fraction | Infinity | None
    attained: bool
    branch: str


@dataclass(frozen=True)
class StepTrace:
    """One inductive step: how many cells met every member and which schema was kept."""

    level: int
    candidates: int
    schema: str
    lower_dimensional: bool
    branch: str = "leftmost-cell"


@dataclass(frozen=True)
class CellFamily:
    """
    A definable family whose members are cells of one layer schema.

    layers hold one layer per object coordinate; their terms use the index
    variables and the earlier object variables.
    """

    family: DefinableFamily
    layers: tuple
    trace: tuple = ()
    certificate: tuple[str, ...] = ()

    @property
    def schema(self) -> str:
        return "".join("G" if isinstance(layer, GraphLayer) else "B" for layer in self.layers)

    def cell_formula(self) -> Formula:
        return conj(*(layer_formula(x, layer) for x, layer in zip(self.family.object_vars, self.layers)))

    def conforms(self) -> bool:
        """Every member is exactly the cell described by the layers."""
        F = self.family
        cell = self.cell_formula()
        return entails(conj(F.domain, F.member), cell, F.mode) and entails(conj(F.domain, cell), F.member, F.mode)


def _pick_index_name(avoid) -> str:
    for name in ("t", "s", "r"):
        if name not in avoid:
            return name
    return fresh("t")


def one_type_basis(p: DefinableType, x: str = "v1", mode=Mode.ODAG, index=None) -> CellFamily:
    """
    The interval basis of a 1-type, a complete downward directed family.

    CutPlus(a) -> {(a, t) : t > a}, CutMinus(a) -> {(t, a) : t < a},
    PlusInf -> {(t, +inf)}, MinusInf -> {(-inf, t)}, Realized(c) -> {{c}}.
    """
    t = index or _pick_index_name({x})
    tf = AffineFunc(Term.var(t))
    match p:
        case Realized((c,)):
            return _singleton((c,), (x,), mode)
        case MinusInf():
            member, domain, layer = lt(x, t), TRUE, BandLayer(MINUS_INF, tf)
        case PlusInf():
            member, domain, layer = gt(x, t), TRUE, BandLayer(tf, PLUS_INF)
        case CutPlus(a):
            member, domain, layer = between(a, x, t), gt(t, a), BandLayer(AffineFunc(Term.constant(a)), tf)
        case CutMinus(a):
            member, domain, layer = between(t, x, a), lt(t, a), BandLayer(tf, AffineFunc(Term.constant(a)))
        case _:
            raise ArityMismatch(f"{p} is not a 1-type")
    family = DefinableFamily(member, (t,), (x,), domain, name=f"basis {p}", mode=mode)
    return CellFamily(family, (layer,))


def _singleton(point, xs, mode) -> CellFamily:
    member = conj(*(eq(x, c) for x, c in zip(xs, point)))
    layers = tuple(GraphLayer(AffineFunc(Term.constant(c))) for c in point)
    return CellFamily(DefinableFamily(member, (), tuple(xs), TRUE, name="point", mode=mode), layers)


def _lower_set(F: DefinableFamily, t: str, budget) -> Formula:
    u, (x,) = F.fresh_index(), F.fresh_objects()
    right_of = forall(x, implies(F.instance(u, (x,)), gt(x, t)))
    query = exists(u, conj(F.domain_at(u), right_of))
    budget.require("qe_atoms", atom_count(query))
    return eliminate(query, F.mode)


def _one_type_of(F: DefinableFamily, budget) -> tuple[DefinableType, BaseCaseTrace]:
    """1-type read off the supremum of H = {t : some member misses (-inf, t]}."""
    t = fresh("t")
    lower = _lower_set(F, t, budget)
    ext = supremum(lower, t, F.mode)
    if ext is None:
        p, branch = MinusInf(), BRANCH_MINUS_INF
    elif ext.value is PLUS_INF:
        p, branch = PlusInf(), BRANCH_PLUS_INF
    elif ext.attained:
        p, branch = CutPlus(ext.value), BRANCH_RIGHT_OF_MAX
    else:
        p, branch = CutMinus(ext.value), BRANCH_LEFT_APPROACH
    trace = BaseCaseTrace(
        rename(lower, {t: "t"}),
        None if ext is None else ext.value,
        bool(ext and ext.attained),
        branch,
    )
    logger.debug("base case of %s: sup H = %s, branch %s", F.label, trace.supremum, branch)
    return p, trace


def _common_point(F: DefinableFamily, budget):
    u = F.fresh_index()
    everywhere = forall(u, implies(F.domain_at(u), F.instance(u)))
    found = sat_within(everywhere, F.mode, budget)
    return found.point(F.object_vars) if found else None


def _meets_all(G: DefinableFamily, piece: Formula) -> Formula:
    """Condition on G's index: the set `piece` (over G's index and objects) meets every member of G."""
    k2, xs = G.fresh_index(), G.fresh_objects()
    moved = rename(piece, dict(zip(G.object_vars, xs)))
    return forall(k2, implies(G.domain_at(k2), exists(xs, conj(moved, G.instance(k2, xs)))))


def _complete_cells(F: DefinableFamily, budget, level: int) -> CellFamily:
    budget.require("search_depth", level + 1)
    if F.object_arity == 1:
        p, trace = _one_type_of(F, budget)
        out = one_type_basis(p, F.object_vars[0], F.mode)
        if is_finer(out.family, F, budget):
            return replace(out, trace=(trace,))
        point = _common_point(F, budget)
        if point is None:
            raise CertificationError(f"interval basis of {p} is not finer than {F.label}")
        return replace(_singleton(point, F.object_vars, F.mode), trace=(replace(trace, branch=BRANCH_INTERSECTION),))
    point = _common_point(F, budget)
    if point is not None:
        n = F.object_arity
        step = StepTrace(level, 0, "G" * n, True, BRANCH_INTERSECTION)
        return replace(_singleton(point, F.object_vars, F.mode), trace=(step,))
    return _inductive_step(F, budget, level)


def _inductive_step(F: DefinableFamily, budget, level: int) -> CellFamily:
    mode = F.mode
    base = _complete_cells(project_family(F), budget, level + 1)
    B = _apart(base.family, F.index_vars + F.object_vars)
    G = DefinableFamily(
        conj(F.member, B.member),
        F.index_vars + B.index_vars,
        F.object_vars,
        conj(F.domain, B.domain),
        name=f"{F.label}|base",
        mode=mode,
    )
    variables = G.index_vars + G.object_vars
    decomposition = decompose([G.member, G.domain], variables=variables, mode=mode)
    ud = UniformDecomposition(decomposition, G.index_vars, G.object_vars)
    k = G.index_arity
    region = conj(G.member, G.domain)
    candidates = []
    for cell in ud.cells:
        if not evaluate(region, cell.sample, variables, mode):
            continue
        budget.spend("candidates")
        piece = ud.object_part(cell)
        psi = eliminate(conj(ud.index_part(cell), _meets_all(G, piece)), mode)
        if psi != FALSE:
            candidates.append((cell, piece, psi))
    logger.debug("level %d of %s: %d cells meet every member", level, F.label, len(candidates))
    for i, (cell, piece, psi) in enumerate(candidates):
        # leftmost rule: no lower cell of the same stack meets every member
        lower = [q for c, _, q in candidates[:i] if c.layers[:-1] == cell.layers[:-1]]
        chosen = eliminate(conj(psi, *(neg(q) for q in lower)), mode)
        if chosen == FALSE or not sat_within(conj(G.domain, chosen), mode, budget):
            continue
        family = DefinableFamily(piece, G.index_vars, G.object_vars, conj(G.domain, chosen), name=f"cells({F.label})", mode=mode)
        if is_finer(family, G, budget) and is_downward_directed(family, budget):
            layers = cell.layers[k:]
            out = CellFamily(family, layers)
            step = StepTrace(level, len(candidates), out.schema, out.schema.count("B") < F.object_arity)
            return replace(out, trace=base.trace + (step,))
    raise CertificationError(f"no cell of the uniform decomposition of {F.label} gives a finer downward directed family")


def certification_battery(F: DefinableFamily, battery=None, size=BATTERY_FORMULAS, rng=None) -> list:
    """
    The input family, one family per atom of its member formula, then `battery`
    (or `size` random formulas when battery is None).
    """
    items: list = [F]
    seen = set()
    for a in atoms(eliminate(F.member, F.mode)):
        if a in seen:
            continue
        seen.add(a)
        if free_vars(a) <= set(F.object_vars):
            items.append(a)
        else:
            items.append(DefinableFamily(a, F.index_vars, F.object_vars, F.domain, name=f"atom of {F.label}", mode=F.mode))
    if battery is None:
        battery = random_formula_battery(F.object_arity, size, rng, F.mode, variables=F.object_vars)
    items.extend(battery)
    return items


def _certify_cells(out: CellFamily, F: DefinableFamily, battery, budget) -> CellFamily:
    family = out.family
    dd = is_downward_directed(family, budget)
    if not dd:
        raise CertificationError(f"cell family for {F.label} is not downward directed (witness {dd.witness})")
    if not is_finer(family, F, budget):
        raise CertificationError(f"cell family is not finer than {F.label}")
    if not out.conforms():
        raise CertificationError("members do not match the layer schema")
    for X in battery:
        verdict = is_complete_for(family, X, budget, assume_dd=True)
        if not verdict:
            raise CertificationError(f"cell family for {F.label} is not complete for {X}")
    checks = ("downward-directed", "finer", f"schema {out.schema}", f"complete on {len(battery)} battery items")
    return replace(out, certificate=checks)


def complete_dd_cells(F: DefinableFamily, battery=None, budget=None, battery_size=BATTERY_FORMULAS) -> CellFamily:
    """
    Complete downward directed family of cells finer than a DD family.

    Args:
        F: downward directed family
        battery: extra formulas / families to certify completeness against;
            None draws `battery_size` random formulas
        budget: Budget
        battery_size: random battery size when battery is None

    Returns:
        CellFamily: certified DD, finer than F, complete for the battery,
        with the base-case trace (H, sup H, branch) and one entry per inductive step

    Raises:
        PreconditionError: F is not downward directed
        CertificationError: the construction failed its own checks
    """
    budget = ensure_budget(budget)
    dd = is_downward_directed(F, budget)
    if not dd:
        raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    out = _complete_cells(F, budget, 0)
    items = certification_battery(F, battery, battery_size)
    return _certify_cells(out, F, items, budget)


# ===================== REFINEMENT INSIDE A TYPE =====================


@dataclass(frozen=True)
class _Piece:
    tag: int
    base: Formula  # object-base part, over the index and the first n-1 objects
    layer: object  # last layer
    condition: Formula  # index condition: in the cell's index part and the fiber is in the type


class _CellUnion:
    """The family of cells of a decomposition of S whose fibers lie in the type, tagged by cell."""

    def __init__(self, pieces, S: DefinableFamily):
        self.pieces = tuple(pieces)
        self.S = S
        self.tag = fresh("c") if len(self.pieces) > 1 else None
        self.index_vars = ((self.tag,) if self.tag else ()) + S.index_vars
        self.ys = S.object_vars[:-1]
        self.z = S.object_vars[-1]

    def _guard(self, piece, ks) -> Formula:
        return eq(ks[0], piece.tag) if self.tag else TRUE

    def _at(self, f: Formula, ks) -> Formula:
        return rename(f, dict(zip(self.index_vars, ks)))

    def _bound(self, bound, ks):
        if isinstance(bound, Infinity):
            return bound
        mapping = {u: Term.var(k) for u, k in zip(self.index_vars, ks)}
        return bound.term.substitute(mapping)

    def member(self, ks) -> Formula:
        parts = []
        for p in self.pieces:
            last = rename(layer_formula(self.z, p.layer), dict(zip(self.index_vars, ks)))
            parts.append(conj(self._guard(p, ks), self._at(p.base, ks), last))
        return disj(*parts)

    def domain(self, ks) -> Formula:
        return disj(*(conj(self._guard(p, ks), self._at(p.condition, ks)) for p in self.pieces))

    def has_graph(self) -> bool:
        return any(isinstance(p.layer, GraphLayer) for p in self.pieces)

    def below_upper(self, ks) -> Formula:
        """(-inf, g_S) over pi(S)."""
        parts = []
        for p in self.pieces:
            g = self._bound(p.layer.upper, ks)
            parts.append(conj(self._guard(p, ks), self._at(p.base, ks), TRUE if g is PLUS_INF else lt(self.z, g)))
        return disj(*parts)

    def above_lower(self, ks) -> Formula:
        """(f_S, +inf) over pi(S)."""
        parts = []
        for p in self.pieces:
            f = self._bound(p.layer.lower, ks)
            parts.append(conj(self._guard(p, ks), self._at(p.base, ks), TRUE if f is MINUS_INF else gt(self.z, f)))
        return disj(*parts)

    def compare_bounds(self, ks, ks2, upper: bool) -> Formula:
        """{x in pi(S) & pi(S') : g_S <= g_S'} (upper) or {f_S >= f_S'} (lower)."""
        parts = []
        for p in self.pieces:
            for q in self.pieces:
                if upper:
                    a, b = self._bound(p.layer.upper, ks), self._bound(q.layer.upper, ks2)
                    rel = TRUE if b is PLUS_INF else FALSE if a is PLUS_INF else le(a, b)
                else:
                    a, b = self._bound(p.layer.lower, ks), self._bound(q.layer.lower, ks2)
                    rel = TRUE if b is MINUS_INF else FALSE if a is MINUS_INF else ge(a, b)
                parts.append(
                    conj(self._guard(p, ks), self._guard(q, ks2), self._at(p.base, ks), self._at(q.base, ks2), rel)
                )
        return disj(*parts)


def _cells_in_type(p: DefinableType, S: DefinableFamily, budget) -> list[_Piece]:
    mode = S.mode
    variables = S.index_vars + S.object_vars
    decomposition = decompose([S.member, S.domain], variables=variables, mode=mode)
    ud = UniformDecomposition(decomposition, S.index_vars, S.object_vars)
    k = S.index_arity
    pieces = []
    for cell in ud.cells:
        if not evaluate(S.domain, cell.sample[:k], S.index_vars, mode):
            continue
        budget.spend("candidates")
        piece = ud.object_part(cell)
        in_type = membership_condition(p, piece, S.object_vars, mode)
        condition = eliminate(conj(ud.index_part(cell), S.domain, in_type), mode)
        if condition == FALSE or not sat_within(condition, mode, budget):
            continue
        base = conj(*(layer_formula(x, layer) for x, layer in zip(S.object_vars[:-1], cell.layers[k:-1])))
        pieces.append(_Piece(len(pieces), base, cell.layers[-1], condition))
    return pieces


def _refine(p: DefinableType, S: DefinableFamily, budget, level: int) -> DefinableFamily:
    budget.require("search_depth", level + 1)
    point = realized_point(p)
    if point is not None:
        return _singleton(point, S.object_vars, S.mode).family
    if p.arity == 1:
        return one_type_basis(p, S.object_vars[0], S.mode).family
    pieces = _cells_in_type(p, S, budget)
    if not pieces:
        raise CertificationError(f"no cell of the decomposition of {S.label} lies in {p}")
    union = _CellUnion(pieces, S)
    base_type = project_type(p)
    ks = union.index_vars
    ks2 = primed(ks, S.object_vars)
    if union.has_graph():
        return _refine_graph_case(base_type, union, ks, ks2, budget, level)
    return _refine_band_case(base_type, union, ks, ks2, budget, level)


def _refine_graph_case(base_type, union: _CellUnion, ks, ks2, budget, level) -> DefinableFamily:
    S = union.S
    pairs = exists(union.z, conj(union.member(ks), union.member(ks2)))
    projected = DefinableFamily(
        eliminate(pairs, S.mode), ks + ks2, union.ys, conj(union.domain(ks), union.domain(ks2)), mode=S.mode
    )
    G = _apart(_refine(base_type, projected, budget, level + 1), ks + S.object_vars)
    return DefinableFamily(
        conj(G.member, union.member(ks)),
        G.index_vars + ks,
        S.object_vars,
        conj(G.domain, union.domain(ks)),
        name=f"refine({S.label})",
        mode=S.mode,
    )


def _refine_band_case(base_type, union: _CellUnion, ks, ks2, budget, level) -> DefinableFamily:
    S = union.S
    sigma = fresh("side")
    comparisons = disj(
        conj(eq(sigma, 0), union.compare_bounds(ks, ks2, upper=True)),
        conj(eq(sigma, 1), union.compare_bounds(ks, ks2, upper=False)),
    )
    splits = DefinableFamily(
        comparisons,
        (sigma,) + ks + ks2,
        union.ys,
        conj(disj(eq(sigma, 0), eq(sigma, 1)), union.domain(ks), union.domain(ks2)),
        mode=S.mode,
    )
    B = _apart(_refine(base_type, splits, budget, level + 1), ks + ks2 + S.object_vars)
    return DefinableFamily(
        conj(B.member, union.below_upper(ks), union.above_lower(ks2)),
        B.index_vars + ks + ks2,
        S.object_vars,
        conj(B.domain, union.domain(ks), union.domain(ks2)),
        name=f"refine({S.label})",
        mode=S.mode,
    )


def contains_family(p: DefinableType, F: DefinableFamily, budget=None) -> bool:
    """Every member of F belongs to p, decided symbolically in the index."""
    budget = ensure_budget(budget)
    condition = membership_condition(p, F.member, F.object_vars, F.mode)
    return not sat_within(conj(F.domain, neg(condition)), F.mode, budget)


def refine_within_type(p: DefinableType, S: DefinableFamily, budget=None) -> DefinableFamily:
    """
    Downward directed family of members of p that is complete for S.

    Raises:
        CertificationError: the output is not DD, leaves p, or is not complete for S
    """
    budget = ensure_budget(budget)
    validate_type(p, S.mode)
    if S.object_arity != p.arity:
        raise ArityMismatch(f"family of arity {S.object_arity} against a type of arity {p.arity}")
    require_index(S, budget)
    out = _refine(p, S, budget, 0)
    dd = is_downward_directed(out, budget)
    if not dd:
        raise CertificationError(f"refinement of {S.label} is not downward directed (witness {dd.witness})")
    if not contains_family(p, out, budget):
        raise CertificationError(f"refinement of {S.label} leaves {p}")
    if not is_complete_for(out, S, budget, assume_dd=True):
        raise CertificationError(f"refinement is not complete for {S.label}")
    return out


# ===================== EXTENSION TO TYPES =====================


def _preorder_minimum(base: DefinableType, sup: SupremumFamily, F: DefinableFamily, budget):
    """Index of a member whose supremum function is least in the preorder of the base type, or None."""
    ks, ks2 = F.fresh_index(), F.fresh_index()
    ys = tuple(fresh("y") for _ in sup.args)
    rho = membership_condition(base, sup.compare_formula(ks, ks2, ys, "le"), ys, F.mode)
    least = conj(F.domain_at(ks), forall(ks2, implies(F.domain_at(ks2), rho)))
    found = sat_within(least, F.mode, budget)
    return found.point(ks) if found else None


def _affine_piece(graph: Formula, args, result, base: DefinableType, mode):
    """An affine function agreeing with the graph on a set in the base type, if one exists."""
    if graph == FALSE:
        return None
    decomposition = decompose([graph], variables=tuple(args) + (result,), mode=mode)
    for cell in decomposition.cells_in(graph):
        last = cell.layers[-1]
        if isinstance(last, GraphLayer) and type_member(base, cell_to_formula(cell.base()), args, mode):
            return AffineFunc(last.f.term)
    return None


def _minimum_candidates(base: DefinableType, sup: SupremumFamily, u0, mode) -> list[DefinableType]:
    d = base.arity
    args = default_variables(d)
    result = "w"
    ks = tuple(fresh("k") for _ in sup.index_vars)
    values = dict(zip(ks, u0))
    unbounded = eliminate(substitute(sup.unbounded_formula(ks, args), values), mode)
    if type_member(base, unbounded, args, mode):
        return [Below(PLUS_INF, base)]
    graph = eliminate(substitute(sup.value_formula(ks, args, result), values), mode)
    f = _affine_piece(graph, args, result, base, mode) or GraphFunction(graph, args, result)
    return [Graph(f, base), Below(f, base)]


def _extend(F: DefinableFamily, budget, level: int) -> DefinableType:
    budget.require("search_depth", level + 1)
    mode = F.mode
    if F.object_arity == 1:
        p, trace = _one_type_of(F, budget)
        if contains_family(p, F, budget):
            return p
        point = _common_point(F, budget)
        if point is not None and contains_family(Realized(point), F, budget):
            return Realized(point)
        raise CertificationError(f"{p} (branch {trace.branch}) does not contain {F.label}")
    base = _extend(project_family(F), budget, level + 1)
    ys, z = F.object_vars[:-1], F.object_vars[-1]
    sup = SupremumFamily(F.member, F.index_vars, ys, z, F.domain)
    u0 = _preorder_minimum(base, sup, F, budget)
    if u0 is not None:
        candidates = _minimum_candidates(base, sup, u0, mode)
    else:
        logger.warning("suprema of %s have no least element over %s; using a limit type", F.label, base)
        candidates = [LimitBelow(sup, TRUE, base)]
    for p in candidates:
        try:
            validate_type(p, mode)
        except PreconditionError as exc:
            logger.debug("skipping %s: %s", p, exc)
            continue
        if contains_family(p, F, budget):
            return p
    raise CertificationError(f"no extension of {base} contains every member of {F.label}")


def extend_dd_to_type(F: DefinableFamily, budget=None) -> DefinableType:
    """
    Definable type containing every member of a downward directed family.

    Built by induction on the object arity: the projected family extends to a
    base type; the supremum functions of the last fibers are ordered by the
    base type; a least one gives a graph type or the type just below it,
    otherwise the limit of the graph types is taken.

    Raises:
        PreconditionError: F is not downward directed
        CertificationError: the constructed type misses a member
    """
    budget = ensure_budget(budget)
    dd = is_downward_directed(F, budget)
    if not dd:
        raise PreconditionError(f"{F.label} is not downward directed", dd.witness)
    return _extend(F, budget, 0)


def critical_constants(S: DefinableFamily) -> list[Fraction]:
    """Roots of the one-variable atoms of the member, of its union and of 0."""
    union = exists(S.index_vars, conj(S.domain, S.member))
    found = {Fraction(0)}
    for f in (S.member, union):
        for a in atoms(eliminate(f, S.mode)):
            if len(a.term.coeffs) == 1:
                (_, c), = a.term.coeffs
                found.add(-a.term.const / c)
    return sorted(found)


def one_type_candidates(constants):
    yield PlusInf()
    yield MinusInf()
    for c in constants:
        yield CutPlus(c)
        yield CutMinus(c)
        yield Realized((c,))


def boundary_functions(S: DefinableFamily, constants) -> list:
    """Index-free boundary functions of the last coordinate, over v1..v(n-1)."""
    ys, z = S.object_vars[:-1], S.object_vars[-1]
    canonical = {y: Term.var(v) for y, v in zip(ys, default_variables(len(ys)))}
    found = {}
    for a in atoms(eliminate(S.member, S.mode)):
        c = a.term.coeff(z)
        if c == 0 or not a.term.variables() - {z} <= set(ys):
            continue
        root = (-a.term.without(z) / c).substitute(canonical)
        found[root] = AffineFunc(root)
    for c in constants:
        found.setdefault(Term.constant(c), AffineFunc(Term.constant(c)))
    ordered = sorted(found.items(), key=lambda item: (len(item[0].coeffs), [natural_key(v) for v, _ in item[0].coeffs], item[0].const))
    return [f for _, f in ordered]


@dataclass(frozen=True)
class BoundaryFamily:
    """
    Every boundary function of the last coordinate, the index-dependent ones included.

    `functions` is indexed by (j, k): j picks a root, k is a renamed copy of the
    family's index. roots[j] is written over k and the first n-1 object variables.
    """

    functions: FunctionFamily
    roots: tuple[Term, ...]

    @property
    def index_vars(self) -> tuple[str, ...]:
        return self.functions.index_vars

    def at(self, point) -> AffineFunc:
        """The member at an index point (j, k...), over v1..v(n-1)."""
        j, *ks = (as_fraction(v) for v in point)
        if j.denominator != 1 or not 0 <= j < len(self.roots):
            raise SchemaError(f"no boundary root number {j}")
        args = self.functions.args
        mapping = {k: Term.constant(v) for k, v in zip(self.index_vars[1:], ks)}
        mapping.update((y, Term.var(v)) for y, v in zip(args, default_variables(len(args))))
        return AffineFunc(self.roots[int(j)].substitute(mapping))


def boundary_family(S: DefinableFamily) -> BoundaryFamily | None:
    """Roots of the last coordinate in every atom of the member, as one function family (None if there are none)."""
    ys, z = S.object_vars[:-1], S.object_vars[-1]
    ks = S.fresh_index()
    renaming = {u: Term.var(k) for u, k in zip(S.index_vars, ks)}
    roots: list[Term] = []
    for a in atoms(eliminate(S.member, S.mode)):
        c = a.term.coeff(z)
        if c == 0:
            continue
        root = (-a.term.without(z) / c).substitute(renaming)
        if root not in roots:
            roots.append(root)
    if not roots:
        return None
    j, w = fresh("j"), fresh("w")
    graph = disj(*(conj(eq(j, i), eq(w, r)) for i, r in enumerate(roots)))
    choices = disj(*(eq(j, i) for i in range(len(roots))))
    functions = FunctionFamily(graph, (j, *ks), ys, w, conj(S.domain_at(ks), choices))
    logger.debug("%s: %d boundary roots of %s", S.label, len(roots), z)
    return BoundaryFamily(functions, tuple(roots))


def candidate_types(S: DefinableFamily, budget=None, constants=None):
    """
    Candidate types for S, pruned by the projections of S.

    1-types at plus/minus infinity and at the critical constants; over each
    surviving base, the types at the infinities and along the index-free
    boundary functions of the last coordinate.
    """
    budget = ensure_budget(budget)
    constants = critical_constants(S) if constants is None else constants
    if S.object_arity == 1:
        yield from one_type_candidates(constants)
        return
    P = project_family(S)
    funcs = boundary_functions(S, constants)
    for base in candidate_types(P, budget, constants):
        budget.spend("candidates")
        try:
            validate_type(base, S.mode)
        except (PreconditionError, SchemaError):
            continue
        if not contains_family(base, P, budget):
            continue
        yield from types_over(base, funcs)


def types_over(base: DefinableType, funcs):
    """Types over a base: at the two infinities, then along each function and on either side of it."""
    yield Below(PLUS_INF, base)
    yield Above(MINUS_INF, base)
    for f in funcs:
        yield Graph(f, base)
        yield Above(f, base)
        yield Below(f, base)


def extend_to_definable_type(S: DefinableFamily, budget=None) -> DefinableType | None:
    """
    A definable type containing every member of S, or None when the search finds none.

    A downward directed S is extended directly; otherwise candidate types are
    enumerated and certified. None means "not found within the candidates",
    never "does not exist".

    Raises:
        BudgetExhausted: the candidate budget ran out before the search finished
    """
    budget = ensure_budget(budget)
    require_index(S, budget)
    if is_downward_directed(S, budget):
        try:
            return extend_dd_to_type(S, budget)
        except CertificationError as exc:
            logger.warning("direct extension of %s failed (%s); searching candidates", S.label, exc)
    for p in candidate_types(S, budget):
        budget.spend("candidates")
        try:
            validate_type(p, S.mode)
        except (PreconditionError, SchemaError):
            continue
        if contains_family(p, S, budget):
            logger.info("%s extends to %s", S.label, p)
            return p
    logger.info("no definable type among the candidates contains %s", S.label)
    return None
