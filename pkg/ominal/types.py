# types.py - Definable types as constructor trees
"""
Definable n-types over Q.

Contains:
- 1-type constructors: Realized, CutPlus, CutMinus, PlusInf, MinusInf
- Constructors over a base type: Graph (f|p), Above (f+|p), Below (f-|p), LimitBelow
- GraphFunction, FunctionFamily, SupremumFamily: definable functions and families of them
- membership_condition: the definability scheme of a type as a quantifier-free formula
- type_member, validate_type, type_dimension, project_type, realized_point
- preorder_compare / induced_preorder: the total preorder a type induces on functions
- random_formula_battery, types_equivalent

Every constructor's functions are written over the canonical variables v1..vd
of its base type.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ominal.cells import MINUS_INF, PLUS_INF, AffineFunc, Infinity, default_variables
from ominal.config import BATTERY_CONSTANTS, BATTERY_DEPTH, BATTERY_FORMULAS, BATTERY_TYPES, SEED
from ominal.exceptions import ArityMismatch, CertificationError, PreconditionError, SchemaError
from ominal.logic import (
    TRUE,
    Const,
    Formula,
    Mode,
    Rel,
    Term,
    Verdict,
    as_fraction,
    as_mode,
    between,
    check_mode,
    check_term_mode,
    conj,
    disj,
    eliminate,
    eq,
    evaluate,
    exists,
    forall,
    free_vars,
    fresh,
    gt,
    implies,
    is_satisfiable,
    le,
    lt,
    make_atom,
    neg,
    ordered_free_vars,
    primed,
    rename,
    substitute,
)
from ominal.sexpr import format_formula, format_rational, format_term

logger = logging.getLogger(__name__)


# ===================== FUNCTIONS =====================


@dataclass(frozen=True)
class GraphFunction:
    """Function given by a graph formula over (args, result); undefined where no result exists."""

    graph: Formula
    args: tuple[str, ...]
    result: str

    @property
    def arity(self) -> int:
        return len(self.args)

    def value_formula(self, xs, w) -> Formula:
        mapping = dict(zip(self.args, xs))
        mapping[self.result] = w
        return rename(self.graph, mapping)

    def domain_formula(self, xs) -> Formula:
        w = fresh("w")
        return exists(w, self.value_formula(xs, w))

    def __str__(self):
        return format_function(self)


def as_function(f):
    """AffineFunc / GraphFunction / Infinity from the accepted shorthands (Term, rational)."""
    if isinstance(f, (AffineFunc, GraphFunction, Infinity)):
        return f
    if isinstance(f, Term):
        return AffineFunc(f)
    if isinstance(f, (int, Fraction, str)):
        return AffineFunc(Term.constant(as_fraction(f)))
    raise SchemaError(f"not a definable function: {f!r}")


def _canonical(xs) -> dict[str, Term]:
    return {v: Term.var(x) for v, x in zip(default_variables(len(xs)), xs)}


def function_value(f, xs, w) -> Formula:
    """The formula `w = f(xs)`, including the domain of f."""
    match f:
        case AffineFunc(term, domain):
            mapping = _canonical(xs)
            return conj(substitute(domain, mapping), eq(w, term.substitute(mapping)))
        case GraphFunction():
            return f.value_formula(xs, w)
    raise SchemaError(f"function {f} has no finite values")


def function_domain(f, xs) -> Formula:
    match f:
        case AffineFunc(_, domain):
            return substitute(domain, _canonical(xs))
        case GraphFunction():
            return f.domain_formula(xs)
    raise SchemaError(f"function {f} has no domain")


def _compare(rel, left_value, right_value) -> Formula:
    a, b = fresh("a"), fresh("b")
    return exists((a, b), conj(left_value(a), right_value(b), rel(a, b)))


@dataclass(frozen=True)
class FunctionFamily:
    """
    Family {h_k : k in domain} of functions given by one graph formula over (k, args, result).

    Args:
        graph: formula in index_vars + args + (result,)
        index_vars: index variable names
        args: argument variable names
        result: value variable name
        domain: index domain formula
    """

    graph: Formula
    index_vars: tuple[str, ...]
    args: tuple[str, ...]
    result: str
    domain: Formula = TRUE

    @property
    def arity(self) -> int:
        return len(self.args)

    def domain_at(self, ks) -> Formula:
        return rename(self.domain, dict(zip(self.index_vars, ks)))

    def value_formula(self, ks, xs, w) -> Formula:
        mapping = dict(zip(self.index_vars, ks))
        mapping.update(zip(self.args, xs))
        mapping[self.result] = w
        return rename(self.graph, mapping)

    def domain_formula(self, ks, xs) -> Formula:
        w = fresh("w")
        return exists(w, self.value_formula(ks, xs, w))

    def compare_formula(self, ks, ks2, xs, rel="le") -> Formula:
        """{xs : h_ks(xs) rel h_ks2(xs)}, rel one of "le", "lt", "eq"."""
        op = {"le": le, "lt": lt, "eq": eq}[rel]
        return _compare(op, lambda a: self.value_formula(ks, xs, a), lambda b: self.value_formula(ks2, xs, b))

    def at(self, ks) -> GraphFunction:
        return GraphFunction(rename(self.graph, dict(zip(self.index_vars, ks))), self.args, self.result)

    def check(self, mode=Mode.ODAG) -> Verdict:
        """Every member is a function: at most one value per argument."""
        w2 = fresh(self.result)
        both = conj(self.domain, self.graph, self.value_formula(self.index_vars, self.args, w2))
        clash = is_satisfiable(conj(both, neg(eq(self.result, w2))), mode)
        if clash:
            return Verdict(False, clash.witness, "a member takes two values at one argument")
        return Verdict(True)

    def __str__(self):
        return format_family_ref(self)


@dataclass(frozen=True)
class SupremumFamily:
    """
    h_u(x) = sup {z : member(u, x, z)}, one function per member of a family in M^(d+1).

    Values lie in Q u {+-inf}; value_formula only describes the finite values,
    comparisons (compare_formula) cover the infinite ones as well.
    """

    member: Formula
    index_vars: tuple[str, ...]
    args: tuple[str, ...]
    result: str
    domain: Formula = TRUE

    @property
    def arity(self) -> int:
        return len(self.args)

    def domain_at(self, ks) -> Formula:
        return rename(self.domain, dict(zip(self.index_vars, ks)))

    def fiber(self, ks, xs, z) -> Formula:
        mapping = dict(zip(self.index_vars, ks))
        mapping.update(zip(self.args, xs))
        mapping[self.result] = z
        return rename(self.member, mapping)

    def domain_formula(self, ks, xs) -> Formula:
        z = fresh("z")
        return exists(z, self.fiber(ks, xs, z))

    def value_formula(self, ks, xs, w) -> Formula:
        z, z2 = fresh("z"), fresh("z")
        bounded = forall(z, implies(self.fiber(ks, xs, z), le(z, w)))
        least = forall(z2, implies(lt(z2, w), exists(z, conj(self.fiber(ks, xs, z), gt(z, z2)))))
        return conj(self.domain_formula(ks, xs), bounded, least)

    def unbounded_formula(self, ks, xs) -> Formula:
        """{xs : h(xs) = +inf}."""
        z, z2 = fresh("z"), fresh("z")
        return forall(z2, exists(z, conj(self.fiber(ks, xs, z), gt(z, z2))))

    def _sup_le(self, ks, ks2, xs) -> Formula:
        # sup A <= sup B  iff  every y in A and z < y leave some y' in B above z
        y, y2, z = fresh("y"), fresh("y"), fresh("z")
        reach = exists(y2, conj(self.fiber(ks2, xs, y2), gt(y2, z)))
        return forall((y, z), implies(conj(self.fiber(ks, xs, y), lt(z, y)), reach))

    def compare_formula(self, ks, ks2, xs, rel="le") -> Formula:
        both = conj(self.domain_formula(ks, xs), self.domain_formula(ks2, xs))
        match rel:
            case "le":
                return conj(both, self._sup_le(ks, ks2, xs))
            case "lt":
                return conj(both, neg(self._sup_le(ks2, ks, xs)))
            case "eq":
                return conj(both, self._sup_le(ks, ks2, xs), self._sup_le(ks2, ks, xs))
        raise ValueError(rel)

    def at(self, ks) -> GraphFunction:
        return GraphFunction(self.value_formula(ks, self.args, self.result), self.args, self.result)

    def __str__(self):
        return format_family_ref(self)


# ===================== CONSTRUCTORS =====================


class DefinableType:
    """Base class of the constructor tree."""

    __slots__ = ()

    def __str__(self):
        return format_type(self)


@dataclass(frozen=True)
class Realized(DefinableType):
    point: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(as_fraction(c) for c in self.point))

    @property
    def arity(self) -> int:
        return len(self.point)


@dataclass(frozen=True)
class CutPlus(DefinableType):
    """Just right of c."""

    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))

    @property
    def arity(self) -> int:
        return 1


@dataclass(frozen=True)
class CutMinus(DefinableType):
    """Just left of c."""

    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))

    @property
    def arity(self) -> int:
        return 1


@dataclass(frozen=True)
class PlusInf(DefinableType):
    @property
    def arity(self) -> int:
        return 1


@dataclass(frozen=True)
class MinusInf(DefinableType):
    @property
    def arity(self) -> int:
        return 1


@dataclass(frozen=True)
class Graph(DefinableType):
    """f|p: sets S whose section {x : (x, f(x)) in S} belongs to the base."""

    f: object
    base: DefinableType

    def __post_init__(self):
        object.__setattr__(self, "f", as_function(self.f))

    @property
    def arity(self) -> int:
        return self.base.arity + 1


@dataclass(frozen=True)
class Above(DefinableType):
    """f+|p: sets containing {x} x (f(x), s) for some s > f(x), for base-many x."""

    f: object
    base: DefinableType

    def __post_init__(self):
        object.__setattr__(self, "f", as_function(self.f))

    @property
    def arity(self) -> int:
        return self.base.arity + 1


@dataclass(frozen=True)
class Below(DefinableType):
    """f-|p: sets containing {x} x (s, f(x)) for some s < f(x), for base-many x."""

    f: object
    base: DefinableType

    def __post_init__(self):
        object.__setattr__(self, "f", as_function(self.f))

    @property
    def arity(self) -> int:
        return self.base.arity + 1


@dataclass(frozen=True)
class LimitBelow(DefinableType):
    """
    Limit of the graph types h|p as h decreases through a family without minimum.

    A set belongs to the type when it belongs to h|p for every h below some h0,
    h ranging over the members of `family` whose index satisfies `subindex`.
    """

    family: object
    subindex: Formula
    base: DefinableType

    @property
    def arity(self) -> int:
        return self.base.arity + 1


ONE_TYPES = (Realized, CutPlus, CutMinus, PlusInf, MinusInf)


# ===================== MEMBERSHIP =====================


def membership_condition(p: DefinableType, phi: Formula, object_vars=None, mode=Mode.ODAG) -> Formula:
    """
    Quantifier-free condition on the parameters of phi that holds exactly when phi(params, .) is in p.

    Args:
        p: definable type of arity n
        phi: formula; object_vars are its object coordinates, every other free variable a parameter
        object_vars: n variable names (default v1..vn)
        mode: structure mode

    Returns:
        Formula: quantifier-free in the parameters of phi
    """
    mode = as_mode(mode)
    xs = tuple(object_vars) if object_vars is not None else default_variables(p.arity)
    if len(xs) != p.arity:
        raise ArityMismatch(f"{len(xs)} object variables for a type of arity {p.arity}")
    check_mode(phi, mode)
    return eliminate(_member(p, eliminate(phi, mode), xs, mode), mode)


def _member(p, phi: Formula, xs, mode) -> Formula:
    s = fresh("s")
    match p:
        case Realized(point):
            return substitute(phi, dict(zip(xs, point)))
        case PlusInf():
            (x,) = xs
            return exists(s, forall(x, implies(gt(x, s), phi)))
        case MinusInf():
            (x,) = xs
            return exists(s, forall(x, implies(lt(x, s), phi)))
        case CutPlus(c):
            (x,) = xs
            return exists(s, conj(gt(s, c), forall(x, implies(between(c, x, s), phi))))
        case CutMinus(c):
            (x,) = xs
            return exists(s, conj(lt(s, c), forall(x, implies(between(s, x, c), phi))))
        case Graph(f, base):
            section = _graph_section(f, phi, xs[:-1], xs[-1])
            return _member(base, eliminate(section, mode), xs[:-1], mode)
        case Above(f, base):
            section = _side_section(f, phi, xs[:-1], xs[-1], above=True)
            return _member(base, eliminate(section, mode), xs[:-1], mode)
        case Below(f, base):
            section = _side_section(f, phi, xs[:-1], xs[-1], above=False)
            return _member(base, eliminate(section, mode), xs[:-1], mode)
        case LimitBelow():
            return _limit_member(p, phi, xs, mode)
    raise SchemaError(f"not a definable type: {p!r}")


def _graph_section(f, phi, ys, z) -> Formula:
    match f:
        case AffineFunc(term, domain):
            mapping = _canonical(ys)
            return conj(substitute(domain, mapping), substitute(phi, {z: term.substitute(mapping)}))
        case GraphFunction():
            return exists(z, conj(f.value_formula(ys, z), phi))
    raise SchemaError("the graph of an infinite function is empty")


def _side_section(f, phi, ys, z, above: bool) -> Formula:
    s = fresh("s")
    if isinstance(f, Infinity):
        if (f is PLUS_INF) == above:
            raise SchemaError(f"{'above +inf' if above else 'below -inf'} is not a type")
        tail = lt(z, s) if above else gt(z, s)
        return exists(s, forall(z, implies(tail, phi)))

    def near(value: Term) -> Formula:
        if above:
            return exists(s, conj(gt(s, value), forall(z, implies(between(value, z, s), phi))))
        return exists(s, conj(lt(s, value), forall(z, implies(between(s, z, value), phi))))

    match f:
        case AffineFunc(term, domain):
            mapping = _canonical(ys)
            return conj(substitute(domain, mapping), near(term.substitute(mapping)))
        case GraphFunction():
            w = fresh("w")
            return exists(w, conj(f.value_formula(ys, w), near(Term.var(w))))
    raise SchemaError(f"not a definable function: {f!r}")


def _index_copy(family, prefix: str) -> tuple[str, ...]:
    return tuple(fresh(f"{prefix}{k}") for k in family.index_vars)


def _subindex(p: LimitBelow, ks) -> Formula:
    mapping = dict(zip(p.family.index_vars, ks))
    return conj(rename(p.subindex, mapping), p.family.domain_at(ks))


def _below_or_equal(p: LimitBelow, ks, ks2, mode) -> Formula:
    """Induced preorder of the base type between h_ks and h_ks2."""
    ys = tuple(fresh("y") for _ in range(p.base.arity))
    return eliminate(_member(p.base, eliminate(p.family.compare_formula(ks, ks2, ys, "le"), mode), ys, mode), mode)


def _limit_member(p: LimitBelow, phi, xs, mode) -> Formula:
    logger.info("membership query through a limit-below type")
    k0, k = _index_copy(p.family, "k"), _index_copy(p.family, "k")
    graph_type = Graph(p.family.at(k), p.base)
    inner = eliminate(_member(graph_type, phi, xs, mode), mode)
    below = conj(_subindex(p, k), _below_or_equal(p, k, k0, mode))
    return exists(k0, conj(_subindex(p, k0), forall(k, implies(below, inner))))


# ===================== VALIDATION =====================


def _check_function(f, d: int, mode):
    canonical = set(default_variables(d))
    match f:
        case Infinity():
            return
        case AffineFunc(term, domain):
            check_term_mode(term, mode)
            check_mode(domain, mode)
            extra = (term.variables() | free_vars(domain)) - canonical
            if extra:
                raise SchemaError(f"function {f} uses {sorted(extra)} outside v1..v{d}")
        case GraphFunction(graph, args, result):
            if len(args) != d:
                raise ArityMismatch(f"function of arity {len(args)} over a base of arity {d}")
            extra = free_vars(graph) - set(args) - {result}
            if extra:
                raise SchemaError(f"function graph has parameters {sorted(extra)}")
            w2 = fresh(result)
            clash = conj(graph, f.value_formula(args, w2), neg(eq(result, w2)))
            if is_satisfiable(clash, mode):
                raise SchemaError(f"graph {format_formula(graph)} is not a function")
        case _:
            raise SchemaError(f"not a definable function: {f!r}")


@lru_cache(maxsize=1024)
def validate_type(p: DefinableType, mode=Mode.ODAG) -> DefinableType:
    """
    Structural checks on a constructor tree; returns p.

    Raises:
        SchemaError: malformed functions, graph of an infinite function, above +inf / below -inf
        PreconditionError: a function whose domain is not in the base type,
            a limit-below index set with a minimum
    """
    mode = as_mode(mode)
    match p:
        case Realized() | CutPlus() | CutMinus() | PlusInf() | MinusInf():
            return p
        case Graph(f, base) | Above(f, base) | Below(f, base):
            validate_type(base, mode)
            _check_function(f, base.arity, mode)
            if isinstance(p, Graph) and isinstance(f, Infinity):
                raise SchemaError("the graph of an infinite function is empty")
            if isinstance(p, Above) and f is PLUS_INF or isinstance(p, Below) and f is MINUS_INF:
                raise SchemaError(f"{format_type(p)} is not a type")
            if not isinstance(f, Infinity):
                ys = default_variables(base.arity)
                domain = membership_condition(base, function_domain(f, ys), ys, mode)
                if domain != TRUE:
                    raise PreconditionError(f"domain of {format_function(f)} is not in {format_type(base)}")
            return p
        case LimitBelow(family, subindex, base):
            validate_type(base, mode)
            _check_limit(p, mode)
            return p
    raise SchemaError(f"not a definable type: {p!r}")


def _check_limit(p: LimitBelow, mode):
    family = p.family
    if family.arity != p.base.arity:
        raise ArityMismatch(f"function family of arity {family.arity} over a base of arity {p.base.arity}")
    extra = free_vars(p.subindex) - set(family.index_vars)
    if extra:
        raise SchemaError(f"sub-index formula uses {sorted(extra)} outside the family index")
    if isinstance(family, FunctionFamily) and not family.check(mode):
        raise SchemaError("limit-below family is not a family of functions")
    if not is_satisfiable(_subindex(p, family.index_vars), mode):
        raise PreconditionError("limit-below sub-index set is empty")
    k0, k = _index_copy(family, "k"), _index_copy(family, "k")
    minimum = exists(
        k0, conj(_subindex(p, k0), forall(k, implies(_subindex(p, k), _below_or_equal(p, k0, k, mode))))
    )
    found = is_satisfiable(eliminate(minimum, mode), mode)
    if found:
        raise PreconditionError("limit-below sub-index set has a minimum in the induced preorder")
    logger.warning("limit-below type over %s validated; graph types alone do not cover this family", format_type(p.base))


def _object_variables(n: int, X: Formula, variables) -> tuple[str, ...]:
    if variables is not None:
        variables = tuple(variables)
        if len(variables) != n:
            raise ArityMismatch(f"{len(variables)} variables for a type of arity {n}")
        return variables
    names = ordered_free_vars(X)
    defaults = default_variables(n)
    if set(names) <= set(defaults):
        return defaults
    if len(names) == n:
        return names
    raise ArityMismatch(f"formula in {names} tested against a type of arity {n}")


def type_member(p: DefinableType, X: Formula, variables=None, mode=Mode.ODAG) -> bool:
    """
    True iff the definable set X belongs to p.

    Args:
        p: definable type
        X: formula without parameters
        variables: object variable order (default v1..vn, or the free variables of X)
        mode: structure mode
    """
    mode = as_mode(mode)
    validate_type(p, mode)
    xs = _object_variables(p.arity, X, variables)
    condition = membership_condition(p, X, xs, mode)
    if not isinstance(condition, Const):
        raise ArityMismatch(f"formula has parameters {sorted(free_vars(condition))}")
    return condition.value


# ===================== STRUCTURE =====================


def type_dimension(p: DefinableType) -> int:
    match p:
        case Realized():
            return 0
        case CutPlus() | CutMinus() | PlusInf() | MinusInf():
            return 1
        case Graph(_, base):
            return type_dimension(base)
        case Above(_, base) | Below(_, base) | LimitBelow(_, _, base):
            return type_dimension(base) + 1
    raise SchemaError(f"not a definable type: {p!r}")


def project_type(p: DefinableType) -> DefinableType:
    """Type of the first n-1 coordinates."""
    if p.arity < 2:
        raise ArityMismatch("cannot project a 1-type")
    if isinstance(p, Realized):
        return Realized(p.point[:-1])
    return p.base


def realized_point(p: DefinableType) -> tuple[Fraction, ...] | None:
    """The point realizing p, if p is realized in Q."""
    match p:
        case Realized(point):
            return point
        case Graph(AffineFunc(term, domain), base):
            point = realized_point(base)
            if point is None:
                return None
            values = dict(zip(default_variables(len(point)), point))
            if not evaluate(domain, values):
                return None
            return point + (term.evaluate(values),)
    return None


# ===================== PREORDERS =====================


def preorder_compare(p: DefinableType, f, g, mode=Mode.ODAG) -> str:
    """
    Compare two functions in the preorder induced by p.

    Args:
        p: type of arity n
        f, g: AffineFunc / Term / GraphFunction over v1..vn

    Returns:
        str: "less", "equivalent" or "greater"
    """
    f, g = as_function(f), as_function(g)
    xs = default_variables(p.arity)
    for h in (f, g):
        _check_function(h, p.arity, as_mode(mode))
        if isinstance(h, Infinity):
            raise SchemaError("preorder_compare takes finite functions")
        if not type_member(p, function_domain(h, xs), xs, mode):
            raise PreconditionError(f"domain of {format_function(h)} is not in {format_type(p)}")
    for rel, label in ((lt, "less"), (eq, "equivalent"), (gt, "greater")):
        relation = _compare(rel, lambda a: function_value(f, xs, a), lambda b: function_value(g, xs, b))
        if type_member(p, relation, xs, mode):
            return label
    raise CertificationError(f"no comparison of {format_function(f)} and {format_function(g)} is in the type")


@dataclass(frozen=True)
class IndexPreorder:
    """rho(left, right) holds iff h_left <= h_right in the preorder induced by a type."""

    formula: Formula
    left: tuple[str, ...]
    right: tuple[str, ...]
    domain: Formula = TRUE

    def holds(self, a, b, mode=Mode.ODAG) -> bool:
        values = dict(zip(self.left, a)) | dict(zip(self.right, b))
        return evaluate(self.formula, {k: as_fraction(v) for k, v in values.items()}, mode=mode)

    def compare(self, a, b, mode=Mode.ODAG) -> str:
        ab, ba = self.holds(a, b, mode), self.holds(b, a, mode)
        if ab and ba:
            return "equivalent"
        return "less" if ab else "greater"


def induced_preorder(p: DefinableType, family, mode=Mode.ODAG) -> IndexPreorder:
    """
    The total preorder p induces on a function family, as a formula over pairs of indices.

    Raises:
        PreconditionError: some member's domain is not in p (witness: its index)
    """
    mode = as_mode(mode)
    if family.arity != p.arity:
        raise ArityMismatch(f"function family of arity {family.arity} against a type of arity {p.arity}")
    left = family.index_vars
    right = primed(left)
    xs = default_variables(p.arity)
    if set(xs) & set(left):
        xs = tuple(fresh("x") for _ in xs)
    in_type = membership_condition(p, family.domain_formula(left, xs), xs, mode)
    missing = is_satisfiable(conj(family.domain, neg(in_type)), mode)
    if missing:
        raise PreconditionError("a member's domain is not in the type", missing.witness)
    rho = membership_condition(p, family.compare_formula(left, right, xs, "le"), xs, mode)
    domain = conj(family.domain, family.domain_at(right))
    return IndexPreorder(rho, left, right, domain)


# ===================== BATTERIES =====================

_COEFFS = (-2, -1, 1, 2)
_RELS = (Rel.LT, Rel.LE, Rel.EQ, Rel.NE)


def random_atom(rng, variables, mode=Mode.ODAG, constants=BATTERY_CONSTANTS) -> Formula:
    """A random atom in the given variables; DLO atoms compare a variable with a constant or a variable."""
    rel = _RELS[int(rng.choice(len(_RELS), p=[0.4, 0.3, 0.15, 0.15]))]
    c = as_fraction(int(constants[int(rng.integers(len(constants)))]))
    x = variables[int(rng.integers(len(variables)))]
    if as_mode(mode) is Mode.DLO:
        if len(variables) > 1 and rng.random() < 0.4:
            y = variables[int(rng.integers(len(variables)))]
            return make_atom(rel, Term.var(x) - Term.var(y))
        sign = 1 if rng.random() < 0.5 else -1
        return make_atom(rel, Term.var(x) * sign - c)
    term = Term.var(x) * _COEFFS[int(rng.integers(len(_COEFFS)))] - c
    if len(variables) > 1 and rng.random() < 0.5:
        y = variables[int(rng.integers(len(variables)))]
        term = term + Term.var(y) * _COEFFS[int(rng.integers(len(_COEFFS)))]
    return make_atom(rel, term)


def random_formula(rng, variables, depth=BATTERY_DEPTH, mode=Mode.ODAG) -> Formula:
    """Random formula over `variables`; quantified subformulas bind fresh names."""
    variables = tuple(variables)
    if depth <= 0 or rng.random() < 0.3:
        return random_atom(rng, variables, mode)
    choice = int(rng.integers(4))
    if choice == 0:
        return conj(random_formula(rng, variables, depth - 1, mode), random_formula(rng, variables, depth - 1, mode))
    if choice == 1:
        return disj(random_formula(rng, variables, depth - 1, mode), random_formula(rng, variables, depth - 1, mode))
    if choice == 2:
        return neg(random_formula(rng, variables, depth - 1, mode))
    w = fresh("w")
    body = random_formula(rng, variables + (w,), depth - 1, mode)
    return exists(w, body) if rng.random() < 0.5 else forall(w, body)


def random_formula_battery(
    arity: int, size=BATTERY_FORMULAS, rng=None, mode=Mode.ODAG, depth=BATTERY_DEPTH, variables=None
) -> list[Formula]:
    """
    Seeded battery of non-constant formulas in `arity` variables (default v1..vn).

    Args:
        arity: number of free variables
        size: number of formulas
        rng: numpy Generator (default: seeded with SEED)
        mode: structure mode of the atoms
        depth: connective nesting bound
        variables: explicit variable names
    """
    rng = rng if rng is not None else np.random.default_rng(SEED)
    variables = tuple(variables) if variables is not None else default_variables(arity)
    out: list[Formula] = []
    attempts = 0
    while len(out) < size and attempts < 20 * size:
        attempts += 1
        f = random_formula(rng, variables, depth, mode)
        if not isinstance(f, Const):
            out.append(f)
    return out


def types_equivalent(p: DefinableType, q: DefinableType, battery=None, mode=Mode.ODAG) -> Verdict:
    """Mutual membership agreement on a battery; the witness is the first separating formula."""
    if p.arity != q.arity:
        raise ArityMismatch(f"types of arity {p.arity} and {q.arity}")
    battery = battery if battery is not None else random_formula_battery(p.arity, BATTERY_TYPES, mode=mode)
    xs = default_variables(p.arity)
    for X in battery:
        if type_member(p, X, xs, mode) != type_member(q, X, xs, mode):
            return Verdict(False, X, f"{format_formula(X)} separates the types")
    return Verdict(True, None, f"agree on {len(battery)} formulas")


# ===================== PRINTING =====================


def format_function(f) -> str:
    match f:
        case Infinity():
            return str(f)
        case AffineFunc(term, domain):
            body = f"(const {format_rational(term.const)})" if term.is_constant() else f"(affine {format_term(term)})"
            if domain == TRUE:
                return body
            return f"{body[:-1]} {format_formula(domain)})"
        case GraphFunction(graph, args, result):
            return f"(function ({' '.join(args)}) {result} {format_formula(graph)})"
    raise SchemaError(f"not a definable function: {f!r}")


def format_family_ref(family) -> str:
    index = " ".join(family.index_vars)
    domain = format_formula(family.domain)
    if isinstance(family, SupremumFamily):
        objects = " ".join(family.args + (family.result,))
        return f"(sup (index {index}) (object {objects}) (member {format_formula(family.member)}) (domain {domain}))"
    args = " ".join(family.args)
    return (
        f"(fn (index {index}) (args {args}) (result {family.result}) "
        f"(graph {format_formula(family.graph)}) (domain {domain}))"
    )


def format_type(p: DefinableType) -> str:
    match p:
        case Realized(point):
            return "(realized " + " ".join(format_rational(c) for c in point) + ")"
        case CutPlus(c):
            return f"(cut+ {format_rational(c)})"
        case CutMinus(c):
            return f"(cut- {format_rational(c)})"
        case PlusInf():
            return "plus-inf"
        case MinusInf():
            return "minus-inf"
        case Graph(f, base):
            return f"(graph {format_function(f)} {format_type(base)})"
        case Above(f, base):
            return f"(above {format_function(f)} {format_type(base)})"
        case Below(f, base):
            return f"(below {format_function(f)} {format_type(base)})"
        case LimitBelow(family, subindex, base):
            return f"(limit-below {format_family_ref(family)} {format_formula(subindex)} {format_type(base)})"
    raise SchemaError(f"not a definable type: {p!r}")
