# logic.py - Formulas over (Q, <, +) and quantifier elimination
"""
Exact first-order logic over the rationals.

Contains:
- Term: affine combination of variables with Fraction coefficients
- Formula nodes (Const, Atom, And, Or, Exists, Forall), always in negation normal form
- Builders (lt, le, eq, conj, disj, neg, exists, forall, ...)
- Capture-avoiding substitution
- Structure modes (ODAG: ordered divisible abelian group, DLO: dense linear order)
- eliminate: Fourier-Motzkin on conjunctions, virtual substitution otherwise
- is_satisfiable (with rational witness), entails, equivalent, evaluate
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from ominal.exceptions import ArityMismatch, ModeViolation, UnboundVariable

logger = logging.getLogger(__name__)


class Mode(Enum):
    ODAG = "odag"
    DLO = "dlo"


def as_mode(mode):
    if isinstance(mode, Mode):
        return mode
    try:
        return Mode(str(mode).lower())
    except ValueError as exc:
        raise ModeViolation(f"unknown structure mode {mode!r}") from exc


def as_fraction(value) -> Fraction:
    """Exact rational from int / Fraction / 'p/q' string; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


_DIGITS = re.compile(r"(\d+)")


def natural_key(name: str):
    """Sort key ordering v2 before v10."""
    return tuple(int(part) if i % 2 else part for i, part in enumerate(_DIGITS.split(name)))


_fresh_counter = itertools.count()


def fresh(base: str = "t") -> str:
    """Fresh variable name; names starting with '_' are reserved for the library."""
    stem = re.sub(r"\d+$", "", base.lstrip("_")) or "t"
    return f"_{stem}{next(_fresh_counter)}"


def primed(names, avoid=()) -> tuple[str, ...]:
    """Primed copies of names (u -> u'), or fresh names when a primed copy is taken."""
    out = tuple(f"{n}'" for n in names)
    if set(out) & (set(avoid) | set(names)):
        return tuple(fresh(n) for n in names)
    return out


# ===================== TERMS =====================


@dataclass(frozen=True)
class Term:
    """Affine form sum(c_v * v) + const; coefficients sorted by variable, never zero."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(mapping: Mapping[str, Fraction], const=0) -> Term:
        items = [(v, as_fraction(c)) for v, c in mapping.items() if c != 0]
        items.sort(key=lambda item: natural_key(item[0]))
        return Term(tuple(items), as_fraction(const))

    @staticmethod
    def var(name: str) -> Term:
        return Term(((name, Fraction(1)),), Fraction(0))

    @staticmethod
    def constant(value) -> Term:
        return Term((), as_fraction(value))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, name: str) -> Fraction:
        for v, c in self.coeffs:
            if v == name:
                return c
        return Fraction(0)

    def is_constant(self) -> bool:
        return not self.coeffs

    def without(self, name: str) -> Term:
        return Term(tuple((v, c) for v, c in self.coeffs if v != name), self.const)

    def linear_part(self) -> Term:
        return Term(self.coeffs, Fraction(0))

    def __add__(self, other) -> Term:
        other = as_term(other)
        merged = self.as_dict()
        for v, c in other.coeffs:
            merged[v] = merged.get(v, Fraction(0)) + c
        return Term.build(merged, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> Term:
        return Term(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other) -> Term:
        return self + (-as_term(other))

    def __rsub__(self, other) -> Term:
        return as_term(other) - self

    def __mul__(self, scalar) -> Term:
        k = as_fraction(scalar)
        if k == 0:
            return Term()
        return Term(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> Term:
        return self * (1 / as_fraction(scalar))

    def substitute(self, mapping: Mapping[str, Term]) -> Term:
        if not any(v in mapping for v, _ in self.coeffs):
            return self
        out = Term.constant(self.const)
        for v, c in self.coeffs:
            out = out + (as_term(mapping[v]) * c if v in mapping else Term(((v, c),)))
        return out

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            if v not in values:
                raise UnboundVariable([v])
            total += c * as_fraction(values[v])
        return total

    def __str__(self):
        from ominal.sexpr import format_term

        return format_term(self)


def as_term(value) -> Term:
    if isinstance(value, Term):
        return value
    if isinstance(value, str):
        if _is_number(value):
            return Term.constant(Fraction(value))
        return Term.var(value)
    return Term.constant(value)


def _is_number(text: str) -> bool:
    try:
        Fraction(text)
    except ValueError:
        return False
    return True


# ===================== FORMULAS =====================


class Formula:
    """Base class; & | ~ build conjunctions, disjunctions, negations."""

    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)

    def __str__(self):
        from ominal.sexpr import format_formula

        return format_formula(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


class Rel(Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    NE = "!="


@dataclass(frozen=True)
class Atom(Formula):
    """term rel 0, normalized by make_atom."""

    rel: Rel
    term: Term


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    variables: tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    variables: tuple[str, ...]
    body: Formula


def make_atom(rel: Rel, term: Term) -> Formula:
    """
    Normalized atom `term rel 0`; ground atoms fold to TRUE / FALSE.

    Order atoms are scaled so the leading coefficient is +1 or -1,
    (dis)equations so it is +1.
    """
    if term.is_constant():
        c = term.const
        truth = {Rel.LT: c < 0, Rel.LE: c <= 0, Rel.EQ: c == 0, Rel.NE: c != 0}[rel]
        return TRUE if truth else FALSE
    lead = term.coeffs[0][1]
    scale = abs(lead) if rel in (Rel.LT, Rel.LE) else lead
    if scale != 1:
        term = term / scale
    return Atom(rel, term)


def lt(a, b) -> Formula:
    return make_atom(Rel.LT, as_term(a) - as_term(b))


def le(a, b) -> Formula:
    return make_atom(Rel.LE, as_term(a) - as_term(b))


def gt(a, b) -> Formula:
    return lt(b, a)


def ge(a, b) -> Formula:
    return le(b, a)


def eq(a, b) -> Formula:
    return make_atom(Rel.EQ, as_term(a) - as_term(b))


def ne(a, b) -> Formula:
    return make_atom(Rel.NE, as_term(a) - as_term(b))


def between(lo, x, hi, strict=True) -> Formula:
    """lo < x < hi (or <= when strict is False)."""
    op = lt if strict else le
    return conj(op(lo, x), op(x, hi))


def _flatten(args: Iterable[Formula], kind) -> list[Formula] | Const:
    absorbing = FALSE if kind is And else TRUE
    neutral = TRUE if kind is And else FALSE
    out: list[Formula] = []
    seen: set[Formula] = set()
    stack = list(args)
    stack.reverse()
    while stack:
        f = stack.pop()
        if f == absorbing:
            return absorbing
        if f == neutral:
            continue
        if isinstance(f, kind):
            stack.extend(reversed(f.args))
            continue
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def conj(*args: Formula) -> Formula:
    flat = _flatten(args, And)
    if isinstance(flat, Const):
        return flat
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat = _flatten(args, Or)
    if isinstance(flat, Const):
        return flat
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def _negate_atom(atom: Atom) -> Formula:
    match atom.rel:
        case Rel.LT:
            return make_atom(Rel.LE, -atom.term)
        case Rel.LE:
            return make_atom(Rel.LT, -atom.term)
        case Rel.EQ:
            return Atom(Rel.NE, atom.term)
        case Rel.NE:
            return Atom(Rel.EQ, atom.term)


def neg(f: Formula) -> Formula:
    """Negation, pushed to the atoms."""
    match f:
        case Const(value):
            return FALSE if value else TRUE
        case Atom():
            return _negate_atom(f)
        case And(args):
            return disj(*(neg(a) for a in args))
        case Or(args):
            return conj(*(neg(a) for a in args))
        case Exists(vs, body):
            return Forall(vs, neg(body))
        case Forall(vs, body):
            return Exists(vs, neg(body))
    raise TypeError(f"not a formula: {f!r}")


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(implies(a, b), implies(b, a))


def _as_names(variables) -> tuple[str, ...]:
    if isinstance(variables, str):
        return (variables,)
    return tuple(variables)


def _quantify(kind, variables, body: Formula) -> Formula:
    names = [v for v in dict.fromkeys(_as_names(variables)) if v in free_vars(body)]
    if not names:
        return body
    if isinstance(body, kind):
        names = [v for v in names if v not in body.variables] + list(body.variables)
        body = body.body
    return kind(tuple(names), body)


def exists(variables, body: Formula) -> Formula:
    return _quantify(Exists, variables, body)


def forall(variables, body: Formula) -> Formula:
    return _quantify(Forall, variables, body)


@lru_cache(maxsize=65536)
def free_vars(f: Formula) -> frozenset[str]:
    match f:
        case Const():
            return frozenset()
        case Atom(_, term):
            return term.variables()
        case And(args) | Or(args):
            return frozenset().union(*(free_vars(a) for a in args))
        case Exists(vs, body) | Forall(vs, body):
            return free_vars(body) - set(vs)
    raise TypeError(f"not a formula: {f!r}")


def ordered_free_vars(f: Formula) -> tuple[str, ...]:
    return tuple(sorted(free_vars(f), key=natural_key))


def atoms(f: Formula) -> Iterator[Atom]:
    match f:
        case Atom():
            yield f
        case And(args) | Or(args):
            for a in args:
                yield from atoms(a)
        case Exists(_, body) | Forall(_, body):
            yield from atoms(body)


def atom_count(f: Formula) -> int:
    return sum(1 for _ in atoms(f))


def is_quantifier_free(f: Formula) -> bool:
    match f:
        case Exists() | Forall():
            return False
        case And(args) | Or(args):
            return all(is_quantifier_free(a) for a in args)
    return True


# ===================== SUBSTITUTION =====================


def substitute(f: Formula, mapping: Mapping[str, object]) -> Formula:
    """Simultaneous capture-avoiding substitution of terms for free variables."""
    terms = {k: as_term(v) for k, v in mapping.items()}
    return _subst(f, terms)


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    return substitute(f, {k: Term.var(v) for k, v in mapping.items()})


def _subst(f: Formula, mapping: dict[str, Term]) -> Formula:
    match f:
        case Const():
            return f
        case Atom(rel, term):
            return make_atom(rel, term.substitute(mapping))
        case And(args):
            return conj(*(_subst(a, mapping) for a in args))
        case Or(args):
            return disj(*(_subst(a, mapping) for a in args))
        case Exists(vs, body) | Forall(vs, body):
            live = free_vars(f)
            relevant = {k: v for k, v in mapping.items() if k in live}
            if not relevant:
                return f
            incoming = frozenset().union(*(t.variables() for t in relevant.values()))
            names = list(vs)
            for i, v in enumerate(vs):
                if v in incoming:
                    new = fresh(v)
                    body = _subst(body, {v: Term.var(new)})
                    names[i] = new
            body = _subst(body, relevant)
            return _quantify(type(f), names, body)
    raise TypeError(f"not a formula: {f!r}")


# ===================== STRUCTURE MODES =====================


def _check_dlo_term(term: Term):
    coeffs = [c for _, c in term.coeffs]
    if len(coeffs) <= 1 and all(abs(c) == 1 for c in coeffs):
        return
    if len(coeffs) == 2 and sorted(coeffs) == [-1, 1] and term.const == 0:
        return
    raise ModeViolation(f"term {term} is not expressible in the pure order language")


def check_mode(f: Formula, mode=Mode.ODAG) -> Formula:
    """Raise ModeViolation when an atom leaves the active structure mode."""
    if as_mode(mode) is Mode.DLO:
        for a in atoms(f):
            _check_dlo_term(a.term)
    return f


def check_term_mode(term: Term, mode=Mode.ODAG) -> Term:
    if as_mode(mode) is Mode.DLO and len(term.coeffs) > 1:
        raise ModeViolation(f"function term {term} needs the group structure")
    if as_mode(mode) is Mode.DLO and term.coeffs and abs(term.coeffs[0][1]) != 1:
        raise ModeViolation(f"function term {term} needs the group structure")
    return term


# ===================== SIMPLIFICATION =====================


def _bound_view(atom: Atom):
    """(linear key, kind, value, strict) with the linear form scaled to leading coefficient +1."""
    term = atom.term
    sign = 1 if term.coeffs[0][1] > 0 else -1
    key = term.coeffs if sign > 0 else tuple((v, -c) for v, c in term.coeffs)
    c = term.const
    strict = atom.rel is Rel.LT
    match atom.rel:
        case Rel.EQ:
            return key, "eq", -c, False
        case Rel.NE:
            return key, "ne", -c, False
    if sign > 0:
        return key, "hi", -c, strict
    return key, "lo", c, strict


def _linear(key) -> Term:
    return Term(key, Fraction(0))


def _emit(key, kind, value, strict=False) -> Formula:
    form = _linear(key)
    match kind:
        case "hi":
            return make_atom(Rel.LT if strict else Rel.LE, form - value)
        case "lo":
            return make_atom(Rel.LT if strict else Rel.LE, Term.constant(value) - form)
        case "eq":
            return make_atom(Rel.EQ, form - value)
        case "ne":
            return make_atom(Rel.NE, form - value)
    raise ValueError(kind)


def _tighter_lo(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return (a[0], a[1] or b[1])


def _tighter_hi(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] < b[0] else b
    return (a[0], a[1] or b[1])


def _looser_lo(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] < b[0] else b
    return (a[0], a[1] and b[1])


def _looser_hi(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return (a[0], a[1] and b[1])


def _satisfies(value, lo, hi) -> bool:
    if lo is not None and (value < lo[0] or (value == lo[0] and lo[1])):
        return False
    if hi is not None and (value > hi[0] or (value == hi[0] and hi[1])):
        return False
    return True


def _group_atoms(args):
    groups: dict = {}
    others = []
    for a in args:
        if isinstance(a, Atom):
            key, kind, value, strict = _bound_view(a)
            groups.setdefault(key, []).append((kind, value, strict))
        else:
            others.append(a)
    return groups, others


def and_simplified(args: Iterable[Formula]) -> Formula:
    """Conjunction with bound merging per linear form; detects interval contradictions."""
    flat = _flatten(args, And)
    if isinstance(flat, Const):
        return flat
    groups, others = _group_atoms(flat)
    out: list[Formula] = []
    for key, items in groups.items():
        lo = hi = None
        eqs, nes = set(), set()
        for kind, value, strict in items:
            if kind == "lo":
                lo = _tighter_lo(lo, (value, strict))
            elif kind == "hi":
                hi = _tighter_hi(hi, (value, strict))
            elif kind == "eq":
                eqs.add(value)
            else:
                nes.add(value)
        if len(eqs) > 1:
            return FALSE
        if lo is not None and hi is not None and lo[0] == hi[0] and not lo[1] and not hi[1]:
            eqs.add(lo[0])
            if len(eqs) > 1:
                return FALSE
        if eqs:
            (e,) = eqs
            if not _satisfies(e, lo, hi) or e in nes:
                return FALSE
            out.append(_emit(key, "eq", e))
            continue
        if lo is not None and hi is not None and (lo[0] > hi[0] or (lo[0] == hi[0])):
            return FALSE
        if lo is not None and not lo[1] and lo[0] in nes:
            lo = (lo[0], True)
        if hi is not None and not hi[1] and hi[0] in nes:
            hi = (hi[0], True)
        if lo is not None:
            out.append(_emit(key, "lo", lo[0], lo[1]))
        if hi is not None:
            out.append(_emit(key, "hi", hi[0], hi[1]))
        for d in sorted(nes):
            if _satisfies(d, lo, hi) and not (lo and d == lo[0]) and not (hi and d == hi[0]):
                out.append(_emit(key, "ne", d))
    others_set = set(others)
    for f in others:
        if neg(f) in others_set:
            return FALSE
    return conj(*out, *others)


def or_simplified(args: Iterable[Formula]) -> Formula:
    """Disjunction with bound merging per linear form; detects covering disjunctions."""
    flat = _flatten(args, Or)
    if isinstance(flat, Const):
        return flat
    groups, others = _group_atoms(flat)
    out: list[Formula] = []
    for key, items in groups.items():
        lo = hi = None
        eqs, nes = set(), set()
        for kind, value, strict in items:
            if kind == "lo":
                lo = _looser_lo(lo, (value, strict))
            elif kind == "hi":
                hi = _looser_hi(hi, (value, strict))
            elif kind == "eq":
                eqs.add(value)
            else:
                nes.add(value)
        if len(nes) > 1:
            return TRUE
        if nes:
            (d,) = nes
            if d in eqs or (lo is not None and _satisfies(d, lo, None)) or (
                hi is not None and _satisfies(d, None, hi)
            ):
                return TRUE
            out.append(_emit(key, "ne", d))
            continue
        rest = set()
        for e in eqs:
            if lo is not None and e == lo[0] and lo[1]:
                lo = (lo[0], False)
            elif hi is not None and e == hi[0] and hi[1]:
                hi = (hi[0], False)
            elif not ((lo is not None and _satisfies(e, lo, None)) or (hi is not None and _satisfies(e, None, hi))):
                rest.add(e)
        if lo is not None and hi is not None:
            if lo[0] < hi[0] or (lo[0] == hi[0] and not (lo[1] and hi[1])):
                return TRUE
            if lo[0] == hi[0]:
                if lo[0] in rest:
                    return TRUE
                out.append(_emit(key, "ne", lo[0]))
                out.extend(_emit(key, "eq", e) for e in sorted(rest))
                continue
        if lo is not None:
            out.append(_emit(key, "lo", lo[0], lo[1]))
        if hi is not None:
            out.append(_emit(key, "hi", hi[0], hi[1]))
        out.extend(_emit(key, "eq", e) for e in sorted(rest))
    others_set = set(others)
    for f in others:
        if neg(f) in others_set:
            return TRUE
    return disj(*out, *others)


def simplify(f: Formula) -> Formula:
    """Constant folding, flattening, duplicate removal and bound merging, bottom-up."""
    match f:
        case And(args):
            return and_simplified(simplify(a) for a in args)
        case Or(args):
            return or_simplified(simplify(a) for a in args)
        case Exists(vs, body) | Forall(vs, body):
            return _quantify(type(f), vs, simplify(body))
    return f


# ===================== QUANTIFIER ELIMINATION =====================


def eliminate(f: Formula, mode=Mode.ODAG) -> Formula:
    """
    Equivalent quantifier-free formula with the same free variables.

    Args:
        f: any formula
        mode: structure mode; atoms outside it raise ModeViolation

    Returns:
        Formula: quantifier-free, simplified
    """
    mode = as_mode(mode)
    check_mode(f, mode)
    return _qe(f, mode is Mode.DLO)


@lru_cache(maxsize=16384)
def _qe(f: Formula, dlo: bool = False) -> Formula:
    match f:
        case Const() | Atom():
            return f
        case And(args):
            return and_simplified(_qe(a, dlo) for a in args)
        case Or(args):
            return or_simplified(_qe(a, dlo) for a in args)
        case Exists(vs, body):
            out = _qe(body, dlo)
            for v in reversed(vs):
                out = _eliminate_var(v, out, dlo)
            return out
        case Forall(vs, body):
            out = neg(_qe(body, dlo))
            for v in reversed(vs):
                out = _eliminate_var(v, out, dlo)
            return simplify(neg(out))
    raise TypeError(f"not a formula: {f!r}")


def _solve_for(term: Term, x: str) -> Term:
    return -term.without(x) / term.coeff(x)


def _eliminate_var(x: str, f: Formula, dlo: bool = False) -> Formula:
    if x not in free_vars(f):
        return f
    if isinstance(f, Or):
        return or_simplified(_eliminate_var(x, a, dlo) for a in f.args)
    parts = f.args if isinstance(f, And) else (f,)
    outside = [a for a in parts if x not in free_vars(a)]
    inside = [a for a in parts if x in free_vars(a)]
    for a in inside:
        if isinstance(a, Atom) and a.rel is Rel.EQ:
            solution = _solve_for(a.term, x)
            rest = [simplify(_subst(b, {x: solution})) for b in inside if b is not a]
            return and_simplified([*outside, *rest])
    if dlo:
        return and_simplified([*outside, _endpoint_cases(x, and_simplified(inside))])
    if all(isinstance(a, Atom) and a.rel is not Rel.NE for a in inside):
        return and_simplified([*outside, _fourier_motzkin(x, inside)])
    return and_simplified([*outside, _virtual_substitution(x, and_simplified(inside))])


def _fourier_motzkin(x: str, bounds: list[Atom]) -> Formula:
    lowers, uppers = [], []
    for a in bounds:
        c = a.term.coeff(x)
        root = -a.term.without(x) / c
        strict = a.rel is Rel.LT
        (uppers if c > 0 else lowers).append((root, strict))
    combined = [
        make_atom(Rel.LT if (sl or su) else Rel.LE, lo - hi)
        for lo, sl in lowers
        for hi, su in uppers
    ]
    return and_simplified(combined)


_MINUS_INF = "-inf"


def _test_points(x: str, f: Formula):
    points: list = [(_MINUS_INF, None)]
    seen = set()
    for a in atoms(f):
        c = a.term.coeff(x)
        if c == 0:
            continue
        root = -a.term.without(x) / c
        if a.rel is Rel.EQ or (a.rel is Rel.LE and c < 0):
            kind = "at"
        elif a.rel is Rel.NE or (a.rel is Rel.LT and c < 0):
            kind = "eps"
        else:
            continue
        if (kind, root) not in seen:
            seen.add((kind, root))
            points.append((kind, root))
    return points


def _substitute_point(f: Formula, x: str, kind: str, root: Term | None) -> Formula:
    match f:
        case Const():
            return f
        case And(args):
            return and_simplified(_substitute_point(a, x, kind, root) for a in args)
        case Or(args):
            return or_simplified(_substitute_point(a, x, kind, root) for a in args)
        case Atom(rel, term):
            c = term.coeff(x)
            if c == 0:
                return f
            if kind == "at":
                return make_atom(rel, term.substitute({x: root}))
            if rel is Rel.EQ:
                return FALSE
            if rel is Rel.NE:
                return TRUE
            if kind == _MINUS_INF:
                return TRUE if c > 0 else FALSE
            # x = root + epsilon
            shifted = term.substitute({x: root})
            return make_atom(Rel.LT if c > 0 else Rel.LE, shifted)
    raise TypeError(f"unexpected node under elimination: {f!r}")


def _virtual_substitution(x: str, f: Formula) -> Formula:
    points = _test_points(x, f)
    logger.debug("virtual substitution of %s over %d test points", x, len(points))
    return or_simplified(_substitute_point(f, x, kind, root) for kind, root in points)


def _endpoint_cases(x: str, f: Formula) -> Formula:
    """
    DLO elimination: x lies below every endpoint, at one of them, or just above one.

    Endpoints are the terms x is compared with; in the order language they are
    variables or constants, so every case stays a comparison of two of them.
    """
    endpoints = []
    for a in atoms(f):
        if a.term.coeff(x) != 0:
            root = _solve_for(a.term, x)
            if root not in endpoints:
                endpoints.append(root)
    cases = [(_MINUS_INF, None)] + [(kind, e) for e in endpoints for kind in ("at", "eps")]
    return or_simplified(_substitute_point(f, x, kind, root) for kind, root in cases)


# ===================== SATISFIABILITY =====================


@dataclass(frozen=True)
class SatResult:
    """Outcome of is_satisfiable; truthy when satisfiable."""

    satisfiable: bool
    witness: dict | None = None

    def __bool__(self):
        return self.satisfiable

    def point(self, variables) -> tuple[Fraction, ...]:
        return tuple(self.witness.get(v, Fraction(0)) for v in variables)


def to_dnf(f: Formula) -> Iterator[list[Atom]]:
    """
    Lazily enumerate the conjunctions of a disjunctive normal form.

    Quantifiers are eliminated first; disequations are split into two strict
    atoms; branches with an interval contradiction are pruned.
    """
    stack = [((_qe(f),), ())]
    while stack:
        pending, chosen = stack.pop()
        alive = True
        while pending:
            head, pending = pending[0], pending[1:]
            if head == TRUE:
                continue
            if head == FALSE:
                alive = False
                break
            if isinstance(head, And):
                pending = head.args + pending
                continue
            if isinstance(head, Or):
                for alt in reversed(head.args):
                    stack.append(((alt,) + pending, chosen))
                alive = False
                break
            if head.rel is Rel.NE:
                stack.append(((make_atom(Rel.LT, -head.term),) + pending, chosen))
                pending = (make_atom(Rel.LT, head.term),) + pending
                continue
            if and_simplified([*chosen, head]) == FALSE:
                alive = False
                break
            chosen = chosen + (head,)
        if alive:
            yield list(chosen)


def _as_atom_list(f: Formula) -> list[Atom] | None:
    if f == FALSE:
        return None
    if f == TRUE:
        return []
    if isinstance(f, And):
        return list(f.args)
    return [f]


def _fm_step(x: str, current: list[Atom]) -> list[Atom] | None:
    result = _eliminate_var(x, and_simplified(current))
    return _as_atom_list(result)


def solve_conjunction(conjunction: list[Atom]) -> dict[str, Fraction] | None:
    """
    Rational solution of a conjunction of <, <=, = atoms, or None.

    Variables are eliminated one by one (Fourier-Motzkin); values are then
    read back in reverse order from the bounds of each stage.
    """
    current = _as_atom_list(and_simplified(conjunction))
    if current is None:
        return None
    names = sorted(frozenset().union(*(a.term.variables() for a in current)), key=natural_key)
    stages = []
    for x in names:
        stages.append((x, current))
        current = _fm_step(x, current)
        if current is None:
            return None
    values: dict[str, Fraction] = {}
    for x, stage in reversed(stages):
        lo = hi = None
        fixed = None
        known = {v: Term.constant(val) for v, val in values.items()}
        for a in stage:
            t = a.term.substitute(known)
            c = t.coeff(x)
            if c == 0:
                continue
            root = -t.const / c
            if a.rel is Rel.EQ:
                fixed = root
            elif c > 0:
                hi = _tighter_hi(hi, (root, a.rel is Rel.LT))
            else:
                lo = _tighter_lo(lo, (root, a.rel is Rel.LT))
        values[x] = _choose_value(fixed, lo, hi)
    return values


def _choose_value(fixed, lo, hi) -> Fraction:
    if fixed is not None:
        return fixed
    if lo is not None and hi is not None:
        return (lo[0] + hi[0]) / 2
    if lo is not None:
        return lo[0] + 1
    if hi is not None:
        return hi[0] - 1
    return Fraction(0)


def is_satisfiable(f: Formula, mode=Mode.ODAG) -> SatResult:
    """
    Satisfiability over Q of the existential closure of f.

    Returns:
        SatResult: truthy when satisfiable; `witness` maps every free
        variable of f to a rational value satisfying f
    """
    check_mode(f, mode)
    names = ordered_free_vars(f)
    for conjunction in to_dnf(f):
        solution = solve_conjunction(conjunction)
        if solution is not None:
            witness = {v: solution.get(v, Fraction(0)) for v in names}
            return SatResult(True, witness)
    return SatResult(False, None)


def entails(f: Formula, g: Formula, mode=Mode.ODAG, variables=None) -> bool:
    """True iff every point satisfying f satisfies g."""
    if variables is not None:
        scope = set(variables)
        if not free_vars(f) <= scope or not free_vars(g) <= scope:
            raise ArityMismatch(
                f"formulas use variables outside {tuple(variables)}: "
                f"{sorted((free_vars(f) | free_vars(g)) - scope)}"
            )
    return not is_satisfiable(conj(f, neg(g)), mode)


def equivalent(f: Formula, g: Formula, mode=Mode.ODAG) -> bool:
    return entails(f, g, mode) and entails(g, f, mode)


def is_valid(f: Formula, mode=Mode.ODAG) -> bool:
    return not is_satisfiable(neg(f), mode)


def point_mapping(f: Formula, point, variables=None) -> dict[str, Fraction]:
    """Variable -> value mapping from a dict, or from a tuple and a variable order."""
    if isinstance(point, Mapping):
        return {k: as_fraction(v) for k, v in point.items()}
    names = tuple(variables) if variables is not None else ordered_free_vars(f)
    values = tuple(point)
    if len(values) != len(names):
        raise ArityMismatch(f"point of arity {len(values)} for variables {names}")
    return {name: as_fraction(v) for name, v in zip(names, values)}


def evaluate(f: Formula, point, variables=None, mode=Mode.ODAG) -> bool:
    """
    Truth value of f at a rational point.

    Args:
        f: formula (quantifiers are eliminated after substitution)
        point: mapping name -> rational, or a tuple read in `variables` order
            (default: free variables in natural order)
        variables: variable order for tuple points
        mode: structure mode

    Returns:
        bool
    """
    check_mode(f, mode)
    values = point_mapping(f, point, variables)
    missing = free_vars(f) - values.keys()
    if missing:
        raise UnboundVariable(missing)
    ground = _subst(f, {v: Term.constant(values[v]) for v in free_vars(f)})
    result = _qe(ground)
    if not isinstance(result, Const):
        raise RuntimeError(f"ground formula did not fold to a constant: {result!r}")
    return result.value


def clear_caches():
    _qe.cache_clear()
    free_vars.cache_clear()


@dataclass(frozen=True)
class Verdict:
    """A decided property with optional witnessing data; truthy when the property holds."""

    holds: bool
    witness: object = None
    detail: str = ""

    def __bool__(self):
        return self.holds
