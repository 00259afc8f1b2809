# cells.py - Cylindrical cell decomposition in the linear model
"""
Cell decomposition of Q^n compatible with a list of formulas.

Contains:
- AffineFunc, Infinity bounds, Graph/Band layers, Cell, CellDecomposition
- decompose: cylindrical decomposition over the atoms of the targets
- dimension, uniform_decompose (+ fiber_cells), project, cell_to_formula
- supremum / infimum of a one-variable definable set
- cell-based euclidean closure and frontier

The decomposition is built recursively: for the last variable every atom is
solved into a boundary function of the earlier variables; the base space is
decomposed for the atoms without the last variable and for all pairwise
differences of boundary functions, so the boundaries are totally ordered on
every base cell and the stack over it is read off at a sample point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from ominal.exceptions import ArityMismatch, SchemaError
from ominal.logic import (
    FALSE,
    TRUE,
    Formula,
    Mode,
    Term,
    atoms,
    conj,
    disj,
    eliminate,
    entails,
    eq,
    evaluate,
    exists,
    free_vars,
    is_satisfiable,
    le,
    lt,
    natural_key,
    neg,
    ordered_free_vars,
)

logger = logging.getLogger(__name__)


class Infinity(Enum):
    MINUS = "-inf"
    PLUS = "+inf"

    def __str__(self):
        return self.value


MINUS_INF = Infinity.MINUS
PLUS_INF = Infinity.PLUS


def default_variables(n: int) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class AffineFunc:
    """x -> term(x) on an explicit domain."""

    term: Term
    domain: Formula = TRUE

    def value(self, values) -> Fraction:
        return self.term.evaluate(values)

    def __str__(self):
        return str(self.term)


@dataclass(frozen=True)
class GraphLayer:
    f: AffineFunc


@dataclass(frozen=True)
class BandLayer:
    lower: AffineFunc | Infinity
    upper: AffineFunc | Infinity


@dataclass(frozen=True)
class Cell:
    """
    Layered cell: layer k constrains variables[k] by functions of variables[:k].

    `sample` is a rational point of the cell when known.
    """

    layers: tuple
    variables: tuple[str, ...]
    sample: tuple[Fraction, ...] | None = None

    @property
    def ambient(self) -> int:
        return len(self.variables)

    def dimension(self) -> int:
        return sum(isinstance(layer, BandLayer) for layer in self.layers)

    def formula(self) -> Formula:
        return cell_to_formula(self)

    def base(self) -> Cell:
        sample = self.sample[:-1] if self.sample is not None else None
        return Cell(self.layers[:-1], self.variables[:-1], sample)

    def schema(self) -> str:
        """Layer pattern read from the first coordinate, e.g. "GB"."""
        return "".join("G" if isinstance(layer, GraphLayer) else "B" for layer in self.layers)


def _check_layer_terms(cell: Cell):
    for k, layer in enumerate(cell.layers):
        allowed = set(cell.variables[:k])
        funcs = [layer.f] if isinstance(layer, GraphLayer) else [layer.lower, layer.upper]
        for f in funcs:
            if isinstance(f, AffineFunc) and not f.term.variables() <= allowed:
                raise SchemaError(
                    f"layer {k + 1} of cell uses {sorted(f.term.variables() - allowed)} outside its base"
                )


def cell_to_formula(cell: Cell) -> Formula:
    """Quantifier-free formula defining exactly the cell."""
    _check_layer_terms(cell)
    parts = []
    for x, layer in zip(cell.variables, cell.layers):
        if isinstance(layer, GraphLayer):
            parts.append(eq(x, layer.f.term))
            continue
        if isinstance(layer.lower, AffineFunc):
            parts.append(lt(layer.lower.term, x))
        if isinstance(layer.upper, AffineFunc):
            parts.append(lt(x, layer.upper.term))
    return conj(*parts)


def cell_closure_formula(cell: Cell) -> Formula:
    """Euclidean closure of a cell: every band bound made non-strict."""
    _check_layer_terms(cell)
    parts = []
    for x, layer in zip(cell.variables, cell.layers):
        if isinstance(layer, GraphLayer):
            parts.append(eq(x, layer.f.term))
            continue
        if isinstance(layer.lower, AffineFunc):
            parts.append(le(layer.lower.term, x))
        if isinstance(layer.upper, AffineFunc):
            parts.append(le(x, layer.upper.term))
    return conj(*parts)


# ===================== DECOMPOSITION =====================


@dataclass(frozen=True)
class CertificationReport:
    disjoint: bool
    covering: bool
    compatible: bool
    projections: bool
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.disjoint and self.covering and self.compatible and self.projections


@dataclass(frozen=True)
class CellDecomposition:
    cells: tuple[Cell, ...]
    variables: tuple[str, ...]
    targets: tuple[Formula, ...] = ()
    mode: Mode = Mode.ODAG

    @property
    def ambient(self) -> int:
        return len(self.variables)

    def cells_in(self, f: Formula) -> list[Cell]:
        return [c for c in self.cells if evaluate(f, c.sample, self.variables, self.mode)]

    def certify(self) -> CertificationReport:
        return certify(self)


def _normalize(term: Term) -> Term | None:
    if term.is_constant():
        return None
    return term / term.coeffs[0][1]


def _solve_for(term: Term, x: str) -> Term:
    return -term.without(x) / term.coeff(x)


def _term_key(term: Term):
    return (len(term.coeffs), tuple((natural_key(v), c) for v, c in term.coeffs), term.const)


def _band_sample(lower, upper, values) -> Fraction:
    lo = lower.value(values) if isinstance(lower, AffineFunc) else None
    hi = upper.value(values) if isinstance(upper, AffineFunc) else None
    if lo is not None and hi is not None:
        return (lo + hi) / 2
    if lo is not None:
        return lo + 1
    if hi is not None:
        return hi - 1
    return Fraction(0)


def _stack(base: Cell, roots: list[Term], x: str) -> list[Cell]:
    values = dict(zip(base.variables, base.sample))
    ranked = sorted(roots, key=lambda r: (r.evaluate(values), _term_key(r)))
    distinct: list[Term] = []
    for r in ranked:
        if distinct and distinct[-1].evaluate(values) == r.evaluate(values):
            continue
        distinct.append(r)
    domain = cell_to_formula(base)
    funcs = [AffineFunc(r, domain) for r in distinct]
    bounds = [MINUS_INF, *funcs, PLUS_INF]
    variables = base.variables + (x,)
    out = []
    for i in range(len(bounds) - 1):
        lower, upper = bounds[i], bounds[i + 1]
        band = BandLayer(lower, upper)
        out.append(Cell(base.layers + (band,), variables, base.sample + (_band_sample(lower, upper, values),)))
        if isinstance(upper, AffineFunc):
            graph = GraphLayer(upper)
            out.append(Cell(base.layers + (graph,), variables, base.sample + (upper.value(values),)))
    return out


@lru_cache(maxsize=512)
def _cylindrical(terms: frozenset, variables: tuple[str, ...]) -> tuple[Cell, ...]:
    if not variables:
        return (Cell((), (), ()),)
    x = variables[-1]
    roots: set[Term] = set()
    base_terms: set[Term] = set()
    for t in terms:
        if t.coeff(x) == 0:
            base_terms.add(t)
        else:
            roots.add(_solve_for(t, x))
    ordered = sorted(roots, key=_term_key)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            d = _normalize(a - b)
            if d is not None:
                base_terms.add(d)
    base_cells = _cylindrical(frozenset(base_terms), variables[:-1])
    out: list[Cell] = []
    for base in base_cells:
        out.extend(_stack(base, ordered, x))
    return tuple(out)


def decompose(targets, n: int | None = None, variables=None, mode=Mode.ODAG) -> CellDecomposition:
    """
    Cell decomposition of Q^n compatible with every target.

    Args:
        targets: list of formulas (quantifiers are eliminated first)
        n: ambient arity; variables default to v1..vn
        variables: explicit variable order (overrides n)
        mode: structure mode

    Returns:
        CellDecomposition
    """
    targets = tuple(targets)
    if variables is None:
        if n is None:
            names = set()
            for t in targets:
                names |= free_vars(t)
            variables = tuple(sorted(names, key=natural_key))
        else:
            variables = default_variables(n)
    variables = tuple(variables)
    if n is not None and len(variables) != n:
        raise ArityMismatch(f"{len(variables)} variables for arity {n}")
    qf = tuple(eliminate(t, mode) for t in targets)
    terms = set()
    for t in qf:
        extra = free_vars(t) - set(variables)
        if extra:
            raise ArityMismatch(f"target uses variables {sorted(extra)} outside {variables}")
        for a in atoms(t):
            norm = _normalize(a.term)
            if norm is not None:
                terms.add(norm)
    cells = _cylindrical(frozenset(terms), variables)
    logger.debug("decomposed Q^%d into %d cells over %d terms", len(variables), len(cells), len(terms))
    return CellDecomposition(cells, variables, qf, mode)


# ===================== CERTIFICATION =====================


def _stacks_ok(cells, level: int, mode) -> bool:
    """Over every distinct base (prefix of length level-1) the level-th layers form a full stack."""
    groups: dict = {}
    for c in cells:
        groups.setdefault(c.layers[: level - 1], []).append(c.layers[level - 1])
    for prefix, layers in groups.items():
        base_vars = cells[0].variables[: level - 1]
        base_formula = cell_to_formula(Cell(prefix, base_vars))
        bands = [l for l in layers if isinstance(l, BandLayer)]
        graphs = [l.f for l in layers if isinstance(l, GraphLayer)]
        if len(bands) != len(graphs) + 1:
            return False
        lowers = [b.lower for b in bands]
        uppers = [b.upper for b in bands]
        if lowers.count(MINUS_INF) != 1 or uppers.count(PLUS_INF) != 1:
            return False
        chain = [MINUS_INF]
        current = MINUS_INF
        for _ in range(len(bands)):
            nxt = [b for b in bands if b.lower == current]
            if len(nxt) != 1:
                return False
            current = nxt[0].upper
            chain.append(current)
        if current is not PLUS_INF:
            return False
        funcs = chain[1:-1]
        if set(funcs) != set(graphs):
            return False
        for f, g in zip(funcs, funcs[1:]):
            if not entails(base_formula, lt(f.term, g.term), mode):
                return False
    return True


def certify(decomposition: CellDecomposition) -> CertificationReport:
    """
    Check the decomposition invariants symbolically.

    - disjoint: pairwise cell conjunctions unsatisfiable
    - covering: over every base cell the stack runs from -inf to +inf
      through strictly increasing boundary functions
    - compatible: every cell entails each target or its negation
    - projections: the projected cells are again disjoint full stacks
    """
    cells = decomposition.cells
    mode = decomposition.mode
    failures = []
    formulas = [cell_to_formula(c) for c in cells]
    disjoint = all(
        not is_satisfiable(conj(formulas[i], formulas[j]), mode)
        for i in range(len(cells))
        for j in range(i + 1, len(cells))
    )
    if not disjoint:
        failures.append("cells overlap")
    n = decomposition.ambient
    covering = n == 0 or _stacks_ok(cells, n, mode)
    if not covering:
        failures.append("stack over some base cell is incomplete")
    projections = True
    for m in range(1, n):
        prefixes = {c.layers[:m]: Cell(c.layers[:m], c.variables[:m]) for c in cells}
        projected = list(prefixes.values())
        proj_formulas = [cell_to_formula(c) for c in projected]
        if not _stacks_ok(projected, m, mode) or any(
            is_satisfiable(conj(proj_formulas[i], proj_formulas[j]), mode)
            for i in range(len(projected))
            for j in range(i + 1, len(projected))
        ):
            projections = False
            failures.append(f"projection to {m} coordinates is not a cell partition")
            break
    compatible = all(
        entails(fc, t, mode) or entails(fc, neg(t), mode)
        for fc in formulas
        for t in decomposition.targets
    )
    if not compatible:
        failures.append("some cell straddles a target")
    return CertificationReport(disjoint, covering, compatible, projections, tuple(failures))


# ===================== DERIVED OPERATIONS =====================


def dimension(f: Formula, variables=None, mode=Mode.ODAG) -> int:
    """Largest number of band layers among cells inside the set; -1 for the empty set."""
    variables = tuple(variables) if variables is not None else ordered_free_vars(f)
    qf = eliminate(f, mode)
    if qf == FALSE:
        return -1
    decomposition = decompose([qf], variables=variables, mode=mode)
    return max((c.dimension() for c in decomposition.cells_in(qf)), default=-1)


def project(f: Formula, keep: int, variables=None, mode=Mode.ODAG) -> Formula:
    """Image of the set under projection to its first `keep` coordinates."""
    variables = tuple(variables) if variables is not None else ordered_free_vars(f)
    if keep >= len(variables) and len(variables) > 0:
        raise ArityMismatch(f"cannot project arity {len(variables)} onto {keep} coordinates")
    return eliminate(exists(variables[keep:], f), mode)


@dataclass(frozen=True)
class UniformDecomposition:
    """Joint decomposition with index variables first; fibers over index points are decompositions."""

    decomposition: CellDecomposition
    index_vars: tuple[str, ...]
    object_vars: tuple[str, ...]

    @property
    def cells(self):
        return self.decomposition.cells

    def index_part(self, cell: Cell) -> Formula:
        k = len(self.index_vars)
        return cell_to_formula(Cell(cell.layers[:k], cell.variables[:k]))

    def object_part(self, cell: Cell) -> Formula:
        k = len(self.index_vars)
        parts = []
        for x, layer in zip(cell.variables[k:], cell.layers[k:]):
            parts.append(layer_formula(x, layer))
        return conj(*parts)

    def fiber_cells(self, u) -> list[Cell]:
        values = dict(zip(self.index_vars, u)) if not isinstance(u, dict) else dict(u)
        k = len(self.index_vars)
        out = []
        for cell in self.cells:
            if not evaluate(self.index_part(cell), values, mode=self.decomposition.mode):
                continue
            layers = []
            sample: list[Fraction] = []
            known = dict(values)
            for x, layer in zip(cell.variables[k:], cell.layers[k:]):
                domain = cell_to_formula(Cell(tuple(layers), self.object_vars[: len(layers)]))
                if isinstance(layer, GraphLayer):
                    f = AffineFunc(layer.f.term.substitute({v: Term.constant(values[v]) for v in self.index_vars}), domain)
                    new = GraphLayer(f)
                    val = f.value(known)
                else:
                    lower = _fix(layer.lower, values, self.index_vars, domain)
                    upper = _fix(layer.upper, values, self.index_vars, domain)
                    new = BandLayer(lower, upper)
                    val = _band_sample(lower, upper, known)
                layers.append(new)
                sample.append(val)
                known[x] = val
            out.append(Cell(tuple(layers), self.object_vars, tuple(sample)))
        return out


def _fix(bound, values, index_vars, domain):
    if isinstance(bound, Infinity):
        return bound
    return AffineFunc(bound.term.substitute({v: Term.constant(values[v]) for v in index_vars}), domain)


def layer_formula(x: str, layer) -> Formula:
    if isinstance(layer, GraphLayer):
        return eq(x, layer.f.term)
    parts = []
    if isinstance(layer.lower, AffineFunc):
        parts.append(lt(layer.lower.term, x))
    if isinstance(layer.upper, AffineFunc):
        parts.append(lt(x, layer.upper.term))
    return conj(*parts)


def uniform_decompose(f: Formula, index_vars, object_vars, mode=Mode.ODAG) -> UniformDecomposition:
    """Decomposition of the joint (index, object) space compatible with f."""
    index_vars, object_vars = tuple(index_vars), tuple(object_vars)
    decomposition = decompose([f], variables=index_vars + object_vars, mode=mode)
    return UniformDecomposition(decomposition, index_vars, object_vars)


class Extremum(NamedTuple):
    value: Fraction | Infinity
    attained: bool


def _one_variable(f: Formula, x: str | None, mode):
    names = ordered_free_vars(f)
    if x is None:
        if len(names) > 1:
            raise ArityMismatch(f"expected a one-variable formula, got {names}")
        x = names[0] if names else "v1"
    elif set(names) - {x}:
        raise ArityMismatch(f"formula has parameters {sorted(set(names) - {x})}")
    qf = eliminate(f, mode)
    decomposition = decompose([qf], variables=(x,), mode=mode)
    return decomposition.cells_in(qf)


def supremum(f: Formula, x: str | None = None, mode=Mode.ODAG) -> Extremum | None:
    """Supremum in Q u {+-inf} of a one-variable set, or None when the set is empty."""
    inside = _one_variable(f, x, mode)
    if not inside:
        return None
    last = inside[-1].layers[0]
    if isinstance(last, GraphLayer):
        return Extremum(last.f.term.const, True)
    if last.upper is PLUS_INF:
        return Extremum(PLUS_INF, False)
    return Extremum(last.upper.term.const, False)


def infimum(f: Formula, x: str | None = None, mode=Mode.ODAG) -> Extremum | None:
    """Infimum in Q u {+-inf} of a one-variable set, or None when the set is empty."""
    inside = _one_variable(f, x, mode)
    if not inside:
        return None
    first = inside[0].layers[0]
    if isinstance(first, GraphLayer):
        return Extremum(first.f.term.const, True)
    if first.lower is MINUS_INF:
        return Extremum(MINUS_INF, False)
    return Extremum(first.lower.term.const, False)


def euclidean_closure_by_cells(f: Formula, variables=None, mode=Mode.ODAG) -> Formula:
    """Closure as the union of the closures of the cells inside the set."""
    variables = tuple(variables) if variables is not None else ordered_free_vars(f)
    qf = eliminate(f, mode)
    decomposition = decompose([qf], variables=variables, mode=mode)
    return eliminate(disj(*(cell_closure_formula(c) for c in decomposition.cells_in(qf))), mode)


def frontier(f: Formula, variables=None, mode=Mode.ODAG) -> Formula:
    """Closure minus the set."""
    closure = euclidean_closure_by_cells(f, variables, mode)
    return eliminate(conj(closure, neg(f)), mode)
