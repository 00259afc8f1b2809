# test_logic.py - Formulas, quantifier elimination and satisfiability
"""
Tests for the formula layer: evaluation, elimination, satisfiability,
entailment and the structure modes.
"""

from fractions import Fraction

import pytest

from ominal.exceptions import ArityMismatch, ModeViolation, UnboundVariable
from ominal.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Mode,
    Or,
    Rel,
    Term,
    atoms,
    conj,
    disj,
    entails,
    eq,
    equivalent,
    eliminate,
    evaluate,
    exists,
    forall,
    free_vars,
    gt,
    implies,
    is_quantifier_free,
    is_satisfiable,
    is_valid,
    le,
    lt,
    ne,
    neg,
    simplify,
    substitute,
)
from ominal.sexpr import parse_formula
from ominal.types import random_formula, random_formula_battery


# ===================== EVALUATION =====================


def test_evaluate_examples():
    assert evaluate(lt("x", "y"), (1, 2), ("x", "y")), "1 < 2 should hold"
    between = parse_formula("(exists (y) (and (< x y) (< y z)))")
    assert evaluate(between, {"x": 0, "z": 1}), "density: something lies between 0 and 1"
    assert evaluate(eq(Term.var("y") * 2, 3), {"y": Fraction(3, 2)}), "2 * 3/2 = 3"
    assert not evaluate(eq(Term.var("y") * 2, 3), {"y": 1}), "2 * 1 != 3"


def test_evaluate_unbound_and_arity():
    with pytest.raises(UnboundVariable):
        evaluate(lt("x", "y"), {"x": 0})
    with pytest.raises(ArityMismatch):
        evaluate(lt("x", "y"), (0,), ("x", "y"))


def test_ground_atoms_fold():
    assert lt(1, 2) == TRUE, "ground true atom should fold"
    assert le(3, 2) == FALSE, "ground false atom should fold"
    assert lt("x", "x") == FALSE, "x < x folds to false"


# ===================== ELIMINATION =====================


def test_eliminate_between():
    out = eliminate(parse_formula("(exists (y) (and (< x y) (< y z)))"))
    assert is_quantifier_free(out), "result must be quantifier-free"
    assert free_vars(out) == {"x", "z"}, "free variables must be preserved"
    assert equivalent(out, lt("x", "z")), f"expected x < z, got {out}"


def test_eliminate_scaled_bound():
    out = eliminate(parse_formula("(exists (y) (and (> y x) (< (* 2 y) z)))"))
    assert equivalent(out, lt(Term.var("x") * 2, "z")), f"expected 2x < z, got {out}"


def test_eliminate_universal():
    out = eliminate(parse_formula("(forall (y) (implies (> y x) (> y z)))"))
    assert equivalent(out, le("z", "x")), f"expected z <= x, got {out}"


def test_eliminate_to_constants():
    assert eliminate(parse_formula("(exists (x) (< x 0))")) == TRUE, "some rational is negative"
    assert eliminate(parse_formula("(forall (x) (< x 0))")) == FALSE, "not every rational is negative"
    assert eliminate(parse_formula("(exists (x) (and (< 0 x) (< x 0)))")) == FALSE, "empty interval"


def test_eliminate_dlo_stays_in_order_language():
    f = parse_formula("(exists (y) (and (< x y) (< y z) (!= y w)))")
    out = eliminate(f, Mode.DLO)
    for a in atoms(out):
        assert all(abs(c) == 1 for _, c in a.term.coeffs), f"non-order atom {a} in DLO output"
    assert equivalent(out, lt("x", "z")), f"expected x < z, got {out}"


# ===================== BRUTE-FORCE ORACLE =====================

GRID = tuple(Fraction(k, 4) for k in range(-12, 13))


def _atom_truth(a, values):
    value = a.term.evaluate(values)
    return {Rel.LT: value < 0, Rel.LE: value <= 0, Rel.EQ: value == 0, Rel.NE: value != 0}[a.rel]


def _witnesses(f, x, values, dlo):
    """Finite set of values of x that decides every quantifier over x at this assignment."""
    if dlo:
        marks = set(values.values())
        for a in atoms(f):
            marks.add(a.term.const)
            marks.add(-a.term.const)
    else:
        marks = set()
        for a in atoms(f):
            c = a.term.coeff(x)
            if c:
                marks.add(-a.term.without(x).evaluate(values) / c)
    marks = sorted(marks) or [Fraction(0)]
    between = [(lo + hi) / 2 for lo, hi in zip(marks, marks[1:])]
    return [marks[0] - 1, *marks, *between, marks[-1] + 1]


def _grid_truth(f, values, dlo):
    """Truth of f with every quantifier checked over explicit witness values."""
    match f:
        case Const(value):
            return value
        case Atom():
            return _atom_truth(f, values)
        case And(args):
            return all(_grid_truth(a, values, dlo) for a in args)
        case Or(args):
            return any(_grid_truth(a, values, dlo) for a in args)
        case Exists(vs, body) | Forall(vs, body):
            x, rest = vs[0], vs[1:]
            inner = type(f)(rest, body) if rest else body
            test = any if isinstance(f, Exists) else all
            return test(_grid_truth(inner, values | {x: w}, dlo) for w in _witnesses(inner, x, values, dlo))
    raise TypeError(f)


def _bound_vars(f):
    match f:
        case And(args) | Or(args):
            return set().union(*(_bound_vars(a) for a in args))
        case Exists(vs, body) | Forall(vs, body):
            return set(vs) | _bound_vars(body)
    return set()


def _nested_once(f):
    """No quantifier body contains another quantifier."""
    match f:
        case And(args) | Or(args):
            return all(_nested_once(a) for a in args)
        case Exists(_, body) | Forall(_, body):
            return len(f.variables) == 1 and is_quantifier_free(body)
    return True


def _oracle_battery(rng, size, mode, depth):
    variables = ("v1", "v2")
    out, attempts = [], 0
    while len(out) < size and attempts < 200 * size:
        attempts += 1
        f = random_formula(rng, variables, depth, mode)
        if isinstance(f, Const) or is_quantifier_free(f) or len(_bound_vars(f) | free_vars(f)) > 4:
            continue
        if mode is Mode.ODAG and not _nested_once(f):
            continue
        out.append(f)
    return out


def _oracle_agreement(rng, formulas, points, mode):
    battery = _oracle_battery(rng, formulas, mode, depth=5)
    grid = [{"v1": GRID[i], "v2": GRID[j]} for i, j in rng.integers(0, len(GRID), size=(points, 2))]
    for f in battery:
        qf = eliminate(f, mode)
        assert is_quantifier_free(qf), f"{f} did not lose its quantifiers"
        for values in grid:
            expected = _grid_truth(f, values, mode is Mode.DLO)
            assert evaluate(qf, values, mode=mode) == expected, f"elimination of {f} disagrees at {values}"


@pytest.mark.parametrize("mode", [Mode.DLO, Mode.ODAG])
def test_eliminate_matches_witness_grid(rng, mode):
    _oracle_agreement(rng, 40, 10, mode)


@pytest.mark.slow
@pytest.mark.parametrize("mode", [Mode.DLO, Mode.ODAG])
def test_eliminate_matches_witness_grid_full(rng, mode):
    _oracle_agreement(rng, 200, 50, mode)


def test_witness_grid_decides_known_sentences():
    between = parse_formula("(exists (y) (and (< x y) (< y z)))")
    assert _grid_truth(between, {"x": Fraction(0), "z": Fraction(1)}, True), "density between 0 and 1"
    assert not _grid_truth(between, {"x": Fraction(1), "z": Fraction(1)}, True), "nothing strictly between 1 and 1"
    halves = parse_formula("(forall (y) (implies (< (* 2 y) x) (< y 1)))")
    assert _grid_truth(halves, {"x": Fraction(2)}, False), "2y < 2 forces y < 1"
    assert not _grid_truth(halves, {"x": Fraction(3)}, False), "y = 5/4 has 2y < 3 and y >= 1"


# ===================== ELIMINATION PROPERTIES =====================


def test_dlo_elimination_keeps_unit_coefficients(rng):
    battery = random_formula_battery(3, 100, rng, mode=Mode.DLO, depth=3)
    for f in battery:
        out = eliminate(f, Mode.DLO)
        for a in atoms(out):
            coeffs = [c for _, c in a.term.coeffs]
            assert all(abs(c) == 1 for c in coeffs), f"non-order atom {a} from {f}"
            assert len(coeffs) <= 2, f"atom {a} compares more than two variables"
            assert len(coeffs) < 2 or sum(coeffs) == 0, f"atom {a} is not a comparison of two variables"


def test_dlo_and_odag_elimination_agree(rng):
    for f in random_formula_battery(3, 60, rng, mode=Mode.DLO, depth=3):
        assert equivalent(eliminate(f, Mode.DLO), eliminate(f)), f"DLO and ODAG elimination differ on {f}"


def test_entails_is_a_preorder(rng):
    battery = random_formula_battery(2, 24, rng, depth=2)
    for f in battery:
        assert entails(f, f), f"{f} should entail itself"
    for i, j, k in rng.integers(0, len(battery), size=(200, 3)):
        a, b, c = battery[i], battery[j], battery[k]
        if entails(a, b) and entails(b, c):
            assert entails(a, c), f"entailment not transitive through {b}"


def test_entails_respects_points(rng):
    battery = [f for f in random_formula_battery(2, 60, rng, depth=2) if is_quantifier_free(f)]
    points = [{"v1": GRID[i], "v2": GRID[j]} for i, j in rng.integers(0, len(GRID), size=(20, 2))]
    for i, j in rng.integers(0, len(battery), size=(100, 2)):
        a, b = battery[i], battery[j]
        if entails(a, b):
            for values in points:
                assert not _grid_truth(a, values, False) or _grid_truth(b, values, False), f"{a} holds at {values}, {b} does not"


# ===================== SATISFIABILITY =====================


def test_is_satisfiable_witness():
    f = conj(lt(Term.var("x") + Term.var("y"), 1), gt("x", 0), gt("y", 0))
    result = is_satisfiable(f)
    assert result, "open triangle is nonempty"
    assert evaluate(f, result.witness), f"witness {result.witness} does not satisfy the formula"


def test_three_disjoint_unit_intervals_do_not_fit():
    f = parse_formula("(and (< 0 a) (< (+ a 1) b) (< (+ b 1) c) (< (+ c 1) 5/2))")
    assert not is_satisfiable(f), "three disjoint unit intervals cannot fit in (0, 5/2)"
    g = parse_formula("(and (< 0 a) (< (+ a 1) b) (< (+ b 1) 5/2))")
    assert is_satisfiable(g), "two disjoint unit intervals fit in (0, 5/2)"


def test_disequation_satisfiable():
    f = conj(le(0, "x"), le("x", 0), ne("x", 0))
    assert not is_satisfiable(f), "x = 0 and x != 0 is empty"
    g = conj(le(0, "x"), le("x", 1), ne("x", 0), ne("x", 1))
    assert is_satisfiable(g), "[0, 1] minus endpoints is nonempty"


def test_entails_and_valid():
    assert entails(lt("x", 0), lt("x", 1)), "x < 0 entails x < 1"
    assert not entails(lt("x", 1), lt("x", 0)), "x < 1 does not entail x < 0"
    assert is_valid(disj(lt("x", 0), le(0, "x"))), "trichotomy"
    assert is_valid(implies(conj(lt("x", "y"), lt("y", "z")), lt("x", "z"))), "transitivity"
    with pytest.raises(ArityMismatch):
        entails(lt("x", "y"), lt("x", 0), variables=("x",))


# ===================== SIMPLIFICATION AND MODES =====================


def test_simplify_contradictory_bounds():
    assert simplify(conj(lt("x", 1), gt("x", 2))) == FALSE, "x < 1 and x > 2 should simplify to false"


def test_negation_is_complement():
    f = parse_formula("(and (< 0 x) (<= x 1))")
    for value in (Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)):
        assert evaluate(neg(f), {"x": value}) != evaluate(f, {"x": value}), f"neg disagrees at {value}"


def test_substitute_then_evaluate():
    f = substitute(lt("x", "y"), {"y": 3})
    assert free_vars(f) == {"x"}, "y should be substituted away"
    assert evaluate(f, {"x": 2}) and not evaluate(f, {"x": 4}), "substitution changed the meaning"


def test_dlo_rejects_scalars():
    with pytest.raises(ModeViolation):
        eliminate(parse_formula("(< (* 2 x) y)"), Mode.DLO)
    with pytest.raises(ModeViolation):
        evaluate(parse_formula("(< (+ x y) 1)"), {"x": 0, "y": 0}, mode=Mode.DLO)
    assert eliminate(parse_formula("(< x 3)"), Mode.DLO) == lt("x", 3), "constants are allowed in DLO"


def test_forall_closed_examples():
    assert eliminate(forall(("x",), exists(("y",), lt("x", "y")))) == TRUE, "no maximum"
    assert eliminate(exists(("y",), forall(("x",), lt("x", "y")))) == FALSE, "no upper bound"
