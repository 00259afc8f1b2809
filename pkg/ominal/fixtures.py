# fixtures.py - Shipped fixture documents and randomized batteries
"""
Fixture documents shipped under data/fixtures and the randomized batteries
used to cross-check the symbolic algorithms against finite oracles.

Contains:
- FIXTURES, fixture_path, fixture_text, load_fixture: crosses, a-topology, lex-cells, appendix-b, boxes
- random_interval_family: seeded definable families of closed intervals
- interval_endpoints, sample_index_points: finite instantiations of a family
- mirsky_agreement: interval_transversal vs max_pairwise_disjoint vs greedy stabbing
- lift_agreement: shared points of the product lift vs brute-force transversals
"""

import logging
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from ominal.cells import infimum, supremum
from ominal.config import SEED, Budget, ensure_budget
from ominal.document import Document, parse_document
from ominal.exceptions import ResolutionError
from ominal.families import DefinableFamily
from ominal.logic import Mode, Term, conj, evaluate, le
from ominal.transversal import finite_transversal, greedy_stabbing, interval_transversal, lift_meets, max_pairwise_disjoint

logger = logging.getLogger(__name__)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "data" / "fixtures"
FIXTURES = ("crosses", "a-topology", "lex-cells", "appendix-b", "boxes")
FIXTURE_PREFIX = "fixture:"

MIRSKY_COLUMNS = ["family", "transversal", "disjoint", "greedy", "agree"]
LIFT_COLUMNS = ["family", "l", "indices", "lift_meets", "transversal", "agree"]


# ===================== SHIPPED DOCUMENTS =====================


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise ResolutionError(f"unknown fixture {name!r}, expected one of {', '.join(FIXTURES)}")
    return FIXTURE_DIR / f"{name}.sexp"


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def load_fixture(name: str, mode=Mode.ODAG) -> Document:
    """Parse a shipped fixture document."""
    return parse_document(fixture_text(name), mode)


# ===================== RANDOM INTERVAL FAMILIES =====================


def _rational(rng, low, high, denominator=4) -> Fraction:
    return Fraction(int(rng.integers(low * denominator, high * denominator + 1)), denominator)


def random_interval_family(rng=None, name="intervals") -> DefinableFamily:
    """
    {[a*u + b, a*u + b + w] : 0 <= u <= L} with small random a, b, w > 0 and L.

    Members are nonempty closed intervals of width at least 1/2 whose left
    endpoints span at most 3, so at most 7 of them are pairwise disjoint.
    """
    rng = rng if rng is not None else np.random.default_rng(SEED)
    a = Fraction(int(rng.choice([-1, 0, 1])))
    b = _rational(rng, -2, 2)
    w = Fraction(int(rng.choice([1, 2, 3])), int(rng.choice([1, 2])))
    length = Fraction(int(rng.integers(0, 4)))
    left = Term.var("u") * a + b
    member = conj(le(left, "x"), le("x", left + w))
    domain = conj(le(0, "u"), le("u", length))
    return DefinableFamily(member, ("u",), ("x",), domain, name=name)


def interval_endpoints(F: DefinableFamily, u) -> tuple[Fraction, Fraction]:
    """(lo, hi) of the bounded closed interval at index point u."""
    fib = F.fiber(u)
    lo, hi = infimum(fib, F.object_vars[0], F.mode), supremum(fib, F.object_vars[0], F.mode)
    return lo.value, hi.value


def sample_index_points(F: DefinableFamily, count: int, rng=None, span=4, denominator=8) -> list[tuple]:
    """Up to `count` distinct rational index points of F, drawn from a grid on [-span, span]^k."""
    rng = rng if rng is not None else np.random.default_rng(SEED)
    points = []
    for _ in range(count * 20):
        u = tuple(_rational(rng, -span, span, denominator) for _ in F.index_vars)
        if u not in points and evaluate(F.domain, u, F.index_vars, F.mode):
            points.append(u)
        if len(points) == count:
            break
    return points


# ===================== AGREEMENT BATTERIES =====================


def mirsky_agreement(families=30, points=30, rng=None, budget=None) -> pd.DataFrame:
    """
    Compare the definable Mirsky transversal with its finite oracles.

    Every row instantiates one random family at a maximal disjoint witness plus
    random index points; the greedy optimum on that instantiation, the
    transversal size and the disjointness bound must coincide.
    """
    rng = rng if rng is not None else np.random.default_rng(SEED)
    limits = ensure_budget(budget).limits
    rows = []
    for i in range(families):
        F = random_interval_family(rng, name=f"intervals{i}")
        T = interval_transversal(F, Budget(limits))
        bound = max_pairwise_disjoint(F, budget=Budget(limits))
        indices = list(bound.witness) + sample_index_points(F, points, rng)
        greedy = len(greedy_stabbing([interval_endpoints(F, u) for u in indices]))
        size = None if T is None else len(T)
        rows.append(
            {
                "family": str(F),
                "transversal": size,
                "disjoint": bound.k,
                "greedy": greedy,
                "agree": size == bound.k == greedy,
            }
        )
    table = pd.DataFrame(rows, columns=MIRSKY_COLUMNS)
    logger.info("mirsky agreement: %d of %d families", int(table["agree"].sum()), len(table))
    return table


def lift_agreement(F: DefinableFamily, instances=20, size=3, l=2, rng=None, budget=None) -> pd.DataFrame:
    """
    On `instances` random finite subfamilies of F, the lifts share a point
    exactly when a brute-force search finds at most l transversal points.
    """
    rng = rng if rng is not None else np.random.default_rng(SEED)
    limits = ensure_budget(budget).limits
    rows = []
    for _ in range(instances):
        indices = sample_index_points(F, size, rng)
        meets = lift_meets(F, l, indices, Budget(limits))
        found = finite_transversal(F, indices, l, Budget(limits)) is not None
        rows.append(
            {
                "family": F.label,
                "l": l,
                "indices": indices,
                "lift_meets": meets,
                "transversal": found,
                "agree": meets == found,
            }
        )
    return pd.DataFrame(rows, columns=LIFT_COLUMNS)
