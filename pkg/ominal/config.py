# config.py - Session configuration and search budgets
"""
Configuration and constants for ominal.

Contains:
- Default structure mode and budget limits
- Battery sizes and random seed for property checks
- SessionConfig (mode, budgets, output format) and its loader
- Budget: per-command counters with a cooperative cancellation token
"""

import os
import threading
from dataclasses import dataclass, field

from ominal.exceptions import BudgetExhausted, Cancelled, ConfigError

# ===================== STRUCTURE MODES =====================

MODE_ODAG = "odag"  # ordered divisible abelian group (Q, <, +, 0, rational scalars)
MODE_DLO = "dlo"  # pure dense linear order (Q, <)
MODES = (MODE_ODAG, MODE_DLO)
DEFAULT_MODE = MODE_ODAG

# ===================== OUTPUT =====================

OUTPUT_FORMATS = ("json", "text")
DEFAULT_OUTPUT_FORMAT = "json"
REPORT_SCHEMA = "ominal.report/1"

# ===================== ENVIRONMENT =====================

ENV_MODE = "OMINAL_MODE"

# ===================== DEFAULT BUDGETS =====================

DEFAULT_QE_ATOMS = 4000  # largest formula (in atoms) handed to one QE query
DEFAULT_SEARCH_DEPTH = 6  # recursion / tuple-size bound of combinatorial searches
DEFAULT_DISJOINT_PROBE = 12  # largest k probed for pairwise-disjoint subfamilies
DISJOINT_CEILING = 48  # the disjoint-max command doubles its limit up to this k
DEFAULT_CANDIDATES = 400  # candidate types tried by type searches
DEFAULT_VENN = 6  # most index points in one Venn count (2^n QE calls)

BUDGET_KINDS = ("qe_atoms", "search_depth", "disjoint_probe", "candidates", "venn")

# ===================== BATTERIES =====================

SEED = 42
BATTERY_FORMULAS = 100  # verification battery for completeness certificates
BATTERY_TYPES = 50  # battery for mutual-membership comparisons of types
BATTERY_DEPTH = 3
BATTERY_CONSTANTS = (-2, -1, 0, 1, 2)
SHATTER_GRID = (-3, -1, 0, 1, 3)
SHATTER_TRIALS = 40  # random index tuples per dual shatter probe


@dataclass(frozen=True)
class BudgetLimits:
    """Upper limits for each budget kind; all must be positive."""

    qe_atoms: int = DEFAULT_QE_ATOMS
    search_depth: int = DEFAULT_SEARCH_DEPTH
    disjoint_probe: int = DEFAULT_DISJOINT_PROBE
    candidates: int = DEFAULT_CANDIDATES
    venn: int = DEFAULT_VENN

    def __post_init__(self):
        for kind in BUDGET_KINDS:
            value = getattr(self, kind)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"budget '{kind}' must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class SessionConfig:
    """
    Settings of one CLI invocation.

    Args:
        mode: "odag" or "dlo"
        budgets: BudgetLimits
        output_format: "json" or "text"
    """

    mode: str = DEFAULT_MODE
    budgets: BudgetLimits = field(default_factory=BudgetLimits)
    output_format: str = DEFAULT_OUTPUT_FORMAT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown structure mode {self.mode!r} (expected one of {MODES})")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")


def load_session_config(mode=None, output_format=None, environ=None, **limits):
    """
    Build a SessionConfig; an explicit mode wins over OMINAL_MODE, which wins over the default.

    Args:
        mode: mode from the command line, or None
        output_format: "json" / "text", or None for the default
        environ: environment mapping (defaults to os.environ)
        **limits: BudgetLimits fields; None values keep the default

    Returns:
        SessionConfig
    """
    environ = os.environ if environ is None else environ
    chosen = mode or environ.get(ENV_MODE) or DEFAULT_MODE
    budgets = BudgetLimits(**{k: v for k, v in limits.items() if v is not None})
    return SessionConfig(
        mode=chosen.strip().lower(),
        budgets=budgets,
        output_format=output_format or DEFAULT_OUTPUT_FORMAT,
    )


class Budget:
    """
    Mutable usage counters for one command, checked against BudgetLimits.

    Counting kinds (candidates, disjoint_probe) accumulate through spend();
    bounding kinds (qe_atoms, search_depth, venn) are checked with require().
    The cancellation token is observed on every spend() and require().
    """

    def __init__(self, limits=None, token=None):
        self.limits = limits or BudgetLimits()
        self.token = token or threading.Event()
        self.used = {kind: 0 for kind in BUDGET_KINDS}
        self._lock = threading.Lock()

    def spend(self, kind, amount=1):
        """Add `amount` to a counter; raise BudgetExhausted once it passes its limit."""
        self._check_cancelled()
        limit = getattr(self.limits, kind)
        with self._lock:
            self.used[kind] += amount
            if self.used[kind] > limit:
                raise BudgetExhausted(kind, limit)

    def require(self, kind, size):
        """Check a one-off size against a bounding limit, recording the largest size seen."""
        self._check_cancelled()
        limit = getattr(self.limits, kind)
        with self._lock:
            self.used[kind] = max(self.used[kind], size)
        if size > limit:
            raise BudgetExhausted(kind, limit)

    def allows(self, kind, size):
        return size <= getattr(self.limits, kind)

    def cancel(self):
        self.token.set()

    def _check_cancelled(self):
        if self.token.is_set():
            raise Cancelled()

    def usage(self):
        """Counters and limits, for reports."""
        return {
            kind: {"used": self.used[kind], "limit": getattr(self.limits, kind)}
            for kind in BUDGET_KINDS
        }


def ensure_budget(budget):
    return budget if budget is not None else Budget()
