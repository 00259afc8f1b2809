# conftest.py - Shared fixtures for the test suite
"""
Seeded generators, shipped fixture documents and small budgets.
"""

import numpy as np
import pytest

from ominal.config import SEED, Budget, BudgetLimits
from ominal.fixtures import load_fixture
from ominal.logic import Mode


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def budget():
    return Budget(BudgetLimits())


@pytest.fixture
def small_budget():
    return Budget(BudgetLimits(search_depth=3, disjoint_probe=4, candidates=60, venn=4))


@pytest.fixture(scope="session")
def crosses():
    return load_fixture("crosses")


@pytest.fixture(scope="session")
def a_topology():
    return load_fixture("a-topology")


@pytest.fixture(scope="session")
def lex_cells():
    return load_fixture("lex-cells")


@pytest.fixture(scope="session")
def appendix_b():
    return load_fixture("appendix-b")


@pytest.fixture(scope="session")
def boxes():
    return load_fixture("boxes")


@pytest.fixture(scope="session")
def crosses_dlo():
    return load_fixture("crosses", Mode.DLO)
