from __future__ import annotations

from fractions import Fraction

import pytest

from motifscale.generate import (
    derive_seed,
    pair_half_edges,
    sample_degrees,
    simple_graph_from_edges,
)

TAU = Fraction(5, 2)


@pytest.fixture(scope="session")
def c5():
    return simple_graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


@pytest.fixture(scope="session")
def k5():
    edges = [(u, v) for u in range(5) for v in range(u + 1, 5)]
    return simple_graph_from_edges(5, edges)


@pytest.fixture(scope="session")
def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return simple_graph_from_edges(10, outer + inner + spokes)


@pytest.fixture(scope="session")
def ecm3000():
    """One ECM draw shared across tests: n=3000, tau=5/2, base seed 11."""
    d = sample_degrees(3000, TAU, derive_seed(11, 0))
    g = pair_half_edges(d, derive_seed(11, 1))
    return d, g
