from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifscale.generate import (
    check_Jn,
    default_pair_sample,
    degree_window_members,
    degrees_from_values,
    derive_seed,
    empirical_edge_probability,
    generate_rank1,
    mean_degree,
    pair_half_edges,
    read_degrees,
    read_edge_list,
    sample_degrees,
    simple_graph_from_edges,
    window_bounds,
    write_degrees,
    write_edge_list,
    zeta,
)

TAU = Fraction(5, 2)


# --- zeta and mean degree -------------------------------------------------------


def test_zeta_known_values():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)
    assert zeta(4.0) == pytest.approx(math.pi ** 4 / 90, rel=1e-12)
    assert zeta(1.5) == pytest.approx(2.612375348685489, rel=1e-12)


def test_mean_degree_is_zeta_tau_minus_one():
    assert mean_degree(TAU) == pytest.approx(zeta(1.5), rel=1e-15)
    assert mean_degree(Fraction(21, 10)) == pytest.approx(zeta(1.1), rel=1e-12)


# --- seed derivation --------------------------------------------------------------


def test_derive_seed_deterministic_and_distinct():
    a = derive_seed(7, 0, 3, 1)
    assert a == derive_seed(7, 0, 3, 1)
    seen = {derive_seed(7, i, j, t) for i in range(4) for j in range(4)
            for t in range(4)}
    assert len(seen) == 64
    assert all(0 <= s < 2 ** 64 for s in seen)
    assert derive_seed(8, 0, 3, 1) != a


# --- degree sampling --------------------------------------------------------------


def test_sample_degrees_deterministic():
    d = sample_degrees(3000, TAU, derive_seed(11, 0))
    assert d.degrees[:8].tolist() == [1, 1, 3, 1, 3, 1, 3, 1]
    assert d.L_n == int(d.degrees.sum())
    assert d.L_n % 2 == 0
    assert d.degrees.min() >= 1
    d2 = sample_degrees(3000, TAU, derive_seed(11, 0))
    assert (d2.degrees == d.degrees).all()


def test_sample_degrees_tail_law():
    # P(D >= m) = m^(1-tau) exactly for the floor construction
    d = sample_degrees(200_000, TAU, 123)
    for m in (2, 5, 10, 30):
        p = float(m) ** float(1 - TAU)
        obs = float((d.degrees >= m).mean())
        se = math.sqrt(p * (1 - p) / d.n)
        assert abs(obs - p) < 4 * se + 1e-9, (m, obs, p)


def test_sample_degrees_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_degrees(1, TAU, 0)
    with pytest.raises(ValueError):
        sample_degrees(100, Fraction(7, 2), 0)


def test_degrees_from_values_validation():
    d = degrees_from_values([2, 2, 3, 1], tau=TAU)
    assert d.n == 4 and d.L_n == 8 and d.tau == TAU
    with pytest.raises(ValueError):
        degrees_from_values([2, 0, 2])
    with pytest.raises(ValueError):
        degrees_from_values([3])
    with pytest.raises(ValueError):
        degrees_from_values([1, 1, 1])  # odd total


# --- half-edge pairing --------------------------------------------------------------


def test_pair_half_edges_frozen_draw(ecm3000):
    d, g = ecm3000
    assert g.n == 3000
    assert g.simple_edge_count == 3808
    assert g.erased_self_loops == 14
    assert g.erased_multi_edges == 102
    assert int(d.degrees.max()) == 224


def test_pair_half_edges_invariants(ecm3000):
    d, g = ecm3000
    degs = g.degrees
    # erasure only removes edges
    assert (degs <= d.degrees).all()
    # stub accounting: every removed object eats whole edges
    assert 2 * g.simple_edge_count + 2 * g.erased_self_loops \
        + 2 * g.erased_multi_edges == d.L_n
    for u in range(g.n):
        assert u not in g.adjacency_sets[u]
        for v in g.adjacency[u]:
            assert u in g.adjacency_sets[v]


def test_pair_half_edges_deterministic(ecm3000):
    d, g = ecm3000
    g2 = pair_half_edges(d, derive_seed(11, 1))
    assert g2.adjacency == g.adjacency
    g3 = pair_half_edges(d, derive_seed(11, 2))
    assert g3.adjacency != g.adjacency


def test_generate_rank1(ecm3000):
    d, _ = ecm3000
    r = generate_rank1(d, derive_seed(11, 1))
    assert r.source == "rank1"
    assert r.simple_edge_count == 4012
    assert r.n == d.n
    # edge count concentrates near L_n/2 for independent edges
    assert abs(r.simple_edge_count - d.L_n / 2) < d.L_n


def test_jn_check():
    mu = mean_degree(TAU)
    n = 1000
    target = int(round(mu * n))
    vals = np.ones(n, dtype=np.int64)
    vals[0] = target - (n - 1)
    if int(vals.sum()) % 2 == 1:
        vals[1] += 1
    d = degrees_from_values(vals, tau=TAU)
    assert check_Jn(d)
    # push the total far outside the n^(1/(tau-1)) tube
    vals2 = vals.copy()
    vals2[0] += 2 * int(n ** (1 / float(TAU - 1))) + 10
    d2 = degrees_from_values(vals2, tau=TAU)
    assert not check_Jn(d2)
    with pytest.raises(ValueError):
        check_Jn(degrees_from_values([2, 2], tau=None))


# --- windows ---------------------------------------------------------------------


def test_window_bounds_formula():
    lo, hi = window_bounds(3000, TAU, Fraction(1, 2), Fraction(1, 10))
    scale = math.sqrt(mean_degree(TAU) * 3000)
    assert lo == pytest.approx(scale / 10, rel=1e-12)
    assert hi == pytest.approx(scale * 10, rel=1e-12)
    with pytest.raises(ValueError):
        window_bounds(3000, TAU, Fraction(1, 2), Fraction(3, 2))
    with pytest.raises(ValueError):
        window_bounds(3000, TAU, Fraction(9, 10), Fraction(1, 10))


def test_degree_window_members_hand_case():
    vals = [1, 3, 5, 9, 100, 2]
    d = degrees_from_values(vals, tau=TAU)
    # alpha=0 gives the O(1) window [eps, 1/eps]
    members = degree_window_members(None, d, Fraction(0), Fraction(1, 4))
    got = sorted(members.tolist())
    assert got == [0, 1, 5]  # degrees 1, 3, 2 sit inside [1/4, 4]
    g = simple_graph_from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    members_g = degree_window_members(g, d, Fraction(0), Fraction(1, 4))
    assert sorted(members_g.tolist()) == got


# --- empirical edge probabilities ---------------------------------------------------


def test_default_pair_sample_deterministic():
    d = sample_degrees(500, TAU, 42)
    pairs = default_pair_sample(d, top=20, random_pairs=500, seed=1)
    assert pairs == default_pair_sample(d, top=20, random_pairs=500, seed=1)
    assert len(pairs) >= 500
    assert all(u < v for u, v in pairs)
    top2 = np.argsort(-d.degrees, kind="stable")[:2]
    a, b = int(top2[0]), int(top2[1])
    assert ((min(a, b), max(a, b))) in pairs


def test_empirical_edge_probability_tracks_prediction():
    d = sample_degrees(2000, TAU, 5)
    graphs = [pair_half_edges(d, derive_seed(5, r)) for r in range(30)]
    pairs = default_pair_sample(d, top=40, random_pairs=2000, seed=0)
    bins = np.logspace(-4, 1, 11)
    rows = empirical_edge_probability(d, graphs, bins, pairs=pairs)
    assert rows
    ok = 0
    populated = 0
    for row in rows:
        assert 0 <= row.observed <= 1
        # bins partition the rate d_i d_j / L_n; prediction is 1 - exp(-rate)
        assert 1 - math.exp(-row.lo) <= row.predicted <= 1 - math.exp(-row.hi) \
            or row.n_pairs == 0
        if row.n_pairs * 30 >= 50:
            populated += 1
            if abs(row.observed - row.predicted) <= 3 * row.stderr + 1e-12:
                ok += 1
    assert populated >= 3
    assert ok >= populated - 1


# --- file round trips ----------------------------------------------------------------


def test_edge_list_roundtrip(tmp_path, ecm3000):
    _, g = ecm3000
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    back = read_edge_list(path)
    assert back.n == g.n
    assert back.adjacency == g.adjacency
    assert back.erased_self_loops == g.erased_self_loops
    assert back.erased_multi_edges == g.erased_multi_edges
    assert back.meta["tau"] == TAU


def test_read_edge_list_requires_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1\n1 2\n")
    with pytest.raises(ValueError):
        read_edge_list(p)


def test_degrees_roundtrip(tmp_path, ecm3000):
    d, _ = ecm3000
    path = tmp_path / "d.txt"
    write_degrees(d, path)
    back = read_degrees(path, tau=TAU)
    assert (back.degrees == d.degrees).all()
    assert back.tau == TAU


# --- property: erasure is monotone ----------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), n=st.integers(200, 600))
def test_erased_graph_degrees_never_exceed_draw(seed, n):
    d = sample_degrees(n, TAU, seed)
    g = pair_half_edges(d, seed + 1)
    assert (g.degrees <= d.degrees).all()
    assert 2 * g.simple_edge_count + 2 * g.erased_self_loops \
        + 2 * g.erased_multi_edges == d.L_n
