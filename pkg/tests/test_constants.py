from __future__ import annotations

import json
import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from motifscale.constants import (
    ConstantEstimate,
    SqrtClassError,
    conditional_expected_count,
    estimate_A,
    tensor_quadrature_A,
)
from motifscale.generate import degrees_from_values, mean_degree
from motifscale.motifs import automorphism_count, motif_by_name

TAU = Fraction(5, 2)
EPS = Fraction(1, 10)


# --- deterministic quadrature ---------------------------------------------------


def test_quadrature_frozen_values():
    cases = {
        ("triangle", "sub"): 4.290565787209172,
        ("diamond", "sub"): 3.2648418761210296,
        ("k4", "sub"): 1.059225682259583,
        ("diamond", "ind"): 2.2056161938614465,
        ("path3", "sub"): 26.697725898308484,
    }
    for (name, mode), expected in cases.items():
        got = tensor_quadrature_A(motif_by_name(name), mode, TAU, EPS)
        assert got == pytest.approx(expected, rel=1e-9), (name, mode)


def test_quadrature_node_count_converged():
    h = motif_by_name("diamond")
    a = tensor_quadrature_A(h, "sub", TAU, EPS, nodes_per_axis=48)
    b = tensor_quadrature_A(h, "sub", TAU, EPS, nodes_per_axis=64)
    assert a == pytest.approx(b, rel=1e-12)


def test_quadrature_complete_graph_mode_agnostic():
    # no non-edges, so the independence correction never fires
    h = motif_by_name("triangle")
    assert tensor_quadrature_A(h, "sub", TAU, EPS) == pytest.approx(
        tensor_quadrature_A(h, "ind", TAU, EPS), rel=1e-14)


def test_quadrature_monotone_in_truncation():
    h = motif_by_name("triangle")
    vals = [tensor_quadrature_A(h, "sub", TAU, Fraction(1, d))
            for d in (4, 8, 16)]
    assert vals[0] < vals[1] < vals[2]


def test_quadrature_ind_below_sub():
    h = motif_by_name("diamond")
    assert tensor_quadrature_A(h, "ind", TAU, EPS) < tensor_quadrature_A(
        h, "sub", TAU, EPS)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        tensor_quadrature_A(motif_by_name("c5"), "sub", TAU, EPS)
    with pytest.raises(ValueError):
        tensor_quadrature_A(motif_by_name("triangle"), "sub", TAU, EPS,
                            nodes_per_axis=65)
    with pytest.raises(ValueError):
        tensor_quadrature_A(motif_by_name("triangle"), "sub", TAU, Fraction(2))
    with pytest.raises(ValueError):
        tensor_quadrature_A(motif_by_name("triangle"), "both", TAU, EPS)


def test_prefactor_ratio():
    h = motif_by_name("triangle")
    with_pref = tensor_quadrature_A(h, "sub", TAU, EPS, include_prefactor=True)
    bare = tensor_quadrature_A(h, "sub", TAU, EPS, include_prefactor=False)
    c = float(TAU) - 1
    mu = mean_degree(TAU)
    expected = (c ** 3) * mu ** (-3 * (float(TAU) - 1) / 2)
    assert with_pref / bare == pytest.approx(expected, rel=1e-12)


# --- Monte Carlo estimator ------------------------------------------------------


def test_estimate_frozen_draw():
    h = motif_by_name("triangle")
    est = estimate_A(h, "sub", TAU, 2000, 5, eps=EPS)
    assert est.value == pytest.approx(4.472494822782968, rel=1e-12)
    assert est.stderr == pytest.approx(0.11094465278119775, rel=1e-12)
    est2 = estimate_A(h, "sub", TAU, 2000, 5, eps=EPS)
    assert est2.value == est.value and est2.stderr == est.stderr


def test_estimate_agrees_with_quadrature():
    h = motif_by_name("triangle")
    est = estimate_A(h, "sub", TAU, 50_000, 17, eps=EPS)
    truth = tensor_quadrature_A(h, "sub", TAU, EPS)
    assert abs(est.value - truth) < 4 * est.stderr
    assert est.samples == 50_000
    assert est.eps == EPS


def test_common_random_numbers_order_ind_below_sub():
    h = motif_by_name("diamond")
    sub = estimate_A(h, "sub", TAU, 5000, 3, eps=EPS)
    ind = estimate_A(h, "ind", TAU, 5000, 3, eps=EPS)
    assert ind.value <= sub.value  # same draws, pointwise smaller integrand


def test_workers_split_is_deterministic():
    h = motif_by_name("triangle")
    a = estimate_A(h, "sub", TAU, 6000, 11, eps=EPS, workers=3)
    b = estimate_A(h, "sub", TAU, 6000, 11, eps=EPS, workers=3)
    assert a.value == b.value and a.stderr == b.stderr
    assert a.workers == 3
    truth = tensor_quadrature_A(h, "sub", TAU, EPS)
    assert abs(a.value - truth) < 5 * a.stderr


def test_untruncated_requires_sqrt_class():
    for name in ("claw", "diamond", "path3"):
        with pytest.raises(SqrtClassError):
            estimate_A(motif_by_name(name), "sub", TAU, 1000, 0, eps=None)
    est = estimate_A(motif_by_name("triangle"), "sub", TAU, 20_000, 1, eps=None)
    assert est.eps is None
    assert est.value > 0
    # the truncated value must approach the untruncated one from below
    trunc = estimate_A(motif_by_name("triangle"), "sub", TAU, 20_000, 1, eps=EPS)
    assert trunc.value < est.value + 3 * (est.stderr + trunc.stderr)


def test_estimate_untruncated_ok_for_k4():
    est = estimate_A(motif_by_name("k4"), "sub", TAU, 5000, 2, eps=None)
    assert math.isfinite(est.value) and est.value > 0


def test_constant_estimate_serialization():
    h = motif_by_name("triangle")
    est = estimate_A(h, "sub", TAU, 1000, 0, eps=EPS)
    row = est.to_csv_row()
    assert len(row.split(",")) == len(ConstantEstimate.CSV_HEADER.split(","))
    rec = json.loads(est.to_json())
    assert rec["motif_key"] == h.canonical_key.hex()
    assert rec["samples"] == 1000
    assert rec["eps"] == "1/10"


# --- conditional windowed prediction ----------------------------------------------


def _window_degrees():
    # window members must carry sqrt(mu n)-scale degrees; pad with leaves
    vals = [5, 6, 7] + [1] * 17
    if sum(vals) % 2:
        vals.append(1)
    return degrees_from_values(vals, tau=TAU)


def test_conditional_triangle_matches_hand_formula():
    d = _window_degrees()
    est = conditional_expected_count(d, motif_by_name("triangle"), "sub",
                                     Fraction(1, 2))
    assert est.exact
    assert est.members == 3
    L = d.L_n
    p = lambda a, b: 1 - math.exp(-a * b / L)
    expected = p(5, 6) * p(5, 7) * p(6, 7)  # one unordered triple
    assert est.value == pytest.approx(expected, rel=1e-12)
    assert est.stderr == 0.0


def test_conditional_path3_ind_matches_hand_formula():
    d = _window_degrees()
    est = conditional_expected_count(d, motif_by_name("path3"), "ind",
                                     Fraction(1, 2))
    assert est.exact
    L = d.L_n
    p = lambda a, b: 1 - math.exp(-a * b / L)
    q = lambda a, b: math.exp(-a * b / L)
    total = 0.0
    for a, b, c in permutations((5, 6, 7)):
        total += p(a, b) * p(b, c) * q(a, c)  # center b, ends a and c
    expected = total / automorphism_count(motif_by_name("path3"))
    assert est.value == pytest.approx(expected, rel=1e-12)


def test_conditional_sampling_branch_agrees_with_exact():
    vals = [6, 7, 8, 9, 10, 11, 12, 13] + [1] * 40
    if sum(vals) % 2:
        vals.append(1)
    d = degrees_from_values(vals, tau=TAU)  # 8 window members, 336 triples
    h = motif_by_name("triangle")
    exact = conditional_expected_count(d, h, "sub", Fraction(1, 2),
                                       tuple_samples=10_000)
    assert exact.exact
    sampled = conditional_expected_count(d, h, "sub", Fraction(1, 2),
                                         tuple_samples=100, seed=4)
    assert not sampled.exact
    assert abs(sampled.value - exact.value) < 5 * sampled.stderr
    again = conditional_expected_count(d, h, "sub", Fraction(1, 2),
                                       tuple_samples=100, seed=4)
    assert again.value == sampled.value


def test_conditional_requires_enough_members():
    vals = [5, 6] + [1] * 19
    d = degrees_from_values(vals, tau=TAU)
    with pytest.raises(ValueError):
        conditional_expected_count(d, motif_by_name("triangle"), "sub",
                                   Fraction(1, 2))
    bare = degrees_from_values([5, 6, 7, 1, 1, 1, 1, 2])
    with pytest.raises(ValueError):
        conditional_expected_count(bare, motif_by_name("triangle"), "sub",
                                   Fraction(1, 2))
