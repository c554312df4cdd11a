"""Exact partition optimization: dominant degree structure and scaling exponents.

The central objects are the two combinatorial maximization problems over
partitions of H's non-leaf vertices into classes S1/S2/S3 (leaf vertices form
V1 and never participate).  Their optimal values, always of the form
a + b/(tau-1), determine the polynomial growth exponent of subgraph and
induced-subgraph counts.  Everything here is exact rational arithmetic in tau;
floats appear only inside the grid oracle's prefilter and are re-verified
exactly before anything is returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .motifs import MotifGraph

NEG_INF = float("-inf")

_LABELS = ("S1", "S2", "S3")


class InfeasiblePartitionError(ValueError):
    """An S1/S2/S3 assignment violates the induced-mode adjacency constraint."""


class GridTooLargeError(ValueError):
    """Grid oracle refused: too many points per coordinate or too many vertices."""


def validate_tau(tau) -> Fraction:
    """Coerce to an exact rational in the open interval (2, 3)."""
    t = Fraction(tau)
    if not Fraction(2) < t < Fraction(3):
        raise ValueError(f"tau must lie strictly between 2 and 3, got {t}")
    return t


def parse_tau(text: str) -> Fraction:
    try:
        t = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse tau from {text!r}; use p/q form like 5/2") from None
    return validate_tau(t)


# --- value forms --------------------------------------------------------------


@dataclass(frozen=True)
class LinearInTauInv:
    """The value a + b/(tau-1) with exact rational coefficients."""

    a: Fraction
    b: Fraction

    def at(self, tau) -> Fraction:
        t = Fraction(tau)
        return self.a + self.b / (t - 1)

    def __str__(self) -> str:
        return _render_terms([(self.a, ""), (self.b, "/(tau-1)")])


@dataclass(frozen=True)
class ExponentForm:
    """The exponent c0 + c_tau*tau + c_inv/(tau-1) with exact coefficients."""

    c0: Fraction
    c_tau: Fraction
    c_inv: Fraction

    def at(self, tau) -> Fraction:
        t = Fraction(tau)
        return self.c0 + self.c_tau * t + self.c_inv / (t - 1)

    @property
    def text(self) -> str:
        return _render_terms(
            [(self.c0, ""), (self.c_tau, "*tau"), (self.c_inv, "/(tau-1)")]
        )

    def __str__(self) -> str:
        return self.text


def _render_terms(terms: list[tuple[Fraction, str]]) -> str:
    parts: list[str] = []
    for coef, suffix in terms:
        if coef == 0:
            continue
        mag = abs(coef)
        if suffix and mag == 1:
            body = suffix.lstrip("*/") if suffix.startswith("*") else "1" + suffix
        elif suffix:
            c = str(mag) if mag.denominator == 1 else f"({mag})"
            body = f"{c}{suffix}"
        else:
            body = str(mag)
        if not parts:
            parts.append(body if coef > 0 else f"-{body}")
        else:
            parts.append(f"+{body}" if coef > 0 else f"-{body}")
    return "".join(parts) if parts else "0"


# --- partitions ---------------------------------------------------------------


@dataclass(frozen=True)
class StructurePartition:
    """Assignment of H's non-leaf vertices to S1/S2/S3.

    ``vertices`` is the sorted tuple of V_H minus V_1; ``labels[i]`` is the
    class of ``vertices[i]``.
    """

    vertices: tuple[int, ...]
    labels: tuple[str, ...]

    def label_of(self) -> dict[int, str]:
        return dict(zip(self.vertices, self.labels))

    def sets(self) -> dict[str, frozenset[int]]:
        out: dict[str, set[int]] = {s: set() for s in _LABELS}
        for v, lab in zip(self.vertices, self.labels):
            out[lab].add(v)
        return {s: frozenset(vs) for s, vs in out.items()}

    def assignment_text(self, h: MotifGraph) -> str:
        """Per-vertex class list over 0..k-1, with leaves rendered as V1."""
        label = self.label_of()
        return ",".join(label.get(v, "V1") for v in range(h.k))


def partition_domain(h: MotifGraph) -> tuple[int, ...]:
    return tuple(v for v in range(h.k) if v not in h.v1)


def make_partition(h: MotifGraph, labels_by_vertex: dict[int, str]) -> StructurePartition:
    dom = partition_domain(h)
    if set(labels_by_vertex) != set(dom):
        raise ValueError("partition domain must be exactly the non-leaf vertices")
    labels = tuple(labels_by_vertex[v] for v in dom)
    if any(lab not in _LABELS for lab in labels):
        raise ValueError(f"labels must be one of {_LABELS}")
    return StructurePartition(dom, labels)


def _tallies(h: MotifGraph, p: StructurePartition) -> dict[str, int]:
    label = p.label_of()
    s1 = sum(1 for lab in p.labels if lab == "S1")
    s2 = sum(1 for lab in p.labels if lab == "S2")
    e_s1 = e_s1s3 = e_s11 = e_s21 = 0
    for u, v in h.edges:
        lu = label.get(u, "V1")
        lv = label.get(v, "V1")
        pair = {lu, lv}
        if pair == {"S1"}:
            e_s1 += 1
        elif pair == {"S1", "S3"}:
            e_s1s3 += 1
        elif pair == {"S1", "V1"}:
            e_s11 += 1
        elif pair == {"S2", "V1"}:
            e_s21 += 1
    return {"s1": s1, "s2": s2, "e_s1": e_s1, "e_s1s3": e_s1s3, "e_s11": e_s11, "e_s21": e_s21}


def _ind_feasible(h: MotifGraph, p: StructurePartition) -> bool:
    # Every S2 vertex must be adjacent to every other vertex of S2 and S3.
    sets = p.sets()
    s2 = sets["S2"]
    s23 = s2 | sets["S3"]
    for u in s2:
        for v in s23:
            if v != u and not h.has_edge(u, v):
                return False
    return True


def partition_objective(h: MotifGraph, p: StructurePartition, mode: str = "sub") -> LinearInTauInv:
    """Objective value a + b/(tau-1) of a partition.

    a = |S1| - |S2| and b = -(2 E_{S1} + E_{S1,S3} + E_{S1,V1} - E_{S2,V1}).
    In mode ``ind`` the partition must satisfy the adjacency constraint
    (each S2 vertex adjacent to all of S2 and S3); violations raise
    InfeasiblePartitionError rather than returning a value.
    """
    _check_mode(mode)
    if tuple(sorted(p.vertices)) != partition_domain(h):
        raise ValueError("partition domain must be exactly the non-leaf vertices of h")
    if mode == "ind" and not _ind_feasible(h, p):
        raise InfeasiblePartitionError(
            "ind mode requires every S2 vertex adjacent to all of S2 and S3"
        )
    t = _tallies(h, p)
    a = Fraction(t["s1"] - t["s2"])
    b = Fraction(-(2 * t["e_s1"] + t["e_s1s3"] + t["e_s11"] - t["e_s21"]))
    return LinearInTauInv(a, b)


# --- optimization -------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationOutcome:
    mode: str
    tau: Fraction
    B: LinearInTauInv
    value: Fraction
    optimizers: tuple[StructurePartition, ...]
    unique: bool
    alpha: tuple[Fraction, ...]
    exponent: ExponentForm
    exponent_value: Fraction


def _check_mode(mode: str) -> None:
    if mode not in ("sub", "ind"):
        raise ValueError(f"mode must be 'sub' or 'ind', got {mode!r}")


def alpha_for_partition(h: MotifGraph, p: StructurePartition, tau) -> tuple[Fraction, ...]:
    """Per-vertex degree exponents: S1 -> (tau-2)/(tau-1), S2 -> 1/(tau-1),
    S3 -> 1/2, leaves -> 0."""
    t = validate_tau(tau)
    values = {
        "S1": (t - 2) / (t - 1),
        "S2": Fraction(1) / (t - 1),
        "S3": Fraction(1, 2),
        "V1": Fraction(0),
    }
    label = p.label_of()
    return tuple(values[label.get(v, "V1")] for v in range(h.k))


def optimize(h: MotifGraph, tau, mode: str = "sub") -> OptimizationOutcome:
    """Exhaustive maximization of the partition objective.

    Enumerates all 3^|domain| assignments in lexicographic order (S1 < S2 <
    S3), filters by the adjacency constraint in mode ``ind``, evaluates each
    objective exactly at ``tau``, and reports the maximum with every
    maximizer, the uniqueness flag, the per-vertex alpha vector of the first
    maximizer, and the scaling exponent (3-tau)/2*(k2plus + B) + k1/2.
    """
    _check_mode(mode)
    t = validate_tau(tau)
    dom = partition_domain(h)
    tinv = Fraction(1) / (t - 1)

    best: Fraction | None = None
    best_parts: list[tuple[StructurePartition, LinearInTauInv]] = []
    for labels in itertools.product(_LABELS, repeat=len(dom)):
        p = StructurePartition(dom, labels)
        if mode == "ind" and not _ind_feasible(h, p):
            continue
        ta = _tallies(h, p)
        form = LinearInTauInv(
            Fraction(ta["s1"] - ta["s2"]),
            Fraction(-(2 * ta["e_s1"] + ta["e_s1s3"] + ta["e_s11"] - ta["e_s21"])),
        )
        val = form.a + form.b * tinv
        if best is None or val > best:
            best = val
            best_parts = [(p, form)]
        elif val == best:
            best_parts.append((p, form))

    assert best is not None and best >= 0  # all-S3 is always feasible and worth 0
    first_p, first_form = best_parts[0]
    exponent = scaling_exponent(h, first_form, t)
    return OptimizationOutcome(
        mode=mode,
        tau=t,
        B=first_form,
        value=best,
        optimizers=tuple(p for p, _ in best_parts),
        unique=len(best_parts) == 1,
        alpha=alpha_for_partition(h, first_p, t),
        exponent=exponent,
        exponent_value=exponent.at(t),
    )


def scaling_exponent(h: MotifGraph, B: LinearInTauInv, tau) -> ExponentForm:
    """Expand (3-tau)/2 * (k2plus + a + b/(tau-1)) + k1/2 into exponent form.

    Using (3-tau)/(2(tau-1)) = 1/(tau-1) - 1/2, the coefficients are
    c0 = (3(k2plus + a) - b + k1)/2, c_tau = -(k2plus + a)/2, c_inv = b.
    """
    validate_tau(tau)
    base = Fraction(h.k2plus) + B.a
    return ExponentForm(
        c0=(3 * base - B.b + h.k1) / 2,
        c_tau=-base / 2,
        c_inv=B.b,
    )


# --- continuous relaxation and its grid oracle --------------------------------


def continuous_objective(h: MotifGraph, alpha, tau, mode: str = "sub"):
    """(1-tau) * sum(alpha) + sum over edges with alpha_u+alpha_v < 1 of
    (alpha_u + alpha_v - 1), with each alpha_i in [0, 1/(tau-1)].

    In mode ``ind``, any NON-edge with alpha_u + alpha_v > 1 makes the value
    -inf (returned as a float sentinel; everything else is an exact Fraction).
    The edge sum uses strict inequality: pairs sitting exactly on
    alpha_u + alpha_v = 1 contribute nothing.
    """
    _check_mode(mode)
    t = validate_tau(tau)
    a = tuple(Fraction(x) for x in alpha)
    if len(a) != h.k:
        raise ValueError(f"alpha must have {h.k} entries, got {len(a)}")
    hi = Fraction(1) / (t - 1)
    for x in a:
        if not Fraction(0) <= x <= hi:
            raise ValueError(f"alpha value {x} outside [0, 1/(tau-1)] = [0, {hi}]")
    if mode == "ind":
        adj = h.adjacency
        for u in range(h.k):
            for v in range(u + 1, h.k):
                if v not in adj[u] and a[u] + a[v] > 1:
                    return NEG_INF
    total = (1 - t) * sum(a)
    for u, v in h.edges:
        s = a[u] + a[v]
        if s < 1:
            total += s - 1
    return total


@lru_cache(maxsize=None)
def _grid_axis(tau: Fraction, step: Fraction) -> tuple[Fraction, ...]:
    hi = Fraction(1) / (tau - 1)
    values = {Fraction(0), (tau - 2) / (tau - 1), Fraction(1, 2), hi}
    i = 0
    while i * step <= hi:
        values.add(i * step)
        i += 1
    return tuple(sorted(values))


def grid_oracle_max(h: MotifGraph, tau, step, mode: str = "sub"):
    """Brute-force maximum of continuous_objective over a grid.

    The grid per coordinate is every multiple of ``step`` inside
    [0, 1/(tau-1)] plus the four special values {0, (tau-2)/(tau-1), 1/2,
    1/(tau-1)}.  Returns (exact maximum value, tuple of all grid argmaxes as
    alpha tuples).  A float sweep prefilters the grid; every candidate within
    1e-9 of the float maximum is re-evaluated in exact rational arithmetic,
    so the result is exact.
    """
    _check_mode(mode)
    t = validate_tau(tau)
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    hi = Fraction(1) / (t - 1)
    if hi / step > 40:
        raise GridTooLargeError(f"step {step} yields more than 40 points per coordinate")
    if h.k > 5:
        raise GridTooLargeError(f"grid oracle supports k <= 5, got k={h.k}")

    axis = _grid_axis(t, step)
    axis_f = np.array([float(x) for x in axis])
    g = len(axis)
    k = h.k

    acc = np.zeros((g,) * k)
    vterm = (1.0 - float(t)) * axis_f
    for i in range(k):
        shape = [1] * k
        shape[i] = g
        acc += vterm.reshape(shape)
    pair = axis_f[:, None] + axis_f[None, :]
    edge_term = np.where(pair < 1.0, pair - 1.0, 0.0)
    edges = set(h.edges)
    for u, v in h.edges:
        shape = [1] * k
        shape[u] = shape[v] = g
        acc += edge_term.reshape(shape)
    if mode == "ind":
        viol = np.where(pair > 1.0 + 1e-12, NEG_INF, 0.0)
        for u in range(k):
            for v in range(u + 1, k):
                if (u, v) not in edges:
                    shape = [1] * k
                    shape[u] = shape[v] = g
                    acc += viol.reshape(shape)

    fmax = float(acc.max())
    candidates = np.argwhere(acc >= fmax - 1e-9)

    best: Fraction | None = None
    argmaxes: list[tuple[Fraction, ...]] = []
    for idx in candidates:
        alpha = tuple(axis[i] for i in idx)
        val = continuous_objective(h, alpha, t, mode)
        if val == NEG_INF:
            continue
        if best is None or val > best:
            best = val
            argmaxes = [alpha]
        elif val == best:
            argmaxes.append(alpha)
    assert best is not None
    return best, tuple(sorted(argmaxes))
