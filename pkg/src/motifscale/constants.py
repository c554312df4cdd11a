"""Limit constants for rescaled motif counts.

The count of a square-root-class motif, divided by n^{k(3-tau)/2}, converges
to an explicit k-dimensional integral: each vertex carries weight x^{-tau},
each motif edge a factor (1 - e^{-x_u x_v}), and induced counting multiplies
e^{-x_u x_v} over the non-edges.  This module evaluates that integral three
ways: importance-sampled Monte Carlo (any k, optional truncation to
[eps, 1/eps]^k), a deterministic tensor-product quadrature oracle (k <= 4),
and a semi-analytic finite-n predictor that plugs sampled degrees into the
conditional edge-probability formula.

All values follow the labeled-embedding convention: they are limits of
labeled windowed counts / n^{k(3-tau)/2}; divide by |Aut(H)| for unordered
copies.  The prefactor (tau-1)^k * zeta(tau-1)^{-k(tau-1)/2} is applied by
default so estimates compare directly to rescaled empirical counts.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .generate import DegreeSequence, derive_seed, mean_degree, window_bounds
from .motifs import MotifGraph, automorphism_count
from .optimize import optimize, parse_tau


class SqrtClassError(ValueError):
    """Motif is outside the square-root class, so the full integral diverges."""


# --- estimate container ---------------------------------------------------------


@dataclass(frozen=True)
class ConstantEstimate:
    motif_key: bytes
    mode: str
    tau: Fraction
    eps: Fraction | None
    value: float
    stderr: float
    samples: int
    includes_prefactor: bool
    workers: int = 1

    CSV_HEADER = "motif_key,mode,tau,eps,value,stderr,samples,includes_prefactor,workers"

    def to_csv_row(self) -> str:
        eps = "" if self.eps is None else str(self.eps)
        return (f"{self.motif_key.hex()},{self.mode},{self.tau},{eps},"
                f"{self.value!r},{self.stderr!r},{self.samples},"
                f"{str(self.includes_prefactor).lower()},{self.workers}")

    def to_json(self) -> str:
        return json.dumps({
            "motif_key": self.motif_key.hex(),
            "mode": self.mode,
            "tau": str(self.tau),
            "eps": None if self.eps is None else str(self.eps),
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "includes_prefactor": self.includes_prefactor,
            "workers": self.workers,
        })


def _prefactor(k: int, tau: Fraction) -> float:
    t = float(tau)
    return (t - 1.0) ** k * mean_degree(tau) ** (-k * (t - 1.0) / 2.0)


def _require_sqrt_class(h: MotifGraph, tau: Fraction, mode: str) -> None:
    if min(h.degrees) < 2:
        raise SqrtClassError(
            "motif has a degree-1 vertex; the untruncated integral diverges"
        )
    out = optimize(h, tau, mode=mode)
    if out.value != 0 or not out.unique:
        raise SqrtClassError(
            f"motif is not in the square-root class for mode={mode}, tau={tau}: "
            f"optimizer value B={out.value}, unique={out.unique}"
        )


# --- importance-sampled Monte Carlo ----------------------------------------------


def _piece_params(h: MotifGraph, tau_f: float, eps_f: float | None):
    """Per-coordinate two-piece power-law proposal on (lo,1] and (1,hi].

    Piece exponents: min(deg, 2) - tau below 1 (matches the integrand's
    boundary behavior x^{deg - tau}), -tau above 1 (matches the tail).
    Returns (p_low, p_high, z_low, z_high, lo, hi) arrays/scalars where
    p = exponent + 1 and z is the piece's unnormalized mass.
    """
    lo = 0.0 if eps_f is None else eps_f
    hi = math.inf if eps_f is None else 1.0 / eps_f
    p_low = np.array([min(dd, 2) - tau_f + 1.0 for dd in h.degrees])
    p_high = 1.0 - tau_f
    if eps_f is None:
        if np.any(p_low <= 0):
            raise SqrtClassError(
                "proposal mass diverges at 0 for a degree-1 vertex"
            )
        z_low = 1.0 / p_low
        z_high = -1.0 / p_high  # (0 - 1)/p, p < 0
    else:
        z_low = (1.0 - lo ** p_low) / p_low
        z_high = (hi ** p_high - 1.0) / p_high
    return p_low, p_high, z_low, z_high, lo, hi


def _sample_log_coords(rng, n: int, h: MotifGraph, tau_f: float, eps_f: float | None):
    """Draw log-coordinates from the proposal; returns (lx, log_weight_base).

    log_weight_base carries log(Z_i) plus the integrand/proposal exponent
    mismatch -min(deg,2)*ln x on the lower piece (0 on the upper piece).
    """
    k = h.k
    p_low, p_high, z_low, z_high, lo, hi = _piece_params(h, tau_f, eps_f)
    z_tot = z_low + z_high
    lx = np.empty((n, k))
    logw = np.full(n, float(np.log(z_tot).sum()))
    lo_p = None if eps_f is None else lo ** p_low
    for i in range(k):
        pick_low = rng.random(n) < (z_low[i] / z_tot[i])
        v = rng.random(n)
        col = np.empty(n)
        if eps_f is None:
            col[pick_low] = np.log(v[pick_low]) / p_low[i]
        else:
            base = lo_p[i]
            col[pick_low] = np.log(base + v[pick_low] * (1.0 - base)) / p_low[i]
        vh = v[~pick_low]
        if eps_f is None:
            col[~pick_low] = np.log1p(-vh) / p_high  # (1 - V)^{1/p}, p<0
        else:
            col[~pick_low] = np.log(1.0 + vh * (hi ** p_high - 1.0)) / p_high
        lx[:, i] = col
        logw += np.where(col < 0.0, -min(h.degrees[i], 2) * col, 0.0)
    return lx, logw


def _log_edge_factor(lt: np.ndarray) -> np.ndarray:
    """log(1 - exp(-e^{lt})), stable for very small and very large e^{lt}."""
    t = np.exp(lt)
    with np.errstate(divide="ignore"):
        out = np.log(-np.expm1(-t))
    return np.where(lt < -25.0, lt, out)


def _log_integrand_given(h: MotifGraph, mode: str, lx: np.ndarray) -> np.ndarray:
    logf = np.zeros(lx.shape[0])
    for u, v in h.edges:
        logf += _log_edge_factor(lx[:, u] + lx[:, v])
    if mode == "ind":
        adj = h.adjacency
        for u in range(h.k):
            for v in range(u + 1, h.k):
                if v not in adj[u]:
                    logf -= np.exp(lx[:, u] + lx[:, v])
    return logf


def estimate_A(
    h: MotifGraph,
    mode: str,
    tau,
    samples: int,
    seed: int,
    eps=None,
    workers: int = 1,
    includes_prefactor: bool = True,
) -> ConstantEstimate:
    """Monte Carlo estimate of the limit constant A(H), labeled convention.

    Importance sampling with a per-coordinate two-piece power-law proposal;
    the weights are bounded on the square-root class.  ``eps`` truncates the
    domain to [eps, 1/eps]^k (any connected motif is then allowed); without
    it the motif must be in the square-root class for the given mode.  The
    sample stream splits into ``workers`` deterministic substreams merged by
    moments, and common random numbers make ind/sub comparable at equal
    seeds.

    Parameters
    ----------
    h : MotifGraph
        Connected motif on 3..8 vertices.
    mode : str
        "sub" for subgraph counting, "ind" for induced.
    tau : Fraction | str | float
        Degree exponent in (2, 3).
    samples, seed, workers : int
        Total sample budget, base seed, and number of substreams.
    eps : optional rational in (0, 1)
        Truncation parameter; None integrates over (0, inf)^k.

    Returns
    -------
    ConstantEstimate
        Value, standard error, and provenance fields.
    """
    tau = parse_tau(tau)
    if mode not in ("sub", "ind"):
        raise ValueError(f"mode must be 'sub' or 'ind', got {mode!r}")
    if samples < 1:
        raise ValueError("sample budget must be positive")
    if workers < 1:
        raise ValueError("worker count must be positive")
    eps_frac = None
    if eps is not None:
        eps_frac = Fraction(eps)
        if not 0 < eps_frac < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps_frac}")
    if eps_frac is None:
        _require_sqrt_class(h, tau, mode)
    tau_f = float(tau)
    eps_f = None if eps_frac is None else float(eps_frac)

    total = 0.0
    total_sq = 0.0
    count = 0
    base = samples // workers
    extras = samples % workers
    for w in range(workers):
        chunk = base + (1 if w < extras else 0)
        if chunk == 0:
            continue
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 4, w)))
        lx, logw = _sample_log_coords(rng, chunk, h, tau_f, eps_f)
        vals = np.exp(logw + _log_integrand_given(h, mode, lx))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        count += chunk
    mean = total / count
    var = max(total_sq - count * mean * mean, 0.0) / max(count - 1, 1)
    pref = _prefactor(h.k, tau) if includes_prefactor else 1.0
    return ConstantEstimate(
        motif_key=h.canonical_key, mode=mode, tau=tau, eps=eps_frac,
        value=pref * mean, stderr=pref * math.sqrt(var / count),
        samples=count, includes_prefactor=includes_prefactor, workers=workers,
    )


# --- deterministic quadrature oracle ---------------------------------------------


def tensor_quadrature_A(
    h: MotifGraph,
    mode: str,
    tau,
    eps,
    nodes_per_axis: int = 48,
    include_prefactor: bool = True,
) -> float:
    """Gauss-Legendre tensor quadrature of the truncated constant (k <= 4).

    Integrates in log coordinates over [ln eps, -ln eps]^k with a product
    rule, chunking over the first axis to bound memory.  Serves as the
    deterministic oracle for estimate_A.
    """
    tau = parse_tau(tau)
    if mode not in ("sub", "ind"):
        raise ValueError(f"mode must be 'sub' or 'ind', got {mode!r}")
    if h.k > 4:
        raise ValueError(f"quadrature is limited to k <= 4, got k={h.k}")
    if not 1 <= nodes_per_axis <= 64:
        raise ValueError(f"nodes_per_axis must lie in [1, 64], got {nodes_per_axis}")
    eps_f = float(Fraction(eps))
    if not 0 < eps_f < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    tau_f = float(tau)
    k = h.k
    half = -math.log(eps_f)
    t_nodes, t_weights = np.polynomial.legendre.leggauss(nodes_per_axis)
    tn = half * t_nodes  # [ln eps, -ln eps] is symmetric about 0
    wn = half * t_weights
    xs = np.exp(tn)
    axis_w = wn * np.exp((1.0 - tau_f) * tn)  # x^{1-tau} dt from x^{-tau} dx

    pair = -np.expm1(-np.outer(xs, xs))  # edge factor table
    if mode == "ind":
        anti = np.exp(-np.outer(xs, xs))
    nonedges = [(u, v) for u in range(k) for v in range(u + 1, k)
                if v not in h.adjacency[u]]

    n = nodes_per_axis
    rest = k - 1

    def mesh_axis(v: int) -> np.ndarray:
        shape = [1] * rest
        shape[v - 1] = n
        return np.arange(n).reshape(shape)

    w_rest = np.ones((1,) * rest)
    for v in range(1, k):
        w_rest = w_rest * axis_w.reshape([n if j == v - 1 else 1 for j in range(rest)])

    total = 0.0
    for i in range(n):
        block = np.ones((1,) * rest)
        for u, v in h.edges:
            if u == 0:
                block = block * pair[i][mesh_axis(v)]
            else:
                block = block * pair[mesh_axis(u), mesh_axis(v)]
        if mode == "ind":
            for u, v in nonedges:
                if u == 0:
                    block = block * anti[i][mesh_axis(v)]
                else:
                    block = block * anti[mesh_axis(u), mesh_axis(v)]
        total += axis_w[i] * float((block * w_rest).sum())
    if include_prefactor:
        total *= _prefactor(k, tau)
    return total


# --- finite-n conditional predictor ----------------------------------------------


@dataclass(frozen=True)
class ConditionalCountEstimate:
    value: float
    stderr: float
    evaluated: int
    exact: bool
    members: int
    window: tuple[float, float]


_EXACT_TUPLE_LIMIT = 2_000_000


def _falling(m: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= m - i
    return out


def conditional_expected_count(
    d: DegreeSequence,
    h: MotifGraph,
    mode: str,
    eps,
    tuple_samples: int = 200_000,
    seed: int = 0,
) -> ConditionalCountEstimate:
    """Expected windowed count of h given the degrees, by the edge-probability formula.

    For ordered tuples of distinct window members (degrees in the sqrt-n
    window for ``eps``), averages prod over edges (1 - e^{-D_u D_v / L_n})
    [times e^{-D_u D_v / L_n} over non-edges in mode ind] and scales by
    (#ordered tuples)/|Aut(h)|.  Enumerates exactly when the tuple space is
    small, otherwise samples uniformly.
    """
    if mode not in ("sub", "ind"):
        raise ValueError(f"mode must be 'sub' or 'ind', got {mode!r}")
    if d.tau is None:
        raise ValueError("degree sequence does not record tau; cannot place the window")
    lo, hi = window_bounds(d.n, d.tau, Fraction(1, 2), eps)
    w = d.degrees[(d.degrees >= lo) & (d.degrees <= hi)].astype(float)
    m = len(w)
    k = h.k
    if m < k:
        raise ValueError(f"window holds {m} vertices; need at least {k}")
    ln = float(d.L_n)
    pair = -np.expm1(-np.outer(w, w) / ln)
    if mode == "ind":
        anti = np.exp(-np.outer(w, w) / ln)
    nonedges = [(u, v) for u in range(k) for v in range(u + 1, k)
                if v not in h.adjacency[u]]
    aut = automorphism_count(h)
    total_ordered = _falling(m, k)

    if total_ordered <= min(tuple_samples, _EXACT_TUPLE_LIMIT):
        idx = np.stack(np.meshgrid(*[np.arange(m)] * k, indexing="ij")).reshape(k, -1)
        distinct = np.ones(idx.shape[1], dtype=bool)
        for a, b in itertools.combinations(range(k), 2):
            distinct &= idx[a] != idx[b]
        idx = idx[:, distinct]
        prod = np.ones(idx.shape[1])
        for u, v in h.edges:
            prod *= pair[idx[u], idx[v]]
        if mode == "ind":
            for u, v in nonedges:
                prod *= anti[idx[u], idx[v]]
        return ConditionalCountEstimate(
            value=float(prod.sum()) / aut, stderr=0.0,
            evaluated=idx.shape[1], exact=True, members=m, window=(lo, hi),
        )

    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 5)))
    idx = rng.integers(0, m, size=(tuple_samples, k))
    bad = np.zeros(tuple_samples, dtype=bool)
    for a, b in itertools.combinations(range(k), 2):
        bad |= idx[:, a] == idx[:, b]
    while bad.any():
        idx[bad] = rng.integers(0, m, size=(int(bad.sum()), k))
        bad = np.zeros(tuple_samples, dtype=bool)
        for a, b in itertools.combinations(range(k), 2):
            bad |= idx[:, a] == idx[:, b]
    prod = np.ones(tuple_samples)
    for u, v in h.edges:
        prod *= pair[idx[:, u], idx[:, v]]
    if mode == "ind":
        for u, v in nonedges:
            prod *= anti[idx[:, u], idx[:, v]]
    mean = float(prod.mean())
    sd = float(prod.std(ddof=1))
    scale = total_ordered / aut
    return ConditionalCountEstimate(
        value=scale * mean, stderr=scale * sd / math.sqrt(tuple_samples),
        evaluated=tuple_samples, exact=False, members=m, window=(lo, hi),
    )
