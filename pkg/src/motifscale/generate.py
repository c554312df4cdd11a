"""Heavy-tailed degree sequences and the random graphs built from them.

Degrees are i.i.d. D = floor(U^(-1/(tau-1))), which has the exact tail
P(D >= k) = k^(-(tau-1)); consequently the density constant is c = tau-1 and
the mean is mu = zeta(tau-1).  Graphs come from uniform half-edge pairing with
erasure (self-loops dropped, parallel edges merged) or from a rank-1 model
with independent edge probabilities 1 - exp(-D_i D_j / (mu n)).

All randomness flows through numpy's PCG64; seeds for experiment cells are
derived with SeedSequence so replications are independent and reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .optimize import validate_tau

# --- zeta and seeds ------------------------------------------------------------

_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30)


def zeta(s: float, n_terms: int = 50) -> float:
    """Riemann zeta for s > 1 by Euler-Maclaurin summation.

    Direct truncation converges far too slowly for s in (1, 2); fifty head
    terms plus the integral, half-term and four Bernoulli corrections give
    absolute error below 1e-12 on the whole range used here.
    """
    if s <= 1.0:
        raise ValueError(f"zeta(s) diverges for s <= 1, got s={s}")
    big_n = n_terms
    head = sum(k ** -s for k in range(1, big_n))
    total = head + big_n ** (1 - s) / (s - 1) + 0.5 * big_n ** -s
    prod = s
    for j, b in enumerate(_BERNOULLI, start=1):
        total += b / math.factorial(2 * j) * prod * big_n ** (-(s + 2 * j - 1))
        prod *= (s + 2 * j - 1) * (s + 2 * j)
    return total


@lru_cache(maxsize=None)
def mean_degree(tau) -> float:
    """mu = E[D] = zeta(tau - 1) for the floor-inverse sampler."""
    t = validate_tau(tau)
    return zeta(float(t) - 1.0)


def derive_seed(base_seed: int, *path: int) -> int:
    """Deterministic 64-bit seed for an experiment cell.

    Uses SeedSequence([base_seed, *path]) rather than XOR so that distinct
    (n index, replication, stream) paths cannot collide.
    """
    ss = np.random.SeedSequence([int(base_seed), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# --- degree sequences ----------------------------------------------------------


@dataclass(frozen=True)
class DegreeSequence:
    n: int
    degrees: np.ndarray  # int64, each >= 1
    L_n: int
    tau: Fraction | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.L_n % 2 != 0:
            raise ValueError("total degree must be even")


def sample_degrees(n: int, tau, seed: int) -> DegreeSequence:
    """n i.i.d. degrees D = floor(U^(-1/(tau-1))) with a parity fix.

    P(D >= k) = k^(-(tau-1)) exactly.  If the total is odd the last vertex
    gets one extra half-edge.  Deterministic per (n, tau, seed).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    t = validate_tau(tau)
    rng = _rng(seed)
    u = 1.0 - rng.random(n)  # uniform on (0, 1], avoids U = 0
    deg = np.floor(u ** (-1.0 / (float(t) - 1.0))).astype(np.int64)
    total = int(deg.sum())
    if total % 2 == 1:
        deg[-1] += 1
        total += 1
    deg.setflags(write=False)
    return DegreeSequence(n=n, degrees=deg, L_n=total, tau=t, seed=int(seed))


def degrees_from_values(values, tau=None) -> DegreeSequence:
    """Wrap an explicit degree list (e.g. read from a file) as a DegreeSequence."""
    deg = np.asarray(values, dtype=np.int64)
    if deg.ndim != 1 or len(deg) < 2:
        raise ValueError("need a flat list of at least two degrees")
    if (deg < 1).any():
        raise ValueError("degrees must all be >= 1")
    deg = deg.copy()
    deg.setflags(write=False)
    return DegreeSequence(n=len(deg), degrees=deg, L_n=int(deg.sum()),
                          tau=validate_tau(tau) if tau is not None else None)


# --- simple graphs -------------------------------------------------------------


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]  # sorted neighbor tuples
    simple_edge_count: int
    erased_self_loops: int = 0
    erased_multi_edges: int = 0
    source: str = "ecm"
    meta: dict = field(default_factory=dict, compare=False)

    @cached_property
    def adjacency_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nb) for nb in self.adjacency)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(nb) for nb in self.adjacency], dtype=np.int64)
        d.setflags(write=False)
        return d

    def edges(self):
        """Iterate simple edges as (u, v) with u < v."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if v > u:
                    yield u, v

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency_sets[u]


def _finish_graph(n, adj_sets, loops, multi, source, meta) -> SimpleGraph:
    adjacency = tuple(tuple(sorted(s)) for s in adj_sets)
    simple = sum(len(t) for t in adjacency) // 2
    return SimpleGraph(
        n=n,
        adjacency=adjacency,
        simple_edge_count=simple,
        erased_self_loops=loops,
        erased_multi_edges=multi,
        source=source,
        meta=dict(meta or {}),
    )


def simple_graph_from_edges(n: int, edges, source: str = "file", meta=None) -> SimpleGraph:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at {u} not allowed in a simple graph")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge {u}-{v} out of range for n={n}")
        adj[u].add(v)
        adj[v].add(u)
    return _finish_graph(n, adj, 0, 0, source, meta)


def pair_half_edges(d: DegreeSequence, seed: int) -> SimpleGraph:
    """Uniform perfect matching of half-edges, erased to a simple graph.

    The half-edge array is shuffled in place (Fisher-Yates via the seeded
    generator) and paired sequentially, which is a uniform matching.
    Self-loops and repeated pairs are counted and dropped.
    """
    rng = _rng(seed)
    half = np.repeat(np.arange(d.n, dtype=np.int64), d.degrees)
    rng.shuffle(half)
    u = half[0::2]
    v = half[1::2]
    keep = u != v
    loops = int(u.size - int(keep.sum()))
    lo = np.minimum(u[keep], v[keep])
    hi = np.maximum(u[keep], v[keep])
    # merge duplicates on a scalar key: erasure is order-independent
    key = np.unique(lo * d.n + hi)
    multi = int(lo.size - key.size)
    p_lo, p_hi = np.divmod(key, d.n)
    src = np.concatenate([p_lo, p_hi])
    dst = np.concatenate([p_hi, p_lo])
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=d.n)
    splits = np.split(dst[order], np.cumsum(counts)[:-1])
    adjacency = tuple(tuple(row.tolist()) for row in splits)
    g = SimpleGraph(
        n=d.n,
        adjacency=adjacency,
        simple_edge_count=int(key.size),
        erased_self_loops=loops,
        erased_multi_edges=multi,
        source="ecm",
        meta={"n": d.n, "tau": d.tau, "seed": d.seed, "pair_seed": int(seed)},
    )
    # every pairing is accounted for: loop, merged duplicate, or kept edge
    assert 2 * (loops + multi + g.simple_edge_count) == d.L_n
    return g


def generate_rank1(d: DegreeSequence, seed: int) -> SimpleGraph:
    """Rank-1 random graph: pair {i,j} present w.p. 1 - exp(-D_i D_j/(mu n)).

    Implemented by Poissonization: the number of weighted pair draws is
    Poisson with the total rate, endpoints are drawn proportionally to the
    weights (rejecting i = j), and duplicates merge.  The per-pair rate works
    out to exactly D_i D_j/(mu n), independent across pairs, so no O(n^2)
    pair sweep is needed.
    """
    if d.tau is None:
        raise ValueError("rank-1 generation needs tau on the degree sequence")
    rng = _rng(seed)
    w = d.degrees.astype(np.float64)
    total_w = w.sum()
    mu = mean_degree(d.tau)
    lam = (total_w * total_w - (w * w).sum()) / (2.0 * mu * d.n)
    m = int(rng.poisson(lam))
    p = w / total_w
    i = rng.choice(d.n, size=m, p=p)
    j = rng.choice(d.n, size=m, p=p)
    bad = i == j
    while bad.any():
        nb = int(bad.sum())
        i[bad] = rng.choice(d.n, size=nb, p=p)
        j[bad] = rng.choice(d.n, size=nb, p=p)
        bad = i == j
    adj: list[set[int]] = [set() for _ in range(d.n)]
    for a, b in zip(i.tolist(), j.tolist()):
        adj[a].add(b)
        adj[b].add(a)
    return _finish_graph(d.n, adj, 0, 0, "rank1",
                         {"n": d.n, "tau": d.tau, "seed": d.seed, "pair_seed": int(seed)})


# --- concentration and windows --------------------------------------------------


def check_Jn(d: DegreeSequence) -> bool:
    """Whether the total degree sits within n^(1/(tau-1)) of its mean mu*n."""
    if d.tau is None:
        raise ValueError("J_n check needs tau on the degree sequence")
    mu = mean_degree(d.tau)
    return abs(d.L_n - mu * d.n) <= d.n ** (1.0 / (float(d.tau) - 1.0))


def window_bounds(n: int, tau, alpha, eps) -> tuple[float, float]:
    """Degree interval [eps*(mu n)^alpha, (1/eps)*(mu n)^alpha]."""
    t = validate_tau(tau)
    a = Fraction(alpha)
    e = Fraction(eps)
    if not 0 < e < 1:
        raise ValueError(f"eps must be in (0,1), got {e}")
    if not Fraction(0) <= a <= Fraction(1) / (t - 1):
        raise ValueError(f"alpha must be in [0, 1/(tau-1)], got {a}")
    scale = (mean_degree(t) * n) ** float(a)
    return float(e) * scale, scale / float(e)


def degree_window_members(g: SimpleGraph | None, d: DegreeSequence, alpha, eps) -> np.ndarray:
    """Vertices whose ORIGINAL degree D_i falls in the window for exponent alpha.

    Windows are defined on the sampled (pre-erasure) degrees; g is accepted
    for signature symmetry with the census but does not affect membership.
    """
    if d.tau is None:
        raise ValueError("degree windows need tau on the degree sequence")
    lo, hi = window_bounds(d.n, d.tau, alpha, eps)
    deg = d.degrees
    return np.nonzero((deg >= lo) & (deg <= hi))[0]


# --- empirical edge-probability table -------------------------------------------


@dataclass(frozen=True)
class EdgeProbabilityBin:
    lo: float
    hi: float
    n_pairs: int
    n_obs: int
    observed: float
    predicted: float
    stderr: float


def default_pair_sample(d: DegreeSequence, *, top: int = 300, random_pairs: int = 20000,
                        seed: int = 0) -> list[tuple[int, int]]:
    """Deterministic pair population: all pairs among the `top` highest-degree
    vertices plus `random_pairs` seeded uniform pairs."""
    order = np.argsort(-d.degrees, kind="stable")
    top_idx = order[: min(top, d.n)]
    pairs: set[tuple[int, int]] = set()
    ti = top_idx.tolist()
    for a in range(len(ti)):
        for b in range(a + 1, len(ti)):
            x, y = ti[a], ti[b]
            pairs.add((x, y) if x < y else (y, x))
    rng = _rng(seed)
    while len(pairs) < random_pairs:
        need = random_pairs - len(pairs) + 16
        us = rng.integers(0, d.n, size=need)
        vs = rng.integers(0, d.n, size=need)
        for x, y in zip(us.tolist(), vs.tolist()):
            if x != y:
                pairs.add((x, y) if x < y else (y, x))
    return sorted(pairs)


def empirical_edge_probability(d: DegreeSequence, graphs, bins, pairs=None) -> list[EdgeProbabilityBin]:
    """Binned edge frequencies vs the prediction 1 - exp(-D_i D_j / L_n).

    `graphs` is an ensemble generated from the same degree sequence; `bins`
    is an increasing sequence of edges for x = D_i D_j / L_n.  Pairs outside
    the binned range are ignored; empty bins are omitted from the output.
    Standard errors are binomial under the predicted law.
    """
    if pairs is None:
        pairs = default_pair_sample(d)
    edges = [float(b) for b in bins]
    if sorted(edges) != edges or len(edges) < 2:
        raise ValueError("bins must be an increasing sequence of at least two edges")
    deg = d.degrees
    nbins = len(edges) - 1
    hits = [0] * nbins
    nobs = [0] * nbins
    npairs = [0] * nbins
    sum_p = [0.0] * nbins
    sum_var = [0.0] * nbins
    ngraphs = len(graphs)
    adj = [g.adjacency_sets for g in graphs]
    for u, v in pairs:
        x = float(deg[u]) * float(deg[v]) / d.L_n
        if not edges[0] <= x < edges[-1]:
            continue
        b = 0
        while edges[b + 1] <= x:
            b += 1
        p = -math.expm1(-x)
        npairs[b] += 1
        nobs[b] += ngraphs
        sum_p[b] += ngraphs * p
        sum_var[b] += ngraphs * p * (1.0 - p)
        for a in adj:
            if v in a[u]:
                hits[b] += 1
    out = []
    for b in range(nbins):
        if nobs[b] == 0:
            continue
        out.append(EdgeProbabilityBin(
            lo=edges[b], hi=edges[b + 1], n_pairs=npairs[b], n_obs=nobs[b],
            observed=hits[b] / nobs[b], predicted=sum_p[b] / nobs[b],
            stderr=math.sqrt(sum_var[b]) / nobs[b],
        ))
    return out


# --- file formats ----------------------------------------------------------------


def write_edge_list(g: SimpleGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n {g.n}\n")
        tau = g.meta.get("tau")
        if tau is not None:
            fh.write(f"# tau {Fraction(tau)}\n")
        for key in ("seed", "pair_seed"):
            if g.meta.get(key) is not None:
                fh.write(f"# {key} {g.meta[key]}\n")
        fh.write(f"# source {g.source}\n")
        fh.write(f"# erased_self_loops {g.erased_self_loops}\n")
        fh.write(f"# erased_multi_edges {g.erased_multi_edges}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> SimpleGraph:
    meta: dict = {}
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) >= 2:
                    meta[parts[0]] = parts[1]
                continue
            u, v = line.split()
            edges.append((int(u), int(v)))
    if "n" not in meta:
        raise ValueError(f"{path}: missing '# n <count>' header")
    n = int(meta["n"])
    g = simple_graph_from_edges(n, edges, source=meta.get("source", "file"))
    extra = {
        "n": n,
        "tau": Fraction(meta["tau"]) if "tau" in meta else None,
        "seed": int(meta["seed"]) if "seed" in meta else None,
        "pair_seed": int(meta["pair_seed"]) if "pair_seed" in meta else None,
    }
    return SimpleGraph(
        n=g.n, adjacency=g.adjacency, simple_edge_count=g.simple_edge_count,
        erased_self_loops=int(meta.get("erased_self_loops", 0)),
        erased_multi_edges=int(meta.get("erased_multi_edges", 0)),
        source=meta.get("source", "file"), meta=extra,
    )


def write_degrees(d: DegreeSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x in d.degrees.tolist():
            fh.write(f"{x}\n")


def read_degrees(path, tau=None) -> DegreeSequence:
    with open(path, "r", encoding="utf-8") as fh:
        values = [int(line) for line in fh if line.strip()]
    return degrees_from_values(values, tau=tau)
