"""Connected small graphs: parsing, canonical forms, automorphisms, enumeration.

Motifs are connected simple graphs on 3..8 labelled vertices.  Canonical
identity is the lexicographically smallest edge bitmask over all vertex
relabelings; the serialized form of that mask is the dictionary key used
throughout the package.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

MIN_VERTICES = 3
MAX_VERTICES = 8


class MotifError(ValueError):
    """A motif specification failed to parse or validate."""


# --- edge-slot bookkeeping ---------------------------------------------------
#
# Pairs (i, j) with i < j are numbered lexicographically; bit s of a mask says
# whether edge number s is present.


@lru_cache(maxsize=None)
def _pair_slots(k: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(k) for j in range(i + 1, k))


@lru_cache(maxsize=None)
def _slot_index(k: int) -> dict[tuple[int, int], int]:
    return {p: s for s, p in enumerate(_pair_slots(k))}


@lru_cache(maxsize=None)
def _perm_table(k: int) -> tuple[tuple[tuple[int, ...], ...], np.ndarray]:
    """All k! permutations and the induced maps on edge slots.

    Row r of the table sends slot s to the slot of the permuted pair under
    permutation r, so remapping a mask is a gather over its set bits.
    """
    slots = _pair_slots(k)
    index = _slot_index(k)
    perms = tuple(itertools.permutations(range(k)))
    table = np.empty((len(perms), len(slots)), dtype=np.int8)
    for r, p in enumerate(perms):
        for s, (i, j) in enumerate(slots):
            a, b = p[i], p[j]
            table[r, s] = index[(a, b) if a < b else (b, a)]
    return perms, table


def _remap_all(k: int, mask: int) -> np.ndarray:
    """Masks of the graph under every relabeling (one entry per permutation)."""
    _, table = _perm_table(k)
    bits = [s for s in range(table.shape[1]) if (mask >> s) & 1]
    if not bits:
        return np.zeros(table.shape[0], dtype=np.int64)
    targets = table[:, bits].astype(np.int64)
    return (np.int64(1) << targets).sum(axis=1)


def _mask_connected(k: int, mask: int) -> bool:
    nbr = [0] * k
    for s, (i, j) in enumerate(_pair_slots(k)):
        if (mask >> s) & 1:
            nbr[i] |= 1 << j
            nbr[j] |= 1 << i
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        v = frontier
        while v:
            low = v & -v
            nxt |= nbr[low.bit_length() - 1]
            v ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << k) - 1


# --- the graph type ----------------------------------------------------------


@dataclass(frozen=True)
class MotifGraph:
    """A connected simple graph on vertices 0..k-1 with labels preserved."""

    k: int
    edges: tuple[tuple[int, int], ...]

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.k)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.adjacency)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def v1(self) -> frozenset[int]:
        """Vertices of degree exactly one."""
        return frozenset(i for i, d in enumerate(self.degrees) if d == 1)

    @property
    def k1(self) -> int:
        return len(self.v1)

    @property
    def k2plus(self) -> int:
        return self.k - self.k1

    @cached_property
    def mask(self) -> int:
        index = _slot_index(self.k)
        m = 0
        for e in self.edges:
            m |= 1 << index[e]
        return m

    @cached_property
    def canonical_mask(self) -> int:
        return int(_remap_all(self.k, self.mask).min())

    @cached_property
    def canonical_key(self) -> bytes:
        """Stable bytes identifying the isomorphism class (dict key)."""
        return bytes([self.k]) + self.canonical_mask.to_bytes(4, "big")

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    @property
    def is_complete(self) -> bool:
        return self.m == self.k * (self.k - 1) // 2

    @property
    def is_star(self) -> bool:
        return self.m == self.k - 1 and max(self.degrees) == self.k - 1

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        es = ",".join(f"{u}-{v}" for u, v in self.edges)
        return f"MotifGraph(k={self.k}; {es})"


def _from_mask(k: int, mask: int) -> MotifGraph:
    edges = tuple(p for s, p in enumerate(_pair_slots(k)) if (mask >> s) & 1)
    return MotifGraph(k, edges)


def motif_from_edges(k: int, edges) -> MotifGraph:
    """Validate and build a motif from an iterable of (u, v) pairs."""
    if not MIN_VERTICES <= k <= MAX_VERTICES:
        raise MotifError(f"vertex count must be in [{MIN_VERTICES}, {MAX_VERTICES}], got {k}")
    norm: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise MotifError(f"self-loop at vertex {u}")
        if not (0 <= u < k and 0 <= v < k):
            raise MotifError(f"edge {u}-{v} out of range for k={k}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise MotifError(f"duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        norm.append(key)
    norm.sort()
    g = MotifGraph(k, tuple(norm))
    if not _mask_connected(k, g.mask):
        raise MotifError("graph is not connected")
    return g


# --- parsing -----------------------------------------------------------------


def parse_motif(text: str) -> MotifGraph:
    """Parse a motif description like ``"k=4; edges=0-1,0-2,0-3"``.

    Whitespace and newlines are insignificant; both fields are required.
    Raises MotifError with a human-readable message on any defect.
    """
    fields: dict[str, str] = {}
    cleaned = "".join(text.split())
    for part in cleaned.split(";"):
        if not part:
            continue
        if "=" not in part:
            raise MotifError(f"expected key=value, got {part!r}")
        key, _, value = part.partition("=")
        key = key.lower()
        if key in fields:
            raise MotifError(f"duplicate field {key!r}")
        fields[key] = value
    unknown = set(fields) - {"k", "edges"}
    if unknown:
        raise MotifError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "k" not in fields or "edges" not in fields:
        raise MotifError("motif needs both k=<int> and edges=a-b,...")
    try:
        k = int(fields["k"])
    except ValueError:
        raise MotifError(f"k must be an integer, got {fields['k']!r}") from None
    edges = []
    for token in fields["edges"].split(","):
        if not token:
            continue
        a, sep, b = token.partition("-")
        if not sep or not a or not b:
            raise MotifError(f"bad edge token {token!r}, expected u-v")
        try:
            edges.append((int(a), int(b)))
        except ValueError:
            raise MotifError(f"bad edge token {token!r}, endpoints must be integers") from None
    if not edges:
        raise MotifError("edge list is empty")
    return motif_from_edges(k, edges)


#: Named motifs accepted by the CLI and by plan files.
BUILTIN_MOTIFS: dict[str, str] = {
    "triangle": "k=3;edges=0-1,1-2,0-2",
    "path3": "k=3;edges=0-1,1-2",
    "claw": "k=4;edges=0-1,0-2,0-3",
    "p4": "k=4;edges=0-1,1-2,2-3",
    "c4": "k=4;edges=0-1,1-2,2-3,0-3",
    "paw": "k=4;edges=0-1,1-2,0-2,0-3",
    "diamond": "k=4;edges=0-1,0-2,0-3,1-2,1-3",
    "k4": "k=4;edges=0-1,0-2,0-3,1-2,1-3,2-3",
    "star4": "k=5;edges=0-1,0-2,0-3,0-4",
    "p5": "k=5;edges=0-1,1-2,2-3,3-4",
    "fork": "k=5;edges=0-1,1-2,1-3,3-4",
    "c5": "k=5;edges=0-1,1-2,2-3,3-4,0-4",
    "bull": "k=5;edges=0-1,0-2,1-2,0-3,1-4",
    "cricket": "k=5;edges=0-1,0-2,1-2,2-3,2-4",
    "tadpole": "k=5;edges=0-1,0-2,1-2,2-3,3-4",
    "banner": "k=5;edges=0-1,1-2,2-3,0-3,0-4",
    "bowtie": "k=5;edges=0-1,0-2,1-2,2-3,2-4,3-4",
    "kite": "k=5;edges=0-1,0-2,0-3,1-2,1-3,0-4",
    "dart": "k=5;edges=0-1,0-2,0-3,1-2,1-3,2-4",
    "house": "k=5;edges=0-1,1-2,2-3,0-3,2-4,3-4",
    "k23": "k=5;edges=0-2,0-3,0-4,1-2,1-3,1-4",
    "book": "k=5;edges=0-2,0-3,0-4,1-2,1-3,1-4,0-1",
    "k5": "k=5;edges=0-1,0-2,0-3,0-4,1-2,1-3,1-4,2-3,2-4,3-4",
}


def motif_by_name(name_or_spec: str) -> MotifGraph:
    """Resolve a built-in name, an @file reference, or an inline spec."""
    text = name_or_spec.strip()
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            specs = [s for line in fh if (s := line.partition("#")[0].strip())]
        if not specs:
            raise MotifError(f"no motif spec found in {text[1:]!r}")
        return parse_motif(specs[0])
    if "=" in text:
        return parse_motif(text)
    try:
        return parse_motif(BUILTIN_MOTIFS[text.lower()])
    except KeyError:
        raise MotifError(
            f"unknown motif {text!r}; use a built-in name, an inline k=..;edges=.. spec, or @file"
        ) from None


# --- canonical forms and automorphisms ---------------------------------------


def canonical_form(g: MotifGraph) -> MotifGraph:
    """The canonical representative of g's isomorphism class.

    Two graphs are isomorphic iff their canonical forms (equivalently their
    canonical_key bytes) are equal.
    """
    return _from_mask(g.k, g.canonical_mask)


def automorphism_count(g: MotifGraph) -> int:
    mask = g.mask
    return int((_remap_all(g.k, mask) == mask).sum())


def automorphism_permutations(g: MotifGraph) -> tuple[tuple[int, ...], ...]:
    """All vertex permutations that fix g's edge set."""
    perms, _ = _perm_table(g.k)
    mask = g.mask
    hits = np.nonzero(_remap_all(g.k, mask) == mask)[0]
    return tuple(perms[i] for i in hits)


# --- enumeration -------------------------------------------------------------


@lru_cache(maxsize=None)
def enumerate_connected_graphs(k: int) -> tuple[MotifGraph, ...]:
    """All isomorphism classes of connected graphs on k vertices (3 <= k <= 6).

    Deterministic: classes are found by walking edge bitmasks in increasing
    order and crossing off each class's full relabeling orbit, then sorted by
    (edge count, canonical key).
    """
    if not 3 <= k <= 6:
        raise MotifError(f"enumeration supports k in [3, 6], got {k}")
    nslots = k * (k - 1) // 2
    seen = bytearray(1 << nslots)
    reps: list[MotifGraph] = []
    for mask in range(1 << nslots):
        if seen[mask]:
            continue
        if not _mask_connected(k, mask):
            continue
        orbit = _remap_all(k, mask)
        canon = int(orbit.min())
        for mm in orbit.tolist():
            seen[mm] = 1
        reps.append(_from_mask(k, canon))
    reps.sort(key=lambda g: (g.m, g.canonical_key))
    return tuple(reps)


@lru_cache(maxsize=None)
def class_index(k: int) -> dict[bytes, int]:
    """canonical_key -> position in enumerate_connected_graphs(k)."""
    return {g.canonical_key: i for i, g in enumerate(enumerate_connected_graphs(k))}


# --- embedding counts between small graphs -----------------------------------


def _injections(h: MotifGraph, g: MotifGraph, spanning: bool) -> int:
    count = 0
    gadj = g.adjacency
    vertex_pools = (
        [tuple(range(g.k))]
        if spanning
        else [c for c in itertools.combinations(range(g.k), h.k)]
    )
    for pool in vertex_pools:
        for p in itertools.permutations(pool):
            ok = True
            for u, v in h.edges:
                if p[v] not in gadj[p[u]]:
                    ok = False
                    break
            if ok:
                count += 1
    return count


def count_copies_in(h: MotifGraph, g: MotifGraph) -> int:
    """Number of (unordered) subgraph copies of h inside the small graph g."""
    if h.k > g.k:
        return 0
    return _injections(h, g, spanning=False) // automorphism_count(h)


def spanning_embeddings(h: MotifGraph, g: MotifGraph) -> int:
    """Bijective maps V(h) -> V(g) sending edges of h onto edges of g."""
    if h.k != g.k:
        return 0
    return _injections(h, g, spanning=True)
