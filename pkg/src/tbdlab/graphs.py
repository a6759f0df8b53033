"""Small forbidden patterns, their 2-densities, and copy counting in a host.

Host graphs keep one ``uint64`` bitset row per vertex. Embeddings of a
pattern are found by a compiled backtracking search: pattern vertices are
placed in a precomputed order (the two ends of a pattern edge first when a
host edge is prescribed), and the candidates for the next vertex are the
AND of the adjacency rows of its already placed neighbours, minus the
vertices already used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit

__all__ = [
    "MAX_PATTERN_VERTICES",
    "PatternGraph",
    "PatternStats",
    "HostGraph",
    "PatternPlans",
    "NAMED_PATTERNS",
    "named_pattern",
    "load_pattern",
    "parse_pattern",
    "format_pattern",
    "pattern_stats",
    "completes_copy",
    "count_copies_with_edge",
    "count_copies_total",
    "count_embeddings",
    "max_codegree",
    "max_pair_copies",
    "every_pair_closes",
]

MAX_PATTERN_VERTICES = 8


def _norm(u: int, v: int) -> tuple:
    u, v = int(u), int(v)
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class PatternGraph:
    """An unlabeled small graph given on vertices ``0..v-1``.

    Isolated vertices are allowed; ``aut_count`` is the number of vertex
    permutations preserving the edge set.
    """

    v: int
    edges: frozenset
    name: str = ""
    max_vertices: int = field(default=MAX_PATTERN_VERTICES, compare=False, repr=False)

    def __post_init__(self):
        if self.v < 1 or self.v > self.max_vertices:
            raise ValueError(f"pattern must have 1..{self.max_vertices} vertices, got {self.v}")
        edges = set()
        for u, w in self.edges:
            e = _norm(u, w)
            if not (0 <= e[0] and e[1] < self.v):
                raise ValueError(f"edge {e} out of range for {self.v} vertices")
            if e in edges:
                raise ValueError(f"duplicate edge {e}")
            edges.add(e)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def from_edges(cls, v: int, edges: Iterable, name: str = "") -> "PatternGraph":
        return cls(v=v, edges=frozenset(tuple(e) for e in edges), name=name)

    @property
    def e(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple:
        deg = [0] * self.v
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return tuple(deg)

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.v, self.v), dtype=bool)
        for a, b in self.edges:
            A[a, b] = A[b, a] = True
        return A

    @cached_property
    def aut_count(self) -> int:
        deg = self.degrees
        count = 0
        for perm in itertools.permutations(range(self.v)):
            if any(deg[perm[i]] != deg[i] for i in range(self.v)):
                continue
            if all(_norm(perm[a], perm[b]) in self.edges for a, b in self.edges):
                count += 1
        return count

    @cached_property
    def plans(self) -> "PatternPlans":
        return PatternPlans.through_edge([self], all_orientations=True)

    @cached_property
    def existence_plans(self) -> "PatternPlans":
        return PatternPlans.through_edge([self], all_orientations=False)

    def __str__(self):
        return self.name or f"H(v={self.v}, e={self.e})"


def _placement_order(H: PatternGraph, start: Sequence[int]) -> list:
    order = list(start)
    rest = set(range(H.v)) - set(order)
    A = H.adjacency
    while rest:
        nxt = max(sorted(rest), key=lambda x: (sum(A[x, y] for y in order), H.degrees[x]))
        order.append(nxt)
        rest.remove(nxt)
    return order


def _oriented_edge_orbits(H: PatternGraph) -> list:
    """One representative per automorphism orbit of oriented edges."""
    deg = H.degrees
    auts = [
        perm
        for perm in itertools.permutations(range(H.v))
        if all(deg[perm[i]] == deg[i] for i in range(H.v))
        and all(_norm(perm[a], perm[b]) in H.edges for a, b in H.edges)
    ]
    seen = set()
    reps = []
    for a, b in sorted(H.edges):
        for arc in ((a, b), (b, a)):
            if arc in seen:
                continue
            reps.append(arc)
            for perm in auts:
                seen.add((perm[arc[0]], perm[arc[1]]))
    return reps


@dataclass(frozen=True)
class PatternPlans:
    """Placement plans padded into arrays for the compiled search.

    ``nbr[p, i, j]`` is 1 when plan ``p`` places adjacent pattern vertices at
    positions ``i > j``; ``pdeg[p, i]`` is the pattern degree at position ``i``.
    """

    nbr: np.ndarray
    pdeg: np.ndarray
    vlen: np.ndarray
    owner: np.ndarray
    orders: tuple = ()

    @classmethod
    def _build(cls, orders_by_pattern):
        rows = [(pi, H, order) for pi, (H, orders) in enumerate(orders_by_pattern) for order in orders]
        vmax = max(H.v for _, H, _ in rows)
        P = len(rows)
        nbr = np.zeros((P, vmax, vmax), dtype=np.uint8)
        pdeg = np.zeros((P, vmax), dtype=np.int64)
        vlen = np.zeros(P, dtype=np.int64)
        owner = np.zeros(P, dtype=np.int64)
        for p, (pi, H, order) in enumerate(rows):
            A = H.adjacency
            vlen[p] = H.v
            owner[p] = pi
            for i, x in enumerate(order):
                pdeg[p, i] = H.degrees[x]
                for j in range(i):
                    nbr[p, i, j] = A[x, order[j]]
        return cls(nbr=nbr, pdeg=pdeg, vlen=vlen, owner=owner, orders=tuple(tuple(o) for _, _, o in rows))

    @classmethod
    def through_edge(cls, patterns: Sequence[PatternGraph], all_orientations: bool = True) -> "PatternPlans":
        """Plans whose first two positions are the ends of a pattern edge.

        With ``all_orientations`` every oriented edge gets a plan (needed for
        counting); otherwise one plan per automorphism orbit suffices.
        """
        groups = []
        for H in patterns:
            if H.e == 0:
                raise ValueError("pattern without edges cannot be completed by an edge")
            arcs = (
                [arc for a, b in sorted(H.edges) for arc in ((a, b), (b, a))]
                if all_orientations
                else _oriented_edge_orbits(H)
            )
            groups.append((H, [_placement_order(H, arc) for arc in arcs]))
        return cls._build(groups)

    @classmethod
    def free(cls, H: PatternGraph) -> "PatternPlans":
        start = max(range(H.v), key=lambda x: (H.degrees[x], -x))
        return cls._build([(H, [_placement_order(H, [start])])])

    def __len__(self):
        return int(self.vlen.shape[0])


@dataclass(frozen=True)
class PatternStats:
    v_H: int
    e_H: int
    d2: Fraction
    m2: Fraction
    two_balanced: bool
    strictly_two_balanced: bool
    extbal: bool

    def to_dict(self) -> dict:
        return {
            "v_H": self.v_H,
            "e_H": self.e_H,
            "d2": str(self.d2),
            "m2": str(self.m2),
            "two_balanced": self.two_balanced,
            "strictly_two_balanced": self.strictly_two_balanced,
            "extbal": self.extbal,
        }


def _d2(v: int, e: int) -> Fraction:
    if v == 2 and e == 1:
        return Fraction(1, 2)
    if v < 3:
        raise ValueError("2-density needs at least 3 vertices (or K2)")
    return Fraction(e - 1, v - 2)


def pattern_stats(H: PatternGraph) -> PatternStats:
    """2-density, maximum 2-density and balancedness flags of ``H``.

    Among subgraphs on a fixed vertex set the induced one has the largest
    2-density, and dropping edges without dropping vertices lowers it
    strictly, so maximising over vertex subsets covers every subgraph.
    ``two_balanced`` follows the usual convention and requires ``e_H >= 2``.
    """
    if H.e == 0:
        raise ValueError("pattern needs at least one edge")
    if H.v < 2:
        raise ValueError("pattern needs at least two vertices")
    d2 = _d2(H.v, H.e)
    m2 = Fraction(1, 2)
    balanced = strict = H.e >= 2
    for size in range(3, H.v + 1):
        for S in itertools.combinations(range(H.v), size):
            Sset = set(S)
            e_S = sum(1 for a, b in H.edges if a in Sset and b in Sset)
            if e_S == 0:
                continue
            dens = Fraction(e_S - 1, size - 2)
            m2 = max(m2, dens)
            if size < H.v:
                if dens > d2:
                    balanced = strict = False
                elif dens == d2:
                    strict = False
    if H.v >= 4:
        extbal = m2 < Fraction(2 * H.e - 3, 2 * H.v - 6)
    else:
        extbal = H.v == 3 and H.e >= 2
    return PatternStats(
        v_H=H.v, e_H=H.e, d2=d2, m2=m2, two_balanced=balanced, strictly_two_balanced=strict, extbal=extbal
    )


# ---------------------------------------------------------------------------
# named patterns and the text format
# ---------------------------------------------------------------------------


def _cycle(k):
    return [(i, (i + 1) % k) for i in range(k)]


def _clique(k):
    return list(itertools.combinations(range(k), 2))


NAMED_PATTERNS = {
    "K2": (2, _clique(2)),
    "K3": (3, _clique(3)),
    "K4": (4, _clique(4)),
    "K5": (5, _clique(5)),
    "C4": (4, _cycle(4)),
    "C5": (5, _cycle(5)),
    "C6": (6, _cycle(6)),
    "P3": (3, [(0, 1), (1, 2)]),
    "2K2": (4, [(0, 1), (2, 3)]),
    "K4+pendant": (5, _clique(4) + [(3, 4)]),
}


def named_pattern(name: str) -> PatternGraph:
    try:
        v, edges = NAMED_PATTERNS[name]
    except KeyError:
        raise KeyError(f"unknown pattern {name!r}; known: {', '.join(NAMED_PATTERNS)}") from None
    return PatternGraph.from_edges(v, edges, name=name)


def parse_pattern(text: str, name: str = "") -> PatternGraph:
    """Parse the edge-list format: a vertex-count line, then ``u v`` lines.

    Blank lines and ``#`` comments are ignored; vertices are 0-based.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty pattern description")
    try:
        v = int(lines[0])
        edges = []
        for ln in lines[1:]:
            a, b = ln.split()
            edges.append((int(a), int(b)))
    except ValueError as exc:
        raise ValueError(f"malformed pattern description: {exc}") from None
    return PatternGraph.from_edges(v, edges, name=name)


def format_pattern(H: PatternGraph) -> str:
    body = "".join(f"{a} {b}\n" for a, b in sorted(H.edges))
    return f"{H.v}\n{body}"


def load_pattern(spec: str) -> PatternGraph:
    """A built-in name or the path of a pattern file."""
    if spec in NAMED_PATTERNS:
        return named_pattern(spec)
    path = Path(spec)
    if not path.is_file():
        raise KeyError(f"unknown pattern {spec!r}: not a built-in name or a file")
    return parse_pattern(path.read_text(), name=path.stem)


# ---------------------------------------------------------------------------
# host graphs
# ---------------------------------------------------------------------------


class HostGraph:
    """Simple graph on ``0..n-1`` stored as bitset rows."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = int(n)
        self.words = max(1, (self.n + 63) // 64)
        self.bits = np.zeros((self.n, self.words), dtype=np.uint64)
        self.deg = np.zeros(self.n, dtype=np.int64)
        self.edge_count = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "HostGraph":
        G = cls(n)
        for u, v in edges:
            G.add_edge(u, v)
        return G

    @classmethod
    def complete(cls, n: int) -> "HostGraph":
        return cls.from_edges(n, itertools.combinations(range(n), 2))

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "HostGraph":
        G = cls(bits.shape[0])
        G.bits = np.ascontiguousarray(bits, dtype=np.uint64).copy()
        G.deg = _row_popcounts(G.bits)
        G.edge_count = int(G.deg.sum() // 2)
        return G

    def _check(self, u, v):
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"edge ({u}, {v}) out of range for n={self.n}")
        if u == v:
            raise ValueError("self-loops are not allowed")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.bits[u, v >> 6] >> np.uint64(v & 63) & np.uint64(1))

    def add_edge(self, u: int, v: int) -> bool:
        """Insert ``uv``; returns False if it was already present."""
        self._check(u, v)
        if self.has_edge(u, v):
            return False
        self.bits[u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        self.bits[v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
        self.deg[u] += 1
        self.deg[v] += 1
        self.edge_count += 1
        return True

    def remove_edge(self, u: int, v: int) -> bool:
        self._check(u, v)
        if not self.has_edge(u, v):
            return False
        self.bits[u, v >> 6] &= ~(np.uint64(1) << np.uint64(v & 63))
        self.bits[v, u >> 6] &= ~(np.uint64(1) << np.uint64(u & 63))
        self.deg[u] -= 1
        self.deg[v] -= 1
        self.edge_count -= 1
        return True

    def neighbors(self, u: int) -> list:
        return [v for v in range(self.n) if self.has_edge(u, v)]

    def edges(self) -> list:
        return [(u, v) for u in range(self.n) for v in self.neighbors(u) if u < v]

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            A[u, v] = A[v, u] = True
        return A

    def copy(self) -> "HostGraph":
        G = HostGraph(self.n)
        G.bits = self.bits.copy()
        G.deg = self.deg.copy()
        G.edge_count = self.edge_count
        return G

    @property
    def full_mask(self) -> np.ndarray:
        return _full_mask(self.n, self.words)

    def __eq__(self, other):
        return isinstance(other, HostGraph) and self.n == other.n and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"HostGraph(n={self.n}, edges={self.edge_count})"


def _full_mask(n: int, words: int) -> np.ndarray:
    full = np.zeros(words, dtype=np.uint64)
    for x in range(n):
        full[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
    return full


def _row_popcounts(bits: np.ndarray) -> np.ndarray:
    return np.unpackbits(bits.view(np.uint8), axis=1).sum(axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# compiled search
# ---------------------------------------------------------------------------

_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True)
def _ctz(x):
    # x is a nonzero uint64 power of two
    n = 0
    if (x & np.uint64(0xFFFFFFFF)) == 0:
        n += 32
        x >>= np.uint64(32)
    if (x & np.uint64(0xFFFF)) == 0:
        n += 16
        x >>= np.uint64(16)
    if (x & np.uint64(0xFF)) == 0:
        n += 8
        x >>= np.uint64(8)
    if (x & np.uint64(0xF)) == 0:
        n += 4
        x >>= np.uint64(4)
    if (x & np.uint64(0x3)) == 0:
        n += 2
        x >>= np.uint64(2)
    if (x & np.uint64(0x1)) == 0:
        n += 1
    return n


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True)
def _pop_lowest(row):
    for w in range(row.shape[0]):
        x = row[w]
        if x != np.uint64(0):
            low = x & (~x + np.uint64(1))
            row[w] = x ^ low
            return w * 64 + _ctz(low)
    return -1


@njit(cache=True)
def _new_workspace(vmax, words):
    mapped = np.empty(vmax, np.int64)
    assigned = np.empty(vmax, np.int64)
    used = np.zeros(words, np.uint64)
    cand = np.zeros((vmax, words), np.uint64)
    return mapped, assigned, used, cand


@njit(cache=True)
def _embed_count(bits, deg, full, nbr, pdeg, vlen, fixed, nfixed, limit, mapped, assigned, used, cand):
    """Count injective edge-preserving maps of the plan into the host.

    The first ``nfixed`` positions are pinned to ``fixed``; the search stops
    once ``limit`` maps are found, leaving the last one in ``mapped``. ``used``
    must be all zero on entry and is restored before returning.
    """
    W = bits.shape[1]
    count = 0
    nset = 0
    ok = True
    for i in range(nfixed):
        x = fixed[i]
        b = np.uint64(1) << np.uint64(x & 63)
        if deg[x] < pdeg[i] or (used[x >> 6] & b) != np.uint64(0):
            ok = False
            break
        for j in range(i):
            if nbr[i, j] and (bits[mapped[j], x >> 6] & b) == np.uint64(0):
                ok = False
                break
        if not ok:
            break
        mapped[i] = x
        used[x >> 6] |= b
        nset += 1
    if ok and nfixed == vlen:
        count = 1
    elif ok:
        level = nfixed
        for i in range(vlen):
            assigned[i] = -1
        _fill(bits, full, nbr, mapped, used, cand, level, W)
        while level >= nfixed:
            x = _pop_lowest(cand[level])
            a = assigned[level]
            if a >= 0:
                used[a >> 6] &= ~(np.uint64(1) << np.uint64(a & 63))
                assigned[level] = -1
            if x < 0:
                level -= 1
                continue
            if deg[x] < pdeg[level]:
                continue
            if level == vlen - 1:
                mapped[level] = x
                count += 1
                if count >= limit:
                    break
                continue
            mapped[level] = x
            assigned[level] = x
            used[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
            level += 1
            _fill(bits, full, nbr, mapped, used, cand, level, W)
        # unwind whatever the early exit left marked
        for i in range(nfixed, vlen):
            a = assigned[i]
            if a >= 0:
                used[a >> 6] &= ~(np.uint64(1) << np.uint64(a & 63))
                assigned[i] = -1
    for i in range(nset):
        x = mapped[i]
        used[x >> 6] &= ~(np.uint64(1) << np.uint64(x & 63))
    return count


@njit(cache=True)
def _fill(bits, full, nbr, mapped, used, cand, level, W):
    have = False
    for j in range(level):
        if nbr[level, j]:
            r = mapped[j]
            if not have:
                for w in range(W):
                    cand[level, w] = bits[r, w]
                have = True
            else:
                for w in range(W):
                    cand[level, w] &= bits[r, w]
    if not have:
        for w in range(W):
            cand[level, w] = full[w]
    for w in range(W):
        cand[level, w] &= ~used[w]


@njit(cache=True)
def _set_edge(bits, deg, u, v):
    bu = np.uint64(1) << np.uint64(v & 63)
    if (bits[u, v >> 6] & bu) != np.uint64(0):
        return False
    bits[u, v >> 6] |= bu
    bits[v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
    deg[u] += 1
    deg[v] += 1
    return True


@njit(cache=True)
def _clear_edge(bits, deg, u, v):
    bu = np.uint64(1) << np.uint64(v & 63)
    if (bits[u, v >> 6] & bu) == np.uint64(0):
        return False
    bits[u, v >> 6] &= ~bu
    bits[v, u >> 6] &= ~(np.uint64(1) << np.uint64(u & 63))
    deg[u] -= 1
    deg[v] -= 1
    return True


@njit(cache=True)
def _through_count(bits, deg, full, nbr, pdeg, vlen, u, v, limit, ws_mapped, ws_assigned, ws_used, ws_cand, fixed):
    """Sum of plan embeddings sending the plan's first edge onto ``uv``."""
    total = 0
    fixed[0] = u
    fixed[1] = v
    for p in range(vlen.shape[0]):
        total += _embed_count(
            bits, deg, full, nbr[p], pdeg[p], vlen[p], fixed, 2, limit - total, ws_mapped, ws_assigned, ws_used, ws_cand
        )
        if total >= limit:
            break
    return total


@njit(cache=True)
def _completes(bits, deg, full, nbr, pdeg, vlen, u, v, ws_mapped, ws_assigned, ws_used, ws_cand, fixed):
    """Whether ``G + uv`` has a copy of some plan's pattern through ``uv``.

    ``uv`` must already be set in ``bits``.
    """
    fixed[0] = u
    fixed[1] = v
    for p in range(vlen.shape[0]):
        if _embed_count(bits, deg, full, nbr[p], pdeg[p], vlen[p], fixed, 2, 1, ws_mapped, ws_assigned, ws_used, ws_cand) > 0:
            return True
    return False


@njit(cache=True)
def _max_pair_count(bits, deg, full, nbr, pdeg, vlen, limit):
    n = bits.shape[0]
    vmax = nbr.shape[1]
    mapped, assigned, used, cand = _new_workspace(vmax, bits.shape[1])
    fixed = np.empty(2, np.int64)
    best = 0
    for u in range(n):
        for v in range(u + 1, n):
            added = _set_edge(bits, deg, u, v)
            c = _through_count(bits, deg, full, nbr, pdeg, vlen, u, v, limit, mapped, assigned, used, cand, fixed)
            if added:
                _clear_edge(bits, deg, u, v)
            if c > best:
                best = c
                if best >= limit:
                    return best
    return best


@njit(cache=True)
def _all_pairs_close(bits, deg, full, nbr, pdeg, vlen):
    n = bits.shape[0]
    vmax = nbr.shape[1]
    mapped, assigned, used, cand = _new_workspace(vmax, bits.shape[1])
    fixed = np.empty(2, np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            added = _set_edge(bits, deg, u, v)
            ok = _completes(bits, deg, full, nbr, pdeg, vlen, u, v, mapped, assigned, used, cand, fixed)
            if added:
                _clear_edge(bits, deg, u, v)
            if not ok:
                return False
    return True


@njit(cache=True)
def _codegree_max(bits):
    n = bits.shape[0]
    best = 0
    for u in range(n):
        for v in range(u + 1, n):
            c = 0
            for w in range(bits.shape[1]):
                c += _popcount(bits[u, w] & bits[v, w])
            if c > best:
                best = c
    return best


def _workspace(plans: PatternPlans, G: HostGraph):
    return _new_workspace(plans.nbr.shape[1], G.words)


def _with_edge(G: HostGraph, u: int, v: int):
    G._check(u, v)
    return _set_edge(G.bits, G.deg, u, v)


def completes_copy(G: HostGraph, H: PatternGraph, e: tuple) -> bool:
    """True iff ``G + e`` contains a copy of ``H`` that uses ``e``."""
    return completes_any(G, H.existence_plans, e)


def completes_any(G: HostGraph, plans: PatternPlans, e: tuple) -> bool:
    u, v = int(e[0]), int(e[1])
    added = _with_edge(G, u, v)
    try:
        mapped, assigned, used, cand = _workspace(plans, G)
        return bool(
            _completes(
                G.bits, G.deg, G.full_mask, plans.nbr, plans.pdeg, plans.vlen, u, v,
                mapped, assigned, used, cand, np.empty(2, np.int64),
            )
        )
    finally:
        if added:
            _clear_edge(G.bits, G.deg, u, v)


def count_copies_with_edge(G: HostGraph, H: PatternGraph, e: tuple) -> int:
    """Number of copies of ``H`` in ``G + e`` containing ``e``."""
    u, v = int(e[0]), int(e[1])
    plans = H.plans
    added = _with_edge(G, u, v)
    try:
        mapped, assigned, used, cand = _workspace(plans, G)
        total = _through_count(
            G.bits, G.deg, G.full_mask, plans.nbr, plans.pdeg, plans.vlen, u, v, np.iinfo(np.int64).max,
            mapped, assigned, used, cand, np.empty(2, np.int64),
        )
    finally:
        if added:
            _clear_edge(G.bits, G.deg, u, v)
    return int(total) // H.aut_count


def count_embeddings(G: HostGraph, H: PatternGraph, limit: Optional[int] = None) -> int:
    """Injective edge-preserving maps ``V(H) -> V(G)``."""
    plans = PatternPlans.free(H)
    mapped, assigned, used, cand = _workspace(plans, G)
    lim = np.iinfo(np.int64).max if limit is None else int(limit)
    if G.n == 0:
        return 0
    return int(
        _embed_count(
            G.bits, G.deg, G.full_mask, plans.nbr[0], plans.pdeg[0], plans.vlen[0],
            np.empty(0, np.int64), 0, lim, mapped, assigned, used, cand,
        )
    )


def count_copies_total(G: HostGraph, H: PatternGraph) -> int:
    """Number of subgraphs of ``G`` isomorphic to ``H``."""
    return count_embeddings(G, H) // H.aut_count


def max_codegree(G: HostGraph) -> int:
    """Largest common neighbourhood over all vertex pairs."""
    if G.n < 2:
        return 0
    return int(_codegree_max(G.bits))


def max_pair_copies(G: HostGraph, plans: PatternPlans, aut_count: int, limit: Optional[int] = None) -> int:
    """Maximum over pairs ``xy`` of the copies through ``xy`` in ``G + xy``.

    ``plans`` must hold every oriented edge of one pattern. With ``limit`` the
    scan stops once some pair reaches ``limit`` copies.
    """
    if G.n < 2:
        return 0
    lim = np.iinfo(np.int64).max if limit is None else int(limit) * aut_count
    bits = G.bits.copy()
    deg = G.deg.copy()
    return int(_max_pair_count(bits, deg, G.full_mask, plans.nbr, plans.pdeg, plans.vlen, lim)) // aut_count


def every_pair_closes(G: HostGraph, plans: PatternPlans) -> bool:
    """Whether adding any pair (or keeping any edge) closes a copy through it."""
    if G.n < 2:
        return True
    bits = G.bits.copy()
    deg = G.deg.copy()
    return bool(_all_pairs_close(bits, deg, G.full_mask, plans.nbr, plans.pdeg, plans.vlen))
