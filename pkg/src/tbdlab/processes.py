"""Random graph processes driven by a random order on the edges of K_n.

The reverse process keeps an edge iff it closes no pattern copy together
with all edges traversed before it, kept or not. The forward (H-free)
process looks only at the edges it kept. Both are run by one compiled loop
that differs in whether a rejected edge stays in the working graph.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from . import rng as rngmod
from .graphs import (
    HostGraph,
    PatternGraph,
    PatternPlans,
    _clear_edge,
    _completes,
    _embed_count,
    _new_workspace,
    _set_edge,
    count_embeddings,
    pattern_stats,
)

__all__ = [
    "VARIANTS",
    "ProcessConfig",
    "ProcessOutcome",
    "edge_table",
    "edge_index",
    "truncation_length",
    "draw_permutation",
    "run",
    "run_order",
    "reverse_addition_run",
    "reverse_removal_run",
    "birth_time_run",
    "forward_hfree_run",
    "h_removal_run",
    "perturb_and_rerun",
    "rle_encode",
    "rle_decode",
]

VARIANTS = ("reverse_addition", "reverse_removal", "birth_time", "forward_hfree", "h_removal")


@dataclass(frozen=True)
class ProcessConfig:
    n: int
    patterns: tuple
    variant: str = "reverse_addition"
    m_cap: Optional[int] = None
    p_cap: Optional[float] = None
    seed: int = 0
    replication_index: int = 0

    def __post_init__(self):
        pats = self.patterns
        if isinstance(pats, PatternGraph):
            pats = (pats,)
        object.__setattr__(self, "patterns", tuple(pats))
        if not self.patterns:
            raise ValueError("at least one pattern is required")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.m_cap is not None and self.p_cap is not None:
            raise ValueError("set at most one of m_cap and p_cap")
        if self.m_cap is not None and self.m_cap < 0:
            raise ValueError("m_cap must be non-negative")
        if self.p_cap is not None and not 0.0 <= self.p_cap:
            raise ValueError("p_cap must be non-negative")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def n_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def plans(self) -> PatternPlans:
        return _family_plans(self.patterns)

    def with_(self, **kw) -> "ProcessConfig":
        d = dict(
            n=self.n, patterns=self.patterns, variant=self.variant, m_cap=self.m_cap,
            p_cap=self.p_cap, seed=self.seed, replication_index=self.replication_index,
        )
        d.update(kw)
        return ProcessConfig(**d)


_PLAN_CACHE: dict = {}


def _family_plans(patterns) -> PatternPlans:
    key = tuple((H.v, tuple(sorted(H.edges))) for H in patterns)
    if key not in _PLAN_CACHE:
        _PLAN_CACHE[key] = PatternPlans.through_edge(list(patterns), all_orientations=False)
    return _PLAN_CACHE[key]


@dataclass
class ProcessOutcome:
    variant: str
    n: int
    final_edges: int
    final_graph: HostGraph
    accepted: np.ndarray
    permutation_digest: str
    steps_traversed: int
    seed: tuple
    order: Optional[np.ndarray] = field(default=None, repr=False)

    def to_record(self, include_accepted: bool = False) -> dict:
        rec = {
            "variant": self.variant,
            "n": self.n,
            "final_edges": int(self.final_edges),
            "steps": int(self.steps_traversed),
            "digest": self.permutation_digest,
            "seed": list(self.seed),
        }
        if include_accepted:
            rec["accepted_rle"] = rle_encode(self.accepted)
        return rec

    def same_result(self, other: "ProcessOutcome") -> bool:
        return self.final_edges == other.final_edges and self.final_graph == other.final_graph


def edge_table(n: int):
    """Endpoints of the pairs of ``0..n-1`` in lexicographic order."""
    us, vs = np.triu_indices(n, 1)
    return us.astype(np.int64), vs.astype(np.int64)


def edge_index(n: int, u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def truncation_length(n: int, patterns: Sequence[PatternGraph]) -> int:
    """Truncation length ``n^(2 - 1/m2) (ln n)^2``, capped at all pairs.

    For a family the largest m2 is used, which gives the longest prefix.
    """
    m2 = max(pattern_stats(H).m2 for H in patterns)
    m = n ** (2 - 1 / float(m2)) * math.log(n) ** 2
    return int(min(n * (n - 1) // 2, math.floor(m)))


def _digest(order: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(order, dtype="<i8").tobytes()).hexdigest()


def draw_permutation(cfg: ProcessConfig) -> np.ndarray:
    gen = rngmod.stream(cfg.seed, cfg.replication_index, "permutation")
    return gen.permutation(cfg.n_pairs).astype(np.int64)


@njit(cache=True)
def _traverse(n, us, vs, order, nbr, pdeg, vlen, forward):
    W = max(1, (n + 63) // 64)
    bits = np.zeros((n, W), np.uint64)
    deg = np.zeros(n, np.int64)
    full = np.zeros(W, np.uint64)
    for x in range(n):
        full[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
    mapped, assigned, used, cand = _new_workspace(nbr.shape[1], W)
    fixed = np.empty(2, np.int64)
    acc = np.zeros(order.shape[0], np.bool_)
    for i in range(order.shape[0]):
        u = us[order[i]]
        v = vs[order[i]]
        _set_edge(bits, deg, u, v)
        closes = _completes(bits, deg, full, nbr, pdeg, vlen, u, v, mapped, assigned, used, cand, fixed)
        acc[i] = not closes
        if forward and closes:
            _clear_edge(bits, deg, u, v)
    return acc


def run_order(cfg: ProcessConfig, order: np.ndarray, forward: bool = False, digest: Optional[str] = None) -> ProcessOutcome:
    """Traverse ``order`` (pair indices) with the reverse or forward rule."""
    order = np.ascontiguousarray(order, dtype=np.int64)
    us, vs = edge_table(cfg.n)
    plans = cfg.plans
    acc = _traverse(cfg.n, us, vs, order, plans.nbr, plans.pdeg, plans.vlen, forward)
    kept = order[acc]
    G = HostGraph.from_edges(cfg.n, zip(us[kept].tolist(), vs[kept].tolist()))
    return ProcessOutcome(
        variant=cfg.variant,
        n=cfg.n,
        final_edges=int(acc.sum()),
        final_graph=G,
        accepted=acc,
        permutation_digest=digest or _digest(order),
        steps_traversed=int(order.shape[0]),
        seed=(cfg.seed, cfg.replication_index),
        order=order,
    )


def _prefix(cfg: ProcessConfig, order: np.ndarray) -> np.ndarray:
    if cfg.m_cap is None:
        return order
    return order[: min(cfg.m_cap, order.shape[0])]


def reverse_addition_run(cfg: ProcessConfig) -> ProcessOutcome:
    order = draw_permutation(cfg)
    return run_order(cfg, _prefix(cfg, order), forward=False, digest=_digest(order))


def forward_hfree_run(cfg: ProcessConfig) -> ProcessOutcome:
    order = draw_permutation(cfg)
    return run_order(cfg, _prefix(cfg, order), forward=True, digest=_digest(order))


def draw_birth_times(cfg: ProcessConfig) -> np.ndarray:
    gen = rngmod.stream(cfg.seed, cfg.replication_index, "birth")
    births = gen.random(cfg.n_pairs)
    while True:
        srt = np.sort(births)
        dup = srt[1:][srt[1:] == srt[:-1]]
        if dup.size == 0:
            return births
        mask = np.isin(births, dup)
        births[mask] = gen.random(int(mask.sum()))


def birth_time_run(cfg: ProcessConfig) -> ProcessOutcome:
    """Traverse pairs by increasing birth time, stopping past ``p_cap``."""
    births = draw_birth_times(cfg)
    order = np.argsort(births, kind="stable").astype(np.int64)
    p_cap = 1.0 if cfg.p_cap is None else cfg.p_cap
    stop = int(np.searchsorted(births[order], p_cap, side="right"))
    if cfg.m_cap is not None:
        stop = min(stop, cfg.m_cap)
    return run_order(cfg, order[:stop], forward=False, digest=_digest(order))


@njit(cache=True)
def _removal(n, us, vs, uniforms, nbr, pdeg, vlen):
    W = max(1, (n + 63) // 64)
    bits = np.zeros((n, W), np.uint64)
    deg = np.zeros(n, np.int64)
    full = np.zeros(W, np.uint64)
    for x in range(n):
        full[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
    N = us.shape[0]
    present = np.ones(N, np.bool_)
    for k in range(N):
        _set_edge(bits, deg, us[k], vs[k])
    mapped, assigned, used, cand = _new_workspace(nbr.shape[1], W)
    fixed = np.empty(2, np.int64)
    live = np.empty(N, np.int64)
    removed = np.full(N, -1, np.int64)
    steps = 0
    while True:
        cnt = 0
        for k in range(N):
            if present[k] and _completes(bits, deg, full, nbr, pdeg, vlen, us[k], vs[k], mapped, assigned, used, cand, fixed):
                live[cnt] = k
                cnt += 1
        if cnt == 0:
            break
        pick = live[min(cnt - 1, int(uniforms[steps] * cnt))]
        present[pick] = False
        _clear_edge(bits, deg, us[pick], vs[pick])
        removed[steps] = pick
        steps += 1
    return present, removed[:steps]


def reverse_removal_run(cfg: ProcessConfig) -> ProcessOutcome:
    """Start from K_n and delete a uniform edge lying in some copy until none does.

    ``accepted`` marks the pairs that survive, indexed lexicographically.
    """
    us, vs = edge_table(cfg.n)
    gen = rngmod.stream(cfg.seed, cfg.replication_index, "removal")
    uniforms = gen.random(cfg.n_pairs)
    plans = cfg.plans
    present, removed = _removal(cfg.n, us, vs, uniforms, plans.nbr, plans.pdeg, plans.vlen)
    G = HostGraph.from_edges(cfg.n, zip(us[present].tolist(), vs[present].tolist()))
    return ProcessOutcome(
        variant=cfg.variant,
        n=cfg.n,
        final_edges=int(present.sum()),
        final_graph=G,
        accepted=present,
        permutation_digest=_digest(removed),
        steps_traversed=int(removed.shape[0]),
        seed=(cfg.seed, cfg.replication_index),
        order=removed,
    )


def h_removal_run(cfg: ProcessConfig) -> ProcessOutcome:
    """Start from K_n and delete all edges of a uniform copy until none is left.

    A uniform embedding projects to a uniform copy, since every copy has
    exactly ``aut_count`` embeddings.
    """
    if len(cfg.patterns) != 1:
        raise ValueError("h_removal takes a single pattern")
    H = cfg.patterns[0]
    plans = PatternPlans.free(H)
    G = HostGraph.complete(cfg.n)
    gen = rngmod.stream(cfg.seed, cfg.replication_index, "h_removal")
    pos = {x: i for i, x in enumerate(plans.orders[0])}
    pedges = [(pos[a], pos[b]) for a, b in sorted(H.edges)]
    removed = []
    while True:
        total = count_embeddings(G, H)
        if total == 0:
            break
        k = int(gen.integers(total))
        mapped, assigned, used, cand = _new_workspace(plans.nbr.shape[1], G.words)
        _embed_count(
            G.bits, G.deg, G.full_mask, plans.nbr[0], plans.pdeg[0], plans.vlen[0],
            np.empty(0, np.int64), 0, k + 1, mapped, assigned, used, cand,
        )
        for a, b in pedges:
            x, y = int(mapped[a]), int(mapped[b])
            G.remove_edge(x, y)
            removed.append(edge_index(cfg.n, x, y))
    removed = np.asarray(removed, dtype=np.int64)
    us, vs = edge_table(cfg.n)
    present = np.array([G.has_edge(int(u), int(v)) for u, v in zip(us, vs)], dtype=bool)
    return ProcessOutcome(
        variant=cfg.variant,
        n=cfg.n,
        final_edges=G.edge_count,
        final_graph=G,
        accepted=present,
        permutation_digest=_digest(removed),
        steps_traversed=int(removed.shape[0]),
        seed=(cfg.seed, cfg.replication_index),
        order=removed,
    )


def run(cfg: ProcessConfig) -> ProcessOutcome:
    return {
        "reverse_addition": reverse_addition_run,
        "reverse_removal": reverse_removal_run,
        "birth_time": birth_time_run,
        "forward_hfree": forward_hfree_run,
        "h_removal": h_removal_run,
    }[cfg.variant](cfg)


def perturb_and_rerun(cfg: ProcessConfig, base_permutation, perturbation) -> tuple:
    """Run the reverse rule on a sequence and on a one-step perturbation of it.

    ``perturbation`` is ``("swap", i, j)``, ``("replace", i, (u, v))`` or
    ``None`` for the identity. The sequence is truncated at ``m_cap`` first.
    """
    base = _prefix(cfg, np.asarray(base_permutation, dtype=np.int64)).copy()
    if len(set(base.tolist())) != base.shape[0]:
        raise ValueError("base sequence has duplicate pairs")
    other = base.copy()
    if perturbation is None:
        pass
    elif perturbation[0] == "swap":
        i, j = int(perturbation[1]), int(perturbation[2])
        other[i], other[j] = other[j], other[i]
    elif perturbation[0] == "replace":
        i = int(perturbation[1])
        u, v = perturbation[2]
        if u == v or not (0 <= u < cfg.n and 0 <= v < cfg.n):
            raise ValueError(f"invalid replacement pair ({u}, {v})")
        idx = edge_index(cfg.n, int(u), int(v))
        if idx in set(np.delete(other, i).tolist()):
            raise ValueError(f"replacement pair ({u}, {v}) already occurs in the sequence")
        other[i] = idx
    else:
        raise ValueError(f"unknown perturbation {perturbation[0]!r}")
    return run_order(cfg, base), run_order(cfg, other)


def rle_encode(bits) -> list:
    """Run lengths of a bit sequence, starting with a (possibly empty) run of zeros."""
    runs = []
    cur, length = False, 0
    for b in np.asarray(bits, dtype=bool).tolist():
        if b == cur:
            length += 1
        else:
            runs.append(length)
            cur, length = b, 1
    runs.append(length)
    return runs


def rle_decode(runs) -> np.ndarray:
    out = []
    cur = False
    for r in runs:
        out.extend([cur] * int(r))
        cur = not cur
    return np.asarray(out, dtype=bool)
