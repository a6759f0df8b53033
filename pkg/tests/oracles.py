"""Slow reference implementations used only by the tests.

Nothing here imports the package's compiled kernels; each function follows
the textbook definition as directly as possible.
"""

import itertools
import math
from collections import Counter
from fractions import Fraction


def hoeffding_exponent(c, t):
    return 2 * t * t / sum(x * x for x in c)


def typical_exponent(c, d, gamma, t, factor=1.0):
    s = sum((ck + g * (dk - ck)) ** 2 for ck, dk, g in zip(c, d, gamma))
    return factor * t * t / (2 * s)


def bernstein(V, C, t):
    return t * t / (2 * V + 2 * C * t / 3)


def bennett(V, C, t):
    x = C * t / V
    return V / (C * C) * ((1 + x) * math.log1p(x) - x)


def binomial_upper_tail(N, p, k):
    """P(Bin(N, p) >= k) summed exactly in rationals, then converted."""
    p = Fraction(p).limit_denominator(10 ** 6)
    return float(sum(math.comb(N, j) * p ** j * (1 - p) ** (N - j) for j in range(max(k, 0), N + 1)))


def copies(n, edges, H_v, H_edges):
    """Distinct copies of H as (vertex set, edge set) pairs."""
    E = {frozenset(e) for e in edges}
    out = set()
    for S in itertools.combinations(range(n), H_v):
        for perm in itertools.permutations(S):
            img = frozenset(frozenset((perm[a], perm[b])) for a, b in H_edges)
            if img <= E:
                out.add((frozenset(S), img))
    return out


def count_copies(n, edges, H_v, H_edges):
    return len(copies(n, edges, H_v, H_edges))


def copies_through(n, edges, H_v, H_edges, e):
    e = frozenset(e)
    allE = set(frozenset(x) for x in edges) | {e}
    return sum(1 for _, img in copies(n, [tuple(x) for x in allE], H_v, H_edges) if e in img)


def automorphisms(H_v, H_edges):
    E = {frozenset(e) for e in H_edges}
    return sum(
        1
        for perm in itertools.permutations(range(H_v))
        if {frozenset((perm[a], perm[b])) for a, b in H_edges} == E
    )


def reverse_addition(n, order_pairs, H_v, H_edges, forward=False):
    """Keep an edge iff no copy through it among traversed (or kept) edges."""
    seen = []
    kept = []
    for e in order_pairs:
        base = kept if forward else seen
        closes = copies_through(n, base, H_v, H_edges, e) > 0
        seen.append(e)
        if not closes:
            kept.append(e)
    return kept


def h_removal_distribution(n, H_v, H_edges):
    """Exact final edge count law when a uniform copy is deleted each step."""
    memo = {}

    def rec(state):
        if state in memo:
            return memo[state]
        cps = sorted(copies(n, [tuple(e) for e in state], H_v, H_edges), key=lambda c: sorted(map(sorted, c[1])))
        if not cps:
            res = {len(state): Fraction(1)}
        else:
            acc = Counter()
            for _, img in cps:
                for k, pr in rec(state - img).items():
                    acc[k] += pr / len(cps)
            res = dict(acc)
        memo[state] = res
        return res

    full = frozenset(frozenset(e) for e in itertools.combinations(range(n), 2))
    return rec(full)


def is_maximal_free(n, edges, H_v, H_edges):
    """No copy of H, and every non-edge would close one."""
    if count_copies(n, edges, H_v, H_edges):
        return False
    E = {frozenset(e) for e in edges}
    for e in itertools.combinations(range(n), 2):
        if frozenset(e) not in E and copies_through(n, edges, H_v, H_edges, e) == 0:
            return False
    return True
