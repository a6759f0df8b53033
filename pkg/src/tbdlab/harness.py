"""Monte Carlo experiments comparing the bounds and the processes.

Every experiment takes a ``map_fn`` with the signature of the builtin
``map``; replication ``i`` draws from its own keyed stream, and results are
reduced in replication order, so a parallel ``map_fn`` changes nothing but
the wall time. Work functions are module-level so they pickle.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import rng as rngmod
from .bounds import LipschitzProfile, bdi_bound, tbdi_bernoulli_bound, tbdi_bound
from .graphs import (
    HostGraph,
    PatternGraph,
    PatternPlans,
    completes_any,
    every_pair_closes,
    max_pair_copies,
    pattern_stats,
)
from .processes import (
    ProcessConfig,
    draw_permutation,
    edge_table,
    truncation_length,
    perturb_and_rerun,
    reverse_removal_run,
    run_order,
)

__all__ = [
    "TailEstimate",
    "ExponentFit",
    "estimate_tail",
    "TriangleConfig",
    "triangle_bounds",
    "triangle_experiment",
    "ReverseConfig",
    "reverse_process_experiment",
    "coupling_experiment",
    "lipschitz_sweep",
    "exact_addition_distribution",
    "exact_removal_distribution",
    "equivalence_chi2",
]


@dataclass(frozen=True)
class TailEstimate:
    trials: int
    hits: int
    point: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, hits: int, trials: int, level: float = 0.95) -> "TailEstimate":
        """Clopper-Pearson interval for a binomial proportion."""
        if trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= hits <= trials:
            raise ValueError("hits must lie in [0, trials]")
        a = (1.0 - level) / 2.0
        lo = 0.0 if hits == 0 else float(stats.beta.ppf(a, hits, trials - hits + 1))
        hi = 1.0 if hits == trials else float(stats.beta.ppf(1.0 - a, hits + 1, trials - hits))
        point = hits / trials
        return cls(trials=trials, hits=hits, point=point, ci_low=min(lo, point), ci_high=max(hi, point))

    @property
    def half_width(self) -> float:
        return max(self.point - self.ci_low, self.ci_high - self.point)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["half_width"] = self.half_width
        return d


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    points: tuple

    @classmethod
    def fit(cls, xs: Sequence[float], ys: Sequence[float]) -> "ExponentFit":
        """Least-squares line through ``(log x, log y)``."""
        if len(xs) != len(ys):
            raise ValueError("xs and ys differ in length")
        if len(xs) < 3:
            raise ValueError("an exponent fit needs at least 3 points")
        if min(xs) <= 0 or min(ys) <= 0:
            raise ValueError("log-log fit needs positive data")
        lx = np.log(np.asarray(xs, dtype=float))
        ly = np.log(np.asarray(ys, dtype=float))
        res = stats.linregress(lx, ly)
        r2 = 1.0 if np.ptp(ly) == 0 else float(min(1.0, max(0.0, res.rvalue ** 2)))
        return cls(
            slope=float(res.slope),
            intercept=float(res.intercept),
            r2=r2,
            points=tuple((float(a), float(b)) for a, b in zip(lx, ly)),
        )

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "points": [list(p) for p in self.points]}


def _eval_event(i: int, event: Callable, seed: int, name: str) -> bool:
    return bool(event(rngmod.stream(seed, i, name)))


def estimate_tail(event: Callable, trials: int, seed: int, map_fn=map, name: str = "tail") -> TailEstimate:
    """Frequency of ``event(rng)`` over ``trials`` keyed replications."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    hits = sum(map_fn(partial(_eval_event, event=event, seed=seed, name=name), range(trials)))
    return TailEstimate.from_counts(int(hits), trials)


# ---------------------------------------------------------------------------
# triangles in G(n, p)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangleConfig:
    """Triangle counts in G(n, p) against the bounds.

    ``delta = max(2 n p^2, n^eps)`` caps the codegrees on the good event;
    with ``integer_threshold`` the cap is rounded down, which describes the
    same event since codegrees are integers.
    """

    n: int = 200
    p: float = 200 ** (-0.55)
    eps: float = 0.1
    t_rel: float = 0.5
    trials: int = 2000
    seed: int = 0
    integer_threshold: bool = True

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if self.n < 3 or self.trials < 1:
            raise ValueError("need n >= 3 and trials >= 1")


def _triangle_sample(i: int, n: int, p: float, seed: int):
    gen = rngmod.stream(seed, i, "gnp")
    upper = np.triu(gen.random((n, n)) < p, 1)
    A = (upper | upper.T).astype(np.float64)
    A2 = A @ A
    tri = int(round(float(np.einsum("ij,ij->", A2, A)) / 6.0))
    np.fill_diagonal(A2, 0.0)
    return tri, int(A2.max())


def triangle_bounds(n: int, p: float, t: float, eps: float = 0.1, integer_threshold: bool = True, gamma_fail: Optional[float] = None) -> dict:
    """All bounds for the triangle count at deviation ``t``.

    Coordinates are the ``binom(n, 2)`` edge indicators. The worst-case
    effect of one edge is ``n - 2``; on the good event it is at most the
    codegree cap.
    """
    N = n * (n - 1) // 2
    delta = max(2 * n * p * p, n ** eps)
    c = math.floor(delta) if integer_threshold else delta
    worst = LipschitzProfile.uniform(N, n - 2, p=p)
    typical = LipschitzProfile.uniform(N, c, d=n, gamma=1.0 / n, p=p)
    raw = LipschitzProfile.uniform(N, delta, d=n, gamma=1.0 / n, p=p)
    return {
        "delta": delta,
        "c": c,
        "bdi": bdi_bound(worst, t),
        "tbdi": tbdi_bound(typical, t, gamma_fail=gamma_fail, two_valued=True),
        "tbdi_general": tbdi_bound(typical, t, gamma_fail=gamma_fail),
        "tbdi_real_cap": tbdi_bound(raw, t, gamma_fail=gamma_fail, two_valued=True),
        "tbdi_bernoulli": tbdi_bernoulli_bound(typical, t, gamma_fail=gamma_fail),
        "tbdi_bennett": tbdi_bernoulli_bound(typical, t, bennett=True, gamma_fail=gamma_fail),
    }


def triangle_experiment(cfg: TriangleConfig, map_fn=map) -> dict:
    n, p = cfg.n, cfg.p
    samples = list(map_fn(partial(_triangle_sample, n=n, p=p, seed=cfg.seed), range(cfg.trials)))
    Y = np.array([s[0] for s in samples], dtype=float)
    cod = np.array([s[1] for s in samples], dtype=np.int64)
    mu = math.comb(n, 3) * p ** 3
    mu_hat = float(Y.mean())
    t_hat = cfg.t_rel * mu_hat
    upper = TailEstimate.from_counts(int(np.sum(Y >= mu_hat + t_hat)), cfg.trials)
    lower = TailEstimate.from_counts(int(np.sum(Y <= mu_hat - t_hat)), cfg.trials)
    both = TailEstimate.from_counts(int(np.sum(np.abs(Y - mu_hat) >= t_hat)), cfg.trials)

    delta = max(2 * n * p * p, n ** cfg.eps)
    c = math.floor(delta) if cfg.integer_threshold else delta
    fail = TailEstimate.from_counts(int(np.sum(cod > c)), cfg.trials)
    at_mu = triangle_bounds(n, p, cfg.t_rel * mu, cfg.eps, cfg.integer_threshold, gamma_fail=fail.ci_high)
    at_hat = triangle_bounds(n, p, t_hat, cfg.eps, cfg.integer_threshold, gamma_fail=fail.ci_high)
    tb = at_hat["tbdi"]
    allowance = tb.value + (tb.bad_budget or 0.0)
    checks = {
        "upper_tail_within_bound": upper.point <= allowance + upper.half_width,
        "lower_tail_within_bound": lower.point <= allowance + lower.half_width,
    }
    return {
        "n": n,
        "p": p,
        "eps": cfg.eps,
        "t_rel": cfg.t_rel,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "mu": mu,
        "mu_hat": mu_hat,
        "std_hat": float(Y.std(ddof=1)) if cfg.trials > 1 else 0.0,
        "delta": delta,
        "codegree_cap": c,
        "empirical_upper": upper.to_dict(),
        "empirical_lower": lower.to_dict(),
        "empirical_two_sided": both.to_dict(),
        "gamma_failure": fail.to_dict(),
        "bounds_at_mu": {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in at_mu.items()},
        "bounds_at_mu_hat": {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in at_hat.items()},
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# reverse process scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReverseConfig:
    patterns: tuple
    grid: tuple = (64, 128, 256, 512)
    trials: int = 300
    seed: int = 0
    truncate: bool = True

    def __post_init__(self):
        if len(self.grid) < 3:
            raise ValueError("the n grid needs at least 3 values")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


def _reverse_sample(i: int, n: int, patterns: tuple, m_cap: Optional[int], seed: int) -> int:
    cfg = ProcessConfig(n=n, patterns=patterns, m_cap=m_cap, seed=seed, replication_index=i)
    order = draw_permutation(cfg)
    if m_cap is not None:
        order = order[:m_cap]
    return run_order(cfg, order).final_edges


def reverse_process_experiment(cfg: ReverseConfig, map_fn=map) -> dict:
    """Mean final edge count across the grid and its log-log slope."""
    pats = tuple(cfg.patterns)
    e_max = max(H.e for H in pats)
    rows = []
    for n in cfg.grid:
        m = truncation_length(n, pats) if cfg.truncate else None
        vals = np.array(
            list(map_fn(partial(_reverse_sample, n=n, patterns=pats, m_cap=m, seed=cfg.seed), range(cfg.trials))),
            dtype=float,
        )
        mean = float(vals.mean())
        std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        rows.append(
            {
                "n": n,
                "m": n * (n - 1) // 2 if m is None else m,
                "truncated": m is not None and m < n * (n - 1) // 2,
                "mean": mean,
                "std": std,
                "std_over_sqrt_mean": std / math.sqrt(mean) if mean > 0 else 0.0,
                "log_window": math.log(n) ** (4 * e_max),
                "min": float(vals.min()),
                "max": float(vals.max()),
            }
        )
    report = {"patterns": [str(H) for H in pats], "trials": cfg.trials, "seed": cfg.seed, "rows": rows}
    if all(r["mean"] > 0 for r in rows):
        report["fit"] = ExponentFit.fit([r["n"] for r in rows], [r["mean"] for r in rows]).to_dict()
    else:
        report["fit"] = None
    if len(pats) == 1:
        report["predicted_slope"] = float(2 - 1 / pattern_stats(pats[0]).d2)
    return report


# ---------------------------------------------------------------------------
# truncation coupling and Lipschitz sweep
# ---------------------------------------------------------------------------


def _coupling_sample(i: int, n: int, patterns: tuple, m: int, seed: int):
    cfg = ProcessConfig(n=n, patterns=patterns, seed=seed, replication_index=i)
    order = draw_permutation(cfg)
    full = run_order(cfg, order)
    trunc = run_order(cfg, order[:m])
    us, vs = edge_table(n)
    traversed = HostGraph.from_edges(n, zip(us[order[:m]].tolist(), vs[order[:m]].tolist()))
    return trunc.same_result(full), every_pair_closes(traversed, cfg.plans)


def coupling_experiment(patterns: tuple, n: int, trials: int, seed: int = 0, m: Optional[int] = None, map_fn=map) -> dict:
    """How often the m-edge prefix already yields the final graph."""
    if n < 8:
        raise ValueError("coupling experiment needs n >= 8")
    pats = tuple(patterns)
    N = n * (n - 1) // 2
    m = truncation_length(n, pats) if m is None else int(m)
    if not 0 <= m <= N:
        raise ValueError("m must lie in [0, binom(n, 2)]")
    res = list(map_fn(partial(_coupling_sample, n=n, patterns=pats, m=m, seed=seed), range(trials)))
    agree = TailEstimate.from_counts(sum(1 for a, _ in res if a), trials)
    closes = TailEstimate.from_counts(sum(1 for _, b in res if b), trials)
    return {
        "patterns": [str(H) for H in pats],
        "n": n,
        "m": m,
        "all_pairs": N,
        "trials": trials,
        "seed": seed,
        "agreement": agree.to_dict(),
        "closure_event": closes.to_dict(),
    }


def _lipschitz_sample(i: int, n: int, H: PatternGraph, m: int, seed: int, psi: float, replace_prob: float, identity: bool):
    gen = rngmod.stream(seed, i, "lipschitz")
    cfg = ProcessConfig(n=n, patterns=(H,), m_cap=m, seed=seed, replication_index=i)
    order = draw_permutation(cfg)
    N = order.shape[0]
    if identity or (m < 2 and m == N):
        pert = None
    elif m < N and (m < 2 or gen.random() < replace_prob):
        j = int(gen.integers(m))
        new = int(order[m + int(gen.integers(N - m))])
        us, vs = edge_table(n)
        pert = ("replace", j, (int(us[new]), int(vs[new])))
    else:
        a, b = (int(x) for x in gen.choice(m, size=2, replace=False))
        pert = ("swap", a, b)
    base, other = perturb_and_rerun(cfg, order, pert)
    limit = int(math.floor(psi)) + 1
    good = True
    for run in (base, other):
        us, vs = edge_table(n)
        G = HostGraph.from_edges(n, zip(us[run.order].tolist(), vs[run.order].tolist()))
        if max_pair_copies(G, H.plans, H.aut_count, limit=limit) > psi:
            good = False
            break
    kind = "none" if pert is None else pert[0]
    return kind, good, abs(base.final_edges - other.final_edges)


def lipschitz_sweep(
    H: PatternGraph,
    n: int,
    m: Optional[int] = None,
    sweeps: int = 1000,
    seed: int = 0,
    replace_prob: float = 0.5,
    identity: bool = False,
    map_fn=map,
) -> dict:
    """Change in the final edge count under one swap or one replacement.

    Replacements need an unused pair, so with ``m = binom(n, 2)`` only swaps
    occur. ``identity`` reruns the unperturbed sequence (a sanity baseline).
    """
    N = n * (n - 1) // 2
    m = truncation_length(n, (H,)) if m is None else int(m)
    if not 0 <= m <= N:
        raise ValueError("m must lie in [0, binom(n, 2)]")
    psi = math.log(n) ** (2 * H.e)
    limit = 2 * H.e * psi
    res = list(
        map_fn(
            partial(_lipschitz_sample, n=n, H=H, m=m, seed=seed, psi=psi, replace_prob=replace_prob, identity=identity),
            range(sweeps),
        )
    )
    good = [r for r in res if r[1]]
    violations = [i for i, r in enumerate(res) if r[1] and r[2] > limit]
    kinds = Counter(r[0] for r in res)
    return {
        "pattern": str(H),
        "n": n,
        "m": m,
        "sweeps": sweeps,
        "seed": seed,
        "psi": psi,
        "change_limit": limit,
        "perturbations": {k: kinds[k] for k in sorted(kinds)},
        "good_pairs": len(good),
        "copy_bound_failure_rate": 1.0 - len(good) / sweeps if sweeps else 0.0,
        "max_change": max((r[2] for r in good), default=0),
        "max_change_all": max((r[2] for r in res), default=0),
        "mean_change": float(np.mean([r[2] for r in res])) if res else 0.0,
        "worst_case_scale": min(m, n ** (H.v - 2)),
        "violations": violations,
    }


# ---------------------------------------------------------------------------
# equivalence of the two reverse formulations
# ---------------------------------------------------------------------------


def exact_addition_distribution(n: int, patterns: tuple) -> dict:
    """Final edge count of the traversal rule over every order, as exact probabilities."""
    cfg = ProcessConfig(n=n, patterns=tuple(patterns))
    N = cfg.n_pairs
    counts = Counter()
    total = 0
    for perm in itertools.permutations(range(N)):
        counts[run_order(cfg, np.array(perm, dtype=np.int64)).final_edges] += 1
        total += 1
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


def exact_removal_distribution(n: int, patterns: tuple) -> dict:
    """Final edge count of the removal rule by recursion over edge sets."""
    cfg = ProcessConfig(n=n, patterns=tuple(patterns))
    us, vs = edge_table(n)
    plans = cfg.plans
    memo: dict = {}

    def live_edges(state):
        G = HostGraph.from_edges(n, ((int(us[k]), int(vs[k])) for k in state))
        return [k for k in state if completes_any(G, plans, (int(us[k]), int(vs[k])))]

    def dist(state):
        if state in memo:
            return memo[state]
        live = live_edges(state)
        if not live:
            out = {len(state): Fraction(1)}
        else:
            out = Counter()
            w = Fraction(1, len(live))
            for k in live:
                for size, pr in dist(state - {k}).items():
                    out[size] += w * pr
            out = dict(out)
        memo[state] = out
        return out

    return dict(sorted(dist(frozenset(range(cfg.n_pairs))).items()))


def _pair_sample(i: int, n: int, patterns: tuple, seed: int):
    add = ProcessConfig(n=n, patterns=patterns, seed=seed, replication_index=i)
    rem = add.with_(variant="reverse_removal")
    return run_order(add, draw_permutation(add)).final_edges, reverse_removal_run(rem).final_edges


def equivalence_chi2(n: int, patterns: tuple, runs: int, seed: int = 0, map_fn=map) -> dict:
    """Chi-square homogeneity test between the two formulations' final counts."""
    pats = tuple(patterns)
    res = list(map_fn(partial(_pair_sample, n=n, patterns=pats, seed=seed), range(runs)))
    a = Counter(r[0] for r in res)
    b = Counter(r[1] for r in res)
    support = sorted(set(a) | set(b))
    table = np.array([[a[k] for k in support], [b[k] for k in support]])
    if len(support) < 2:
        stat, pval = 0.0, 1.0
    else:
        stat, pval, _, _ = stats.chi2_contingency(table)
    return {
        "n": n,
        "patterns": [str(H) for H in pats],
        "runs": runs,
        "seed": seed,
        "support": support,
        "addition_counts": [a[k] for k in support],
        "removal_counts": [b[k] for k in support],
        "chi2": float(stat),
        "p_value": float(pval),
    }
