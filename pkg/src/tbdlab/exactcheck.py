"""Exact verification of the tail bounds on small product spaces.

A :class:`FiniteProductSpace` stores ``f`` and the good event as full truth
tables over ``prod_k {0, ..., |Lambda_k| - 1}``. Conditional expectations
given the first ``k`` coordinates are obtained by contracting trailing axes
against the coordinate weights, one axis at a time, so all Doob values are
available for every prefix after ``N`` tensor contractions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import bounds
from .bounds import LipschitzProfile

__all__ = [
    "DEFAULT_ALPHABET_CAP",
    "DEFAULT_SIZE_CAP",
    "EnumerationCapError",
    "FiniteProductSpace",
    "MartingaleTrace",
    "DoobTables",
    "doob_tables",
    "doob_trace",
    "minimal_lipschitz",
    "exact_tbdi_check",
    "martingale_lemma_check",
    "InstanceConfig",
    "random_space",
    "run_suite",
]

DEFAULT_ALPHABET_CAP = 4
DEFAULT_SIZE_CAP = 2 ** 20
ATOL = 1e-10


class EnumerationCapError(ValueError):
    """Raised before enumerating a space larger than the configured cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"product space has {required} points, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class FiniteProductSpace:
    """Independent coordinates with finite alphabets, plus ``f`` and ``Gamma``.

    ``values`` and ``gamma_event`` are arrays of shape ``(|Lambda_1|, ...,
    |Lambda_N|)``. ``local_events`` optionally gives, per coordinate, a boolean
    mask of the local good outcomes used by the truncation variant; when set,
    ``gamma_event`` must lie inside their product.
    """

    weights: tuple
    values: np.ndarray
    gamma_event: np.ndarray
    gamma: np.ndarray
    local_events: Optional[tuple] = None
    alphabet_cap: int = DEFAULT_ALPHABET_CAP
    size_cap: int = DEFAULT_SIZE_CAP

    def __post_init__(self):
        weights = tuple(np.asarray(w, dtype=float) for w in self.weights)
        if not weights:
            raise ValueError("need at least one coordinate")
        shape = tuple(len(w) for w in weights)
        size = math.prod(shape)
        if size > self.size_cap:
            raise EnumerationCapError(size, self.size_cap)
        for k, w in enumerate(weights):
            if len(w) < 1 or len(w) > self.alphabet_cap:
                raise ValueError(f"alphabet {k} has size {len(w)}, cap is {self.alphabet_cap}")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"weights of coordinate {k} must be a probability vector")
        values = np.asarray(self.values, dtype=float)
        event = np.asarray(self.gamma_event, dtype=bool)
        if values.shape != shape or event.shape != shape:
            raise ValueError(f"tables must have shape {shape}")
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (len(shape),) or np.any(gamma <= 0) or np.any(gamma > 1):
            raise ValueError("gamma must hold N values in (0, 1]")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gamma_event", event)
        object.__setattr__(self, "gamma", gamma)
        if self.local_events is not None:
            local = tuple(np.asarray(m, dtype=bool) for m in self.local_events)
            if tuple(len(m) for m in local) != shape:
                raise ValueError("local events must match the alphabets")
            if np.any(event & ~_product_mask(local)):
                raise ValueError("Gamma must lie inside the product of the local events")
            object.__setattr__(self, "local_events", local)

    @property
    def N(self) -> int:
        return len(self.weights)

    @property
    def shape(self) -> tuple:
        return tuple(len(w) for w in self.weights)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def prob_table(self) -> np.ndarray:
        """Probability of every outcome, same shape as ``values``."""
        out = np.ones(())
        for w in self.weights:
            out = np.multiply.outer(out, w)
        return out

    def is_binary(self) -> bool:
        return all(len(w) == 2 for w in self.weights)

    @classmethod
    def from_callables(
        cls,
        weights: Sequence[Sequence[float]],
        f: Callable[[tuple], float],
        in_gamma: Callable[[tuple], bool] = lambda x: True,
        gamma=1.0,
        local_events=None,
        size_cap: int = DEFAULT_SIZE_CAP,
        alphabet_cap: int = DEFAULT_ALPHABET_CAP,
    ) -> "FiniteProductSpace":
        shape = tuple(len(w) for w in weights)
        size = math.prod(shape)
        if size > size_cap:
            raise EnumerationCapError(size, size_cap)
        values = np.empty(shape)
        event = np.empty(shape, dtype=bool)
        for x in itertools.product(*(range(s) for s in shape)):
            values[x] = f(x)
            event[x] = in_gamma(x)
        gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (len(shape),)).copy()
        return cls(
            weights=tuple(weights),
            values=values,
            gamma_event=event,
            gamma=gamma,
            local_events=local_events,
            size_cap=size_cap,
            alphabet_cap=alphabet_cap,
        )

    def to_dict(self) -> dict:
        out = {
            "weights": [w.tolist() for w in self.weights],
            "values": self.values.tolist(),
            "gamma_event": self.gamma_event.astype(int).tolist(),
            "gamma": self.gamma.tolist(),
        }
        if self.local_events is not None:
            out["local_events"] = [m.astype(int).tolist() for m in self.local_events]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteProductSpace":
        local = data.get("local_events")
        return cls(
            weights=tuple(data["weights"]),
            values=np.asarray(data["values"], dtype=float),
            gamma_event=np.asarray(data["gamma_event"], dtype=bool),
            gamma=np.asarray(data["gamma"], dtype=float),
            local_events=None if local is None else tuple(local),
        )


def _product_mask(masks) -> np.ndarray:
    out = np.ones((), dtype=bool)
    for m in masks:
        out = np.logical_and.outer(out, m)
    return out


def _conditional_tables(table: np.ndarray, weights) -> list:
    """``out[k]`` = E(table | first k coordinates), an array of rank ``k``."""
    out = [None] * (len(weights) + 1)
    out[-1] = table
    cur = table
    for k in range(len(weights), 0, -1):
        cur = np.tensordot(cur, weights[k - 1], axes=([k - 1], [0]))
        out[k - 1] = cur
    return out


def _lift(arr: np.ndarray, shape: tuple) -> np.ndarray:
    """Broadcast a prefix-indexed array to the full outcome shape."""
    return np.broadcast_to(arr.reshape(arr.shape + (1,) * (len(shape) - arr.ndim)), shape)


@dataclass
class DoobTables:
    """Doob martingale, bad events and stopping data for every prefix.

    ``Y[k]`` and ``fail[k]`` have rank ``k``; ``bad[k]`` is the rank-``k``
    indicator of ``B_k`` (conditional failure probability above
    ``gamma_{k+1}``) for ``k < N``; ``alive[k]`` marks prefixes with
    ``T >= k``, i.e. none of ``B_0..B_{k-1}`` holds.
    """

    space: FiniteProductSpace
    Y: list
    fail: list
    bad: list
    alive: list

    @property
    def mu(self) -> float:
        return float(self.Y[0])

    def bad_event(self) -> np.ndarray:
        """Full-shape indicator of ``B = not Gamma or some B_k``."""
        shape = self.space.shape
        out = ~self.space.gamma_event
        for k in range(self.space.N):
            out = out | _lift(self.bad[k], shape)
        return out

    def stopping_time(self) -> np.ndarray:
        """Full-shape ``T = min(N, smallest k with B_k)``."""
        shape = self.space.shape
        N = self.space.N
        T = np.full(shape, N, dtype=int)
        for k in range(N - 1, -1, -1):
            T = np.where(_lift(self.bad[k], shape), k, T)
        return T


def doob_tables(space: FiniteProductSpace) -> DoobTables:
    Y = _conditional_tables(space.values, space.weights)
    fail = _conditional_tables((~space.gamma_event).astype(float), space.weights)
    bad = [fail[k] > space.gamma[k] for k in range(space.N)]
    alive = [np.ones((), dtype=bool)]
    for k in range(space.N):
        alive.append(np.broadcast_to((alive[k] & ~bad[k])[..., None], space.shape[: k + 1]))
    return DoobTables(space=space, Y=Y, fail=fail, bad=bad, alive=alive)


@dataclass(frozen=True)
class MartingaleTrace:
    y: tuple
    stop: int
    bad_at: Optional[int] = None


def doob_trace(space: FiniteProductSpace, outcome: Sequence[int], tables: Optional[DoobTables] = None) -> MartingaleTrace:
    """Doob values ``Y_0..Y_N`` along ``outcome`` plus the stopping data.

    ``bad_at`` is the first ``k`` (1-based) for which ``B_{k-1}`` holds, so the
    stopping time is ``bad_at - 1`` when present and ``N`` otherwise.
    """
    tables = tables or doob_tables(space)
    outcome = tuple(int(x) for x in outcome)
    if len(outcome) != space.N:
        raise ValueError("outcome has the wrong length")
    y = tuple(float(tables.Y[k][outcome[:k]]) for k in range(space.N + 1))
    bad_at = None
    for k in range(space.N):
        if tables.bad[k][outcome[:k]]:
            bad_at = k + 1
            break
    stop = space.N if bad_at is None else bad_at - 1
    return MartingaleTrace(y=y, stop=stop, bad_at=bad_at)


def _coordinate_diffs(values: np.ndarray, k: int):
    """Yield ``(a, b, |f(x) - f(x')|)`` over value pairs ``a != b`` of axis ``k``."""
    s = values.shape[k]
    for a in range(s):
        fa = np.take(values, a, axis=k)
        for b in range(s):
            if a != b:
                yield a, b, np.abs(fa - np.take(values, b, axis=k))


def minimal_lipschitz(space: FiniteProductSpace, two_sided: bool = False, restrict_local: bool = False):
    """Smallest ``(c, d)`` satisfying the typical Lipschitz condition.

    ``c_k`` maximises ``|f(x) - f(x')|`` over pairs differing only in
    coordinate ``k`` with ``x`` in Gamma (both in Gamma when ``two_sided``);
    ``d_k`` is the unconditional maximum. ``restrict_local`` only considers
    pairs inside the product of the local events.
    """
    N = space.N
    c = np.zeros(N)
    d = np.zeros(N)
    event = space.gamma_event
    local = _product_mask(space.local_events) if restrict_local else None
    if restrict_local and space.local_events is None:
        raise ValueError("space has no local events")
    for k in range(N):
        for a, b, diff in _coordinate_diffs(space.values, k):
            ga = np.take(event, a, axis=k)
            gb = np.take(event, b, axis=k)
            ok = np.ones_like(ga)
            if local is not None:
                ok = np.take(local, a, axis=k) & np.take(local, b, axis=k)
            if not np.any(ok):
                continue
            d[k] = max(d[k], float(diff[ok].max()))
            typical = ok & ga & gb if two_sided else ok & ga
            if np.any(typical):
                c[k] = max(c[k], float(diff[typical].max()))
    return c, d


def _tail(tables: DoobTables, threshold: float, mask: Optional[np.ndarray] = None) -> float:
    """Exact ``P(f >= threshold [and mask])``; ties within ATOL count as hits."""
    space = tables.space
    hit = space.values >= threshold - 1e-9
    if mask is not None:
        hit = hit & mask
    return float(np.sum(space.prob_table()[hit]))


def _is_monotone_increasing(table: np.ndarray) -> bool:
    for k in range(table.ndim):
        if np.any(np.diff(table.astype(float), axis=k) < -1e-12):
            return False
    return True


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + ATOL

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}


@dataclass
class CheckReport:
    t: float
    mu: float
    bad_prob: float
    gamma_fail: float
    c: np.ndarray
    d: np.ndarray
    checks: list = field(default_factory=list)
    containment: bool = True

    @property
    def ok(self) -> bool:
        return self.containment and all(ch.ok for ch in self.checks)

    def violations(self) -> list:
        out = [ch for ch in self.checks if not ch.ok]
        if not self.containment:
            out.append(CheckResult("not-B inside Gamma", 1.0, 0.0))
        return out

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "mu": self.mu,
            "bad_prob": self.bad_prob,
            "gamma_fail": self.gamma_fail,
            "c": self.c.tolist(),
            "d": self.d.tolist(),
            "containment": self.containment,
            "checks": [ch.to_dict() for ch in self.checks],
        }


def exact_tbdi_check(space: FiniteProductSpace, t: float, tables: Optional[DoobTables] = None) -> CheckReport:
    """Compare exact tail probabilities with every applicable bound.

    Always checked: the typical bound and its bad-event budget, the inclusion
    of not-B in Gamma, and the two-sided variant with ``q_k`` the smallest
    outcome weight. Binary spaces add the factor-4 and 0-1 variants (plus the
    monotone correction when f and Gamma are both increasing); the
    asymmetric variant uses ``p_k = 1 - max weight``. Spaces with local
    events add the truncation variant.
    """
    tables = tables or doob_tables(space)
    mu = tables.mu
    prob = space.prob_table()
    B = tables.bad_event()
    gamma_fail = float(np.sum(prob[~space.gamma_event]))
    bad_prob = float(np.sum(prob[B]))
    containment = not np.any(~B & ~space.gamma_event)
    c, d = minimal_lipschitz(space)
    report = CheckReport(t=t, mu=mu, bad_prob=bad_prob, gamma_fail=gamma_fail, c=c, d=d, containment=containment)
    checks = report.checks

    good_tail = _tail(tables, mu + t, ~B)
    profile = LipschitzProfile(c=c, d=d, gamma=space.gamma)
    tb = bounds.tbdi_bound(profile, t, gamma_fail=gamma_fail)
    checks.append(CheckResult("tbdi", good_tail, tb.value))
    checks.append(CheckResult("bad budget", bad_prob, tb.bad_budget))

    if gamma_fail == 0.0:
        worst = LipschitzProfile.worst_case(d)
        checks.append(CheckResult("bdi", _tail(tables, mu + t), bounds.bdi_bound(worst, t).value))

    q = np.array([w.min() for w in space.weights])
    if np.all(q > 0):
        c2, d2 = minimal_lipschitz(space, two_sided=True)
        prof2 = LipschitzProfile(c=c2, d=d2, gamma=space.gamma, q=q)
        e2 = bounds.two_sided_error(prof2)
        checks.append(CheckResult("two-sided tbdi", good_tail, bounds.tbdi_bound(prof2, t, errors=e2).value))
    else:
        prof2 = e2 = None

    binary = space.is_binary()
    if binary:
        p = np.array([w[1] for w in space.weights])
        bprof = LipschitzProfile(c=c, d=d, gamma=space.gamma, p=p)
        checks.append(CheckResult("tbdi x4", good_tail, bounds.tbdi_bound(profile, t, two_valued=True).value))
        bern = bounds.tbdi_bernoulli_bound(bprof, t)
        checks.append(CheckResult("bernoulli", good_tail, bern.value))
        checks.append(CheckResult("bennett", good_tail, bounds.tbdi_bernoulli_bound(bprof, t, bennett=True).value))
        if prof2 is not None:
            bprof2 = LipschitzProfile(c=prof2.c, d=prof2.d, gamma=space.gamma, p=p, q=q)
            checks.append(CheckResult("two-sided tbdi x4", good_tail, bounds.tbdi_bound(prof2, t, two_valued=True, errors=e2).value))
            checks.append(CheckResult("two-sided bernoulli", good_tail, bounds.tbdi_bernoulli_bound(bprof2, t, errors=e2).value))
        if (
            bad_prob < 1.0
            and _is_monotone_increasing(space.values)
            and _is_monotone_increasing(space.gamma_event)
        ):
            mono = bounds.tbdi_bernoulli_bound(bprof, t, monotone_bad_prob=bad_prob)
            checks.append(CheckResult("bernoulli monotone", _tail(tables, mu + t), mono.value))

    pa = np.array([1.0 - w.max() for w in space.weights])
    if np.all(pa < 1):
        aprof = LipschitzProfile(c=c, d=d, gamma=space.gamma, p=pa)
        checks.append(CheckResult("asymmetric", good_tail, bounds.tbdi_bernoulli_bound(aprof, t, asymmetric=True).value))
        checks.append(
            CheckResult("asymmetric bennett", good_tail, bounds.tbdi_bernoulli_bound(aprof, t, asymmetric=True, bennett=True).value)
        )

    if space.local_events is not None:
        _truncation_checks(space, tables, t, B, gamma_fail, checks)
    return report


def _truncation_checks(space, tables, t, B, gamma_fail, checks):
    cl, dl = minimal_lipschitz(space, restrict_local=True)
    s = float(space.values.max() - space.values.min())
    prof = LipschitzProfile(c=cl, d=dl, gamma=space.gamma)
    tr = bounds.truncation_bound(prof, t, s=s, gamma_fail=gamma_fail)
    mu = tables.mu
    checks.append(CheckResult("truncation", _tail(tables, mu + t + tr.shift, ~B), tr.value))
    if _local_monotone(space):
        tr0 = bounds.truncation_bound(prof, t, s=s, gamma_fail=gamma_fail, monotone=True)
        checks.append(CheckResult("truncation monotone", _tail(tables, mu + t, ~B), tr0.value))
    local = _product_mask(space.local_events)
    if np.array_equal(local, space.gamma_event):
        # product good event: B may be taken as not-Gamma, e_k = 0, factor 4
        prof0 = LipschitzProfile.worst_case(cl)
        val = bounds.tbdi_bound(prof0, t, two_valued=True).value
        checks.append(CheckResult("truncation product", _tail(tables, mu + t + tr.shift, space.gamma_event), val))


def _local_monotone(space: FiniteProductSpace) -> bool:
    """f(x) >= f(x') whenever x_k is locally bad and x'_k locally good."""
    for k, mask in enumerate(space.local_events):
        for a, b in itertools.product(np.flatnonzero(~mask), np.flatnonzero(mask)):
            fa = np.take(space.values, a, axis=k)
            fb = np.take(space.values, b, axis=k)
            if np.any(fa < fb - 1e-12):
                return False
    return True


@dataclass
class LemmaReport:
    t: float
    checks: list = field(default_factory=list)
    martingale_ok: bool = True
    variance_ok: bool = True

    @property
    def ok(self) -> bool:
        return self.martingale_ok and self.variance_ok and all(ch.ok for ch in self.checks)

    def violations(self) -> list:
        out = [ch for ch in self.checks if not ch.ok]
        if not self.martingale_ok:
            out.append(CheckResult("martingale property", 1.0, 0.0))
        if not self.variance_ok:
            out.append(CheckResult("V_k <= S_k/4", 1.0, 0.0))
        return out


def _stopped_increments(tables: DoobTables):
    """Per k: prefix-level increment table of the stopped martingale and its
    conditional range / variance over positive-weight next values."""
    space = tables.space
    out = []
    for k in range(1, space.N + 1):
        w = space.weights[k - 1]
        dY = tables.Y[k] - tables.Y[k - 1][..., None]
        dM = np.where(tables.alive[k], dY, 0.0)
        pos = w > 0
        U = dM[..., pos].max(axis=-1)
        L = dM[..., pos].min(axis=-1)
        mean = np.tensordot(dM, w, axes=([k - 1], [0]))
        var = np.tensordot(dM ** 2, w, axes=([k - 1], [0]))
        out.append((dM, L, U, mean, var))
    return out


def martingale_lemma_check(space: FiniteProductSpace, t: float, tables: Optional[DoobTables] = None) -> LemmaReport:
    """Check both martingale inequalities exactly on the stopped Doob martingale.

    The bounds ``L_k``/``U_k`` are the exact conditional min/max of the next
    increment. Thresholds ``S``, ``V``, ``C`` are taken from the realised
    pathwise values (every distinct final value, plus the maxima), so each
    inequality is tested on several non-trivial events.
    """
    tables = tables or doob_tables(space)
    shape = space.shape
    N = space.N
    prob = space.prob_table()
    incs = _stopped_increments(tables)
    report = LemmaReport(t=t)

    M0 = tables.mu
    M = []
    S = []
    V = []
    Cm = []
    s_acc = np.zeros(shape)
    v_acc = np.zeros(shape)
    c_acc = np.full(shape, -np.inf)
    cur = np.full(shape, M0)
    for k, (dM, L, U, mean, var) in enumerate(incs, start=1):
        if np.any(np.abs(mean) > ATOL):
            report.martingale_ok = False
        cur = cur + _lift(dM, shape)
        s_acc = s_acc + _lift((U - L) ** 2, shape)
        v_acc = v_acc + _lift(var, shape)
        c_acc = np.maximum(c_acc, _lift(U, shape))
        M.append(cur)
        S.append(s_acc)
        V.append(v_acc)
        Cm.append(c_acc)
    if np.any(V[-1] > S[-1] / 4.0 + ATOL) or any(np.any(v > s / 4.0 + ATOL) for v, s in zip(V, S)):
        report.variance_ok = False
    if abs(float(np.sum(prob * M[-1])) - M0) > 1e-9:
        report.martingale_ok = False

    hit = [m >= M0 + t - 1e-9 for m in M]

    s_vals = sorted({float(x) for x in np.unique(S[-1]) if x > 0})
    for s_thr in _thin(s_vals):
        ev = np.zeros(shape, dtype=bool)
        for k in range(N):
            ev |= hit[k] & (S[k] <= s_thr + 1e-12)
        lhs = float(np.sum(prob[ev]))
        rhs = math.exp(-2.0 * t * t / s_thr) if t > 0 else 1.0
        report.checks.append(CheckResult(f"lemma-hoeffding S={s_thr:.6g}", lhs, rhs))

    v_vals = sorted({float(x) for x in np.unique(V[-1]) if x > 0})
    c_vals = sorted({float(x) for x in np.unique(Cm[-1]) if x > 0})
    for v_thr in _thin(v_vals):
        for c_thr in _thin(c_vals, 3):
            ev = np.zeros(shape, dtype=bool)
            for k in range(N):
                ev |= hit[k] & (V[k] <= v_thr + 1e-12) & (Cm[k] <= c_thr + 1e-12)
            lhs = float(np.sum(prob[ev]))
            ben = math.exp(-bounds.bennett_exponent(v_thr, c_thr, t))
            bern = math.exp(-bounds.bernstein_exponent(v_thr, c_thr, t))
            report.checks.append(CheckResult(f"lemma-bennett V={v_thr:.6g} C={c_thr:.6g}", lhs, ben))
            report.checks.append(CheckResult(f"bennett<=bernstein V={v_thr:.6g} C={c_thr:.6g}", ben, bern))
    return report


def _thin(vals, k=5):
    if len(vals) <= k:
        return vals
    idx = np.unique(np.linspace(0, len(vals) - 1, k).round().astype(int))
    return [vals[i] for i in idx]


# ---------------------------------------------------------------------------
# randomized instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceConfig:
    """Distribution of random test spaces.

    ``N`` is uniform on ``[n_min, n_max]``; alphabet sizes are drawn from
    ``alphabet_sizes``; every weight is a positive multiple of
    ``1/weight_grid``. ``f`` is one of: random integer table, random monotone
    table, smooth sum with a rare large jump. Gamma is either everything, a
    random set with failure density from ``fail_densities``, or the
    complement of the jump region. ``gamma`` values are drawn per coordinate
    from ``gamma_choices`` (``None`` means uniform on [0.05, 1]).
    ``local_prob`` is the chance of attaching local events.
    """

    n_min: int = 1
    n_max: int = 8
    alphabet_sizes: tuple = (2, 3)
    weight_grid: int = 16
    fail_densities: tuple = (0.0, 0.01, 0.05, 0.2, 0.5)
    gamma_choices: tuple = (1.0, 0.5, 0.3, 0.1, None)
    local_prob: float = 0.3
    max_value: int = 6


def _random_weights(rng, size, grid):
    # composition of `grid` into `size` positive parts
    cuts = np.sort(rng.choice(np.arange(1, grid), size=size - 1, replace=False))
    parts = np.diff(np.concatenate(([0], cuts, [grid])))
    return parts / grid


def _monotone_table(rng, shape, max_value):
    base = rng.integers(0, 3, size=shape).astype(float)
    out = base
    for k in range(len(shape)):
        out = np.cumsum(out, axis=k)
    return np.round(out * max_value / max(out.max(), 1.0))


def random_space(rng: np.random.Generator, config: InstanceConfig = InstanceConfig()) -> FiniteProductSpace:
    N = int(rng.integers(config.n_min, config.n_max + 1))
    sizes = rng.choice(config.alphabet_sizes, size=N)
    if rng.random() < 0.4:
        sizes = np.full(N, 2)
    weights = tuple(_random_weights(rng, int(s), config.weight_grid) for s in sizes)
    shape = tuple(int(s) for s in sizes)

    kind = rng.integers(0, 3)
    jump = np.zeros(shape, dtype=bool)
    if kind == 0:
        values = rng.integers(0, config.max_value + 1, size=shape).astype(float)
    elif kind == 1:
        values = _monotone_table(rng, shape, config.max_value)
    else:
        grids = np.meshgrid(*(np.arange(s) for s in shape), indexing="ij")
        values = sum(g.astype(float) for g in grids)
        target = tuple(int(rng.integers(0, s)) for s in shape)
        jump = np.ones(shape, dtype=bool)
        for k, g in enumerate(grids[: max(1, N // 2)]):
            jump &= g == target[k]
        values = values + config.max_value * jump

    mode = rng.integers(0, 3)
    if mode == 0:
        event = np.ones(shape, dtype=bool)
    elif mode == 1 and kind == 2:
        event = ~jump
    else:
        rho = float(rng.choice(config.fail_densities))
        event = rng.random(shape) >= rho
        if kind == 1 and rng.random() < 0.5:
            # monotone increasing good event: up-closure complement
            event = _monotone_table(rng, shape, 1) >= 0.5 if rng.random() < 0.5 else _up_closure(event)

    gam = []
    for _ in range(N):
        g = config.gamma_choices[int(rng.integers(0, len(config.gamma_choices)))]
        gam.append(float(rng.uniform(0.05, 1.0)) if g is None else float(g))

    local = None
    if rng.random() < config.local_prob:
        masks = []
        for s in shape:
            m = rng.random(s) < 0.75
            if not m.any():
                m[int(rng.integers(0, s))] = True
            masks.append(m)
        local = tuple(masks)
        event = event & _product_mask(local)
    return FiniteProductSpace(weights=weights, values=values, gamma_event=event, gamma=np.array(gam), local_events=local)


def _up_closure(event: np.ndarray) -> np.ndarray:
    """Largest increasing subset of ``event``: x with every y >= x in event."""
    out = event.copy()
    for k in range(event.ndim):
        # y >= x coordinatewise: reverse cumulative AND along each axis
        out = np.flip(np.logical_and.accumulate(np.flip(out, axis=k), axis=k), axis=k)
    return out


def t_grid(space: FiniteProductSpace, factors=(0.5, 1.0, 2.0)) -> list:
    spread = float(space.values.max() - space.values.min())
    if spread == 0:
        spread = 1.0
    return [f * spread / 4.0 for f in factors]


@dataclass
class SuiteResult:
    instances: int
    checks: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def run_suite(
    instances: int,
    seed: int,
    config: InstanceConfig = InstanceConfig(),
    lemmas: bool = False,
    map_fn=map,
) -> SuiteResult:
    """Fuzz the bounds (or the martingale lemmas) on random spaces.

    Each instance ``i`` is generated from its own stream keyed by
    ``(seed, i)``. Violations are returned as replayable records.
    """
    from functools import partial

    work = partial(_suite_instance, seed=seed, config=config, lemmas=lemmas)
    total = 0
    bad = []
    for n_checks, records in map_fn(work, range(instances)):
        total += n_checks
        bad.extend(records)
    return SuiteResult(instances=instances, checks=total, violations=bad)


def _suite_instance(i: int, seed: int, config: InstanceConfig, lemmas: bool):
    from .rng import stream

    rng = stream(seed, i, "exactcheck")
    space = random_space(rng, config)
    tables = doob_tables(space)
    n_checks = 0
    records = []
    for t in t_grid(space):
        rep = martingale_lemma_check(space, t, tables) if lemmas else exact_tbdi_check(space, t, tables)
        n_checks += len(rep.checks) + 1
        for v in rep.violations():
            records.append({"instance": i, "seed": seed, "t": t, "check": v.to_dict(), "space": space.to_dict()})
    return n_checks, records
