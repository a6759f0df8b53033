"""Closed-form tail bounds for functions of independent variables.

Every function here is pure. Each returns a :class:`TailBound` carrying the
probability bound together with the quantities it was computed from, so
callers can compare exponents directly instead of underflowing to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "LipschitzProfile",
    "TailBound",
    "QueryAggregate",
    "phi",
    "bernstein_exponent",
    "bennett_exponent",
    "bdi_bound",
    "tbdi_bound",
    "tbdi_bernoulli_bound",
    "two_sided_error",
    "truncation_bound",
    "dynamic_aggregate_bound",
    "janson_zero_bound",
]


def _as_array(name, values, n):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LipschitzProfile:
    """Per-coordinate Lipschitz data for ``N`` independent coordinates.

    ``c`` are the typical coefficients (valid on the good event), ``d`` the
    worst-case ones, ``gamma`` the compensation factors. ``p`` (success
    probabilities) is needed by the 0-1 variants, ``q`` (lower bound on the
    smallest outcome probability) by the two-sided variant.
    """

    c: np.ndarray
    d: np.ndarray
    gamma: np.ndarray
    p: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1 or c.shape[0] == 0:
            raise ValueError("c must be a non-empty 1-d sequence")
        n = c.shape[0]
        d = _as_array("d", self.d, n)
        gamma = _as_array("gamma", self.gamma, n)
        if np.any(c < 0) or np.any(d < 0):
            raise ValueError("Lipschitz coefficients must be non-negative")
        if np.any(c > d):
            raise ValueError("typical coefficients must satisfy c_k <= d_k")
        if np.any(gamma <= 0) or np.any(gamma > 1):
            raise ValueError("gamma_k must lie in (0, 1]")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "gamma", gamma)
        if self.p is not None:
            p = _as_array("p", self.p, n)
            if np.any(p < 0) or np.any(p > 1):
                raise ValueError("p_k must lie in [0, 1]")
            object.__setattr__(self, "p", p)
        if self.q is not None:
            q = _as_array("q", self.q, n)
            if np.any(q <= 0) or np.any(q > 1):
                raise ValueError("q_k must lie in (0, 1]")
            object.__setattr__(self, "q", q)

    @property
    def N(self) -> int:
        return int(self.c.shape[0])

    @classmethod
    def uniform(cls, N, c, d=None, gamma=1.0, p=None, q=None) -> "LipschitzProfile":
        """Profile with identical parameters in every coordinate."""
        full = lambda x: None if x is None else np.full(N, float(x))
        return cls(c=full(c), d=full(c if d is None else d), gamma=full(gamma), p=full(p), q=full(q))

    @classmethod
    def worst_case(cls, c, p=None) -> "LipschitzProfile":
        """Profile for the classical condition: ``d = c``, ``gamma = 1``."""
        c = np.asarray(c, dtype=float)
        return cls(c=c, d=c.copy(), gamma=np.ones_like(c), p=p)

    def errors(self) -> np.ndarray:
        """One-sided error terms ``gamma_k (d_k - c_k)``."""
        return self.gamma * (self.d - self.c)

    def to_dict(self) -> dict:
        out = {"c": self.c.tolist(), "d": self.d.tolist(), "gamma": self.gamma.tolist()}
        if self.p is not None:
            out["p"] = self.p.tolist()
        if self.q is not None:
            out["q"] = self.q.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LipschitzProfile":
        c = data["c"]
        return cls(
            c=c,
            d=data.get("d", c),
            gamma=data.get("gamma", [1.0] * len(c)),
            p=data.get("p"),
            q=data.get("q"),
        )


@dataclass(frozen=True)
class TailBound:
    value: float
    exponent: float
    variance_term: float = math.nan
    max_term: float = math.nan
    error_terms: tuple = ()
    bad_budget: Optional[float] = None
    shift: float = 0.0

    @classmethod
    def from_exponent(cls, exponent: float, **kw) -> "TailBound":
        exponent = max(0.0, float(exponent))
        value = min(1.0, math.exp(-exponent))
        errs = kw.pop("error_terms", ())
        return cls(value=value, exponent=exponent, error_terms=tuple(float(e) for e in errs), **kw)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "exponent": self.exponent,
            "variance_term": self.variance_term,
            "max_term": self.max_term,
            "error_terms": list(self.error_terms),
            "bad_budget": self.bad_budget,
            "shift": self.shift,
        }


@dataclass(frozen=True)
class QueryAggregate:
    """Per-query-set summaries for adaptive exposure strategies.

    ``sums[i]`` is the squared-coefficient sum over query set ``i``;
    ``variances[i]`` the matching ``(1-p)p``-weighted sum (0-1 variant only);
    ``maxima[i]`` the largest coefficient in that set.
    """

    sums: tuple
    maxima: tuple = ()
    variances: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "sums", tuple(float(s) for s in self.sums))
        object.__setattr__(self, "maxima", tuple(float(s) for s in self.maxima))
        object.__setattr__(self, "variances", tuple(float(s) for s in self.variances))
        if not self.sums:
            raise ValueError("query-set family must be non-empty")
        for name in ("sums", "maxima", "variances"):
            vals = getattr(self, name)
            if any(v < 0 or not math.isfinite(v) for v in vals):
                raise ValueError(f"{name} must be finite and non-negative")
        if self.maxima and len(self.maxima) != len(self.sums):
            raise ValueError("maxima must match sums in length")
        if self.variances and len(self.variances) != len(self.sums):
            raise ValueError("variances must match sums in length")

    @classmethod
    def from_profile(cls, profile: LipschitzProfile, query_sets, errors=None) -> "QueryAggregate":
        """Summaries of ``profile`` over the given index sets."""
        e = profile.errors() if errors is None else np.asarray(errors, dtype=float)
        delta = profile.c + e
        sums, maxima, variances = [], [], []
        for Q in query_sets:
            idx = np.asarray(sorted(Q), dtype=int)
            if idx.size == 0:
                raise ValueError("query sets must be non-empty")
            sums.append(float(np.sum(delta[idx] ** 2)))
            maxima.append(float(np.max(delta[idx])))
            if profile.p is not None:
                p = profile.p[idx]
                variances.append(float(np.sum((1 - p) * p * delta[idx] ** 2)))
        return cls(sums=sums, maxima=maxima, variances=variances)


def phi(x: float) -> float:
    """Bennett's function ``(1+x) log(1+x) - x``."""
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ValueError("phi is defined for x >= 0")
    if math.isinf(x):
        return math.inf
    if x < 1e-3:
        # sum_{k>=2} (-1)^k x^k / (k (k-1)); avoids cancellation near 0
        total, term, k = 0.0, x, 2
        while True:
            term *= x
            contrib = term / (k * (k - 1))
            total += contrib if k % 2 == 0 else -contrib
            if contrib < 1e-18 * max(total, 1e-300) or k > 40:
                return total
            k += 1
    return (1.0 + x) * math.log1p(x) - x


def bernstein_exponent(V: float, C: float, t: float) -> float:
    """``t^2 / (2V + 2Ct/3)``; infinite when the denominator vanishes and t > 0."""
    if t <= 0:
        return 0.0
    denom = 2.0 * V + 2.0 * C * t / 3.0
    return math.inf if denom <= 0 else t * t / denom


def bennett_exponent(V: float, C: float, t: float) -> float:
    """``V/C^2 * phi(Ct/V)`` with the limits for ``V = 0`` or ``C = 0``."""
    if t <= 0:
        return 0.0
    if V <= 0:
        return math.inf
    if C <= 0:
        # phi(x) ~ x^2/2 as x -> 0, giving the Gaussian exponent
        return t * t / (2.0 * V)
    return V / (C * C) * phi(C * t / V)


def _check_t(t):
    t = float(t)
    if t < 0 or math.isnan(t):
        raise ValueError("t must be non-negative")
    return t


def _budget(profile: LipschitzProfile, gamma_fail):
    if gamma_fail is None:
        return None
    gamma_fail = float(gamma_fail)
    if not 0.0 <= gamma_fail <= 1.0:
        raise ValueError("gamma_fail must be a probability")
    return min(1.0, float(np.sum(1.0 / profile.gamma)) * gamma_fail)


def bdi_bound(profile: LipschitzProfile, t: float) -> TailBound:
    """Classical bounded differences bound ``exp(-2t^2 / sum c_k^2)``."""
    t = _check_t(t)
    s = float(np.sum(profile.c ** 2))
    if t == 0:
        exponent = 0.0
    elif s == 0:
        exponent = math.inf
    else:
        exponent = 2.0 * t * t / s
    return TailBound.from_exponent(exponent, variance_term=s, max_term=float(np.max(profile.c)))


def tbdi_bound(
    profile: LipschitzProfile,
    t: float,
    gamma_fail: Optional[float] = None,
    two_valued: bool = False,
    errors: Optional[Sequence[float]] = None,
) -> TailBound:
    """Typical bounded differences bound.

    Bounds ``P(f >= mu + t and not B)`` by ``exp(-t^2 / (2 sum (c_k+e_k)^2))``
    with ``e_k = gamma_k (d_k - c_k)``; ``two_valued`` multiplies the exponent
    by 4 (every coordinate binary). ``errors`` overrides ``e_k``, e.g. with
    :func:`two_sided_error`. With ``gamma_fail = P(X not in Gamma)`` the bad
    event budget ``sum_k gamma_fail / gamma_k`` is attached.
    """
    t = _check_t(t)
    e = profile.errors() if errors is None else _as_array("errors", errors, profile.N)
    if np.any(e < 0):
        raise ValueError("error terms must be non-negative")
    delta = profile.c + e
    s = float(np.sum(delta ** 2))
    if t == 0:
        exponent = 0.0
    elif s == 0:
        exponent = math.inf
    else:
        exponent = t * t / (2.0 * s)
        if two_valued:
            exponent *= 4.0
    return TailBound.from_exponent(
        exponent,
        variance_term=s,
        max_term=float(np.max(delta)),
        error_terms=e,
        bad_budget=_budget(profile, gamma_fail),
    )


def tbdi_bernoulli_bound(
    profile: LipschitzProfile,
    t: float,
    bennett: bool = False,
    asymmetric: bool = False,
    monotone_bad_prob: Optional[float] = None,
    gamma_fail: Optional[float] = None,
    errors: Optional[Sequence[float]] = None,
) -> TailBound:
    """Bernstein-type bound for 0-1 (or dominated-outcome) coordinates.

    ``V = sum (1-p_k) p_k (c_k+e_k)^2`` and ``C = max (c_k+e_k)``. With
    ``asymmetric`` the ``(1-p_k)`` factor is dropped and ``c_k+e_k`` becomes
    ``c_k + e_k/(1-p_k)`` inside ``V``; here ``p_k`` bounds the probability of
    leaving the most likely outcome. ``monotone_bad_prob`` divides the value
    by ``1 - P(B)``, valid when f and the good event share a monotonicity.
    """
    t = _check_t(t)
    if profile.p is None:
        raise ValueError("profile.p is required for the 0-1 bound")
    p = profile.p
    e = profile.errors() if errors is None else _as_array("errors", errors, profile.N)
    if np.any(e < 0):
        raise ValueError("error terms must be non-negative")
    delta = profile.c + e
    C = float(np.max(delta))
    if asymmetric:
        if np.any(p >= 1):
            raise ValueError("asymmetric variant needs p_k < 1")
        V = float(np.sum(p * (profile.c + e / (1.0 - p)) ** 2))
    else:
        V = float(np.sum((1.0 - p) * p * delta ** 2))
    exponent = bennett_exponent(V, C, t) if bennett else bernstein_exponent(V, C, t)
    if monotone_bad_prob is not None:
        pb = float(monotone_bad_prob)
        if not 0.0 <= pb < 1.0:
            raise ValueError("monotone_bad_prob must lie in [0, 1)")
        if math.isfinite(exponent):
            exponent += math.log1p(-pb)
    return TailBound.from_exponent(
        exponent,
        variance_term=V,
        max_term=C,
        error_terms=e,
        bad_budget=_budget(profile, gamma_fail),
    )


def two_sided_error(profile: LipschitzProfile) -> np.ndarray:
    """Error terms ``2 gamma_k (d_k - c_k) / q_k`` for the two-sided condition."""
    if profile.q is None:
        raise ValueError("profile.q is required for the two-sided error terms")
    return 2.0 * profile.gamma * (profile.d - profile.c) / profile.q


def truncation_bound(
    profile: LipschitzProfile,
    t: float,
    s: float,
    gamma_fail: float,
    monotone: bool = False,
    two_valued: bool = False,
) -> TailBound:
    """Bound for ``P(f >= mu + t + shift and not B)`` under local good events.

    ``s`` bounds ``|f(x) - f(y)|`` globally; ``shift = s * gamma_fail`` unless
    ``monotone`` (then 0). ``two_valued`` is only sound when the good event is
    itself a product of the local events.
    """
    s = float(s)
    if s < 0:
        raise ValueError("s must be non-negative")
    base = tbdi_bound(profile, t, gamma_fail=gamma_fail, two_valued=two_valued)
    shift = 0.0 if monotone else s * float(gamma_fail)
    return TailBound(
        value=base.value,
        exponent=base.exponent,
        variance_term=base.variance_term,
        max_term=base.max_term,
        error_terms=base.error_terms,
        bad_budget=base.bad_budget,
        shift=shift,
    )


def dynamic_aggregate_bound(agg: QueryAggregate, t: float, variant: str = "tbdi", two_valued: bool = False) -> TailBound:
    """Base bound with sums/maxima replaced by their worst query set.

    ``variant`` is one of ``bdi``, ``tbdi``, ``tbdi_bernoulli``. For ``bdi`` the
    sums are read as ``sum c_k^2``.
    """
    t = _check_t(t)
    S = max(agg.sums)
    if variant == "bdi":
        exponent = 0.0 if t == 0 else (math.inf if S == 0 else 2.0 * t * t / S)
        return TailBound.from_exponent(exponent, variance_term=S, max_term=max(agg.maxima, default=math.nan))
    if variant == "tbdi":
        exponent = 0.0 if t == 0 else (math.inf if S == 0 else t * t / (2.0 * S))
        if two_valued and t > 0:
            exponent *= 4.0
        return TailBound.from_exponent(exponent, variance_term=S, max_term=max(agg.maxima, default=math.nan))
    if variant == "tbdi_bernoulli":
        if not agg.variances or not agg.maxima:
            raise ValueError("0-1 variant needs variances and maxima")
        V, C = max(agg.variances), max(agg.maxima)
        return TailBound.from_exponent(bernstein_exponent(V, C, t), variance_term=V, max_term=C)
    raise ValueError(f"unknown variant {variant!r}")


def janson_zero_bound(mu: float, delta: float) -> float:
    """Janson's bound ``exp(-mu^2 / (mu + 2 delta))`` on ``P(count = 0)``."""
    mu, delta = float(mu), float(delta)
    if mu < 0 or delta < 0:
        raise ValueError("mu and delta must be non-negative")
    if mu == 0:
        return 1.0
    return math.exp(-mu * mu / (mu + 2.0 * delta))
