import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tbdlab.graphs import named_pattern
from tbdlab.harness import (
    ExponentFit,
    ReverseConfig,
    TailEstimate,
    TriangleConfig,
    coupling_experiment,
    equivalence_chi2,
    estimate_tail,
    exact_addition_distribution,
    exact_removal_distribution,
    lipschitz_sweep,
    reverse_process_experiment,
    triangle_bounds,
    triangle_experiment,
)

K3 = named_pattern("K3")


def always(rng):
    return True


def never(rng):
    return False


def coin(rng):
    return rng.random() < 0.5


def test_tail_always_and_never():
    t = estimate_tail(always, 50, seed=1)
    assert t.point == 1.0 and t.ci_high == 1.0 and t.ci_low < 1.0
    f = estimate_tail(never, 50, seed=1)
    assert f.point == 0.0 and f.ci_low == 0.0 and f.ci_high > 0.0
    with pytest.raises(ValueError):
        estimate_tail(always, 0, seed=1)


def test_fair_coin_interval_contains_half():
    est = estimate_tail(coin, 10_000, seed=3)
    assert est.ci_low <= 0.5 <= est.ci_high


def _coverage(level, metas, trials, seed):
    rng = np.random.default_rng(seed)
    hits = rng.binomial(trials, 0.5, size=metas)
    a = (1 - level) / 2
    lo = np.where(hits == 0, 0.0, stats.beta.ppf(a, hits, trials - hits + 1))
    hi = np.where(hits == trials, 1.0, stats.beta.ppf(1 - a, hits + 1, trials - hits))
    return float(np.mean((lo <= 0.5) & (0.5 <= hi)))


def test_clopper_pearson_coverage():
    metas, trials = 20_000, 10_000
    se = lambda p: math.sqrt(p * (1 - p) / metas)
    assert _coverage(0.95, metas, trials, 1) >= 0.95 - 3 * se(0.95)
    assert _coverage(0.99, metas, trials, 2) >= 0.99 - 3 * se(0.99)
    # the scalar path agrees with the vectorised one
    est = TailEstimate.from_counts(4_950, trials, level=0.99)
    assert est.ci_low == pytest.approx(stats.beta.ppf(0.005, 4_950, trials - 4_950 + 1))


@given(st.integers(1, 500), st.data())
def test_tail_estimate_invariants(trials, data):
    hits = data.draw(st.integers(0, trials))
    est = TailEstimate.from_counts(hits, trials)
    assert 0.0 <= est.ci_low <= est.point <= est.ci_high <= 1.0
    assert est.point == hits / trials


@given(st.floats(0.1, 100.0), st.floats(-3.0, 3.0), st.lists(st.floats(2.0, 1e4), min_size=3, max_size=8, unique=True))
def test_exponent_fit_recovers_power_law(a, b, xs):
    ys = [a * x ** b for x in xs]
    if max(xs) / min(xs) < 1.5:
        return
    fit = ExponentFit.fit(xs, ys)
    assert abs(fit.slope - b) <= 1e-9
    assert 0.0 <= fit.r2 <= 1.0 and len(fit.points) == len(xs)


def test_exponent_fit_needs_three_points():
    with pytest.raises(ValueError):
        ExponentFit.fit([1, 2], [1, 2])
    with pytest.raises(ValueError):
        ExponentFit.fit([1, 2, 3], [1, 0, 2])


def test_triangle_bounds_separation():
    n = 200
    p = n ** (-1 / 3)
    t = 0.5 * math.comb(n, 3) * p ** 3
    b = triangle_bounds(n, p, t)
    assert b["bdi"].value >= 0.9
    assert b["tbdi"].value <= 1e-3
    assert b["c"] == 11
    assert b["tbdi_general"].value > b["tbdi"].value
    assert b["tbdi_bennett"].value <= b["tbdi_bernoulli"].value


def test_triangle_experiment_small():
    rep = triangle_experiment(TriangleConfig(n=40, p=0.15, trials=200, seed=4))
    assert rep["mu"] == pytest.approx(math.comb(40, 3) * 0.15 ** 3)
    assert abs(rep["mu_hat"] - rep["mu"]) < 0.2 * rep["mu"]
    for key in ("empirical_upper", "empirical_lower", "empirical_two_sided", "gamma_failure"):
        e = rep[key]
        assert e["ci_low"] <= e["point"] <= e["ci_high"]
    assert rep == triangle_experiment(TriangleConfig(n=40, p=0.15, trials=200, seed=4))


def test_triangle_experiment_tail_within_bound():
    rep = triangle_experiment(TriangleConfig(n=200, p=200 ** -0.55, t_rel=0.5, trials=2000, seed=1))
    assert all(rep["checks"].values())


@pytest.mark.xfail(
    strict=True,
    reason="at n <= 400 the codegree cap n^0.1 is below the typical codegree, so the good event fails in every sample",
)
def test_gamma_failure_rate_decreasing():
    rates = []
    for n in (100, 200, 400):
        rep = triangle_experiment(TriangleConfig(n=n, p=n ** (-2 / 3 + 0.1), trials=200, seed=6))
        rates.append(rep["gamma_failure"]["point"])
    assert rates[0] > rates[1] > rates[2]


def test_reverse_experiment_small():
    with pytest.raises(ValueError):
        ReverseConfig(patterns=(K3,), grid=(16, 32))
    cfg = ReverseConfig(patterns=(K3,), grid=(16, 24, 32, 48), trials=30, seed=2)
    rep = reverse_process_experiment(cfg)
    assert [r["n"] for r in rep["rows"]] == [16, 24, 32, 48]
    assert rep["predicted_slope"] == 1.5
    assert 1.0 < rep["fit"]["slope"] < 2.0
    assert rep == reverse_process_experiment(cfg)


def test_coupling_full_budget_is_exact():
    rep = coupling_experiment((K3,), 12, 40, seed=1, m=66)
    assert rep["agreement"]["point"] == 1.0 and rep["closure_event"]["point"] == 1.0
    with pytest.raises(ValueError):
        coupling_experiment((K3,), 7, 10)


def test_coupling_short_prefix_can_disagree():
    rep = coupling_experiment((K3,), 20, 60, seed=1, m=40)
    assert rep["agreement"]["point"] < 1.0
    assert rep["closure_event"]["point"] == 0.0


def test_lipschitz_identity_and_replacements():
    rep = lipschitz_sweep(K3, 20, m=100, sweeps=30, seed=1, identity=True)
    assert rep["max_change_all"] == 0 and rep["perturbations"] == {"none": 30}
    rep = lipschitz_sweep(K3, 30, m=200, sweeps=200, seed=2)
    assert set(rep["perturbations"]) == {"swap", "replace"}
    assert rep["violations"] == []
    assert rep["max_change"] < rep["worst_case_scale"]


def test_lipschitz_full_budget_has_only_swaps():
    rep = lipschitz_sweep(K3, 14, sweeps=30, seed=3)
    assert rep["m"] == 91 and rep["perturbations"] == {"swap": 30}


def test_exact_distributions_n4():
    a = exact_addition_distribution(4, (K3,))
    r = exact_removal_distribution(4, (K3,))
    assert a == r
    assert sum(a.values()) == 1


def test_equivalence_with_family():
    fam = (K3, named_pattern("C4"))
    assert exact_addition_distribution(4, fam) == exact_removal_distribution(4, fam)


def test_parallel_map_gives_identical_reports():
    cfg = ReverseConfig(patterns=(K3,), grid=(12, 16, 20), trials=12, seed=9)
    serial = reverse_process_experiment(cfg)
    with ProcessPoolExecutor(max_workers=2) as pool:
        par = reverse_process_experiment(cfg, map_fn=pool.map)
        chi_par = equivalence_chi2(5, (K3,), 50, seed=1, map_fn=pool.map)
    assert serial == par
    assert chi_par == equivalence_chi2(5, (K3,), 50, seed=1)
