"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Every test prints ``[criterion k] PASS|FAIL ...``; the lines are repeated in
the terminal summary by ``conftest.py``. Run on their own with
``pytest -s tests/test_acceptance.py`` or ``python3 scripts/run_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

import oracles
from tbdlab import bounds
from tbdlab.cli import main
from tbdlab.exactcheck import run_suite
from tbdlab.graphs import named_pattern
from tbdlab.harness import (
    ReverseConfig,
    TriangleConfig,
    coupling_experiment,
    equivalence_chi2,
    exact_addition_distribution,
    exact_removal_distribution,
    lipschitz_sweep,
    reverse_process_experiment,
    triangle_bounds,
    triangle_experiment,
)
from tbdlab.rng import stream

RESULTS = []

pytestmark = pytest.mark.slow


def report(k, ok, detail):
    line = f"[criterion {k:>2}] {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


def test_c01_exact_oracle_suite():
    t0 = time.perf_counter()
    res = run_suite(1000, seed=1)
    dt = time.perf_counter() - t0
    report(1, res.ok and dt <= 300, f"instances={res.instances} checks={res.checks} violations={len(res.violations)} runtime={dt:.1f}s")


def test_c02_martingale_lemmas():
    res = run_suite(200, seed=2, lemmas=True)
    report(2, res.ok, f"instances={res.instances} checks={res.checks} violations={len(res.violations)}")


def test_c03_bernstein_tightness():
    N = 20
    worst_ratio, dominated = math.inf, True
    for p in (0.1, 0.5):
        prof = bounds.LipschitzProfile.uniform(N, 1.0, p=p)
        mu = N * p
        V = N * p * (1 - p)
        for t in range(1, N - int(mu) + 1):
            exact = oracles.binomial_upper_tail(N, p, math.ceil(mu + t - 1e-12))
            dominated &= exact <= bounds.tbdi_bernoulli_bound(prof, t).value
        for t in np.linspace(0.05, math.sqrt(V), 40):
            expo = bounds.tbdi_bernoulli_bound(prof, float(t)).exponent
            clt = t * t / (2 * V)
            worst_ratio = min(worst_ratio, expo / clt)
    ok = dominated and worst_ratio >= 0.5
    report(3, ok, f"dominates_exact_tail={dominated} min_exponent_ratio={worst_ratio:.4f} (need >= 0.5)")


def test_c04_bennett_dominance():
    rng = stream(4, 0, "acceptance")
    V = 10 ** rng.uniform(-3, 3, 10_000)
    C = 10 ** rng.uniform(-3, 3, 10_000)
    t = 10 ** rng.uniform(-4, 3, 10_000)
    worse, ties = 0, 0
    for v, c, s in zip(V, C, t):
        ben = bounds.bennett_exponent(v, c, s)
        bern = bounds.bernstein_exponent(v, c, s)
        worse += math.exp(-ben) > math.exp(-bern)
        # the two agree only in the small-deviation limit
        ties += ben == bern and c * s / v > 1e-3
    report(4, worse == 0 and ties == 0, f"triples=10000 bennett_worse={worse} ties_away_from_zero={ties}")


def test_c05_formulation_equivalence():
    K3 = named_pattern("K3")
    add = exact_addition_distribution(4, (K3,))
    rem = exact_removal_distribution(4, (K3,))
    chi = equivalence_chi2(5, (K3,), 10_000, seed=5)
    ok = add == rem and chi["p_value"] >= 1e-3
    law = {k: str(v) for k, v in add.items()}
    report(5, ok, f"n4_addition={law} n4_equal={add == rem} n5_chi2_p={chi['p_value']:.4f}")


def test_c06_reverse_exponent():
    t0 = time.perf_counter()
    slopes = {}
    for name, target in (("K3", 1.5), ("C4", 4 / 3)):
        rep = reverse_process_experiment(ReverseConfig(patterns=(named_pattern(name),), grid=(64, 128, 256, 512), trials=300, seed=6))
        slopes[name] = (rep["fit"]["slope"], target)
    dt = time.perf_counter() - t0
    ok = all(abs(s - tgt) <= 0.15 for s, tgt in slopes.values()) and dt <= 1800
    detail = " ".join(f"{k}_slope={s:.3f}(target {tgt:.3f})" for k, (s, tgt) in slopes.items())
    report(6, ok, f"{detail} runtime={dt:.0f}s")


def test_c07_matching_flatness():
    rep = reverse_process_experiment(
        ReverseConfig(patterns=(named_pattern("2K2"),), grid=(50, 100, 400), trials=300, seed=7, truncate=False)
    )
    mean = {r["n"]: r["mean"] for r in rep["rows"]}
    report(7, mean[400] <= mean[50] + 2, f"mean50={mean[50]:.3f} mean400={mean[400]:.3f}")


def test_c08_truncation_coupling():
    rep = coupling_experiment((named_pattern("K3"),), 100, 1000, seed=8)
    agree = rep["agreement"]["point"]
    report(8, agree >= 0.99, f"n=100 m={rep['m']} agreement={agree:.4f}")


def test_c09_lipschitz_sweep():
    rep = lipschitz_sweep(named_pattern("K3"), 60, sweeps=1000, seed=9)
    ok = len(rep["violations"]) == 0
    report(9, ok, f"sweeps=1000 good_pairs={rep['good_pairs']} violations={len(rep['violations'])} max_change={rep['max_change']}")


def test_c10_triangle_separation():
    n = 200
    p = n ** (-1 / 3)
    b = triangle_bounds(n, p, 0.5 * math.comb(n, 3) * p ** 3)
    rep = triangle_experiment(TriangleConfig(n=n, p=n ** -0.55, t_rel=0.5, trials=2000, seed=10))
    tb = rep["bounds_at_mu_hat"]["tbdi"]
    allowance = tb["value"] + (tb["bad_budget"] or 0.0)
    up, lo = rep["empirical_upper"], rep["empirical_lower"]
    tails_ok = up["point"] <= allowance + up["half_width"] and lo["point"] <= allowance + lo["half_width"]
    ok = b["bdi"].value >= 0.9 and b["tbdi"].value <= 1e-3 and tails_ok
    report(
        10, ok,
        f"bdi={b['bdi'].value:.4f} tbdi={b['tbdi'].value:.3e} upper_tail={up['point']} lower_tail={lo['point']} allowance={allowance:.4f}",
    )


EXPERIMENTS = [
    ["experiment", "triangle", "--trials", "300"],
    ["experiment", "reverse", "--grid", "32,64,128", "--trials", "40"],
    ["experiment", "coupling", "--n", "40", "--trials", "100"],
    ["experiment", "lipschitz", "--n", "30", "--trials", "100", "--m", "250"],
    ["experiment", "equivalence", "--trials", "500"],
]


def test_c11_determinism(tmp_path):
    same = []
    for i, argv in enumerate(EXPERIMENTS):
        outs = []
        for par in (1, 3):
            path = tmp_path / f"{i}-{par}.json"
            assert main(argv + ["--seed", "12345", "--parallelism", str(par), "--output", str(path)]) == 0
            outs.append(path.read_bytes())
        same.append(outs[0] == outs[1])
    report(11, all(same), "byte_identical=" + ",".join(f"{a[1]}:{s}" for a, s in zip(EXPERIMENTS, same)))
