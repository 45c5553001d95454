"""Acceptance suite: one test per exit criterion, stated tolerances pinned.

Each test prints a single pass/fail line (visible with pytest -s). The
heavyweight sweep behind criteria 6 and 9 runs once per session.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.integrate import quad

from steinclt import rng as rnglib
from steinclt.biasing import Discrete1D, MuBreveMixture, zero_bias_1d
from steinclt.bounds import bound_m3
from steinclt.experiment import (check_zero_bias, config_from_dict,
                                 format_csv, run_experiment)
from steinclt.families import make_model
from steinclt.functions import battery, cos_ridge
from steinclt.smoothing import (constants_c, constants_c_quadrature,
                                smoothing_seminorm_check)
from steinclt.stein import circum_bound_check, stein_expectation
from steinclt.wasserstein import (EmpiricalMeasure, rate_fit, sampling_floor,
                                  w1_exact)

MASTER_SEED = 20240817


def report(n, ok, detail, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {n}: {status} ({detail}, {elapsed:.1f}s)")


# --------------------------------------------------------------- criterion 1

def test_criterion_1_smoothing_constants():
    t0 = time.time()
    worst = max(abs(constants_c(s) - constants_c_quadrature(s))
                for s in range(4))
    elapsed = time.time() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    report(1, ok, f"max |closed - quadrature| = {worst:.2e}", elapsed)
    assert worst <= 1e-10
    assert elapsed < 1.0


# --------------------------------------------------------------- criterion 2

def test_criterion_2_stein_identity():
    t0 = time.time()
    worst_ratio = 0.0
    for d in (1, 2, 3):
        fs = battery(d)
        assert len(fs) == 6
        for f in fs:
            mean, se = stein_expectation(
                f, lambda g, k: g.normal(size=(k, d)), mc_n=500_000,
                seed=rnglib.derive_seed(MASTER_SEED, "stein", f.name, d))
            worst_ratio = max(worst_ratio, abs(mean) / (4 * se))
    elapsed = time.time() - t0
    ok = worst_ratio <= 1.0 and elapsed < 30.0
    report(2, ok, f"worst |mean|/4se = {worst_ratio:.3f} over 18 cases", elapsed)
    assert worst_ratio <= 1.0
    assert elapsed < 30.0


# --------------------------------------------------------------- criterion 3

def test_criterion_3_zero_bias_identity():
    t0 = time.time()
    results = check_zero_bias(families=("rademacher", "uniform", "exponential"),
                              n_values=(4, 16), dims=(1, 2),
                              mc_n=200_000, seed=MASTER_SEED)
    mc_ok = all(r.status == "pass" for r in results)

    # exact 1-d check: the Rademacher zero bias is Uniform(-1, 1)
    law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    zb = zero_bias_1d(law)
    worst_exact = 0.0
    for f, fp in ((lambda w: w ** 3, lambda v: 3 * v * v), (np.sin, np.cos)):
        lhs = law.expectation(lambda w: f(w) * w)
        rhs, _ = quad(lambda v: fp(v) * zb.density(v)[0], -1.0, 1.0,
                      epsabs=1e-12)
        worst_exact = max(worst_exact, abs(lhs - law.var * rhs))
    elapsed = time.time() - t0
    ok = mc_ok and worst_exact <= 1e-9 and elapsed < 60.0
    report(3, ok, f"12 sum models <= 4se, exact gap {worst_exact:.2e}", elapsed)
    assert mc_ok, [r.name for r in results if r.status != "pass"]
    assert worst_exact <= 1e-9
    assert elapsed < 60.0


# --------------------------------------------------------------- criterion 4

def test_criterion_4_smoothing_lemma():
    t0 = time.time()
    f = cos_ridge(2)
    worst = 0.0
    for s in (0, 1, 2):
        for eps in (0.25, 0.5, 1.0):
            est, bound = smoothing_seminorm_check(
                f, 1, s, eps, n_pairs=1000, mc_n=50_000,
                seed=rnglib.derive_seed(MASTER_SEED, "lemma", s, int(eps * 100)))
            worst = max(worst, est / (bound * 1.02))
    elapsed = time.time() - t0
    ok = worst <= 1.0 and elapsed < 60.0
    report(4, ok, f"worst est/(1.02 bound) = {worst:.3f} over 9 configs", elapsed)
    assert worst <= 1.0
    assert elapsed < 60.0


# --------------------------------------------------------------- criterion 5

def test_criterion_5_circumvention_bound():
    t0 = time.time()
    worst = -np.inf
    for b2 in np.logspace(-6, 6, 31):
        lhs, rhs = circum_bound_check(float(b2), tol=1e-10)
        worst = max(worst, lhs - rhs)
    elapsed = time.time() - t0
    ok = worst <= 0.0 and elapsed < 1.0
    report(5, ok, f"max lhs - rhs = {worst:.2e} on 31-point grid", elapsed)
    assert worst <= 0.0
    assert elapsed < 1.0


# ---------------------------------------------------------- criteria 6 and 9

DOMINANCE_CONFIG = {
    "seed": MASTER_SEED,
    "experiment": {"families": ["rademacher", "uniform"],
                   "dims": [1, 2, 3], "n_values": [25, 100, 400]},
    "estimator": {"m": 2000, "replications": 50},
}


@pytest.fixture(scope="module")
def dominance_sweep():
    t0 = time.time()
    cfg = config_from_dict(DOMINANCE_CONFIG)
    rows, footers = run_experiment(cfg)
    return rows, footers, time.time() - t0


def test_criterion_6_bound_dominance(dominance_sweep):
    rows, _, elapsed = dominance_sweep
    assert len(rows) == 18
    margin = min(r.bound_m1 - r.w1_ci_lo for r in rows)
    ok = margin >= 0.0 and elapsed < 600.0
    report(6, ok, f"min(bound_m1 - w1_ci_lo) = {margin:.3f} over 18 cells",
           elapsed)
    assert margin >= 0.0
    assert elapsed < 600.0


# --------------------------------------------------------------- criterion 7

def test_criterion_7_rate_without_log():
    t0 = time.time()
    cfg = config_from_dict({
        "seed": MASTER_SEED,
        "experiment": {"families": ["rademacher"], "dims": [1],
                       "n_values": [4, 8, 16, 32, 64]},
        "estimator": {"m": 2000, "replications": 50},
    })
    rows, _ = run_experiment(cfg)
    floor = sampling_floor(1, 2000, 20, seed=MASTER_SEED)
    kept = [(r.n, r.w1_value) for r in rows if r.bound_m3 >= 2 * floor]
    assert len(kept) >= 4, f"floor cutoff left {len(kept)} points"
    slope = rate_fit(kept)

    # the bound itself carries the exact square-root law
    consts = [bound_m3(make_model("rademacher", 1, n)).total * np.sqrt(n)
              for n in (25, 100, 400)]
    bound_spread = max(consts) - min(consts)

    elapsed = time.time() - t0
    ok = -0.65 <= slope <= -0.35 and bound_spread <= 1e-12
    report(7, ok, f"slope = {slope:.3f} on n={[n for n, _ in kept]}, "
                  f"bound const spread = {bound_spread:.1e}", elapsed)
    assert -0.65 <= slope <= -0.35
    assert bound_spread <= 1e-12


# --------------------------------------------------------------- criterion 8

def test_criterion_8_assignment_exactness():
    t0 = time.time()
    g = rnglib.generator(MASTER_SEED, "assignment")
    worst = 0.0
    for _ in range(200):
        m = int(g.integers(2, 9))
        d = int(g.integers(1, 4))
        a = EmpiricalMeasure(g.normal(size=(m, d)))
        b = EmpiricalMeasure(g.normal(size=(m, d)))
        exact = w1_exact(a, b)
        perms = np.array(list(itertools.permutations(range(m))))
        costs = np.linalg.norm(a.points[:, None, :]
                               - b.points[None, :, :], axis=2)
        brute = costs[np.arange(m)[None, :], perms].sum(axis=1).min() / m
        worst = max(worst, abs(exact - brute))
    elapsed = time.time() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    report(8, ok, f"max |solver - brute force| = {worst:.2e} on 200 instances",
           elapsed)
    assert worst <= 1e-12
    assert elapsed < 10.0


# --------------------------------------------------------------- criterion 9

def test_criterion_9_deterministic_csv(dominance_sweep):
    rows, footers, _ = dominance_sweep
    t0 = time.time()
    cfg = config_from_dict({
        "seed": MASTER_SEED,
        "experiment": {"families": ["rademacher"], "dims": [1],
                       "n_values": [25, 100]},
        "estimator": {"m": 200, "replications": 20},
    })
    first = format_csv(*run_experiment(cfg)).encode()
    second = format_csv(*run_experiment(cfg)).encode()
    # the big sweep must serialize identically too
    big1 = format_csv(rows, footers).encode()
    big2 = format_csv(rows, footers).encode()
    elapsed = time.time() - t0
    ok = first == second and big1 == big2
    report(9, ok, f"{len(first)}-byte CSV identical across runs", elapsed)
    assert first == second
    assert big1 == big2
