"""Configuration-driven experiment runner and verification battery.

`run_experiment` sweeps (family, dimension, n) cells, evaluating the
three error bounds and the measured empirical W1 per cell, each cell
seeded by a SHA-256 hash of (master seed, family, d, n) so that results
are byte-identical across runs and independent of worker count. The CSV
footer carries per-(family, d) rate fits of the measured distances,
restricted to the n range where the third-moment bound still exceeds
twice the measured sampling floor; below that the finite-sample floor
flattens the curve and the fit would be meaningless.

`run_verify` executes the identity battery: smoothing-constant
quadrature, the Stein characterization under the standard normal, the
gradient-reweighting (zero-bias) identity for sum models, the exact
1-d zero-bias construction, the interpolation-identity residual and the
circumvention-bound grid.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import rng as rnglib
from . import smoothing
from .biasing import (Discrete1D, MuBreveMixture, zero_bias_1d,
                      verify_zero_bias_identity_stats)
from .bounds import bound_m1, bound_m2, bound_m3
from .families import FAMILIES, make_model
from .functions import battery, cos_ridge
from .stein import circum_bound_check, slepian_residual_stats, stein_expectation
from .wasserstein import rate_fit, sampling_floor, w1_estimate


class ConfigError(ValueError):
    """Invalid or missing configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple
    dims: tuple
    n_values: tuple
    m: int = 2000
    replications: int = 50
    mc_n: int = 200_000
    seed: int = 0
    out: str = "results.csv"
    threads: int = 1
    floor_multiplier: float = 2.0
    floor_replications: int = 20
    verify_mc_n: int = 500_000

    def __post_init__(self):
        for fam in self.families:
            if fam not in FAMILIES:
                raise ConfigError(
                    f"unknown family {fam!r}; available: {', '.join(FAMILIES)}")
        for v, name in ((self.m, "m"), (self.replications, "replications"),
                        (self.mc_n, "mc_n"), (self.threads, "threads")):
            if int(v) < 1:
                raise ConfigError(f"{name} must be positive")
        if any(int(d) < 1 for d in self.dims):
            raise ConfigError("dims must be positive")
        if any(int(n) < 1 for n in self.n_values):
            raise ConfigError("n values must be positive")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if "seed" not in raw:
        raise ConfigError("seed is mandatory (no wall-clock default)")
    exp = raw.get("experiment", {}) or {}
    est = raw.get("estimator", {}) or {}
    rate = raw.get("rate", {}) or {}
    out = (raw.get("outputs", {}) or {}).get("csv", "results.csv")
    try:
        return ExperimentConfig(
            families=tuple(exp.get("families", ["rademacher"])),
            dims=tuple(int(d) for d in exp.get("dims", [1])),
            n_values=tuple(int(n) for n in exp.get("n_values", [25, 100, 400])),
            m=int(est.get("m", 2000)),
            replications=int(est.get("replications", 50)),
            mc_n=int(est.get("mc_n", 200_000)),
            seed=int(raw["seed"]),
            out=str(out),
            threads=int(raw.get("threads", 1)),
            floor_multiplier=float(rate.get("floor_multiplier", 2.0)),
            floor_replications=int(rate.get("floor_replications", 20)),
            verify_mc_n=int((raw.get("verify", {}) or {}).get("mc_n", 500_000)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config value: {exc}") from exc


@dataclass(frozen=True)
class ResultRow:
    family: str
    d: int
    n: int
    bound_m1: float
    bound_m2: float
    bound_m3: float
    w1_value: float
    w1_ci_lo: float
    w1_ci_hi: float
    seed: int

    def __post_init__(self):
        if min(self.bound_m1, self.bound_m2, self.bound_m3) < 0:
            raise ValueError("bounds must be nonnegative")
        if not self.w1_ci_lo <= self.w1_value <= self.w1_ci_hi:
            raise ValueError("W1 value must lie inside its interval")


CSV_HEADER = ("family,d,n,bound_m1,bound_m2,bound_m3,"
              "w1_value,w1_ci_lo,w1_ci_hi,seed")


def cell_seed(master: int, family: str, d: int, n: int) -> int:
    return rnglib.derive_seed(master, "cell", family, d, n)


def _run_cell(cfg: ExperimentConfig, family: str, d: int, n: int) -> ResultRow:
    seed = cell_seed(cfg.seed, family, d, n)
    model = make_model(family, d, n, seed=seed)
    b1 = bound_m1(model).total
    b2 = bound_m2(model).total
    b3 = bound_m3(model).total
    est = w1_estimate(model.sample_w, cfg.m, cfg.replications,
                      seed=seed, dim=d)
    return ResultRow(family, d, n, b1, b2, b3,
                     est.value, est.ci_lo, est.ci_hi, seed)


def run_experiment(cfg: ExperimentConfig):
    """All cells plus footer lines; deterministic given the config."""
    cells = [(family, d, n) for family in cfg.families
             for d in cfg.dims for n in cfg.n_values]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(lambda c: _run_cell(cfg, *c), cells))
    else:
        rows = [_run_cell(cfg, *c) for c in cells]

    footers = []
    floors = {d: sampling_floor(d, cfg.m, cfg.floor_replications, seed=cfg.seed)
              for d in cfg.dims}
    for family in cfg.families:
        for d in cfg.dims:
            sub = [r for r in rows if r.family == family and r.d == d]
            if not sub:
                continue
            cut = cfg.floor_multiplier * floors[d]
            kept = [r for r in sub if r.bound_m3 >= cut]
            limited = len(kept) < 4
            used = sub if limited else kept
            if len(used) >= 4:
                slope = rate_fit([(r.n, r.w1_value) for r in used])
                slope_txt = f"{slope:.6g}"
            else:
                slope_txt = "nan"
            footers.append(
                f"# rate_fit family={family} d={d} slope={slope_txt} "
                f"n_used={','.join(str(r.n) for r in used)} "
                f"floor={floors[d]:.6g} floor_limited={str(limited).lower()}")
    return rows, footers


def format_csv(rows, footers) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.family},{r.d},{r.n},"
            f"{r.bound_m1:.12g},{r.bound_m2:.12g},{r.bound_m3:.12g},"
            f"{r.w1_value:.12g},{r.w1_ci_lo:.12g},{r.w1_ci_hi:.12g},{r.seed}")
    lines.extend(footers)
    return "\n".join(lines) + "\n"


def write_csv(rows, footers, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows, footers))


# ---------------------------------------------------------------------------
# verification battery

@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str              # pass / fail / inconclusive
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        return (f"[{self.status.upper():12s}] {self.name}: "
                f"measured={self.measured:.6g} threshold={self.threshold:.6g}"
                + (f" ({self.detail})" if self.detail else ""))


SLEPIAN_SE_CAP = 0.02


def _check(name, measured, threshold, detail="") -> CheckResult:
    status = "pass" if measured <= threshold else "fail"
    return CheckResult(name, status, float(measured), float(threshold), detail)


def check_constants() -> list[CheckResult]:
    out = []
    for s in range(4):
        gap = abs(smoothing.constants_c(s) - smoothing.constants_c_quadrature(s))
        out.append(_check(f"constants_quadrature[s={s}]", gap, 1e-10))
    return out


def check_stein_identity(dims=(1, 2, 3), mc_n=500_000, seed=0) -> list[CheckResult]:
    out = []
    for d in dims:
        for f in battery(d):
            mean, se = stein_expectation(
                f, lambda g, k: g.normal(size=(k, d)), mc_n,
                seed=rnglib.derive_seed(seed, "stein", f.name, d))
            out.append(_check(f"stein_identity[{f.name},d={d}]",
                              abs(mean), 4.0 * se, f"se={se:.2e}"))
    return out


def check_zero_bias(families=("rademacher", "uniform", "exponential"),
                    n_values=(4, 16), dims=(1, 2), mc_n=200_000,
                    seed=0) -> list[CheckResult]:
    out = []
    for family in families:
        for n in n_values:
            for d in dims:
                s = rnglib.derive_seed(seed, "zb", family, n, d)
                model = make_model(family, d, n, seed=s)
                mix = MuBreveMixture(model, seed=s)
                resid, ses = verify_zero_bias_identity_stats(
                    model, mix, cos_ridge(d), mc_n=mc_n, seed=s)
                worst = int(np.argmax(resid - 4.0 * ses))
                out.append(_check(
                    f"zero_bias_identity[{family},n={n},d={d}]",
                    resid[worst], 4.0 * ses[worst]))
    return out


def check_zero_bias_exact() -> list[CheckResult]:
    """Rademacher zero bias is Uniform(-1, 1): identity by quadrature."""
    from scipy.integrate import quad
    law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    zb = zero_bias_1d(law)
    out = []
    for name, f, fprime in (
            ("w^3", lambda w: w ** 3, lambda v: 3 * v * v),
            ("sin", np.sin, np.cos)):
        lhs = law.expectation(lambda w: f(w) * w)
        rhs, _ = quad(lambda v: fprime(v) * float(zb.density(v)[0]),
                      -1.0, 1.0, limit=200, epsabs=1e-12)
        rhs *= law.var
        out.append(_check(f"zero_bias_exact_1d[{name}]", abs(lhs - rhs), 1e-9))
    return out


def check_slepian(mc_n=200_000, seed=0) -> list[CheckResult]:
    f = cos_ridge(1)

    def w_sampler(g, k):
        return (g.integers(0, 2, size=(k, 10)) * 2 - 1).sum(axis=1)[:, None] / math.sqrt(10)

    resid, se = slepian_residual_stats(f, w_sampler, eps=0.05, n_alpha=16,
                                       mc_n=mc_n,
                                       seed=rnglib.derive_seed(seed, "slepian"))
    if 4.0 * se > SLEPIAN_SE_CAP:
        return [CheckResult("slepian_residual", "inconclusive", resid, 4.0 * se,
                            f"se too wide ({se:.2e}); raise mc_n")]
    return [_check("slepian_residual", resid, 4.0 * se, f"se={se:.2e}")]


def check_circum() -> list[CheckResult]:
    grid = np.logspace(-6, 6, 31)
    worst = -np.inf
    for b2 in grid:
        lhs, rhs = circum_bound_check(float(b2))
        worst = max(worst, lhs - rhs)
    return [_check("circum_grid[31pts]", worst, 1e-12,
                   "max lhs-rhs over beta2 grid")]


def run_verify(cfg: ExperimentConfig) -> list[CheckResult]:
    # the battery dimensions are fixed; cfg only controls sample sizes
    results = []
    results += check_constants()
    results += check_stein_identity(dims=(1, 2, 3),
                                    mc_n=cfg.verify_mc_n, seed=cfg.seed)
    results += check_zero_bias(mc_n=cfg.mc_n, seed=cfg.seed)
    results += check_zero_bias_exact()
    results += check_slepian(mc_n=cfg.mc_n, seed=cfg.seed)
    results += check_circum()
    return results
