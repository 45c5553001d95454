"""Standardized i.i.d. sum families with exact moment formulas.

Each family builds W as a sum of n i.i.d. summands X = Y / sqrt(n),
where Y has i.i.d. unit-variance centered components, so Var(W) = I_d
by construction. Norm moments E|X|^k are closed-form where the norm is
deterministic (rademacher) or the norm density is known (dimension one;
gaussian in any dimension via the chi law); the remaining cases fall
back to seeded Monte Carlo with 10^6 samples. Dimension-one summands
also carry their exact zero-bias samplers.
"""

from __future__ import annotations

from math import exp, gamma, pi, sqrt

import numpy as np

from . import rng as rnglib
from .biasing import SummandSpec, SumModel

SQRT3 = sqrt(3.0)

FAMILIES = ("rademacher", "uniform", "exponential", "gaussian", "two_point")


def _mc_norm_moments(sampler, dim, seed, mc_n=1_000_000):
    """Monte Carlo E|X|, E|X|^3, E|X|^4 for laws without closed forms."""
    def draw(g, k):
        r = np.linalg.norm(sampler(g, k), axis=1)
        return np.stack([r, r ** 3, r ** 4], axis=1)

    mean, _ = rnglib.mc_mean(draw, mc_n, seed, "norm_moments")
    return float(mean[0]), float(mean[1]), float(mean[2])


def _chi_pdf(d: int):
    norm = 2.0 ** (d / 2.0 - 1.0) * gamma(d / 2.0)
    return lambda r: r ** (d - 1) * np.exp(-0.5 * r * r) / norm


def _chi_moment(d: int, k: int) -> float:
    return 2.0 ** (k / 2.0) * gamma((d + k) / 2.0) / gamma(d / 2.0)


def make_summand(family: str, d: int, n: int, seed=0) -> SummandSpec:
    """One summand of the standardized i.i.d. sum (scale 1/sqrt(n))."""
    if family not in FAMILIES:
        raise ValueError(
            f"unknown family {family!r}; available: {', '.join(FAMILIES)}")
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    c = 1.0 / sqrt(n)
    m2 = d / n
    mc_seed = rnglib.derive_seed(seed, "moments", family, d, n)

    if family == "rademacher":
        def sampler(g, size):
            return (g.integers(0, 2, size=(size, d)) * 2 - 1) * c

        zb = (lambda g, size: g.uniform(-c, c, size=size)) if d == 1 else None
        return SummandSpec(
            name=f"rademacher(d={d},n={n})", dim=d, sampler=sampler,
            m1=sqrt(d) * c, m2=m2, m3=(d / n) ** 1.5, m4=(d / n) ** 2,
            norm_is_constant=True, zero_bias_sampler=zb, mc_seed=mc_seed)

    if family == "uniform":
        def sampler(g, size):
            return g.uniform(-SQRT3, SQRT3, size=(size, d)) * c

        m4 = (d * 1.8 + d * (d - 1)) / n ** 2
        if d == 1:
            hi = SQRT3 * c

            def norm_pdf(r):
                return 1.0 / (SQRT3 * c)

            def zb(g, size):
                # base zero-bias density (3 - v^2)/(4 sqrt(3)); rejection
                # from the uniform proposal with ratio (3 - v^2)/3
                out = np.empty(size)
                filled = 0
                while filled < size:
                    k = max(2 * (size - filled), 64)
                    v = g.uniform(-SQRT3, SQRT3, size=k)
                    keep = g.uniform(size=k) * 3.0 < (3.0 - v * v)
                    v = v[keep][:size - filled]
                    out[filled:filled + len(v)] = v
                    filled += len(v)
                return out * c

            return SummandSpec(
                name=f"uniform(d=1,n={n})", dim=1, sampler=sampler,
                m1=SQRT3 / 2 * c, m2=m2, m3=0.75 * SQRT3 * c ** 3, m4=m4,
                norm_pdf=(norm_pdf, 0.0, hi), zero_bias_sampler=zb,
                mc_seed=mc_seed)
        m1, m3, _ = _mc_norm_moments(sampler, d, mc_seed)
        return SummandSpec(
            name=f"uniform(d={d},n={n})", dim=d, sampler=sampler,
            m1=m1, m2=m2, m3=m3, m4=m4, moment_mode="mc", mc_seed=mc_seed)

    if family == "exponential":
        def sampler(g, size):
            return (g.exponential(1.0, size=(size, d)) - 1.0) * c

        m4 = (d * 9.0 + d * (d - 1)) / n ** 2
        if d == 1:
            # |X| density folds the shifted-exponential density at +/- r
            def norm_pdf(r):
                rn = r / c
                val = np.exp(-1.0 - rn)
                val = val + np.where(rn <= 1.0, np.exp(rn - 1.0), 0.0)
                return val / c

            def zb(g, size):
                # zero-bias of centered exp(1) is Gamma(2) shifted by -1
                return (g.gamma(2.0, size=size) - 1.0) * c

            return SummandSpec(
                name=f"exponential(d=1,n={n})", dim=1, sampler=sampler,
                m1=2.0 / np.e * c, m2=m2, m3=(12.0 / np.e - 2.0) * c ** 3,
                m4=m4, norm_pdf=(norm_pdf, 0.0, 40.0 * c),
                zero_bias_sampler=zb, mc_seed=mc_seed)
        m1, m3, _ = _mc_norm_moments(sampler, d, mc_seed)
        return SummandSpec(
            name=f"exponential(d={d},n={n})", dim=d, sampler=sampler,
            m1=m1, m2=m2, m3=m3, m4=m4, moment_mode="mc", mc_seed=mc_seed)

    if family == "gaussian":
        def sampler(g, size):
            return g.normal(size=(size, d)) * c

        chi = _chi_pdf(d)

        def norm_pdf(r):
            return chi(r / c) / c

        zb = (lambda g, size: g.normal(size=size) * c) if d == 1 else None
        return SummandSpec(
            name=f"gaussian(d={d},n={n})", dim=d, sampler=sampler,
            m1=_chi_moment(d, 1) * c, m2=m2, m3=_chi_moment(d, 3) * c ** 3,
            m4=_chi_moment(d, 4) * c ** 4,
            norm_pdf=(norm_pdf, 0.0, 40.0 * c), zero_bias_sampler=zb,
            mc_seed=mc_seed)

    # two_point: P(Y = sqrt(q/p)) = p, P(Y = -sqrt(p/q)) = q, unit variance
    p = 0.2
    q = 1.0 - p
    up, dn = sqrt(q / p), sqrt(p / q)

    def sampler(g, size):
        flip = g.uniform(size=(size, d)) < p
        return np.where(flip, up, -dn) * c

    m4c = (q ** 3 + p ** 3) / (p * q)
    m4 = (d * m4c + d * (d - 1)) / n ** 2
    if d == 1:
        def zb(g, size):
            # constant mean-tail between the two atoms: uniform there
            return g.uniform(-dn, up, size=size) * c

        return SummandSpec(
            name=f"two_point(d=1,n={n})", dim=1, sampler=sampler,
            m1=2.0 * sqrt(p * q) * c, m2=m2,
            m3=(q * q + p * p) / sqrt(p * q) * c ** 3, m4=m4,
            norm_atoms=(np.array([up * c, dn * c]), np.array([p, q])),
            zero_bias_sampler=zb, mc_seed=mc_seed)
    m1, m3, _ = _mc_norm_moments(sampler, d, mc_seed)
    return SummandSpec(
        name=f"two_point(d={d},n={n})", dim=d, sampler=sampler,
        m1=m1, m2=m2, m3=m3, m4=m4, moment_mode="mc", mc_seed=mc_seed)


def make_model(family: str, d: int, n: int, seed=0) -> SumModel:
    """Standardized sum of n i.i.d. summands of the given family."""
    s = make_summand(family, d, n, seed)
    return SumModel(summands=(s,) * n, dim=d, name=f"{family}(d={d},n={n})",
                    iid=True)


def normal_mean_tail(v: float) -> float:
    """E[Z 1(Z > v)] = phi(v) for the standard normal."""
    return exp(-0.5 * v * v) / sqrt(2.0 * pi)


def uniform_mean_tail(v: float) -> float:
    """E[Y 1(Y > v)] for Y uniform on (-sqrt 3, sqrt 3)."""
    v = min(max(v, -SQRT3), SQRT3)
    return (3.0 - v * v) / (4.0 * SQRT3)


def exponential_mean_tail(v: float) -> float:
    """E[Y 1(Y > v)] for Y a centered unit exponential."""
    if v < -1.0:
        return 0.0
    return (v + 1.0) * exp(-(v + 1.0))
