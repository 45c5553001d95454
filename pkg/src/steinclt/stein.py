"""Stein operator, Gaussian interpolation and the proof's closed estimates.

The operator S f(w) = Lap f(w) - <grad f(w), w> characterizes the
standard normal: its expectation under N(0, I) vanishes for every nice
f. The interpolation U_alpha f(w) = (smoothing at scale sin alpha of f)
evaluated at w cos alpha runs from f at alpha = 0 to the Gaussian mean
of f at alpha = pi/2, and its alpha-derivative is S U_alpha f times
tan alpha. Integrating yields the interpolation identity whose residual
`slepian_residual` measures by Monte Carlo.

Two closed integral estimates from the error analysis are exposed for
verification: the circumvention bound (capping the inverse-sine-squared
weight against a constant and integrating exactly) and the logarithmic
envelope of the mixed second/third-derivative weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import asin, atan, cos, log, pi, sin, sqrt

import numpy as np
from scipy.integrate import quad

from . import rng as rnglib
from .smoothing import constants_c, smooth_stats


@dataclass(frozen=True)
class InterpolationPoint:
    """Position alpha along the interpolation path of a test function."""

    alpha: float
    f: object

    def __post_init__(self):
        if not 0.0 <= self.alpha <= pi / 2:
            raise ValueError("alpha must lie in [0, pi/2]")


def stein_apply(f, w) -> float:
    """S f(w) = trace(grad^2 f(w)) - <grad f(w), w>."""
    w = np.asarray(w, dtype=float).reshape(-1)
    g2 = f.grad(w, 2)
    trace = sum(g2.get(i, i) for i in range(f.dim))
    g1 = f.grad(w, 1).values
    return float(trace - g1 @ w)


def stein_expectation(f, w_sampler, mc_n: int = 500_000,
                      seed=0) -> tuple[float, float]:
    """Monte Carlo (mean, se) of S f(W). Uses the batch oracles when the
    function carries them, else falls back to per-point derivatives."""

    if f.laplacian_batch is not None and f.grad1_batch is not None:
        def draw(g, k):
            w = w_sampler(g, k)
            return f.laplacian_batch(w) - (f.grad1_batch(w) * w).sum(axis=1)
    else:
        def draw(g, k):
            w = w_sampler(g, k)
            return np.array([stein_apply(f, row) for row in w])

    return rnglib.mc_mean(draw, mc_n, seed, "stein")


def gaussian_sampler(dim: int):
    return lambda g, k: g.normal(size=(k, dim))


def u_alpha(f, alpha: float, w, mc_n: int = 200_000, seed=0) -> float:
    """Interpolated value: smooth f at scale sin(alpha), read at w cos(alpha).

    alpha = 0 returns f(w) exactly; alpha = pi/2 is the Gaussian mean of
    f, independent of w.
    """
    if not 0.0 <= alpha <= pi / 2:
        raise ValueError("alpha must lie in [0, pi/2]")
    w = np.asarray(w, dtype=float).reshape(-1)
    return smooth_stats(f, sin(alpha), w * cos(alpha), mc_n, seed)[0]


def _stein_u_alpha_node(f, w_sampler, dim: int, t: float, mc_n: int, seed):
    """(mean, se) of the t-substituted integrand t*Lap - <grad, W>.

    With t = cos(alpha), E[S U_alpha f(W)] tan(alpha) d(alpha) becomes
    (t * E[Lap f(M)] - E[<grad f(M), W>]) dt for M = W t + Z sin(alpha):
    the cosine powers of the chain rule cancel the tangent weight.
    """
    sin_a = sqrt(max(1.0 - t * t, 0.0))

    if f.laplacian_batch is not None and f.grad1_batch is not None:
        def draw(g, k):
            w = w_sampler(g, k)
            z = g.normal(size=(k, dim))
            m = t * w + sin_a * z
            return t * f.laplacian_batch(m) - (f.grad1_batch(m) * w).sum(axis=1)
    else:
        def draw(g, k):
            w = w_sampler(g, k)
            z = g.normal(size=(k, dim))
            m = t * w + sin_a * z
            out = np.empty(k)
            for i in range(k):
                g2 = f.grad(m[i], 2)
                trace = sum(g2.get(j, j) for j in range(dim))
                out[i] = t * trace - f.grad(m[i], 1).values @ w[i]
            return out

    return rnglib.mc_mean(draw, mc_n, seed, "node")


def slepian_residual_stats(f, w_sampler, eps: float, n_alpha: int = 16,
                           mc_n: int = 200_000, seed=0) -> tuple[float, float]:
    """Residual of the interpolation identity with its combined SE.

    residual = |E U_eps f(W) - E f(Z) + integral over (eps, pi/2) of
    E[S U_alpha f(W)] tan(alpha)|. The alpha integral uses Gauss-Legendre
    after the substitution t = cos(alpha), which removes the tangent
    weight's stiffness near pi/2. All three terms are Monte Carlo with
    independent derived seeds; the SE combines in quadrature, node SEs
    weighted by their quadrature weights.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0 (smoothed start point)")
    if n_alpha < 8:
        raise ValueError("n_alpha must be >= 8")
    dim = f.dim

    def draw_u_eps(g, k):
        w = w_sampler(g, k)
        z = g.normal(size=(k, dim))
        return f(cos(eps) * w + sin(eps) * z)

    t1, se1 = rnglib.mc_mean(draw_u_eps, mc_n, seed, "u_eps")

    def draw_nf(g, k):
        return f(g.normal(size=(k, dim)))

    t2, se2 = rnglib.mc_mean(draw_nf, mc_n, seed, "nf")

    nodes, weights = np.polynomial.legendre.leggauss(n_alpha)
    hi = cos(eps)
    ts = 0.5 * hi * (nodes + 1.0)
    ws = 0.5 * hi * weights
    integral = 0.0
    var = 0.0
    node_mc = max(mc_n // n_alpha, 2_000)
    for j, (t, w8) in enumerate(zip(ts, ws)):
        val, se = _stein_u_alpha_node(f, w_sampler, dim, float(t), node_mc,
                                      rnglib.derive_seed(seed, "alpha", j))
        integral += w8 * val
        var += (w8 * se) ** 2

    residual = abs(t1 - t2 + integral)
    return residual, sqrt(se1 ** 2 + se2 ** 2 + var)


def slepian_residual(f, w_sampler, eps: float, n_alpha: int = 16,
                     mc_n: int = 200_000, seed=0) -> float:
    return slepian_residual_stats(f, w_sampler, eps, n_alpha, mc_n, seed)[0]


def circum_bound_check(beta2: float, tol: float = 1e-10) -> tuple[float, float]:
    """Both sides of the circumvention estimate; contract lhs <= rhs.

    lhs integrates min{2 c1, c3 beta2 / sin^2 alpha} cos(alpha) over
    (0, pi/2) — the min caps the integrand near 0 — and rhs is the closed
    form 2 sqrt(2 c1 c3 beta2) obtained by extending the substituted
    integral to the whole half-line.
    """
    if beta2 < 0:
        raise ValueError("beta2 must be >= 0")
    c1, c3 = constants_c(1), constants_c(3)
    rhs = 2.0 * sqrt(2.0 * c1 * c3 * beta2)
    if beta2 == 0.0:
        return 0.0, 0.0

    cap = 2.0 * c1

    def integrand(a):
        s = sin(a)
        if s == 0.0:
            return cap
        return min(cap, c3 * beta2 / (s * s)) * cos(a)

    crossover = c3 * beta2 / cap
    pts = [asin(sqrt(crossover))] if crossover < 1.0 else []
    lhs, _ = quad(integrand, 0.0, pi / 2, points=pts or None,
                  limit=200, epsabs=tol)
    return lhs, rhs


def log_envelope_integral(delta: float, eps: float) -> float:
    """Closed-form envelope c2 [1 + (log(c3 delta / (2 c2 sin(eps/2))))_+].

    Dominates the quadrature of min{c2 cos^2/sin, c3 delta cos^3/sin^2}
    over (eps, pi/2); see `log_envelope_quadrature` for the other side.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if not 0.0 < eps < pi:
        raise ValueError("eps must lie in (0, pi)")
    c2, c3 = constants_c(2), constants_c(3)
    if delta == 0.0:
        return c2
    arg = c3 * delta / (2.0 * c2 * sin(eps / 2.0))
    return c2 * (1.0 + max(0.0, log(arg)))


def log_envelope_quadrature(delta: float, eps: float,
                            tol: float = 1e-10) -> float:
    """Numerical value of the mixed-weight integral the envelope bounds."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if not 0.0 < eps <= pi / 2:
        raise ValueError("eps must lie in (0, pi/2]")
    c2, c3 = constants_c(2), constants_c(3)
    if delta == 0.0 or eps == pi / 2:
        return 0.0

    def integrand(a):
        s, c = sin(a), cos(a)
        return min(c2 * c * c / s, c3 * delta * c ** 3 / (s * s))

    crossover = atan(c3 * delta / c2)
    pts = [crossover] if eps < crossover < pi / 2 else []
    val, _ = quad(integrand, eps, pi / 2, points=pts or None,
                  limit=200, epsabs=tol)
    return val


def d_xi_stats(f, w_sampler, v_sampler, mc_n: int = 200_000,
               seed=0) -> tuple[float, float]:
    """(E f(W) - E f(V), combined se). Identical samplers see identical
    draws (same derived seed for both streams), so the difference is
    exactly zero in that case."""
    a, se_a = rnglib.mc_mean(lambda g, k: f(w_sampler(g, k)), mc_n, seed, "dxi")
    b, se_b = rnglib.mc_mean(lambda g, k: f(v_sampler(g, k)), mc_n, seed, "dxi")
    return a - b, sqrt(se_a ** 2 + se_b ** 2)


def d_xi(f, w_sampler, v_sampler, mc_n: int = 200_000, seed=0) -> float:
    return d_xi_stats(f, w_sampler, v_sampler, mc_n, seed)[0]
