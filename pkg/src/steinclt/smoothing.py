"""Gaussian smoothing, its derivative estimators and Lipschitz seminorms.

The smoothing operator averages a function against a centered normal of
scale eps. Its derivative tensors admit the classical Hermite-weight
representation: differentiating the convolution moves all derivatives
onto the Gaussian kernel, so the order-s derivative is an expectation of
f(x + eps z) times a tensor of probabilists' Hermite polynomial products
in z, divided by eps^s. The attenuation constants

    c_0 = 1,  c_1 = 2/sqrt(2 pi),  c_2 = 4/sqrt(2 pi e),
    c_3 = (2 + 8 exp(-3/2))/sqrt(2 pi)

are the L1 norms of the univariate Gaussian density derivatives and
govern how much smoothing costs per derivative order:

    M_{r+s}(smoothed f at scale eps) <= (c_s / eps^s) M_r(f).

M_r(f) itself is the Lipschitz constant of the order-(r-1) derivative
measured in the injective tensor norm; we estimate it from below by
maximizing difference quotients over random pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt, pi, exp

import numpy as np
from scipy.integrate import quad

from . import rng as rnglib
from .tensors import SymTensor, canonical_indices, sym_opnorm

_CS = (
    1.0,
    2.0 / sqrt(2.0 * pi),
    4.0 / sqrt(2.0 * pi * np.e),
    (2.0 + 8.0 * exp(-1.5)) / sqrt(2.0 * pi),
)

# sign changes of the s-th Gaussian density derivative (Hermite roots)
_PHI_DERIV_ROOTS = {
    0: (),
    1: (0.0,),
    2: (-1.0, 1.0),
    3: (-sqrt(3.0), 0.0, sqrt(3.0)),
}

DEFAULT_MC_SCALAR = 200_000
DEFAULT_MC_TENSOR = 500_000


def constants_c(s: int) -> float:
    """Closed-form attenuation constant c_s for s in 0..3."""
    if not 0 <= s <= 3:
        raise ValueError("s must be in 0..3")
    return _CS[s]


def constants_c_quadrature(s: int, tol: float = 1e-12) -> float:
    """Independent oracle: integrate |d^s/dz^s phi(z)| numerically."""
    if not 0 <= s <= 3:
        raise ValueError("s must be in 0..3")

    def phi_deriv(z):
        p = exp(-0.5 * z * z) / sqrt(2.0 * pi)
        if s == 0:
            return p
        if s == 1:
            return -z * p
        if s == 2:
            return (z * z - 1.0) * p
        return (3.0 * z - z ** 3) * p

    val, _ = quad(lambda z: abs(phi_deriv(z)), -12.0, 12.0,
                  points=list(_PHI_DERIV_ROOTS[s]), limit=200, epsabs=tol)
    return val


@dataclass(frozen=True)
class SmoothingConstants:
    """The c_0..c_3 tuple, validated against the quadrature oracle."""

    c: tuple

    @classmethod
    def closed_form(cls) -> "SmoothingConstants":
        return cls(_CS)

    def validate(self, tol: float = 1e-12) -> bool:
        if self.c[0] != 1.0:
            return False
        return all(abs(self.c[s] - constants_c_quadrature(s)) <= tol
                   for s in range(4))


def hermite_polynomials(z: np.ndarray, smax: int) -> np.ndarray:
    """Probabilists' Hermite values He_0..He_smax by recurrence.

    z has shape (K, d); the result has shape (smax+1, K, d).
    """
    K, d = z.shape
    out = np.empty((smax + 1, K, d))
    out[0] = 1.0
    if smax >= 1:
        out[1] = z
    for n in range(1, smax):
        out[n + 1] = z * out[n] - n * out[n - 1]
    return out


def hermite_products(z: np.ndarray, s: int) -> np.ndarray:
    """Canonical entries of the order-s Hermite weight tensor per sample.

    Entry for a multi-index is the product over coordinates j of
    He_{m_j}(z_j), m_j the multiplicity of j. Shape (K, n_entries).
    """
    K, d = z.shape
    H = hermite_polynomials(z, max(s, 1))
    idxs = canonical_indices(d, s)
    out = np.empty((K, len(idxs)))
    for e, idx in enumerate(idxs):
        counts = np.bincount(np.asarray(idx), minlength=d)
        v = np.ones(K)
        for j in range(d):
            if counts[j]:
                v = v * H[counts[j]][:, j]
        out[:, e] = v
    return out


def smooth_stats(f, eps: float, x, mc_n: int = DEFAULT_MC_SCALAR,
                 seed=0) -> tuple[float, float]:
    """Monte Carlo smoothing with standard error."""
    if mc_n < 1:
        raise ValueError("mc_n must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    x = np.asarray(x, dtype=float).reshape(-1)
    if eps == 0.0:
        return float(f(x)), 0.0

    def draw(g, k):
        z = g.normal(size=(k, x.size))
        return f(x + eps * z)

    return rnglib.mc_mean(draw, mc_n, seed, "smooth")


def smooth(f, eps: float, x, mc_n: int = DEFAULT_MC_SCALAR, seed=0) -> float:
    """Average f over a normal cloud of scale eps around x.

    eps = 0 returns f(x) exactly; eps = 1 at x = 0 is the Gaussian mean
    functional used throughout.
    """
    return smooth_stats(f, eps, x, mc_n, seed)[0]


def smooth_derivative_stats(f, eps: float, x, s: int,
                            mc_n: int = DEFAULT_MC_TENSOR,
                            seed=0) -> tuple[SymTensor, np.ndarray]:
    """(tensor, per-entry standard errors) of the derivative estimator."""
    if not 1 <= s <= 4:
        raise ValueError("s must be in 1..4")
    if eps <= 0:
        raise ValueError("eps must be > 0 (representation is singular at 0)")
    x = np.asarray(x, dtype=float).reshape(-1)
    d = x.size

    def draw(g, k):
        z = g.normal(size=(k, d))
        he = hermite_products(z, s)
        return f(x + eps * z)[:, None] * he

    mean, se = rnglib.mc_mean(draw, mc_n, seed, "smooth_deriv")
    scale = eps ** (-s)
    return SymTensor(s, d, np.atleast_1d(mean) * scale), np.atleast_1d(se) * scale


def smooth_derivative(f, eps: float, x, s: int,
                      mc_n: int = DEFAULT_MC_TENSOR, seed=0) -> SymTensor:
    """Order-s derivative tensor of the smoothed function at x.

    Uses the Hermite-weight representation; eps must be positive since
    the weights carry a 1/eps^s factor.
    """
    return smooth_derivative_stats(f, eps, x, s, mc_n, seed)[0]


def estimate_Mr(f, r: int, n_pairs: int = 1000, seed=0,
                pair_scale: float = 2.0) -> float:
    """Lower bound on M_r(f): max difference quotient of the order-(r-1)
    derivative over random pairs drawn from N(0, pair_scale^2 I)."""
    if not 1 <= r <= 4:
        raise ValueError("r must be in 1..4")
    g = rnglib.generator(seed, "mr_pairs")
    d = f.dim
    best = 0.0
    for _ in range(n_pairs):
        x = g.normal(scale=pair_scale, size=d)
        y = g.normal(scale=pair_scale, size=d)
        dist = float(np.linalg.norm(x - y))
        if dist < 1e-12:
            continue
        if r == 1:
            diff = abs(float(f(x)) - float(f(y)))
        else:
            diff = sym_opnorm(f.grad(x, r - 1) - f.grad(y, r - 1))
        q = diff / dist
        if q > best:
            best = q
    return best


class SmoothedFunction:
    """Monte Carlo view of w -> smoothed f at (w * scale), TestFunction-like.

    One z-batch is drawn from the seed at construction and reused at
    every evaluation point (common random numbers). This keeps difference
    quotients per-sample Lipschitz-dominated, so seminorm estimates do
    not accumulate independent noise across pairs. scale = 1 gives plain
    smoothing; scale = cos(alpha) with eps = sin(alpha) gives the
    Gaussian interpolation path used by the Stein machinery.
    """

    def __init__(self, f, eps: float, scale: float = 1.0,
                 mc_n: int = 100_000, seed=0):
        if eps <= 0:
            raise ValueError("eps must be > 0")
        self.inner = f
        self.eps = float(eps)
        self.scale = float(scale)
        self.dim = f.dim
        self.name = f"smoothed({f.name}, eps={eps:g}, scale={scale:g})"
        self.declared_M = {}
        g = rnglib.generator(seed, "smoothed_batch")
        self._z = g.normal(size=(mc_n, f.dim))
        self._he = {}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(np.mean(self.inner(self.scale * x + self.eps * self._z)))
        # batch: average over the shared z cloud in slices to bound memory
        out = np.zeros(x.shape[:-1])
        n = len(self._z)
        step = max(1, (1 << 22) // max(int(np.prod(x.shape[:-1])), 1))
        for lo in range(0, n, step):
            z = self._z[lo:lo + step]
            pts = self.scale * x[..., None, :] + self.eps * z
            out += self.inner(pts).sum(axis=-1)
        return out / n

    def _weights(self, s: int) -> np.ndarray:
        if s not in self._he:
            self._he[s] = hermite_products(self._z, s)
        return self._he[s]

    def grad(self, x, s: int) -> SymTensor:
        if not 1 <= s <= 4:
            raise ValueError("derivative order must be in 1..4")
        x = np.asarray(x, dtype=float).reshape(-1)
        vals = self.inner(self.scale * x + self.eps * self._z)
        he = self._weights(s)
        factor = (self.scale ** s) / (len(vals) * self.eps ** s)
        return SymTensor(s, self.dim, (vals @ he) * factor)


def smoothing_seminorm_check(f, r: int, s: int, eps: float,
                             n_pairs: int = 1000, mc_n: int = 100_000,
                             seed=0) -> tuple[float, float]:
    """Estimate M_{r+s} of the smoothed function and the c_s/eps^s budget.

    Returns (estimate, bound) where bound = (c_s/eps^s) * M_r(f) from the
    declared seminorm. The estimate is a lower bound of the true value;
    the attenuation lemma asserts estimate <= bound.
    """
    if r not in f.declared_M:
        raise ValueError(f"{f.name} does not declare M_{r}")
    sf = SmoothedFunction(f, eps, 1.0, mc_n=mc_n, seed=rnglib.derive_seed(seed, "sf"))
    est = estimate_Mr(sf, r + s, n_pairs=n_pairs, seed=rnglib.derive_seed(seed, "pairs"))
    bound = constants_c(s) / eps ** s * f.declared_M[r]
    return est, bound
