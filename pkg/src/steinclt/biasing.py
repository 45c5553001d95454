"""Size-bias and zero-bias constructions for sums of independent vectors.

For W the sum of independent centered X_i with identity covariance, the
comparison structure is realized concretely as samplable weighted
mixtures rather than set functions:

* the matrix-weighted mixture behind the zero-bias identity draws a
  summand index i proportional to E|X_i|^2, a point x from the
  size-weighted (|x|^2-reweighted) law of X_i and t uniform on [0,1];
  the companion vector is V = W_i + t x with W_i the sum without X_i;
* the vector-weighted mixture comparing V_{i,x} to W draws (t, X_i) and
  places the point (1-t) x + t X_i with weight X_i - x.

The defining identities (value-weighting for the size bias, gradient
reweighting for the zero bias) are verified exactly for finite discrete
laws and by seeded Monte Carlo for sum models. One caveat is inherited
from the construction and left unresolved: the mixture couples V to W
through (W_i, X_i), although the identities never require a joint space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import rng as rnglib

MOMENT_MC_N = 1_000_000


# ---------------------------------------------------------------------------
# one-dimensional laws and the zero-bias transform

@dataclass(frozen=True)
class Discrete1D:
    """Finite discrete law on the real line."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if a.shape != p.shape or a.ndim != 1 or a.size == 0:
            raise ValueError("atoms and probs must be matching 1-d arrays")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        order = np.argsort(a)
        object.__setattr__(self, "atoms", a[order])
        object.__setattr__(self, "probs", p[order])

    def expectation(self, fn) -> float:
        return float(np.dot(self.probs, fn(self.atoms)))

    @property
    def mean(self) -> float:
        return self.expectation(lambda w: w)

    @property
    def var(self) -> float:
        m = self.mean
        return self.expectation(lambda w: (w - m) ** 2)

    def size_biased(self) -> "Discrete1D":
        """Reweight atoms by their value over the mean (requires W >= 0)."""
        if (self.atoms < 0).any():
            raise ValueError("size bias needs nonnegative support")
        mean = self.mean
        if mean <= 0:
            raise ValueError("size bias needs E W > 0")
        return Discrete1D(self.atoms, self.probs * self.atoms / mean)


class PiecewiseUniform:
    """Zero-bias law of a finite discrete law: piecewise-constant density
    between consecutive atoms, level E[W 1(W > v)] / var."""

    def __init__(self, law: Discrete1D):
        scale = max(abs(law.atoms).max(), 1.0)
        if abs(law.mean) > 1e-12 * scale:
            raise ValueError("zero bias needs a centered law")
        var = law.var
        if var <= 0:
            raise ValueError("zero bias needs positive variance")
        a, p = law.atoms, law.probs
        self.breaks = a
        # E[W 1(W > v)] is constant between atoms; tail sums from the right
        tail = np.cumsum((a * p)[::-1])[::-1]
        self.levels = tail[1:] / var            # density on (a_j, a_{j+1})
        widths = np.diff(a)
        self.masses = self.levels * widths
        total = self.masses.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError("zero-bias density does not integrate to 1")
        self.var = var

    def density(self, v) -> np.ndarray:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        j = np.searchsorted(self.breaks, v, side="right") - 1
        inside = (j >= 0) & (j < len(self.levels))
        out = np.zeros_like(v, dtype=float)
        out[inside] = self.levels[np.clip(j, 0, len(self.levels) - 1)][inside]
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        j = rng.choice(len(self.masses), size=size, p=self.masses / self.masses.sum())
        lo = self.breaks[j]
        hi = self.breaks[j + 1]
        return rng.uniform(lo, hi)


@dataclass(frozen=True)
class Continuous1D:
    """Centered density on the line, with an optional closed-form
    mean-tail v -> E[W 1(W > v)] (computed by quadrature otherwise)."""

    pdf: Callable[[float], float]
    support: tuple
    var: float
    mean_tail: Optional[Callable[[float], float]] = None

    def tail(self, v: float) -> float:
        if self.mean_tail is not None:
            return float(self.mean_tail(v))
        hi = min(self.support[1], 40.0)
        if v >= hi:
            return 0.0
        val, _ = quad(lambda t: t * self.pdf(t), v, hi, limit=200)
        return val


class GridZeroBias:
    """Zero-bias law of a continuous base law via a grid inverse CDF.

    The density E[W 1(W > v)] / var is tabulated on a fine grid over the
    effective support and sampled by inverse-CDF interpolation; the exact
    density function stays available for quadrature checks.
    """

    def __init__(self, law: Continuous1D, grid_points: int = 4001):
        lo, hi = law.support
        lo = max(lo, -12.0)
        hi = min(hi, 12.0)
        self.var = law.var
        self.grid = np.linspace(lo, hi, grid_points)
        dens = np.array([max(law.tail(v), 0.0) for v in self.grid]) / law.var
        cdf = np.concatenate([[0.0], np.cumsum(
            0.5 * (dens[1:] + dens[:-1]) * np.diff(self.grid))])
        if cdf[-1] <= 0:
            raise ValueError("degenerate zero-bias density")
        self._dens = dens
        self._cdf = cdf / cdf[-1]
        self._law = law

    def density(self, v) -> np.ndarray:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return np.array([max(self._law.tail(t), 0.0) / self.var for t in v])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.uniform(size=size)
        return np.interp(u, self._cdf, self.grid)


def zero_bias_1d(law):
    """Sampler (with density) of the zero-bias transform of a centered law.

    Discrete laws produce the exact piecewise-uniform construction;
    continuous laws go through the grid inverse CDF. The output V
    satisfies E[f(W) W] = var(W) E[f'(V)] for differentiable f.
    """
    if isinstance(law, Discrete1D):
        return PiecewiseUniform(law)
    if isinstance(law, Continuous1D):
        return GridZeroBias(law)
    raise TypeError("law must be Discrete1D or Continuous1D")


def _eval_1d(f, w: np.ndarray) -> np.ndarray:
    """Evaluate a scalar test function on a 1-d batch of reals; accepts
    both plain vectorized callables and dim-1 TestFunction objects."""
    if getattr(f, "dim", None) == 1:
        return np.asarray(f(w[..., None]), dtype=float)
    return np.asarray(f(w), dtype=float)


def verify_size_bias_identity(w_law: Discrete1D, f) -> tuple[float, float]:
    """Exact both sides of the value-weighting identity for a finite law.

    lhs enumerates E[f(W) W]; rhs builds the size-biased law and returns
    E W * E[f(V)]. The two agree to machine precision by construction.
    """
    if (w_law.atoms < 0).any():
        raise ValueError("size-bias identity needs W >= 0")
    mean = w_law.mean
    if mean <= 0:
        raise ValueError("size-bias identity needs E W > 0")
    lhs = w_law.expectation(lambda w: _eval_1d(f, w) * w)
    biased = w_law.size_biased()
    rhs = mean * biased.expectation(lambda w: _eval_1d(f, w))
    return lhs, rhs


# ---------------------------------------------------------------------------
# sum models

@dataclass(frozen=True)
class SummandSpec:
    """One independent summand: sampler plus norm-moment functionals.

    The sampler draws (size, d) arrays. m1/m2/m3/m4 are E|X|^k; they may
    be exact or Monte Carlo (see moment_mode). norm_pdf, when given, is
    the density of |X| for quadrature-exact weighted moments.
    """

    name: str
    dim: int
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    m1: float
    m2: float
    m3: Optional[float] = None
    m4: Optional[float] = None
    norm_pdf: Optional[tuple] = None       # (pdf, lo, hi) for |X|
    norm_is_constant: bool = False
    norm_atoms: Optional[tuple] = None     # (values, probs) of |X|
    zero_bias_sampler: Optional[Callable] = None
    moment_mode: str = "exact"
    mc_seed: int = 0
    _min_moment_cache: dict = field(default_factory=dict, compare=False,
                                    repr=False)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x = np.asarray(self.sampler(rng, size), dtype=float)
        if x.shape != (size, self.dim):
            raise ValueError(f"{self.name}: sampler returned shape {x.shape}")
        return x

    def expect_norm_weighted(self, g, mc_n: int = MOMENT_MC_N) -> float:
        """E[|X|^2 g(|X|)] — exact for constant or atomic norms,
        quadrature when the norm density is known, seeded Monte Carlo
        otherwise."""
        if self.norm_is_constant:
            r = np.sqrt(self.m2)
            return self.m2 * float(g(r))
        if self.norm_atoms is not None:
            vals, probs = self.norm_atoms
            return float(np.dot(probs, vals * vals * g(vals)))
        if self.norm_pdf is not None:
            pdf, lo, hi = self.norm_pdf
            val, _ = quad(lambda r: r * r * g(r) * pdf(r), lo, hi, limit=200)
            return val

        def draw(rg, k):
            n = np.linalg.norm(self.sample(rg, k), axis=1)
            return n * n * g(n)

        return rnglib.mc_mean(draw, mc_n, self.mc_seed, "normw")[0]

    def min_moment(self, a: float, b: float, mc_n: int = MOMENT_MC_N) -> float:
        """Truncated moment E[|X|^2 min(a, b |X|)]; cached per (a, b)."""
        if a < 0 or b < 0:
            raise ValueError("a and b must be >= 0")
        key = (float(a), float(b), int(mc_n))
        if key not in self._min_moment_cache:
            self._min_moment_cache[key] = self.expect_norm_weighted(
                lambda r: np.minimum(a, b * r), mc_n)
        return self._min_moment_cache[key]


@dataclass(frozen=True)
class SumModel:
    """W as a sum of independent summands; covariance should be I_d."""

    summands: tuple
    dim: int
    name: str = "model"
    iid: bool = False

    def __post_init__(self):
        if not self.summands:
            return
        for s in self.summands:
            if s.dim != self.dim:
                raise ValueError("summand dimension mismatch")

    @property
    def n(self) -> int:
        return len(self.summands)

    @property
    def trace_m2(self) -> float:
        return float(sum(s.m2 for s in self.summands))

    def _sum_of(self, rng: np.random.Generator, size: int, count: int) -> np.ndarray:
        # identical summands: one big draw instead of `count` small ones
        x = np.asarray(self.summands[0].sampler(rng, size * count), dtype=float)
        return x.reshape(size, count, self.dim).sum(axis=1)

    def sample_w(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.n == 0:
            return np.zeros((size, self.dim))
        if self.iid:
            return self._sum_of(rng, size, self.n)
        w = np.zeros((size, self.dim))
        for s in self.summands:
            w += s.sample(rng, size)
        return w

    def sample_rest(self, rng: np.random.Generator, size: int, i: int) -> np.ndarray:
        """W_i = W - X_i with X_i left out, fresh draws."""
        if self.n <= 1:
            return np.zeros((size, self.dim))
        if self.iid:
            return self._sum_of(rng, size, self.n - 1)
        w = np.zeros((size, self.dim))
        for j, s in enumerate(self.summands):
            if j != i:
                w += s.sample(rng, size)
        return w

    def covariance_deviation(self, mc_n: int = 200_000, seed=0) -> float:
        """max |Cov(W) - I| entry by Monte Carlo."""
        g = rnglib.generator(seed, "cov")
        w = self.sample_w(g, mc_n)
        w = w - w.mean(axis=0)
        cov = w.T @ w / (mc_n - 1)
        return float(np.abs(cov - np.eye(self.dim)).max())


class MuBreveMixture:
    """Samplable form of the matrix-weighted comparison measure.

    Component weight for summand i is E|X_i|^2 (the pure-tensor x (x) x
    reduces the projective mass to |x|^2); a component draw is (i, t, x)
    with t uniform and x from the size-weighted law of X_i, and the
    companion point is V = W_i + t x.
    """

    def __init__(self, model: SumModel, seed=0, pilot: int = 20_000):
        if model.n == 0:
            raise ValueError("empty model")
        self.model = model
        self.weights = np.array([s.m2 for s in model.summands])
        self.total_mass = float(self.weights.sum())
        self._caps = []
        for i, s in enumerate(model.summands):
            g = rnglib.generator(seed, "pilot", i)
            sq = (s.sample(g, pilot) ** 2).sum(axis=1)
            self._caps.append(float(np.quantile(sq, 0.999)))
        self.seed = seed

    def _sample_size_weighted(self, rng, law, cap, size: int) -> np.ndarray:
        """Rejection with acceptance min(1, |x|^2 / cap)."""
        out = np.empty((size, law.dim))
        filled = 0
        while filled < size:
            k = max(2 * (size - filled), 64)
            x = law.sample(rng, k)
            sq = (x * x).sum(axis=1)
            keep = rng.uniform(size=k) * cap < sq
            x = x[keep]
            take = min(len(x), size - filled)
            out[filled:filled + take] = x[:take]
            filled += take
        return out

    def sample_components(self, rng: np.random.Generator, size: int):
        """(i, t, x) draws with i proportional to the component weights."""
        i = rng.choice(self.model.n, size=size, p=self.weights / self.total_mass)
        t = rng.uniform(size=size)
        x = np.empty((size, self.model.dim))
        for idx in np.unique(i):
            mask = i == idx
            x[mask] = self._sample_size_weighted(
                rng, self.model.summands[idx], self._caps[idx], int(mask.sum()))
        return i, t, x

    def sample_v(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Companion draws V_{i,tx} = W_i + t x."""
        i, t, x = self.sample_components(rng, size)
        v = t[:, None] * x
        for idx in np.unique(i):
            mask = i == idx
            v[mask] += self.model.sample_rest(rng, int(mask.sum()), int(idx))
        return v


class NuMixture:
    """Vector-weighted mixture comparing V_{i,x} to W, for a fixed (i, x).

    Draws (t, X_i), places the point (1-t) x + t X_i and weighs it by
    X_i - x; the total-variation mass is therefore E|X_i - x|, bounded by
    E|X_i| + |x|.
    """

    def __init__(self, law: SummandSpec, x):
        self.law = law
        self.x = np.asarray(x, dtype=float).reshape(-1)
        if self.x.size != law.dim:
            raise ValueError("anchor point dimension mismatch")
        self.beta1_upper = law.m1 + float(np.linalg.norm(self.x))

    def sample(self, rng: np.random.Generator, size: int):
        """(points, weights): points (size, d), weights (size, d)."""
        t = rng.uniform(size=size)
        xi = self.law.sample(rng, size)
        points = (1.0 - t)[:, None] * self.x + t[:, None] * xi
        return points, xi - self.x


def beta1_estimate(mix: NuMixture, mc_n: int = 200_000, seed=0) -> float:
    """Monte Carlo total-variation mass of the vector-weighted mixture."""

    def draw(g, k):
        _, wts = mix.sample(g, k)
        return np.linalg.norm(wts, axis=1)

    return rnglib.mc_mean(draw, mc_n, seed, "beta1")[0]


def _summand_groups(model: SumModel):
    """Runs of identical summand objects as (spec, index, count)."""
    groups = []
    for j, s in enumerate(model.summands):
        for g in groups:
            if g[0] is s:
                g[2] += 1
                break
        else:
            groups.append([s, j, 1])
    return groups


def verify_zero_bias_identity_stats(model: SumModel, mix: MuBreveMixture,
                                    f, mc_n: int = 200_000, seed=0):
    """Per-coordinate residual and SE of the gradient-reweighting identity.

    lhs_k = E[f(W) W_k]; rhs_k sums, over summands, the t-integrated
    E[x <x, grad f(W_i + t x)>] with t drawn uniformly (the mixture's
    [0,1] component) and x drawn plainly, carrying its |x|^2 weight
    explicitly. Plain draws keep the estimator unbiased for heavy-tailed
    norms, where the capped size-weighted sampler would clip ~1% of the
    weighted mass. Returns (residuals, ses) arrays.
    """
    if f.grad1_batch is None:
        raise ValueError("verify_zero_bias_identity needs a batch gradient")
    if mix.model is not model:
        raise ValueError("mixture was built from a different model")

    def draw_lhs(g, k):
        w = model.sample_w(g, k)
        return np.asarray(f(w))[:, None] * w

    lhs, se_l = rnglib.mc_mean(draw_lhs, mc_n, seed, "zb_lhs")

    rhs = np.zeros(model.dim)
    var_r = np.zeros(model.dim)
    for s, idx, count in _summand_groups(model):
        def draw_rhs(g, k, s=s, idx=idx):
            x = s.sample(g, k)
            t = g.uniform(size=(k, 1))
            rest = model.sample_rest(g, k, idx)
            grad = f.grad1_batch(rest + t * x)
            return x * (x * grad).sum(axis=1, keepdims=True)

        mean, se = rnglib.mc_mean(draw_rhs, mc_n, seed, "zb_rhs", idx)
        rhs = rhs + count * np.atleast_1d(mean)
        var_r = var_r + (count * np.atleast_1d(se)) ** 2

    residuals = np.abs(np.atleast_1d(lhs) - rhs)
    ses = np.sqrt(np.atleast_1d(se_l) ** 2 + var_r)
    return residuals, ses


def verify_zero_bias_identity(model: SumModel, mix: MuBreveMixture, f,
                              mc_n: int = 200_000, seed=0) -> float:
    """Max per-coordinate residual of the identity (see the stats variant
    for the SEs the 4-SE pass criterion compares against)."""
    residuals, _ = verify_zero_bias_identity_stats(model, mix, f, mc_n, seed)
    return float(residuals.max())
