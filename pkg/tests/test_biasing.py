import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import poisson

from steinclt import rng as rnglib
from steinclt.biasing import (Continuous1D, Discrete1D, MuBreveMixture,
                              NuMixture, SummandSpec, SumModel, beta1_estimate,
                              verify_size_bias_identity,
                              verify_zero_bias_identity,
                              verify_zero_bias_identity_stats, zero_bias_1d)
from steinclt.families import (exponential_mean_tail, make_model,
                               normal_mean_tail, uniform_mean_tail)
from steinclt.functions import cos_ridge, linear_fn, ridge, sqrt_cap

SQRT3 = np.sqrt(3.0)


def cube_fn():
    return ridge("cube", 1, np.ones(1),
                 [lambda t: t ** 3, lambda t: 3 * t * t, lambda t: 6 * t,
                  lambda t: 6 * np.ones_like(t), lambda t: np.zeros_like(t)])


def point_mass(value, d=1):
    v = np.full(d, float(value))
    return SummandSpec(name="point", dim=d,
                       sampler=lambda g, k: np.tile(v, (k, 1)),
                       m1=abs(value) * np.sqrt(d), m2=value ** 2 * d,
                       m3=(abs(value) * np.sqrt(d)) ** 3,
                       m4=(value ** 2 * d) ** 2, norm_is_constant=True)


class TestSizeBias:
    def test_bernoulli(self):
        p = 0.3
        law = Discrete1D(np.array([0.0, 1.0]), np.array([1 - p, p]))
        f = lambda w: np.exp(w)  # arbitrary bounded on the support
        lhs, rhs = verify_size_bias_identity(law, f)
        assert lhs == pytest.approx(p * np.e, abs=1e-14)
        assert rhs == pytest.approx(lhs, abs=1e-12)

    def test_poisson_shift(self):
        lam = 3.0
        ks = np.arange(21)
        probs = poisson.pmf(ks, lam)
        probs = probs / probs.sum()
        law = Discrete1D(ks.astype(float), probs)
        lhs, rhs = verify_size_bias_identity(law, lambda w: w)
        assert lhs == pytest.approx(rhs, abs=1e-12)
        # size bias of Poisson is the shift by one: E W^2 = lam (lam + 1);
        # truncating the support at 20 leaves a ~5e-9 tail discrepancy
        assert lhs == pytest.approx(lam * (lam + 1), abs=1e-8)

    def test_constant_function_recovers_mean(self):
        law = Discrete1D(np.array([0.0, 1.0, 2.0]), np.array([0.2, 0.5, 0.3]))
        lhs, rhs = verify_size_bias_identity(law, lambda w: np.ones_like(w))
        assert lhs == pytest.approx(law.mean, abs=1e-14)
        assert rhs == pytest.approx(law.mean, abs=1e-14)

    def test_negative_support_rejected(self):
        law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="W >= 0"):
            verify_size_bias_identity(law, lambda w: w)


class TestZeroBias1D:
    def test_rademacher_gives_uniform(self):
        law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        zb = zero_bias_1d(law)
        for v in (-0.9, -0.2, 0.0, 0.5, 0.99):
            assert zb.density(v)[0] == pytest.approx(0.5, abs=1e-12)
        assert zb.density(1.5)[0] == 0.0

    def test_rademacher_identity_by_quadrature(self):
        law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        zb = zero_bias_1d(law)
        for f, fp in ((lambda w: w ** 3, lambda v: 3 * v * v),
                      (np.sin, np.cos)):
            lhs = law.expectation(lambda w: f(w) * w)
            rhs, _ = quad(lambda v: fp(v) * zb.density(v)[0], -1, 1,
                          epsabs=1e-12)
            assert abs(lhs - law.var * rhs) <= 1e-9

    def test_normal_fixed_point(self):
        law = Continuous1D(pdf=lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi),
                           support=(-np.inf, np.inf), var=1.0,
                           mean_tail=normal_mean_tail)
        zb = zero_bias_1d(law)
        grid = np.linspace(-3, 3, 13)
        dens = zb.density(grid)
        target = np.exp(-grid ** 2 / 2) / np.sqrt(2 * np.pi)
        assert np.abs(dens - target).max() <= 1e-12

    def test_uniform_closed_form_density(self):
        law = Continuous1D(pdf=lambda t: 1 / (2 * SQRT3) if abs(t) <= SQRT3 else 0.0,
                           support=(-SQRT3, SQRT3), var=1.0,
                           mean_tail=uniform_mean_tail)
        zb = zero_bias_1d(law)
        grid = np.linspace(-SQRT3 + 1e-9, SQRT3 - 1e-9, 11)
        target = (3 - grid ** 2) / (4 * SQRT3)
        assert np.abs(zb.density(grid) - target).max() <= 1e-12

    @pytest.mark.parametrize("fname", ["cube", "sin", "cap"])
    def test_sampler_satisfies_identity(self, fname):
        # E[f(W) W] = var E[f'(V)] against the exact lhs, 4-SE band
        law = Discrete1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        zb = zero_bias_1d(law)
        f, fp = {
            "cube": (lambda w: w ** 3, lambda v: 3 * v * v),
            "sin": (np.sin, np.cos),
            "cap": (lambda w: np.sqrt(1 + w * w),
                    lambda v: v / np.sqrt(1 + v * v)),
        }[fname]
        lhs = law.expectation(lambda w: f(w) * w)
        g = rnglib.generator(77, fname)
        v = zb.sample(g, 400_000)
        vals = fp(v)
        rhs = vals.mean()
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(lhs - law.var * rhs) <= 4 * se

    def test_continuous_sampler_identity(self):
        law = Continuous1D(pdf=lambda t: 1 / (2 * SQRT3) if abs(t) <= SQRT3 else 0.0,
                           support=(-SQRT3, SQRT3), var=1.0,
                           mean_tail=uniform_mean_tail)
        zb = zero_bias_1d(law)
        lhs, _ = quad(lambda w: np.sin(w) * w / (2 * SQRT3), -SQRT3, SQRT3,
                      epsabs=1e-12)
        g = rnglib.generator(78)
        v = zb.sample(g, 400_000)
        vals = np.cos(v)
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(lhs - vals.mean()) <= 4 * se + 1e-4  # grid interpolation bias

    def test_centering_required(self):
        law = Discrete1D(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="centered"):
            zero_bias_1d(law)

    def test_exponential_zero_bias_is_shifted_gamma(self):
        # mean-tail (v+1) e^{-(v+1)} is the Gamma(2) density shifted by -1
        law = Continuous1D(pdf=lambda t: np.exp(-(t + 1)) if t >= -1 else 0.0,
                           support=(-1.0, np.inf), var=1.0,
                           mean_tail=exponential_mean_tail)
        zb = zero_bias_1d(law)
        grid = np.array([-0.5, 0.0, 1.0, 3.0])
        target = (grid + 1) * np.exp(-(grid + 1))
        assert np.abs(zb.density(grid) - target).max() <= 1e-12


class TestFamilyZeroBiasSamplers:
    @pytest.mark.parametrize("family", ["rademacher", "uniform", "exponential",
                                        "gaussian", "two_point"])
    def test_identity_for_one_summand(self, family):
        # E[f(X) X] = var(X) E[f'(V)] with V from the attached sampler
        n = 4
        s = make_model(family, 1, n, seed=50).summands[0]
        assert s.zero_bias_sampler is not None
        g = rnglib.generator(51, family)
        x = s.sample(g, 400_000)[:, 0]
        lhs_samples = np.sin(x) * x
        lhs = lhs_samples.mean()
        se_l = lhs_samples.std(ddof=1) / np.sqrt(len(x))
        v = s.zero_bias_sampler(g, 400_000)
        rhs_samples = np.cos(v) / n  # var(X) = 1/n
        rhs = rhs_samples.mean()
        se_r = rhs_samples.std(ddof=1) / np.sqrt(len(v))
        assert abs(lhs - rhs) <= 4 * np.hypot(se_l, se_r)


class TestSummandSpec:
    @pytest.mark.parametrize("family", ["rademacher", "uniform", "exponential",
                                        "gaussian", "two_point"])
    @pytest.mark.parametrize("d", [1, 2])
    def test_centered_and_m2(self, family, d):
        model = make_model(family, d, 4, seed=5)
        s = model.summands[0]
        g = rnglib.generator(9, family, d)
        x = s.sample(g, 1_000_000)
        # centering: |mean| <= 4 sqrt(m2 / N)
        assert np.linalg.norm(x.mean(axis=0)) <= 4 * np.sqrt(s.m2 / 1_000_000)
        m2_hat = (x ** 2).sum(axis=1).mean()
        assert m2_hat == pytest.approx(s.m2, rel=0.01)

    @pytest.mark.parametrize("family", ["uniform", "exponential", "gaussian"])
    def test_quadrature_moments_match_mc_d1(self, family):
        s = make_model(family, 1, 7, seed=6).summands[0]
        g = rnglib.generator(10, family)
        r = np.abs(s.sample(g, 2_000_000)[:, 0])
        for k, declared in ((1, s.m1), (3, s.m3), (4, s.m4)):
            mc = (r ** k).mean()
            se = (r ** k).std(ddof=1) / np.sqrt(len(r))
            assert abs(mc - declared) <= 5 * se, (family, k)

    def test_min_moment_exact_vs_mc(self):
        s = make_model("uniform", 1, 9, seed=7).summands[0]
        exact = s.min_moment(0.5, 2.0)
        g = rnglib.generator(11)
        r = np.abs(s.sample(g, 2_000_000)[:, 0])
        vals = r * r * np.minimum(0.5, 2.0 * r)
        assert exact == pytest.approx(vals.mean(), abs=5 * vals.std() / np.sqrt(len(r)))


class TestSumModel:
    @pytest.mark.parametrize("family", ["rademacher", "uniform", "exponential"])
    def test_standardized_covariance(self, family):
        model = make_model(family, 2, 8, seed=12)
        assert model.covariance_deviation(mc_n=300_000, seed=13) <= 0.02
        assert model.trace_m2 == pytest.approx(2.0, rel=1e-12)

    def test_iid_fast_path_matches_slow(self):
        model = make_model("rademacher", 2, 4, seed=14)
        slow = SumModel(model.summands, 2, iid=False)
        # same family of laws, statistically identical: compare moments
        g1 = rnglib.generator(15)
        g2 = rnglib.generator(15)
        w_fast = model.sample_w(g1, 200_000)
        w_slow = slow.sample_w(g2, 200_000)
        assert abs(w_fast.var(axis=0) - w_slow.var(axis=0)).max() <= 0.02


class TestMuBreveMixture:
    def test_total_mass_is_dimension(self):
        for family, d in (("rademacher", 1), ("uniform", 2), ("exponential", 3)):
            model = make_model(family, d, 6, seed=16)
            mix = MuBreveMixture(model, seed=16)
            assert mix.total_mass == pytest.approx(d, rel=0.02)

    def test_component_draws_shape_and_range(self):
        model = make_model("uniform", 2, 5, seed=17)
        mix = MuBreveMixture(model, seed=17)
        g = rnglib.generator(18)
        i, t, x = mix.sample_components(g, 5000)
        assert i.shape == (5000,) and ((0 <= i) & (i < 5)).all()
        assert ((0 <= t) & (t <= 1)).all()
        assert x.shape == (5000, 2) and np.isfinite(x).all()
        v = mix.sample_v(g, 2000)
        assert v.shape == (2000, 2) and np.isfinite(v).all()

    def test_size_weighting_tilts_norms(self):
        # |x|^2-reweighted uniform norms stochastically dominate the base
        model = make_model("uniform", 1, 3, seed=19)
        mix = MuBreveMixture(model, seed=19)
        g = rnglib.generator(20)
        _, _, x = mix.sample_components(g, 100_000)
        base = model.summands[0].sample(g, 100_000)
        assert np.abs(x).mean() > np.abs(base).mean() * 1.2

    def test_empty_model_rejected(self):
        with pytest.raises(ValueError):
            MuBreveMixture(SumModel((), 1), seed=0)


class TestZeroBiasIdentity:
    def test_linear_function_standardized(self):
        model = make_model("uniform", 2, 8, seed=21)
        mix = MuBreveMixture(model, seed=21)
        resid, ses = verify_zero_bias_identity_stats(model, mix, linear_fn(2),
                                                     mc_n=200_000, seed=21)
        assert (resid <= 4 * ses).all()

    def test_single_rademacher_cubic(self):
        # E[W^4] = 1 on the left; 3 E[(tX)^2 X^2] integrates to 1 as well
        model = make_model("rademacher", 1, 1, seed=22)
        mix = MuBreveMixture(model, seed=22)
        resid, ses = verify_zero_bias_identity_stats(model, mix, cube_fn(),
                                                     mc_n=300_000, seed=22)
        assert (resid <= 4 * ses).all()

    def test_constant_function(self):
        const = ridge("const", 1, np.ones(1),
                      [lambda t: np.ones_like(t)] + [lambda t: np.zeros_like(t)] * 4)
        model = make_model("rademacher", 1, 4, seed=23)
        mix = MuBreveMixture(model, seed=23)
        resid, ses = verify_zero_bias_identity_stats(model, mix, const,
                                                     mc_n=100_000, seed=23)
        assert (resid <= 4 * ses).all()

    @pytest.mark.parametrize("family", ["rademacher", "uniform", "exponential"])
    def test_battery_models(self, family):
        model = make_model(family, 2, 4, seed=24)
        mix = MuBreveMixture(model, seed=24)
        r = verify_zero_bias_identity(model, mix, cos_ridge(2),
                                      mc_n=150_000, seed=24)
        _, ses = verify_zero_bias_identity_stats(model, mix, cos_ridge(2),
                                                 mc_n=150_000, seed=24)
        assert r <= 4 * ses.max()

    def test_mismatched_mixture_rejected(self):
        m1 = make_model("rademacher", 1, 2, seed=25)
        m2 = make_model("rademacher", 1, 2, seed=26)
        mix = MuBreveMixture(m2, seed=25)
        with pytest.raises(ValueError, match="different model"):
            verify_zero_bias_identity(m1, mix, cos_ridge(1))


class TestNuMixture:
    def test_degenerate_anchor(self):
        s = point_mass(0.7)
        mix = NuMixture(s, np.array([0.7]))
        assert beta1_estimate(mix, mc_n=10_000, seed=27) == pytest.approx(0.0, abs=1e-12)

    def test_rademacher_origin_anchor(self):
        s = make_model("rademacher", 1, 1, seed=28).summands[0]
        mix = NuMixture(s, np.zeros(1))
        est = beta1_estimate(mix, mc_n=100_000, seed=28)
        assert est == pytest.approx(1.0, abs=1e-9)  # |X| = 1 surely

    def test_rademacher_unit_anchor(self):
        s = make_model("rademacher", 1, 1, seed=29).summands[0]
        mix = NuMixture(s, np.array([1.0]))
        est = beta1_estimate(mix, mc_n=100_000, seed=29)
        se = 1.0 / np.sqrt(100_000)  # |X - 1| in {0, 2}: sd = 1
        assert abs(est - 1.0) <= 3 * se

    @pytest.mark.parametrize("family", ["uniform", "exponential", "gaussian"])
    def test_mass_bounded_by_moments(self, family):
        s = make_model(family, 2, 3, seed=30).summands[0]
        for anchor in (np.zeros(2), np.array([0.4, -0.1])):
            mix = NuMixture(s, anchor)
            est = beta1_estimate(mix, mc_n=100_000, seed=31)
            se = np.sqrt(s.m2) / np.sqrt(100_000)
            assert est <= mix.beta1_upper + 3 * se

    def test_points_interpolate(self):
        s = make_model("uniform", 1, 1, seed=32).summands[0]
        mix = NuMixture(s, np.array([0.2]))
        g = rnglib.generator(33)
        pts, wts = mix.sample(g, 1000)
        assert pts.shape == (1000, 1) and wts.shape == (1000, 1)
        lo = min(0.2, -SQRT3) - 1e-12
        hi = max(0.2, SQRT3) + 1e-12
        assert ((lo <= pts) & (pts <= hi)).all()
