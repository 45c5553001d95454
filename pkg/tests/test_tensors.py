import numpy as np
import pytest

from steinclt.tensors import (SymTensor, UnitVector, apply_pure,
                              canonical_indices, injective_norm_symmetric,
                              sym_opnorm, tensor_power)


def sphere_grid(d, k=10_000):
    """Quasi-uniform unit vectors: circle grid (d=2), Fibonacci sphere (d=3)."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = np.linspace(0, 2 * np.pi, k, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    i = np.arange(k)
    ga = np.pi * (3 - np.sqrt(5))
    y = 1 - 2 * (i + 0.5) / k
    rad = np.sqrt(1 - y * y)
    return np.stack([rad * np.cos(ga * i), y, rad * np.sin(ga * i)], axis=1)


def grid_norm(t: SymTensor, k=10_000):
    """Independent oracle: dense search of |<T, v^r>| over sphere points."""
    V = sphere_grid(t.dim, k)
    dense = t.to_dense()
    vals = dense
    subs = "ijkl"[:t.order]
    expr = subs + "," + ",".join(f"a{c}" for c in subs) + "->a"
    return float(np.abs(np.einsum(expr, vals, *([V] * t.order))).max())


def random_symmetric(d, r, rng):
    n = len(canonical_indices(d, r))
    return SymTensor(r, d, rng.normal(size=n))


class TestApplyPure:
    def test_pure_power_pairing(self):
        u = np.array([1.0, 0.0])
        t = tensor_power(u, 2)
        assert apply_pure(t, UnitVector(u)) == pytest.approx(1.0)

    def test_identity_two_tensor(self):
        eye = SymTensor.from_dense(np.eye(2))
        for th in (0.0, 0.3, 1.2):
            v = UnitVector(np.array([np.cos(th), np.sin(th)]))
            assert apply_pure(eye, v) == pytest.approx(1.0)

    def test_signature_tensor_vanishes_at_diagonal(self):
        # <e1 e1 - e2 e2, v v> = cos^2 - sin^2 = 0 at theta = pi/4
        t = SymTensor.from_dense(np.diag([1.0, -1.0]))
        th = np.pi / 4
        v = UnitVector(np.array([np.cos(th), np.sin(th)]))
        assert apply_pure(t, v) == pytest.approx(np.cos(th) ** 2 - np.sin(th) ** 2,
                                                 abs=1e-14)

    def test_dimension_mismatch(self):
        t = tensor_power(np.ones(2), 2)
        with pytest.raises(ValueError, match="dimension"):
            apply_pure(t, UnitVector(np.array([1.0, 0.0, 0.0])))


class TestTensorPower:
    def test_basis_vector(self):
        t = tensor_power(np.array([1.0, 0.0]), 2)
        assert t.get(0, 0) == 1.0
        assert t.get(0, 1) == 0.0
        assert t.get(1, 1) == 0.0

    def test_zero_vector(self):
        t = tensor_power(np.zeros(3), 3)
        assert np.all(t.values == 0.0)

    def test_ones_vector(self):
        t = tensor_power(np.array([1.0, 1.0]), 2)
        assert np.all(t.values == 1.0)

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            tensor_power(np.ones(2), 0)


class TestStorage:
    def test_permuted_read_matches_canonical(self):
        rng = np.random.default_rng(3)
        t = random_symmetric(3, 3, rng)
        assert t.get(2, 0, 1) == t.get(0, 1, 2)
        assert t.get(1, 2, 0) == t.get(0, 1, 2)
        dense = t.to_dense()
        assert dense[2, 0, 1] == dense[0, 1, 2]

    def test_values_immutable(self):
        t = tensor_power(np.ones(2), 2)
        with pytest.raises((ValueError, RuntimeError)):
            t.values[0] = 5.0

    def test_entry_count_validation(self):
        with pytest.raises(ValueError, match="canonical"):
            SymTensor(2, 2, np.zeros(4))


class TestUnitVector:
    def test_norm_enforced(self):
        with pytest.raises(ValueError, match="norm 1"):
            UnitVector(np.array([1.0, 1.0]))

    def test_tolerance(self):
        UnitVector(np.array([1.0 + 5e-13, 0.0]))  # inside 1e-12


class TestInjectiveNorm:
    def test_pure_power_cross_norm(self):
        u = np.array([2.0, 0.0, 0.0])
        assert injective_norm_symmetric(tensor_power(u, 3)) == pytest.approx(8.0, abs=1e-9)

    def test_identity_matrix(self):
        for d in (2, 3, 5):
            eye = SymTensor.from_dense(np.eye(d))
            assert injective_norm_symmetric(eye) == pytest.approx(1.0, abs=1e-9)

    def test_random_order3_matches_grid(self):
        rng = np.random.default_rng(7)
        t = random_symmetric(2, 3, rng)
        a = injective_norm_symmetric(t, seed=1)
        g = grid_norm(t)
        assert a == pytest.approx(g, rel=1e-3)

    def test_zero_tensor(self):
        assert injective_norm_symmetric(SymTensor.zero(3, 2)) == 0.0

    def test_restarts_validated(self):
        with pytest.raises(ValueError):
            injective_norm_symmetric(tensor_power(np.ones(2), 2), restarts=0)


class TestNormInvariants:
    def test_unit_power_norm_one(self):
        rng = np.random.default_rng(11)
        for r in (1, 2, 3, 4):
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            val = injective_norm_symmetric(tensor_power(u, r))
            assert val == pytest.approx(1.0, abs=1e-9)

    def test_homogeneity(self):
        rng = np.random.default_rng(13)
        t = random_symmetric(3, 3, rng)
        base = injective_norm_symmetric(t, restarts=32, seed=5)
        for c in (-2.5, 0.25, 7.0):
            scaled = injective_norm_symmetric(c * t, restarts=32, seed=5)
            assert scaled == pytest.approx(abs(c) * base, abs=1e-9 * max(1, abs(c)))

    @pytest.mark.parametrize("d,r", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_triangle_inequality_grid(self, d, r):
        # grid oracle avoids flagging ascent nonconvergence as a violation
        rng = np.random.default_rng(17 + d + r)
        for _ in range(5):
            s = random_symmetric(d, r, rng)
            t = random_symmetric(d, r, rng)
            assert grid_norm(s + t, 4000) <= grid_norm(s, 4000) + grid_norm(t, 4000) + 1e-9

    @pytest.mark.parametrize("d,r", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_ascent_matches_grid(self, d, r):
        rng = np.random.default_rng(23 + 10 * d + r)
        for trial in range(5):
            t = random_symmetric(d, r, rng)
            a = injective_norm_symmetric(t, seed=trial)
            g = grid_norm(t)
            assert a == pytest.approx(g, rel=1e-3)

    def test_sym_opnorm_matches_ascent_low_order(self):
        rng = np.random.default_rng(29)
        v = SymTensor(1, 3, rng.normal(size=3))
        assert sym_opnorm(v) == pytest.approx(injective_norm_symmetric(v), abs=1e-9)
        m = random_symmetric(3, 2, rng)
        assert sym_opnorm(m) == pytest.approx(injective_norm_symmetric(m), abs=1e-9)
