"""Test functions with derivative oracles and declared seminorm budgets.

A TestFunction bundles a vectorized evaluator with oracles for its
derivative tensors up to order 4 (closed form where available, central
finite differences otherwise) and optionally declares upper bounds on
its Lipschitz seminorms M_r. The standard battery consists of ridge
functions g(<w,u>) and radial functions g(|w|^2), whose derivatives
reduce to one-dimensional profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .tensors import SymTensor, canonical_indices, tensor_power

FD_BASE_STEP = 1e-4


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class despite the name

    name: str
    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    grad_oracle: Optional[Callable[[np.ndarray, int], SymTensor]] = None
    grad1_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    laplacian_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    declared_M: Mapping[int, float] = field(default_factory=dict)

    @property
    def closed_form(self) -> bool:
        return self.grad_oracle is not None

    def __call__(self, x) -> np.ndarray:
        """Evaluate at a point (d,) or a batch (..., d)."""
        return self.evaluator(np.asarray(x, dtype=float))

    def grad(self, x, r: int) -> SymTensor:
        """Derivative tensor of order r at x.

        Falls back to central finite differences for r <= 2 when no
        closed form is attached; orders 3 and 4 require a closed-form
        oracle.
        """
        if not 1 <= r <= 4:
            raise ValueError("derivative order must be in 1..4")
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise ValueError("point dimension mismatch")
        if self.grad_oracle is not None:
            return self.grad_oracle(x, r)
        if r > 2:
            raise ValueError(
                f"{self.name}: finite differences support orders 1-2 only; "
                "orders 3-4 need a closed-form oracle")
        return finite_difference_grad(self, x, r)

    def grad1(self, x) -> np.ndarray:
        """Gradient as a plain vector."""
        return self.grad(x, 1).values.copy()


def finite_difference_grad(f: TestFunction, x: np.ndarray, r: int,
                           step: float | None = None) -> SymTensor:
    """Central differences; step scales with |x| to balance truncation
    against roundoff at double precision."""
    d = f.dim
    h = step if step is not None else FD_BASE_STEP * (1.0 + np.linalg.norm(x))
    eye = np.eye(d)
    if r == 1:
        vals = np.array([(f(x + h * eye[i]) - f(x - h * eye[i])) / (2 * h)
                         for i in range(d)])
        return SymTensor(1, d, vals)
    vals = []
    for (i, j) in canonical_indices(d, 2):
        if i == j:
            v = (f(x + h * eye[i]) - 2 * f(x) + f(x - h * eye[i])) / (h * h)
        else:
            v = (f(x + h * (eye[i] + eye[j])) - f(x + h * (eye[i] - eye[j]))
                 - f(x + h * (eye[j] - eye[i])) + f(x - h * (eye[i] + eye[j]))) / (4 * h * h)
        vals.append(v)
    return SymTensor(2, d, np.array(vals, dtype=float))


def ridge(name: str, dim: int, u, profile: list, declared_M=None) -> TestFunction:
    """f(w) = g(<w, u>) with g given by vectorized derivatives g0..g4."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != dim:
        raise ValueError("direction dimension mismatch")
    g = profile

    def ev(x):
        return g[0](x @ u)

    def oracle(x, r):
        t = float(x @ u)
        return float(g[r](t)) * tensor_power(u, r)

    def grad1b(x):
        return g[1](x @ u)[..., None] * u

    def lapb(x):
        return g[2](x @ u) * float(u @ u)

    return TestFunction(name, dim, ev, oracle, grad1b, lapb,
                        dict(declared_M or {}))


def radial(name: str, dim: int, profile: list, declared_M=None) -> TestFunction:
    """f(w) = g(|w|^2) with g given by vectorized derivatives g0..g4.

    Derivative tensors follow from the chain rule; e.g.
    d2 f = 2 g' I + 4 g'' w w and the order-3/4 terms carry the
    symmetrized Kronecker-delta combinations.
    """
    g = profile

    def ev(x):
        return g[0]((x * x).sum(axis=-1))

    def oracle(x, r):
        s = float(x @ x)
        g1, g2 = float(g[1](s)), float(g[2](s))
        d = dim
        if r == 1:
            return SymTensor(1, d, 2 * g1 * x)
        g3 = float(g[3](s))
        if r == 2:
            vals = [4 * g2 * x[i] * x[j] + (2 * g1 if i == j else 0.0)
                    for (i, j) in canonical_indices(d, 2)]
            return SymTensor(2, d, np.array(vals))
        if r == 3:
            vals = []
            for (i, j, k) in canonical_indices(d, 3):
                v = 8 * g3 * x[i] * x[j] * x[k]
                v += 4 * g2 * ((i == k) * x[j] + (j == k) * x[i] + (i == j) * x[k])
                vals.append(v)
            return SymTensor(3, d, np.array(vals))
        g4 = float(g[4](s))
        vals = []
        for (i, j, k, l) in canonical_indices(d, 4):
            v = 16 * g4 * x[i] * x[j] * x[k] * x[l]
            v += 8 * g3 * ((i == l) * x[j] * x[k] + (j == l) * x[i] * x[k]
                           + (k == l) * x[i] * x[j] + (i == j) * x[k] * x[l]
                           + (i == k) * x[j] * x[l] + (j == k) * x[i] * x[l])
            v += 4 * g2 * ((i == k) * (j == l) + (j == k) * (i == l)
                           + (i == j) * (k == l))
            vals.append(v)
        return SymTensor(4, d, np.array(vals))

    def grad1b(x):
        s = (x * x).sum(axis=-1)
        return 2 * g[1](s)[..., None] * x

    def lapb(x):
        s = (x * x).sum(axis=-1)
        return 2 * dim * g[1](s) + 4 * g[2](s) * s

    return TestFunction(name, dim, ev, oracle, grad1b, lapb,
                        dict(declared_M or {}))


def _unit_direction(dim: int) -> np.ndarray:
    u = np.ones(dim)
    return u / np.sqrt(dim)


def linear_fn(dim: int, u=None) -> TestFunction:
    u = _unit_direction(dim) if u is None else np.asarray(u, dtype=float)
    zero = lambda t: np.zeros_like(t)
    prof = [lambda t: t, lambda t: np.ones_like(t), zero, zero, zero]
    return ridge("linear", dim, u, prof,
                 {1: float(np.linalg.norm(u)), 2: 0.0, 3: 0.0, 4: 0.0})


def quadratic_norm(dim: int) -> TestFunction:
    prof = [lambda s: s, lambda s: np.ones_like(s),
            lambda s: np.zeros_like(s), lambda s: np.zeros_like(s),
            lambda s: np.zeros_like(s)]
    return radial("squared_norm", dim, prof, {2: 2.0, 3: 0.0, 4: 0.0})


def cos_ridge(dim: int, u=None) -> TestFunction:
    u = _unit_direction(dim) if u is None else np.asarray(u, dtype=float)
    prof = [np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t),
            np.sin, np.cos]
    return ridge("cos_ridge", dim, u, prof, {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0})


def sin_ridge(dim: int, u=None) -> TestFunction:
    u = _unit_direction(dim) if u is None else np.asarray(u, dtype=float)
    prof = [np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin]
    return ridge("sin_ridge", dim, u, prof, {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0})


def sqrt_cap(dim: int) -> TestFunction:
    # f(w) = sqrt(1 + |w|^2): 1-Lipschitz with curvature peaking at 0
    prof = [lambda s: np.sqrt(1 + s),
            lambda s: 0.5 / np.sqrt(1 + s),
            lambda s: -0.25 * (1 + s) ** -1.5,
            lambda s: 0.375 * (1 + s) ** -2.5,
            lambda s: -0.9375 * (1 + s) ** -3.5]
    return radial("sqrt_cap", dim, prof, {1: 1.0, 2: 1.0})


def gauss_bump(dim: int) -> TestFunction:
    prof = [lambda s: np.exp(-0.5 * s),
            lambda s: -0.5 * np.exp(-0.5 * s),
            lambda s: 0.25 * np.exp(-0.5 * s),
            lambda s: -0.125 * np.exp(-0.5 * s),
            lambda s: 0.0625 * np.exp(-0.5 * s)]
    return radial("gauss_bump", dim, prof,
                  {1: float(np.exp(-0.5)), 2: 1.0})


def battery(dim: int) -> list[TestFunction]:
    """The six standard verification functions at a given dimension."""
    return [quadratic_norm(dim), linear_fn(dim), cos_ridge(dim),
            sin_ridge(dim), sqrt_cap(dim), gauss_bump(dim)]
