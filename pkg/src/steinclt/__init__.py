"""Explicit multivariate CLT error bounds with empirical verification.

Library layout:

* ``tensors`` — dense symmetric tensors and the injective norm
* ``functions`` — test functions with derivative oracles
* ``smoothing`` — Gaussian smoothing, Hermite derivative estimators,
  seminorm estimation and the attenuation constants
* ``stein`` — Stein operator, Gaussian interpolation, closed estimates
* ``biasing`` — size-/zero-bias constructions and identity verifiers
* ``families`` — standardized i.i.d. sum models with exact moments
* ``bounds`` — the explicit error-bound evaluators and the beta chain
* ``wasserstein`` — exact empirical W1 and rate fitting
* ``experiment`` — config-driven runner and verification battery
* ``report`` — figures rendered from result CSVs
"""

from .tensors import SymTensor, UnitVector, apply_pure, injective_norm_symmetric, tensor_power
from .functions import TestFunction, battery
from .smoothing import SmoothingConstants, constants_c, estimate_Mr, smooth, smooth_derivative
from .stein import (InterpolationPoint, circum_bound_check, d_xi,
                    log_envelope_integral, slepian_residual, stein_apply, u_alpha)
from .biasing import (Discrete1D, MuBreveMixture, NuMixture, SumModel, SummandSpec,
                      beta1_estimate, verify_size_bias_identity,
                      verify_zero_bias_identity, zero_bias_1d)
from .bounds import BetaSet, BoundReport, beta_chain, bound_m1, bound_m2, bound_m3, min_moment_envelope
from .wasserstein import EmpiricalMeasure, W1Estimate, rate_fit, w1_estimate, w1_exact
from .experiment import ExperimentConfig, ResultRow, run_experiment, run_verify

__version__ = "0.1.0"
