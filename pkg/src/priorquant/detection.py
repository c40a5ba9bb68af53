"""Binary Gaussian hypothesis testing with an assumed prior.

The observation is ``Y = s + W`` with ``s = 0`` under h0, ``s = mu`` under h1
and ``W ~ N(0, sigma^2)``.  The likelihood ratio test is tuned to an assumed
prior ``a = Pr[H = h0]``; when the true prior is ``p0`` the resulting risk is the
mismatched Bayes risk.  Correct decisions cost nothing.

All functions broadcast over numpy arrays of priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import gaussian_mass, gaussian_pdf, gaussian_tail

__all__ = [
    "CostPair",
    "GaussianMeasurementModel",
    "ClampPolicy",
    "DEFAULT_MODEL",
    "DEFAULT_COSTS",
    "error_probabilities",
    "error_probability_derivatives",
    "error_probability_second_derivatives",
    "bayes_risk",
    "bayes_risk_slope",
    "mismatched_bayes_risk",
    "bayes_risk_error",
    "curvature",
    "curvature_from_slope",
]


@dataclass(frozen=True)
class CostPair:
    """Costs of the two error types.

    ``c10`` is paid for deciding h1 when h0 holds, ``c01`` for deciding h0
    when h1 holds.
    """

    c10: float = 1.0
    c01: float = 1.0

    def __post_init__(self):
        for name in ("c10", "c01"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise ValueError(f"invalid parameter: {name} must be a positive finite number, got {v!r}")

    def scaled(self, t: float) -> "CostPair":
        return CostPair(self.c10 * t, self.c01 * t)


@dataclass(frozen=True)
class GaussianMeasurementModel:
    mu: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu != 0):
            raise ValueError(f"invalid parameter: mu must be finite and nonzero, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"invalid parameter: sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class ClampPolicy:
    """Assumed priors are clamped to ``[epsilon, 1 - epsilon]`` before the log ratio."""

    epsilon: float = 1e-12

    def __post_init__(self):
        if not (0 < self.epsilon <= 1e-6):
            raise ValueError(f"invalid parameter: epsilon must lie in (0, 1e-6], got {self.epsilon!r}")


DEFAULT_MODEL = GaussianMeasurementModel()
DEFAULT_COSTS = CostPair()
DEFAULT_CLAMP = ClampPolicy()


def _check_prob(x, name, open_interval=False):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError(f"invalid argument: {name} is NaN")
    if open_interval:
        if np.any((x <= 0.0) | (x >= 1.0)):
            raise ValueError(f"boundary not differentiable: {name} must lie in (0, 1)")
    elif np.any((x < 0.0) | (x > 1.0)):
        raise ValueError(f"invalid argument: {name} must lie in [0, 1]")
    return x


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _log_ratio(costs: CostPair, a):
    """``ln(c10 a / (c01 (1 - a)))`` for ``a`` strictly inside (0, 1)."""
    return math.log(costs.c10 / costs.c01) + np.log(a) - np.log1p(-a)


def _tail_args(model: GaussianMeasurementModel, costs: CostPair, a):
    """Arguments of Q for the type I and type II error probabilities.

    The test direction follows the sign of ``mu``; the error probabilities
    depend only on ``|mu|``.
    """
    mu, sigma = abs(model.mu), model.sigma
    k = sigma / mu
    ell = _log_ratio(costs, a)
    half = mu / (2.0 * sigma)
    return half + k * ell, half - k * ell, ell


def error_probabilities(model: GaussianMeasurementModel, costs: CostPair, a,
                        clamp: ClampPolicy = DEFAULT_CLAMP):
    """False-alarm and miss probabilities of the test tuned to prior ``a``.

    Returns ``(p_I, p_II)`` where ``p_I = Pr[decide h1 | h0]`` and
    ``p_II = Pr[decide h0 | h1]``.  At ``a = 0`` the test always decides h1,
    giving ``(1, 0)``; at ``a = 1`` it gives ``(0, 1)``.
    """
    a = _check_prob(a, "a")
    ac = np.clip(a, clamp.epsilon, 1.0 - clamp.epsilon)
    t1, t2, _ = _tail_args(model, costs, ac)
    p1 = np.asarray(gaussian_tail(t1), dtype=float)
    p2 = np.asarray(gaussian_tail(t2), dtype=float)
    p1 = np.where(a == 0.0, 1.0, np.where(a == 1.0, 0.0, p1))
    p2 = np.where(a == 0.0, 0.0, np.where(a == 1.0, 1.0, p2))
    return _out(p1), _out(p2)


def error_probability_derivatives(model: GaussianMeasurementModel, costs: CostPair, a):
    """First derivatives ``(dp_I/da, dp_II/da)`` on the open interval (0, 1)."""
    a = _check_prob(a, "a", open_interval=True)
    t1, t2, _ = _tail_args(model, costs, a)
    scale = (model.sigma / abs(model.mu)) / (a * (1.0 - a))
    d1 = -scale * gaussian_pdf(t1)
    d2 = scale * gaussian_pdf(t2)
    return _out(d1), _out(d2)


def error_probability_second_derivatives(model: GaussianMeasurementModel, costs: CostPair, a):
    """Second derivatives ``(d2p_I/da2, d2p_II/da2)`` on (0, 1)."""
    a = _check_prob(a, "a", open_interval=True)
    mu, sigma = abs(model.mu), model.sigma
    t1, t2, ell = _tail_args(model, costs, a)
    pre = (sigma / mu) / (math.sqrt(8.0 * math.pi) * (a * (1.0 - a)) ** 2)
    r = 2.0 * sigma**2 / mu**2 * ell
    # exp(-(mu^2 +/- 2 sigma^2 ell)^2 / (8 mu^2 sigma^2)) == exp(-t^2 / 2)
    d1 = -pre * np.exp(-0.5 * t1 * t1) * (-3.0 + 4.0 * a - r)
    d2 = pre * np.exp(-0.5 * t2 * t2) * (-1.0 + 4.0 * a - r)
    return _out(d1), _out(d2)


def bayes_risk(model: GaussianMeasurementModel, costs: CostPair, p0):
    """Risk of the matched test, ``c10 p0 p_I(p0) + c01 (1 - p0) p_II(p0)``."""
    p0 = _check_prob(p0, "p0")
    p1, p2 = error_probabilities(model, costs, p0)
    return _out(costs.c10 * p0 * p1 + costs.c01 * (1.0 - p0) * p2)


def bayes_risk_slope(model: GaussianMeasurementModel, costs: CostPair, p0):
    """``dJ/dp0``, the slope of the tangent line ``c10 p_I(p0) - c01 p_II(p0)``."""
    p1, p2 = error_probabilities(model, costs, p0)
    return _out(costs.c10 * np.asarray(p1) - costs.c01 * np.asarray(p2))


def mismatched_bayes_risk(model: GaussianMeasurementModel, costs: CostPair, p0, a):
    """Risk when the test is tuned to ``a`` but the true prior is ``p0``.

    Linear in ``p0`` and tangent to :func:`bayes_risk` at ``p0 = a``.
    """
    p0 = _check_prob(p0, "p0")
    p1, p2 = error_probabilities(model, costs, a)
    return _out(costs.c10 * p0 * p1 + costs.c01 * (1.0 - p0) * p2)


def bayes_risk_error(model: GaussianMeasurementModel, costs: CostPair, p0, a,
                     clamp: ClampPolicy = DEFAULT_CLAMP):
    """Excess risk ``J~(p0, a) - J(p0)`` of using the prior ``a`` in place of ``p0``.

    The error-probability differences are formed as Gaussian masses between
    the two test thresholds, so the result keeps relative accuracy as ``a``
    approaches ``p0`` and is exactly zero at ``a == p0``.
    """
    p0 = _check_prob(p0, "p0")
    a = _check_prob(a, "a")
    p0, a = np.broadcast_arrays(p0, a)
    eps = clamp.epsilon
    pc = np.clip(p0, eps, 1.0 - eps)
    ac = np.clip(a, eps, 1.0 - eps)
    t1a, t2a, _ = _tail_args(model, costs, ac)
    t1p, t2p, _ = _tail_args(model, costs, pc)
    # p_I(a) - p_I(p0) = Q(t1a) - Q(t1p) = Pr[t1a < Z <= t1p]
    dp1 = np.asarray(gaussian_mass(t1a, t1p), dtype=float)
    dp2 = np.asarray(gaussian_mass(t2a, t2p), dtype=float)

    # exact endpoint values override the clamped ones
    edge = (p0 == 0.0) | (p0 == 1.0) | (a == 0.0) | (a == 1.0)
    if np.any(edge):
        pa1, pa2 = error_probabilities(model, costs, a[edge])
        pp1, pp2 = error_probabilities(model, costs, p0[edge])
        dp1 = dp1.copy()
        dp2 = dp2.copy()
        dp1[edge] = np.asarray(pa1) - np.asarray(pp1)
        dp2[edge] = np.asarray(pa2) - np.asarray(pp2)

    d = costs.c10 * p0 * dp1 + costs.c01 * (1.0 - p0) * dp2
    d = np.where(p0 == a, 0.0, np.maximum(d, 0.0))
    return _out(d)


def curvature(model: GaussianMeasurementModel, costs: CostPair, p0):
    """Local quadratic coefficient of the Bayes risk error, ``-J''(p0) / 2``.

    Assembled from the first and second error-probability derivatives.
    """
    p0 = _check_prob(p0, "p0", open_interval=True)
    d1, d2 = error_probability_derivatives(model, costs, p0)
    s1, s2 = error_probability_second_derivatives(model, costs, p0)
    c10, c01 = costs.c10, costs.c01
    b = (-0.5 * c10 * p0 * s1 - c10 * d1
         - 0.5 * c01 * (1.0 - p0) * s2 + c01 * d2)
    return _out(b)


def curvature_from_slope(model: GaussianMeasurementModel, costs: CostPair, p0):
    """``-J''/2`` from the tangent slope ``J' = c10 p_I - c01 p_II``.

    Uses first derivatives only, which makes it an independent assembly of
    :func:`curvature`.
    """
    p0 = _check_prob(p0, "p0", open_interval=True)
    d1, d2 = error_probability_derivatives(model, costs, p0)
    return _out(0.5 * (costs.c01 * np.asarray(d2) - costs.c10 * np.asarray(d1)))
