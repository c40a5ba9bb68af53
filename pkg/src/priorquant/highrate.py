"""High-rate (large K) approximations for MBRE quantizers.

For many levels the Bayes risk error inside a cell is close to
``B(a) (p0 - a)^2`` with ``B = -J''/2``, and classical high-resolution theory
applies: the optimal point density is proportional to ``(B f)^(1/3)`` and the
distortion behaves like ``||B f||_{1/3} / (12 K^2)``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .design import Quantizer, nearest_neighbor_boundaries
from .detection import CostPair, GaussianMeasurementModel, curvature
from .numerics import Tolerance, find_root, integrate, integrate_intervals
from .priors import PriorDistribution

__all__ = [
    "HighRateSummary",
    "TRIM",
    "point_density",
    "mae_point_density",
    "distortion_bound",
    "dl_for_density",
    "mae_distortion",
    "rate_gap",
    "rate_gap_from",
    "companion_quantizer",
]

TRIM = 1e-9
_TRIM_WARN = 1e-6
_QUAD = Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_iter=60)


@dataclass(frozen=True)
class HighRateSummary:
    k: int
    d_l: float
    rate_bits: float
    norm_one_third: float


def _weighted_curvature(model, costs, prior):
    def g(p):
        return np.asarray(curvature(model, costs, p)) * np.asarray(prior.density(p))
    return g


def _trimmed_integral(g: Callable, what: str) -> float:
    """Integral over ``[TRIM, 1 - TRIM]``, warning if the trimmed ends matter."""
    body = integrate(g, TRIM, 1.0 - TRIM, _QUAD)
    ends = integrate(g, 0.5 * TRIM, TRIM, _QUAD) + integrate(g, 1.0 - TRIM, 1.0 - 0.5 * TRIM, _QUAD)
    # the two half-width strips bound the trimmed mass for monotone ends
    if abs(2.0 * ends) > _TRIM_WARN * max(abs(body), 1e-300):
        warnings.warn(f"{what}: trimmed endpoint mass {2 * ends:.3g} exceeds {_TRIM_WARN:g}",
                      RuntimeWarning, stacklevel=3)
    return body


@functools.lru_cache(maxsize=128)
def _cube_root_mass(model, costs, prior) -> float:
    g = _weighted_curvature(model, costs, prior)
    return _trimmed_integral(lambda p: np.cbrt(np.maximum(g(p), 0.0)), "point density")


@functools.lru_cache(maxsize=128)
def _sqrt_mass(prior) -> float:
    return integrate(lambda p: np.sqrt(np.asarray(prior.density(p))), 0.0, 1.0, _QUAD)


def _check_open(p0):
    p0 = np.asarray(p0, dtype=float)
    if np.any(np.isnan(p0)) or np.any((p0 <= 0.0) | (p0 >= 1.0)):
        raise ValueError("boundary: point densities are evaluated on (0, 1)")
    return p0


def point_density(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution, p0):
    """Optimal MBRE point density ``(B f)^(1/3) / int (B f)^(1/3)``."""
    p0 = _check_open(p0)
    g = _weighted_curvature(model, costs, prior)(p0)
    out = np.cbrt(np.maximum(g, 0.0)) / _cube_root_mass(model, costs, prior)
    return float(out) if np.ndim(out) == 0 else out


def mae_point_density(prior: PriorDistribution, p0):
    """Optimal MAE point density ``f^(1/2) / int f^(1/2)``."""
    p0 = np.asarray(p0, dtype=float)
    out = np.sqrt(np.asarray(prior.density(p0))) / _sqrt_mass(prior)
    return float(out) if np.ndim(out) == 0 else out


def distortion_bound(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                     k: int) -> HighRateSummary:
    """High-rate distortion ``D_L = ||B f||_{1/3} / (12 K^2)`` with ``R = log2 K``."""
    if int(k) != k or k < 1:
        raise ValueError(f"invalid K: need a positive integer, got {k!r}")
    norm = _cube_root_mass(model, costs, prior) ** 3
    return HighRateSummary(k=int(k), d_l=norm / (12.0 * k * k), rate_bits=math.log2(k), norm_one_third=norm)


def dl_for_density(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                   k: int, lambda_fn: Callable) -> float:
    """High-rate MBRE ``(1/12K^2) int B f / lambda^2`` of an arbitrary point density."""
    if int(k) != k or k < 1:
        raise ValueError(f"invalid K: need a positive integer, got {k!r}")
    g = _weighted_curvature(model, costs, prior)

    def integrand(p):
        lam = np.asarray(lambda_fn(p), dtype=float)
        gp = g(p)
        if np.any((lam <= 0.0) & (gp > 0.0)):
            raise ValueError("ill-conditioned density: point density vanishes where B f > 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(gp > 0.0, gp / (lam * lam), 0.0)

    return _trimmed_integral(integrand, "dl_for_density") / (12.0 * k * k)


def mae_distortion(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution, k: int) -> float:
    """``D_L`` obtained with the MAE point density."""
    return dl_for_density(model, costs, prior, k, lambda p: mae_point_density(prior, p))


def rate_gap_from(curv: Callable, dens: Callable) -> float:
    """Rate difference in bits between the MBRE and MAE point densities.

    ``0.5 log2(||f B||_{1/3} / (||f||_{1/2} int B))`` for arbitrary curvature and
    density callables on (0, 1).  Never positive; zero iff ``B`` is
    proportional to ``f^(1/2)``.
    """
    cube = _trimmed_integral(lambda p: np.cbrt(np.maximum(np.asarray(curv(p)) * np.asarray(dens(p)), 0.0)),
                             "rate_gap")
    root = integrate(lambda p: np.sqrt(np.asarray(dens(p))), 0.0, 1.0, _QUAD)
    b_int = _trimmed_integral(lambda p: np.asarray(curv(p)), "rate_gap")
    return 0.5 * math.log2(cube**3 / (root**2 * b_int))


def rate_gap(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution) -> float:
    return rate_gap_from(lambda p: curvature(model, costs, p), prior.density)


def _density_quantiles(lam: Callable, targets: np.ndarray, panels: int = 1024) -> np.ndarray:
    """Points ``x_j`` with ``int_0^{x_j} lam = targets[j]``."""
    edges = np.linspace(0.0, 1.0, panels + 1)
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    lo[0], hi[-1] = TRIM, 1.0 - TRIM
    pieces, _ = integrate_intervals(lam, lo, hi, _QUAD)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum /= cum[-1]
    out = np.empty(targets.size)
    for j, t in enumerate(targets):
        i = int(np.clip(np.searchsorted(cum, t) - 1, 0, panels - 1))
        base, start = cum[i], lo[i]
        scale = np.sum(pieces)

        def resid(x):
            return base + integrate(lam, start, x, _QUAD) / scale - t

        out[j] = find_root(resid, start, hi[i], xtol=1e-15)
    return out


def companion_quantizer(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                        k: int) -> Quantizer:
    """K-level quantizer whose reps sit at the ``(2j-1)/2K`` quantiles of the MBRE point density."""
    if int(k) != k or k < 1:
        raise ValueError(f"invalid K: need a positive integer, got {k!r}")
    k = int(k)
    lam = lambda p: point_density(model, costs, prior, p)  # noqa: E731
    reps = _density_quantiles(lam, (2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k))
    return Quantizer(tuple(nearest_neighbor_boundaries(model, costs, reps)), tuple(reps))
