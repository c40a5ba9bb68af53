"""Two populations sharing one prior distribution but quantized separately.

A decision maker meets ``w`` members of one population and ``b`` of the other
and splits a budget of ``K_t`` representation points between them.  The
population with fewer points is decided with a coarser prior, which shifts its
rate of h1 decisions; ``discrimination_delta`` measures that shift.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from .design import DesignOptions, Quantizer, design_lloyd_max, expected_bayes_risk, mbre
from .detection import CostPair, GaussianMeasurementModel, error_probabilities
from .priors import PriorDistribution

__all__ = [
    "PopulationScenario",
    "AllocationResult",
    "two_population_mbre",
    "allocate",
    "decision_rate",
    "discrimination_delta",
    "delta_curve",
    "dividing_line_scan",
    "optimal_quantizer",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PopulationScenario:
    w: float
    b: float
    k_total: int

    def __post_init__(self):
        if not (self.w > 0 and self.b > 0):
            raise ValueError("invalid parameter: interaction counts w and b must be positive")
        if int(self.k_total) != self.k_total or self.k_total < 2:
            raise ValueError("invalid parameter: k_total must be an integer >= 2")


@dataclass
class AllocationResult:
    k_w: int
    k_b: int
    d2: float
    per_allocation_d2: list[tuple[int, int, float]] = field(default_factory=list)
    single_minimum: bool = True


@functools.lru_cache(maxsize=512)
def optimal_quantizer(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                      k: int, opts: DesignOptions = DesignOptions()) -> Quantizer:
    """Cached MBRE-optimal quantizer."""
    return design_lloyd_max(model, costs, prior, k, opts)[0]


def two_population_mbre(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                        q_w: Quantizer, q_b: Quantizer, w: float, b: float) -> float:
    """Interaction-weighted MBRE of the two quantizers."""
    if not (w > 0 and b > 0):
        raise ValueError("invalid parameter: w and b must be positive")
    tw, tb = w / (w + b), b / (w + b)
    ej = expected_bayes_risk(model, costs, prior)
    # E[J~(P0, v(P0))] = mbre + E[J]
    return max(tw * (mbre(model, costs, prior, q_w) + ej) + tb * (mbre(model, costs, prior, q_b) + ej) - ej, 0.0)


def allocate(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
             scenario: PopulationScenario, opts: DesignOptions = DesignOptions()) -> AllocationResult:
    """Best split of ``k_total`` points, scanning all ``k_total - 1`` allocations.

    Exact ties go to the majority population.
    """
    kt = int(scenario.k_total)
    table = []
    for k_w in range(1, kt):
        k_b = kt - k_w
        q_w = optimal_quantizer(model, costs, prior, k_w, opts)
        q_b = optimal_quantizer(model, costs, prior, k_b, opts)
        table.append((k_w, k_b, two_population_mbre(model, costs, prior, q_w, q_b, scenario.w, scenario.b)))
    values = np.array([t[2] for t in table])
    best = values.min()
    ties = [t for t in table if t[2] == best]
    majority_first = scenario.w >= scenario.b
    k_w, k_b, d2 = max(ties, key=lambda t: t[0]) if majority_first else min(ties, key=lambda t: t[0])

    # report, don't assume, a single interior minimum
    diffs = np.sign(np.diff(values))
    diffs = diffs[diffs != 0]
    single = bool(np.sum(diffs[1:] != diffs[:-1]) <= 1 and (diffs.size == 0 or diffs[0] <= 0 or np.all(diffs > 0)))
    if not single:
        log.warning("allocation objective has several local minima: %s", values.tolist())
    return AllocationResult(k_w=k_w, k_b=k_b, d2=float(d2), per_allocation_d2=table, single_minimum=single)


def decision_rate(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                  q: Quantizer) -> float:
    """Probability of deciding h1, averaged over the prior and the observation.

    ``E[1 - P0 + P0 p_I(v(P0)) - (1 - P0) p_II(v(P0))]`` evaluated cell by cell.
    """
    b = np.asarray(q.boundaries)
    i1, i2 = (np.atleast_1d(x) for x in prior.partial_moments(b[:-1], b[1:]))
    p1, p2 = (np.atleast_1d(x) for x in error_probabilities(model, costs, np.asarray(q.reps)))
    return float(np.clip(np.sum(i2 * (1.0 - p2) + i1 * p1), 0.0, 1.0))


def _rate_shift(model, costs, prior, q):
    """``E[P0 p_I(v) - (1-P0) p_II(v)]``: the quantizer-dependent part of the rate."""
    b = np.asarray(q.boundaries)
    i1, i2 = (np.atleast_1d(x) for x in prior.partial_moments(b[:-1], b[1:]))
    p1, p2 = (np.atleast_1d(x) for x in error_probabilities(model, costs, np.asarray(q.reps)))
    return float(np.sum(i1 * p1 - i2 * p2))


def discrimination_delta(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                         k_w: int, k_b: int, opts: DesignOptions = DesignOptions()) -> float:
    """Rate of h1 decisions under the ``k_b``-level quantizer minus that under ``k_w``.

    Positive when the population with the ``k_b`` budget receives more h1
    decisions.  The ``1 - P0`` terms cancel, so only the error-probability
    parts are compared.
    """
    if k_w == k_b:
        return 0.0
    q_b = optimal_quantizer(model, costs, prior, int(k_b), opts)
    q_w = optimal_quantizer(model, costs, prior, int(k_w), opts)
    return _rate_shift(model, costs, prior, q_b) - _rate_shift(model, costs, prior, q_w)


def delta_curve(model, prior, k_w, k_b, ratios, opts: DesignOptions = DesignOptions()) -> np.ndarray:
    """Delta along the ray ``c10 = 1, c01 = r`` for each ratio ``r``."""
    return np.array([discrimination_delta(model, CostPair(1.0, float(r)), prior, k_w, k_b, opts)
                     for r in ratios])


def dividing_line_scan(model: GaussianMeasurementModel, prior: PriorDistribution, k_w: int, k_b: int,
                       ratio_grid, opts: DesignOptions = DesignOptions(),
                       delta_tol: float = 1e-9, ratio_tol: float = 1e-4) -> float:
    """Cost ratio ``m = c01 / c10`` where Delta changes sign.

    The first sign change on ``ratio_grid`` is refined by bisection until
    ``|Delta| < delta_tol`` or the bracket is narrower than ``ratio_tol``.
    """
    grid = np.asarray(ratio_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("ratio_grid must be a positive increasing sequence")
    delta = lambda r: discrimination_delta(model, CostPair(1.0, float(r)), prior, k_w, k_b, opts)  # noqa: E731
    values = [delta(r) for r in grid]
    for i, v in enumerate(values):
        if abs(v) < delta_tol:
            return float(grid[i])
    for i in range(grid.size - 1):
        lo, hi = grid[i], grid[i + 1]
        if np.sign(values[i]) != np.sign(values[i + 1]):
            f_lo = values[i]
            while hi - lo > ratio_tol:
                mid = 0.5 * (lo + hi)
                f_mid = delta(mid)
                if abs(f_mid) < delta_tol:
                    return float(mid)
                if np.sign(f_mid) == np.sign(f_lo):
                    lo, f_lo = mid, f_mid
                else:
                    hi = mid
            return float(0.5 * (lo + hi))
    raise ValueError("no crossing in range: Delta keeps one sign over the ratio grid")
