"""Monte Carlo simulation of the full decision chain.

prior draw -> hypothesis draw -> Gaussian observation -> likelihood ratio test
tuned to a (possibly quantized) prior.  Used to cross-check the closed forms.

Randomness comes from Philox, a counter-based generator: the sample is cut into
fixed-size shards and shard ``j`` uses the stream ``Philox(key=seed).jumped(j)``.
Shards can therefore be produced in any order or in parallel and always
aggregate to the same result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import Quantizer
from .detection import CostPair, GaussianMeasurementModel, DEFAULT_CLAMP
from .priors import PriorDistribution

__all__ = [
    "SimulationResult",
    "SHARD_SIZE",
    "simulate_error_probabilities",
    "simulate_mbre",
    "simulate_decision_rate",
]

SHARD_SIZE = 1 << 18


@dataclass(frozen=True)
class SimulationResult:
    estimate: float
    std_error: float
    n: int
    seed: int

    def within(self, value: float, k: float = 4.0) -> bool:
        """True if ``value`` lies within ``k`` standard errors of the estimate."""
        return abs(value - self.estimate) <= k * self.std_error


def _shard_rngs(seed: int, n: int, stream: int = 0):
    if int(n) != n or n < 1:
        raise ValueError(f"invalid argument: n must be a positive integer, got {n!r}")
    root = np.random.Philox(key=[int(seed), int(stream)])
    n_shards = -(-int(n) // SHARD_SIZE)
    for j in range(n_shards):
        size = min(SHARD_SIZE, int(n) - j * SHARD_SIZE)
        yield np.random.Generator(root.jumped(j)), size


class _Moments:
    """Streaming sum and sum of squares (associative over shards)."""

    def __init__(self):
        self.n = 0
        self.s = 0.0
        self.ss = 0.0

    def add(self, x: np.ndarray):
        self.n += x.size
        self.s += float(np.sum(x))
        self.ss += float(np.sum(np.square(x)))

    def result(self, seed) -> SimulationResult:
        mean = self.s / self.n
        var = max(self.ss / self.n - mean * mean, 0.0)
        se = math.sqrt(var / (self.n - 1)) if self.n > 1 else 0.0
        return SimulationResult(estimate=mean, std_error=se, n=self.n, seed=int(seed))


def _log_threshold(costs: CostPair, a):
    a = np.clip(np.asarray(a, dtype=float), DEFAULT_CLAMP.epsilon, 1.0 - DEFAULT_CLAMP.epsilon)
    return math.log(costs.c10 / costs.c01) + np.log(a) - np.log1p(-a)


def _decide_h1(model: GaussianMeasurementModel, y, log_eta):
    """Likelihood ratio test: h1 when ``log f(y|h1) - log f(y|h0) > log eta``."""
    llr = (model.mu * y - 0.5 * model.mu**2) / model.sigma**2
    return llr > log_eta


def simulate_error_probabilities(model: GaussianMeasurementModel, costs: CostPair, a: float,
                                 n: int, seed: int) -> tuple[SimulationResult, SimulationResult]:
    """Empirical ``(p_I, p_II)`` of the test tuned to ``a``, ``n`` draws under each hypothesis."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("invalid argument: a must lie in [0, 1]")
    log_eta = float(_log_threshold(costs, a))
    m0, m1 = _Moments(), _Moments()
    for rng, size in _shard_rngs(seed, n):
        y0 = model.sigma * rng.standard_normal(size)
        y1 = model.mu + model.sigma * rng.standard_normal(size)
        m0.add(_decide_h1(model, y0, log_eta).astype(float))
        m1.add((~_decide_h1(model, y1, log_eta)).astype(float))
    return m0.result(seed), m1.result(seed)


def _chain(prior, rng, size, model):
    p0 = np.asarray(prior.quantile(rng.random(size)))
    h1 = rng.random(size) >= p0          # Pr[H = h0] = p0
    y = np.where(h1, model.mu, 0.0) + model.sigma * rng.standard_normal(size)
    return p0, h1, y


def simulate_mbre(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                  q: Quantizer, n: int, seed: int) -> SimulationResult:
    """Average realized regret of deciding with ``q(P0)`` instead of ``P0``.

    Both tests see the same hypothesis and observation, so the regret is
    nonzero only where their decisions differ.
    """
    acc = _Moments()
    for rng, size in _shard_rngs(seed, n, stream=1):
        p0, h1, y = _chain(prior, rng, size, model)
        cost_q = _realized_cost(costs, h1, _decide_h1(model, y, _log_threshold(costs, q(p0))))
        cost_p = _realized_cost(costs, h1, _decide_h1(model, y, _log_threshold(costs, p0)))
        acc.add(cost_q - cost_p)
    return acc.result(seed)


def _realized_cost(costs, h1, decide_h1):
    return np.where(h1, np.where(decide_h1, 0.0, costs.c01), np.where(decide_h1, costs.c10, 0.0))


def simulate_decision_rate(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                           q: Quantizer, n: int, seed: int) -> SimulationResult:
    """Empirical fraction of h1 decisions when each test uses the quantized prior."""
    acc = _Moments()
    for rng, size in _shard_rngs(seed, n, stream=2):
        p0, _, y = _chain(prior, rng, size, model)
        acc.add(_decide_h1(model, y, _log_threshold(costs, q(p0))).astype(float))
    return acc.result(seed)
