"""Low-rate quantizer design for prior probabilities.

A K-level regular quantizer partitions [0, 1] into cells
``[0, b_1], (b_1, b_2], ..., (b_{K-1}, 1]`` and maps every prior in cell k to
the representation point ``a_k``.  The design objective is the mean Bayes risk
error (MBRE), the expected excess risk of running the likelihood ratio test
with the quantized prior instead of the true one.

Lloyd-Max iteration alternates the two optimality conditions:

* nearest neighbor: ``b_k`` is where the tangent lines of the Bayes risk at
  ``a_k`` and ``a_{k+1}`` intersect;
* centroid: for the Gaussian model ``a_k`` is the conditional mean of ``P0``
  on its cell, independent of the costs and of the signal-to-noise ratio.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .detection import (
    CostPair,
    GaussianMeasurementModel,
    _tail_args,
    bayes_risk,
    error_probabilities,
    error_probability_derivatives,
)
from .numerics import Tolerance, find_root, gaussian_mass, integrate, minimize_unimodal
from .priors import PriorDistribution, make_rng

__all__ = [
    "Quantizer",
    "DesignOptions",
    "DesignReport",
    "ConvergenceWarning",
    "quantize",
    "nearest_neighbor_boundaries",
    "centroid_general",
    "centroid_gaussian",
    "expected_bayes_risk",
    "mbre",
    "design_lloyd_max",
    "design_mae",
    "mae",
    "brute_force_design",
]

_EMPTY_CELL = 1e-14
_REGULARITY_SLACK = 1e-12


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Quantizer:
    """Interval boundaries ``b_0..b_K`` and representation points ``a_1..a_K``."""

    boundaries: tuple[float, ...]
    reps: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(x) for x in self.boundaries)
        a = tuple(float(x) for x in self.reps)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "reps", a)
        k = len(a)
        if k < 1 or len(b) != k + 1:
            raise ValueError(f"invalid quantizer: need K >= 1 reps and K+1 boundaries, got {k} and {len(b)}")
        if any(not math.isfinite(x) for x in a + b):
            raise ValueError("invalid quantizer: non-finite value")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("invalid quantizer: boundaries must start at 0 and end at 1")
        if any(b[i] > b[i + 1] for i in range(k)):
            raise ValueError("invalid quantizer: boundaries must be nondecreasing")
        for i in range(k):
            if not (b[i] - _REGULARITY_SLACK <= a[i] <= b[i + 1] + _REGULARITY_SLACK):
                raise ValueError(f"invalid quantizer: rep {i + 1} = {a[i]} outside its cell [{b[i]}, {b[i + 1]}]")

    @property
    def k(self) -> int:
        return len(self.reps)

    def cell_index(self, p0):
        """Zero-based cell index; cells are half-open ``(b_{k-1}, b_k]`` and 0 goes to the first."""
        p0 = np.asarray(p0, dtype=float)
        idx = np.searchsorted(np.asarray(self.boundaries[1:-1]), p0, side="left")
        return int(idx) if idx.ndim == 0 else idx

    def __call__(self, p0):
        idx = self.cell_index(p0)
        out = np.asarray(self.reps)[idx]
        return float(out) if np.ndim(out) == 0 else out

    def mirrored(self) -> "Quantizer":
        """The quantizer of ``1 - P0``."""
        return Quantizer(tuple(1.0 - x for x in reversed(self.boundaries)),
                         tuple(1.0 - x for x in reversed(self.reps)))

    # plain-text record ``K; b_0,...,b_K; a_1,...,a_K``
    def dumps(self) -> str:
        fmt = lambda xs: ",".join(f"{x:.17g}" for x in xs)  # noqa: E731
        return f"{self.k}; {fmt(self.boundaries)}; {fmt(self.reps)}"

    @classmethod
    def loads(cls, text: str) -> "Quantizer":
        parts = [p.strip() for p in text.strip().split(";")]
        if len(parts) != 3:
            raise ValueError("invalid quantizer record: expected 'K; b_0,...,b_K; a_1,...,a_K'")
        k = int(parts[0])
        b = tuple(float(x) for x in parts[1].split(","))
        a = tuple(float(x) for x in parts[2].split(","))
        if len(a) != k:
            raise ValueError(f"invalid quantizer record: K={k} but {len(a)} reps")
        return cls(b, a)


@dataclass(frozen=True)
class DesignOptions:
    tol: float = 1e-10          # relative MBRE change
    step_tol: float = 1e-11     # fixed-point residual of the reps
    max_iter: int = 500
    restarts: int = 10
    seed: int = 0
    accelerate: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("invalid parameter: max_iter must be >= 1")
        if self.restarts < 0:
            raise ValueError("invalid parameter: restarts must be >= 0")
        if not (self.tol > 0 and self.step_tol > 0):
            raise ValueError("invalid parameter: tolerances must be positive")


@dataclass
class DesignReport:
    mbre: float
    iterations: int
    converged: bool
    restarts_used: int
    per_iteration_mbre: list[float] = field(default_factory=list)


def quantize(q: Quantizer, p0):
    return q(p0)


# ---------------------------------------------------------------------------
# optimality conditions
# ---------------------------------------------------------------------------

def _error_prob_increments(model, costs, reps):
    """``p_I(a_{k+1}) - p_I(a_k)`` and ``p_II(a_{k+1}) - p_II(a_k)`` without cancellation."""
    t1, t2, _ = _tail_args(model, costs, reps)
    d1 = -np.asarray(gaussian_mass(t1[:-1], t1[1:]))
    d2 = np.asarray(gaussian_mass(t2[1:], t2[:-1]))
    return d1, d2


def nearest_neighbor_boundaries(model: GaussianMeasurementModel, costs: CostPair, reps) -> np.ndarray:
    """Boundaries where adjacent tangent lines of the Bayes risk cross.

    Returns ``b_0..b_K`` with ``b_0 = 0`` and ``b_K = 1``.
    """
    reps = np.asarray(reps, dtype=float).ravel()
    if reps.size < 1:
        raise ValueError("invalid reps: need at least one representation point")
    if np.any(~np.isfinite(reps)) or np.any((reps <= 0.0) | (reps >= 1.0)):
        raise ValueError("invalid reps: representation points must lie in (0, 1)")
    if np.any(np.diff(reps) <= 0):
        raise ValueError("invalid reps: representation points must be strictly increasing")
    out = np.empty(reps.size + 1)
    out[0], out[-1] = 0.0, 1.0
    if reps.size > 1:
        d1, d2 = _error_prob_increments(model, costs, reps)
        num = costs.c01 * d2
        den = num - costs.c10 * d1
        if np.any(den < 1e-300):
            raise ValueError("degenerate pair: representation points too close to separate")
        out[1:-1] = np.clip(num / den, reps[:-1], reps[1:])
    return out


def centroid_gaussian(prior: PriorDistribution, lo: float, hi: float) -> float:
    """Conditional mean of ``P0`` on ``[lo, hi]``, the optimal rep for the Gaussian model."""
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"invalid cell [{lo}, {hi}]")
    i1, i2 = prior.partial_moments(lo, hi)
    total = i1 + i2
    if not total > 0.0:
        raise ValueError(f"empty cell: [{lo}, {hi}] has zero probability")
    return float(min(max(i1 / total, lo), hi))


def centroid_general(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                     lo: float, hi: float, tol: Tolerance = Tolerance()) -> float:
    """Cell representation point by direct minimization of the cell risk.

    Minimizes ``c10 I_I p_I(a) + c01 I_II p_II(a)`` with a unimodal search and
    then polishes the stationarity condition with a root solve on the
    derivative.  Works from the error probabilities alone, so it is a
    cross-check of :func:`centroid_gaussian`.
    """
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"invalid cell [{lo}, {hi}]")
    i1, i2 = prior.partial_moments(lo, hi)
    if not (i1 + i2) > _EMPTY_CELL:
        raise ValueError(f"empty cell: [{lo}, {hi}] has zero probability")
    w1, w2 = costs.c10 * i1 / (i1 + i2), costs.c01 * i2 / (i1 + i2)

    def objective(a):
        p1, p2 = error_probabilities(model, costs, a)
        return w1 * p1 + w2 * p2

    def slope(a):
        d1, d2 = error_probability_derivatives(model, costs, a)
        # common positive factor a(1-a) keeps the residual O(1)
        return (w1 * d1 + w2 * d2) * a * (1.0 - a)

    a0, _ = minimize_unimodal(objective, 0.0, 1.0, tol)
    for delta in (1e-7, 1e-6, 1e-5, 1e-4):
        left, right = max(a0 - delta, 1e-15), min(a0 + delta, 1.0 - 1e-15)
        if left < right and slope(left) < 0.0 < slope(right):
            return find_root(slope, left, right, xtol=1e-15)
    return a0


@functools.lru_cache(maxsize=256)
def expected_bayes_risk(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution) -> float:
    """``E[J(P0)]``, the risk with perfectly known priors."""
    f = lambda p: bayes_risk(model, costs, p) * prior.density(p)  # noqa: E731
    return integrate(f, 0.0, 1.0, Tolerance(abs_tol=1e-16, rel_tol=1e-14, max_iter=60))


def _cell_risk_terms(model, costs, prior, boundaries, reps):
    boundaries = np.asarray(boundaries, dtype=float)
    reps = np.asarray(reps, dtype=float)
    i1, i2 = prior.partial_moments(boundaries[:-1], boundaries[1:])
    p1, p2 = error_probabilities(model, costs, reps)
    return np.atleast_1d(i1), np.atleast_1d(i2), np.atleast_1d(p1), np.atleast_1d(p2)


def _mbre_from(model, costs, prior, boundaries, reps) -> float:
    i1, i2, p1, p2 = _cell_risk_terms(model, costs, prior, boundaries, reps)
    quantized = float(np.sum(costs.c10 * i1 * p1 + costs.c01 * i2 * p2))
    return max(quantized - expected_bayes_risk(model, costs, prior), 0.0)


def mbre(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution, q: Quantizer) -> float:
    """Mean Bayes risk error ``E[d(P0, q(P0))]`` of a quantizer.

    The mismatched risk is linear in ``p0``, so each cell contributes
    ``c10 I_I p_I(a_k) + c01 I_II p_II(a_k)``; the unquantized risk
    ``E[J(P0)]`` is subtracted once.
    """
    return _mbre_from(model, costs, prior, q.boundaries, q.reps)


# ---------------------------------------------------------------------------
# Lloyd-Max
# ---------------------------------------------------------------------------

def _initial_reps(prior: PriorDistribution, k: int) -> np.ndarray:
    return np.asarray(prior.quantile((2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k)), dtype=float).reshape(k)


def _jittered(prior: PriorDistribution, base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    k = base.size
    edges = np.asarray(prior.quantile(np.arange(k + 1) / k), dtype=float).reshape(k + 1)
    width = np.diff(edges)
    reps = base + rng.uniform(-0.2, 0.2, size=k) * width
    reps = np.clip(np.sort(reps), 1e-9, 1.0 - 1e-9)
    return _spread(reps)


def _spread(reps: np.ndarray) -> np.ndarray:
    """Force strictly increasing reps (ties can appear after clipping)."""
    reps = reps.copy()
    for i in range(1, reps.size):
        if reps[i] <= reps[i - 1]:
            reps[i] = np.nextafter(reps[i - 1], 2.0) if reps[i - 1] < 1.0 - 1e-12 else reps[i - 1]
    return reps


def _reseed_empty(prior, boundaries, reps, probs):
    """Move reps of (near) zero-probability cells into the most probable cell."""
    reps = reps.copy()
    empty = np.flatnonzero(probs < _EMPTY_CELL)
    for j in empty:
        big = int(np.argmax(probs))
        lo, hi = boundaries[big], boundaries[big + 1]
        c_lo, c_hi = prior.cdf(lo), prior.cdf(hi)
        # split the big cell at its probability quartiles
        reps[big] = float(prior.quantile(c_lo + 0.75 * (c_hi - c_lo)))
        reps[j] = float(prior.quantile(c_lo + 0.25 * (c_hi - c_lo)))
        probs = probs.copy()
        probs[big] *= 0.5
        probs[j] = probs[big]
    return _spread(np.sort(reps))


def _mbre_jacobian(model, costs, prior, reps, b, cent, probs):
    """Tridiagonal Jacobian of the Lloyd map ``reps -> centroids(NN(reps))`` in banded form."""
    k = reps.size
    ab = np.zeros((3, k))
    if k == 1:
        return ab
    f = np.asarray(prior.density(b), dtype=float)
    dlo = f[:-1] * (cent - b[:-1]) / probs      # d centroid_k / d b_{k-1}
    dhi = f[1:] * (b[1:] - cent) / probs        # d centroid_k / d b_k
    d1, d2 = error_probability_derivatives(model, costs, reps)
    inc1, inc2 = _error_prob_increments(model, costs, reps)
    num = costs.c01 * inc2
    den2 = (num - costs.c10 * inc1) ** 2
    # interior boundary j sits between reps j-1 and j (0-based)
    left = costs.c10 * (-num * d1[:-1] + inc1 * costs.c01 * d2[:-1]) / den2
    right = costs.c10 * (num * d1[1:] - inc1 * costs.c01 * d2[1:]) / den2
    ab[1, 1:] += dlo[1:] * right            # via lower boundary
    ab[1, :-1] += dhi[:-1] * left           # via upper boundary
    ab[2, :-1] = dlo[1:] * left             # J[k, k-1]
    ab[0, 1:] = dhi[:-1] * right            # J[k, k+1]
    return ab


def _valid_reps(reps):
    return bool(np.all(np.isfinite(reps)) and np.all(reps > 0.0) and np.all(reps < 1.0)
                and np.all(np.diff(reps) > 0.0))


def _lloyd_run(model, costs, prior, reps, opts: DesignOptions):
    """Lloyd-Max from ``reps``; a Newton step on the fixed-point map replaces
    the plain update whenever it does at least as well."""
    b = nearest_neighbor_boundaries(model, costs, reps)
    history = [_mbre_from(model, costs, prior, b, reps)]
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        i1, i2 = prior.partial_moments(b[:-1], b[1:])
        i1, i2 = np.atleast_1d(i1), np.atleast_1d(i2)
        probs = i1 + i2
        if np.any(probs < _EMPTY_CELL):
            reps = _reseed_empty(prior, b, reps, probs)
            b = nearest_neighbor_boundaries(model, costs, reps)
            history = [_mbre_from(model, costs, prior, b, reps)]
            continue
        cent = _spread(np.clip(i1 / probs, b[:-1], b[1:]))
        resid = float(np.max(np.abs(cent - reps)))
        b_next = nearest_neighbor_boundaries(model, costs, cent)
        d_next = _mbre_from(model, costs, prior, b_next, cent)
        nxt = cent

        if opts.accelerate and reps.size > 1 and resid > 0.0:
            ab = _mbre_jacobian(model, costs, prior, reps, b, cent, probs)
            ab[1] -= 1.0
            try:
                with np.errstate(all="ignore"):
                    delta = solve_banded((1, 1), ab, -(cent - reps))
            except (np.linalg.LinAlgError, ValueError):
                delta = None
            if delta is not None:
                cand = reps + delta
                if _valid_reps(cand):
                    b_c = nearest_neighbor_boundaries(model, costs, cand)
                    d_c = _mbre_from(model, costs, prior, b_c, cand)
                    local = float(np.max(np.abs(delta))) < 1e-6
                    if d_c <= d_next or (local and d_c <= history[-1]):
                        nxt, b_next, d_next = cand, b_c, d_c

        reps, b = nxt, b_next
        history.append(d_next)
        change = abs(history[-2] - history[-1])
        if resid <= opts.step_tol and change <= opts.tol * max(history[-1], 1e-300):
            converged = True
            break
    return reps, b, history, it, converged


def design_lloyd_max(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                     k: int, opts: DesignOptions = DesignOptions()) -> tuple[Quantizer, DesignReport]:
    """MBRE-optimal K-level quantizer by multi-start Lloyd-Max iteration.

    The first start places reps at the prior quantiles ``(2k-1)/2K``; each
    extra start jitters them by up to 20% of a prior-quantile cell width.  The
    lowest-MBRE fixed point wins.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"invalid K: need a positive integer, got {k!r}")
    k = int(k)
    base = _initial_reps(prior, k)
    rng = make_rng(opts.seed)
    starts = [base] + ([_jittered(prior, base, rng) for _ in range(opts.restarts)] if k > 1 else [])

    best = None
    for reps0 in starts:
        reps, b, hist, iters, conv = _lloyd_run(model, costs, prior, _spread(reps0), opts)
        if best is None or hist[-1] < best[2][-1] - 1e-15:
            best = (reps, b, hist, iters, conv)
    reps, b, hist, iters, conv = best
    if not conv:
        warnings.warn(f"Lloyd-Max did not converge for K={k} in {opts.max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    q = Quantizer(tuple(b), tuple(reps))
    report = DesignReport(mbre=hist[-1], iterations=iters, converged=conv,
                          restarts_used=len(starts) - 1, per_iteration_mbre=hist)
    return q, report


# ---------------------------------------------------------------------------
# MAE baseline and brute-force oracle
# ---------------------------------------------------------------------------

def _mae_from(prior, b, reps) -> float:
    m1b, m2b = (np.atleast_1d(x) for x in prior.cumulative_moments(b))
    m1a, m2a = (np.atleast_1d(x) for x in prior.cumulative_moments(reps))
    pb, pa = m1b + m2b, m1a + m2a
    # E|P - a| per cell, split at a
    below = reps * (pa - pb[:-1]) - (m1a - m1b[:-1])
    above = (m1b[1:] - m1a) - reps * (pb[1:] - pa)
    return float(np.sum(below + above))


def mae(prior: PriorDistribution, q: Quantizer) -> float:
    """Mean absolute error ``E|P0 - q(P0)|``."""
    return _mae_from(prior, np.asarray(q.boundaries), np.asarray(q.reps))


def _midpoints(reps):
    b = np.empty(reps.size + 1)
    b[0], b[-1] = 0.0, 1.0
    b[1:-1] = 0.5 * (reps[:-1] + reps[1:])
    return b


def design_mae(prior: PriorDistribution, k: int, max_iter: int = 2000, tol: float = 1e-13) -> Quantizer:
    """Quantizer minimizing mean absolute error of ``P0`` (ignores the test).

    Lloyd iteration with midpoint boundaries and conditional-median reps,
    accelerated by Newton steps on the same fixed-point map.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"invalid K: need a positive integer, got {k!r}")
    k = int(k)
    reps = _initial_reps(prior, k)
    for _ in range(max_iter):
        b = _midpoints(reps)
        c = np.asarray(prior.cdf(b), dtype=float)
        med = np.asarray(prior.quantile(0.5 * (c[:-1] + c[1:])), dtype=float).reshape(k)
        med = np.clip(med, b[:-1], b[1:])
        resid = float(np.max(np.abs(med - reps)))
        if resid <= tol:
            reps = med
            break
        nxt = med
        if k > 1:
            f_b = np.asarray(prior.density(b), dtype=float)
            f_m = np.asarray(prior.density(med), dtype=float)
            if np.all(f_m > 0):
                dlo = 0.25 * f_b[:-1] / f_m
                dhi = 0.25 * f_b[1:] / f_m
                ab = np.zeros((3, k))
                ab[1, 1:] += dlo[1:]
                ab[1, :-1] += dhi[:-1]
                ab[1] -= 1.0
                ab[2, :-1] = dlo[1:]
                ab[0, 1:] = dhi[:-1]
                try:
                    cand = reps + solve_banded((1, 1), ab, -(med - reps))
                except (np.linalg.LinAlgError, ValueError):
                    cand = None
                if cand is not None and _valid_reps(cand):
                    if _mae_from(prior, _midpoints(cand), cand) <= _mae_from(prior, _midpoints(med), med):
                        nxt = cand
        reps = nxt
    else:
        warnings.warn(f"MAE design did not converge for K={k}", ConvergenceWarning, stacklevel=2)
    return Quantizer(tuple(_midpoints(reps)), tuple(reps))


def brute_force_design(model: GaussianMeasurementModel, costs: CostPair, prior: PriorDistribution,
                       k: int, grid_step: float = 2e-3) -> Quantizer:
    """Exhaustive search over reps on a grid, boundaries from the nearest-neighbor rule.

    Only meant as a verification oracle: ``K <= 3`` and ``grid_step >= 1e-3``.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"oracle scale exceeded: brute force supports K in {{1, 2, 3}}, got {k}")
    if not grid_step >= 1e-3:
        raise ValueError(f"oracle scale exceeded: grid_step must be >= 1e-3, got {grid_step}")
    n = int(math.floor(1.0 / grid_step + 1e-9))
    grid = np.arange(1, n) * grid_step
    grid = grid[grid < 1.0]
    p1, p2 = (np.asarray(x) for x in error_probabilities(model, costs, grid))
    c10, c01 = costs.c10, costs.c01
    t1_1, t2_1 = (np.asarray(x) for x in prior.cumulative_moments(1.0))

    def cell(m1_lo, m2_lo, m1_hi, m2_hi, idx):
        return c10 * p1[idx] * (m1_hi - m1_lo) + c01 * p2[idx] * (m2_hi - m2_lo)

    m = grid.size
    idx = np.arange(m)
    if k == 1:
        costs_k = cell(0.0, 0.0, t1_1, t2_1, idx)
        best = (int(np.argmin(costs_k)),)
    else:
        # pairwise boundaries b(i, j) for i < j and cumulative moments there
        t1, t2, _ = _tail_args(model, costs, grid)
        ii, jj = np.triu_indices(m, 1)
        d1 = -np.asarray(gaussian_mass(t1[ii], t1[jj]))
        d2 = np.asarray(gaussian_mass(t2[jj], t2[ii]))
        num = c01 * d2
        bnd = np.full((m, m), np.nan)
        bnd[ii, jj] = np.clip(num / (num - c10 * d1), grid[ii], grid[jj])
        M1 = np.full((m, m), np.nan)
        M2 = np.full((m, m), np.nan)
        m1, m2 = prior.cumulative_moments(bnd[ii, jj])
        M1[ii, jj], M2[ii, jj] = m1, m2
        if k == 2:
            total = (cell(0.0, 0.0, M1, M2, idx[:, None])
                     + cell(M1, M2, t1_1, t2_1, idx[None, :]))
            total[np.isnan(total)] = np.inf
            i, j = np.unravel_index(int(np.argmin(total)), total.shape)
            best = (int(i), int(j))
        else:
            best_val, best = np.inf, None
            for j in range(1, m - 1):
                lo_i = idx[:j]
                hi_l = idx[j + 1:]
                first = cell(0.0, 0.0, M1[lo_i, j], M2[lo_i, j], lo_i)[:, None]
                mid = cell(M1[lo_i, j][:, None], M2[lo_i, j][:, None],
                           M1[j, hi_l][None, :], M2[j, hi_l][None, :], j)
                last = cell(M1[j, hi_l], M2[j, hi_l], t1_1, t2_1, hi_l)[None, :]
                tot = first + mid + last
                pos = int(np.argmin(tot))
                if tot.flat[pos] < best_val:
                    best_val = float(tot.flat[pos])
                    i, l = np.unravel_index(pos, tot.shape)
                    best = (int(lo_i[i]), j, int(hi_l[l]))
    reps = grid[list(best)]
    return Quantizer(tuple(nearest_neighbor_boundaries(model, costs, reps)), tuple(reps))
