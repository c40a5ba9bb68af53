"""Floating-point substrate shared by the rest of the package.

Gaussian tail probabilities, adaptive Gauss-Legendre quadrature, a
derivative-free unimodal minimizer and a bracketing root finder.  Everything
here is a pure function of its arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import optimize, special

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "ToleranceWarning",
    "NotBracketedWarning",
    "gaussian_tail",
    "gaussian_cdf",
    "gaussian_pdf",
    "gaussian_mass",
    "integrate",
    "integrate_intervals",
    "minimize_unimodal",
    "find_root",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))

# 15-point panels for quadrature, 12-point rule for short Gaussian masses.
_GL_X, _GL_W = leggauss(15)
_GM_X, _GM_W = leggauss(12)


class ToleranceWarning(RuntimeWarning):
    """A numerical routine stopped before reaching its requested tolerance."""


class NotBracketedWarning(RuntimeWarning):
    """Function evaluations contradicted the unimodality assumption."""


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"invalid parameter: abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"invalid parameter: rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"invalid parameter: max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = Tolerance()


# ---------------------------------------------------------------------------
# Gaussian helpers
# ---------------------------------------------------------------------------

def _check_nan(x):
    if np.any(np.isnan(x)):
        raise ValueError("invalid argument: NaN passed to a Gaussian function")


def gaussian_tail(x):
    """Upper tail ``Pr[Z > x]`` of the standard normal.

    Accepts scalars or arrays; ``+inf`` maps to 0 and ``-inf`` to 1.
    """
    x = np.asarray(x, dtype=float)
    _check_nan(x)
    out = special.ndtr(-x)
    return float(out) if out.ndim == 0 else out


def gaussian_cdf(x):
    x = np.asarray(x, dtype=float)
    _check_nan(x)
    out = special.ndtr(x)
    return float(out) if out.ndim == 0 else out


def gaussian_pdf(x):
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def gaussian_mass(x, y):
    """Signed probability ``Pr[x < Z <= y]`` computed without cancellation.

    For nearby arguments the mass is integrated directly, so the result keeps
    full relative precision even when ``y - x`` is tiny.  ``gaussian_mass(x, y)
    == gaussian_tail(x) - gaussian_tail(y)`` up to rounding.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    _check_nan(x)
    _check_nan(y)
    out = np.empty(x.shape)
    h = y - x
    with np.errstate(invalid="ignore"):
        near = np.isfinite(h) & (np.abs(h) <= 1.0)
    if np.any(near):
        xn, hn = x[near], h[near]
        nodes = xn[..., None] + 0.5 * hn[..., None] * (_GM_X + 1.0)
        out[near] = 0.5 * hn * (gaussian_pdf(nodes) @ _GM_W)
    far = ~near
    if np.any(far):
        xf, yf = x[far], y[far]
        # take the difference on whichever side the tails are small
        upper = special.ndtr(-xf) - special.ndtr(-yf)
        lower = special.ndtr(yf) - special.ndtr(xf)
        out[far] = np.where(xf + yf >= 0.0, upper, lower)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _as_vectorized(f):
    """Wrap ``f`` so it can be called on a 1-d array of abscissae."""
    probe = np.array([0.25, 0.75])
    try:
        val = np.asarray(f(probe), dtype=float)
        if val.shape == probe.shape:
            return lambda x: np.asarray(f(x), dtype=float)
    except Exception:  # noqa: BLE001 - scalar-only callables land here
        pass
    return np.vectorize(lambda t: float(f(float(t))), otypes=[float])


_MAX_PANELS = 1 << 16


def _gl_panels(f, a, b):
    """15-point Gauss-Legendre estimate on each panel [a_i, b_i]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _GL_X
    fx = f(x.ravel()).reshape(x.shape)
    return half * (fx @ _GL_W)


def integrate_intervals(f: Callable, lo, hi, tol: Tolerance = DEFAULT_TOL, *, vectorized: bool = False):
    """Integrate ``f`` over many intervals at once.

    Each interval is refined independently by bisection of 15-point
    Gauss-Legendre panels until every panel error estimate (difference between
    the panel rule and the sum of its two halves) fits inside that interval's
    share of ``max(abs_tol, rel_tol * |integral|)``.

    Returns
    -------
    values : ndarray
        Integral estimates, one per interval.
    converged : ndarray of bool
        False where ``tol.max_iter`` bisection rounds were not enough.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    if np.any(hi < lo):
        raise ValueError("integration bounds must satisfy lo <= hi")
    fv = f if vectorized else _as_vectorized(f)

    n = lo.size
    values = np.zeros(n)
    converged = np.ones(n, dtype=bool)
    width = hi - lo
    active = np.flatnonzero(width > 0)
    if active.size == 0:
        return values, converged

    owner = active.copy()
    a, b = lo[active].copy(), hi[active].copy()
    whole = _gl_panels(fv, a, b)
    estimate = np.zeros(n)
    np.add.at(estimate, owner, whole)
    accepted = np.zeros(n)

    for _ in range(tol.max_iter):
        mid = 0.5 * (a + b)
        left = _gl_panels(fv, a, mid)
        right = _gl_panels(fv, mid, b)
        refined = left + right
        err = np.abs(whole - refined)

        # running estimate per interval: accepted panels + refined active panels
        estimate = accepted.copy()
        np.add.at(estimate, owner, refined)
        budget = np.maximum(tol.abs_tol, tol.rel_tol * np.abs(estimate[owner]))
        ok = err <= budget * (b - a) / width[owner]
        # panels that cannot be split further in floating point are accepted,
        # as are panels whose estimates stopped being finite (flagged below)
        bad = ~np.isfinite(err)
        ok |= (mid <= a) | (mid >= b) | ((b - a) < 1e-300) | bad
        converged[np.unique(owner[bad])] = False

        np.add.at(accepted, owner[ok], np.where(bad[ok], 0.0, refined[ok]))
        keep = ~ok
        if not np.any(keep):
            break
        if 2 * np.count_nonzero(keep) > _MAX_PANELS:
            np.add.at(accepted, owner[keep], refined[keep])
            converged[np.unique(owner[keep])] = False
            break
        owner = np.concatenate([owner[keep], owner[keep]])
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    else:
        # unfinished panels keep their best (refined) estimates
        np.add.at(accepted, owner, whole)
        converged[np.unique(owner)] = False

    values[:] = accepted
    return values, converged


def integrate(f: Callable, lo: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Adaptive Gauss-Legendre integral of ``f`` over ``[lo, hi]``.

    ``f`` may be scalar-only or accept numpy arrays (faster).  When the
    refinement budget runs out a :class:`ToleranceWarning` is issued and the
    best available estimate is returned.
    """
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise ValueError("integration bounds must be finite")
    if hi < lo:
        raise ValueError("integration bounds must satisfy lo <= hi")
    values, ok = integrate_intervals(f, lo, hi, tol)
    if not ok[0]:
        warnings.warn(
            f"tolerance not reached after {tol.max_iter} refinements on [{lo}, {hi}]",
            ToleranceWarning,
            stacklevel=2,
        )
    return float(values[0])


# ---------------------------------------------------------------------------
# Scalar minimization and roots
# ---------------------------------------------------------------------------

def minimize_unimodal(f: Callable[[float], float], lo: float, hi: float,
                      tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Minimize a unimodal function on ``[lo, hi]``.

    Golden-section search with parabolic interpolation steps (Brent's method)
    using a purely absolute stopping width, so the minimizer is located to
    ``tol.abs_tol`` wherever the function values resolve it.  The endpoints are
    also evaluated, which handles monotone functions.

    Returns ``(argmin, min_value)`` with ``min_value == f(argmin)``.
    """
    if not hi >= lo:
        raise ValueError("minimize_unimodal requires lo <= hi")
    if hi == lo:
        return float(lo), float(f(lo))

    seen: list[tuple[float, float]] = []

    def g(x):
        v = float(f(x))
        seen.append((v, x))
        return v

    a, b = float(lo), float(hi)
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = g(x)
    d = e = 0.0
    eps = 4.0 * np.finfo(float).eps
    for _ in range(tol.max_iter):
        m = 0.5 * (a + b)
        tol1 = 0.5 * tol.abs_tol + eps * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if m >= x else -tol1
                use_golden = False
        if use_golden:
            e = (a - x) if x >= m else (b - x)
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0 else -tol1))
        fu = g(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    else:
        warnings.warn("minimize_unimodal: iteration budget exhausted", ToleranceWarning, stacklevel=2)

    for edge in (float(lo), float(hi)):
        fe = g(edge)
        if fe < fx:
            x, fx = edge, fe

    # a unimodal function has no interior peak among the sampled points
    pts = sorted((px, pv) for pv, px in seen)
    vals = np.array([pv for _, pv in pts])
    slack = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    peak = (vals[1:-1] > vals[:-2] + slack) & (vals[1:-1] > vals[2:] + slack)
    if np.any(peak):
        warnings.warn(
            "not bracketed: evaluations contradict unimodality; returning best point seen",
            NotBracketedWarning,
            stacklevel=2,
        )
        best_v, best_x = min(seen)
        if best_v < fx:
            x, fx = best_x, best_v
    return float(x), float(fx)


def find_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-14) -> float:
    """Root of ``f`` inside a sign-change bracket ``[lo, hi]`` (Brent's method)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"not bracketed: f({lo})={flo} and f({hi})={fhi} share a sign")
    return float(optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))
