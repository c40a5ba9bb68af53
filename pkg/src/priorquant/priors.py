"""Distributions of the prior probability ``P0`` on [0, 1].

Only the uniform and Beta families are provided.  Besides the usual density,
CDF and quantile, a prior exposes its *partial moments* over an interval,

    I_I  = int_lo^hi p f(p) dp,      I_II = int_lo^hi (1 - p) f(p) dp,

which drive the centroid update of the quantizer design.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "PriorDistribution",
    "UNIFORM",
    "parse_prior",
    "density",
    "cdf",
    "quantile",
    "partial_moments",
    "sample",
    "make_rng",
]


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` (Philox), identical on every platform."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


@dataclass(frozen=True)
class PriorDistribution:
    kind: str = "uniform"
    alpha: float = 1.0
    beta_param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "beta"):
            raise ValueError(f"invalid parameter: unknown prior kind {self.kind!r}")
        if self.kind == "uniform":
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "beta_param", 1.0)
        for name in ("alpha", "beta_param"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"invalid parameter: {name} must be positive, got {v!r}")

    @classmethod
    def uniform(cls) -> "PriorDistribution":
        return cls("uniform")

    @classmethod
    def beta(cls, alpha: float, beta_param: float) -> "PriorDistribution":
        return cls("beta", float(alpha), float(beta_param))

    def __str__(self):
        if self.kind == "uniform":
            return "uniform"
        return f"beta:{self.alpha:g},{self.beta_param:g}"

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta_param)

    @property
    def mode(self) -> float | None:
        a, b = self.alpha, self.beta_param
        if self.kind == "uniform" or a <= 1 or b <= 1:
            return None
        return (a - 1) / (a + b - 2)

    # -- pointwise functions ---------------------------------------------
    def density(self, p0):
        p0 = _check_unit(p0, "p0")
        if self.kind == "uniform":
            out = np.ones_like(p0)
        else:
            a, b = self.alpha, self.beta_param
            with np.errstate(divide="ignore"):
                logf = special.xlogy(a - 1, p0) + special.xlog1py(b - 1, -p0) - special.betaln(a, b)
            out = np.exp(logf)
        return _out(out)

    def cdf(self, p0):
        p0 = _check_unit(p0, "p0")
        if self.kind == "uniform":
            out = p0.copy()
        else:
            out = special.betainc(self.alpha, self.beta_param, p0)
        return _out(out)

    def quantile(self, q):
        q = _check_unit(q, "q")
        if self.kind == "uniform":
            out = q.copy()
        else:
            out = special.betaincinv(self.alpha, self.beta_param, q)
        return _out(out)

    # -- interval functions ----------------------------------------------
    def cumulative_moments(self, x):
        """``(int_0^x p f, int_0^x (1-p) f)`` evaluated pointwise."""
        x = _check_unit(x, "x")
        if self.kind == "uniform":
            m1 = 0.5 * x * x
            return _out(m1), _out(x - m1)
        a, b = self.alpha, self.beta_param
        m1 = a / (a + b) * special.betainc(a + 1.0, b, x)
        m2 = b / (a + b) * special.betainc(a, b + 1.0, x)
        return _out(m1), _out(m2)

    def partial_moments(self, lo, hi):
        """Partial moments ``(I_I, I_II)`` over ``[lo, hi]``; broadcasts over arrays."""
        lo = _check_unit(lo, "lo")
        hi = _check_unit(hi, "hi")
        if np.any(hi < lo):
            raise ValueError("invalid argument: partial moments need lo <= hi")
        if self.kind == "uniform":
            w = hi - lo
            i1 = 0.5 * w * (hi + lo)
            return _out(i1), _out(w - i1)
        h1, h2 = self.cumulative_moments(hi)
        l1, l2 = self.cumulative_moments(lo)
        i1 = np.maximum(np.asarray(h1) - l1, 0.0)
        i2 = np.maximum(np.asarray(h2) - l2, 0.0)
        return _out(i1), _out(i2)

    def probability(self, lo, hi):
        i1, i2 = self.partial_moments(lo, hi)
        return _out(np.asarray(i1) + i2)

    def sample(self, seed: int, n: int):
        """``n`` reproducible draws by inverse-CDF transform of seeded uniforms."""
        if int(n) != n or n < 1:
            raise ValueError(f"invalid argument: n must be a positive integer, got {n!r}")
        u = make_rng(seed).random(int(n))
        return np.asarray(self.quantile(u))


UNIFORM = PriorDistribution.uniform()

_BETA_RE = re.compile(r"^\s*beta\s*:\s*([^,\s]+)\s*,\s*([^,\s]+)\s*$", re.IGNORECASE)


def parse_prior(text: str) -> PriorDistribution:
    """Parse ``uniform`` or ``beta:ALPHA,BETA`` (e.g. ``beta:5,2``)."""
    if isinstance(text, PriorDistribution):
        return text
    s = str(text).strip()
    if s.lower() == "uniform":
        return UNIFORM
    m = _BETA_RE.match(s)
    if not m:
        raise ValueError(f"invalid prior specification {text!r}; expected 'uniform' or 'beta:ALPHA,BETA'")
    try:
        a, b = float(m.group(1)), float(m.group(2))
    except ValueError:
        raise ValueError(f"invalid prior specification {text!r}; shape parameters must be numbers") from None
    return PriorDistribution.beta(a, b)


def _check_unit(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any((x < 0.0) | (x > 1.0)):
        raise ValueError(f"invalid argument: {name} must lie in [0, 1]")
    return x


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


# functional aliases
def density(prior: PriorDistribution, p0):
    return prior.density(p0)


def cdf(prior: PriorDistribution, p0):
    return prior.cdf(p0)


def quantile(prior: PriorDistribution, q):
    return prior.quantile(q)


def partial_moments(prior: PriorDistribution, lo, hi):
    return prior.partial_moments(lo, hi)


def sample(prior: PriorDistribution, seed: int, n: int):
    return prior.sample(seed, n)
