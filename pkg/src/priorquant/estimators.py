"""scikit-learn style wrappers around the quantizer designers.

The designers work from an analytically specified prior, so ``fit`` ignores
its data argument (it is accepted so the estimators sit inside pipelines).
``transform`` maps prior probabilities to their representation points and
``predict`` returns cell indices.

>>> q = MBREQuantizer(n_levels=2).fit()
>>> q.transform([[0.1], [0.9]]).ravel().tolist()
[0.25, 0.75]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .design import DesignOptions, design_lloyd_max, design_mae, mae, mbre
from .detection import CostPair, GaussianMeasurementModel, bayes_risk_error
from .priors import PriorDistribution, parse_prior

__all__ = ["MBREQuantizer", "MAEQuantizer", "check_priors"]


def check_priors(X) -> np.ndarray:
    """Validate an array-like of prior probabilities (any 2-d shape, values in [0, 1])."""
    X = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if np.any((X < 0.0) | (X > 1.0)):
        raise ValueError("prior probabilities must lie in [0, 1]")
    return X


def _as_prior(prior) -> PriorDistribution:
    return prior if isinstance(prior, PriorDistribution) else parse_prior(prior)


class _QuantizerMixin(TransformerMixin):
    def transform(self, X):
        check_is_fitted(self, "quantizer_")
        X = check_priors(X)
        return self.quantizer_(X)

    def predict(self, X):
        check_is_fitted(self, "quantizer_")
        X = check_priors(X)
        return self.quantizer_.cell_index(X)

    @property
    def cluster_centers_(self):
        check_is_fitted(self, "quantizer_")
        return np.asarray(self.quantizer_.reps).reshape(-1, 1)


class MBREQuantizer(_QuantizerMixin, BaseEstimator):
    """K-level quantizer of prior probabilities minimizing mean Bayes risk error.

    Parameters
    ----------
    n_levels : int
        Number of representation points K.
    mu, sigma : float
        Signal level under h1 and noise standard deviation.
    c10, c01 : float
        Costs of false alarms and misses.
    prior : str or PriorDistribution
        ``"uniform"`` or ``"beta:A,B"``.
    restarts, random_state : int
        Multi-start count and seed for the jittered starts.
    """

    def __init__(self, n_levels=2, mu=1.0, sigma=1.0, c10=1.0, c01=1.0, prior="uniform",
                 restarts=10, random_state=0, tol=1e-10, max_iter=500):
        self.n_levels = n_levels
        self.mu = mu
        self.sigma = sigma
        self.c10 = c10
        self.c01 = c01
        self.prior = prior
        self.restarts = restarts
        self.random_state = random_state
        self.tol = tol
        self.max_iter = max_iter

    def _setup(self):
        model = GaussianMeasurementModel(float(self.mu), float(self.sigma))
        costs = CostPair(float(self.c10), float(self.c01))
        return model, costs, _as_prior(self.prior)

    def fit(self, X=None, y=None):
        if X is not None:
            check_priors(X)
        model, costs, prior = self._setup()
        opts = DesignOptions(tol=self.tol, max_iter=self.max_iter, restarts=self.restarts,
                             seed=0 if self.random_state is None else int(self.random_state))
        self.quantizer_, self.report_ = design_lloyd_max(model, costs, prior, self.n_levels, opts)
        self.mbre_ = self.report_.mbre
        self.n_iter_ = self.report_.iterations
        self.boundaries_ = np.asarray(self.quantizer_.boundaries)
        return self

    def score(self, X=None, y=None):
        """Negative MBRE: under the prior if ``X`` is None, else averaged over ``X``."""
        check_is_fitted(self, "quantizer_")
        model, costs, prior = self._setup()
        if X is None:
            return -mbre(model, costs, prior, self.quantizer_)
        X = check_priors(X).ravel()
        return -float(np.mean(bayes_risk_error(model, costs, X, self.quantizer_(X))))


class MAEQuantizer(_QuantizerMixin, BaseEstimator):
    """K-level quantizer minimizing the mean absolute error of the prior."""

    def __init__(self, n_levels=2, prior="uniform"):
        self.n_levels = n_levels
        self.prior = prior

    def fit(self, X=None, y=None):
        if X is not None:
            check_priors(X)
        self.quantizer_ = design_mae(_as_prior(self.prior), self.n_levels)
        self.boundaries_ = np.asarray(self.quantizer_.boundaries)
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "quantizer_")
        if X is None:
            return -mae(_as_prior(self.prior), self.quantizer_)
        X = check_priors(X).ravel()
        return -float(np.mean(np.abs(X - self.quantizer_(X))))
