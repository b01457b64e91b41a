"""scikit-learn style wrappers around the analysis functions.

They add ``get_params``/``set_params``, cloning and the fit/predict
protocol on top of the functional API; the numbers come from the same
functions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, column_or_1d

from ._config import DEFAULT_REPS, DEFAULT_STEPS_PER_TRIAL
from .earlystop import optimize_policy
from .expected import expected_max_curve
from .seeds import kde, silverman_bandwidth
from .trials import TrialPool


def _as_values(X) -> np.ndarray:
    if isinstance(X, TrialPool):
        return np.asarray(X.final_values, dtype=float)
    arr = check_array(X, ensure_2d=False, dtype=float)
    return column_or_1d(arr)


class ExpectedMaxPerformance(BaseEstimator):
    """Expected best-of-x performance learned from a sample of trial scores.

    ``fit`` takes a 1-d array of scores (or a TrialPool, using final values);
    ``predict`` maps budgets x to the expected maximum.
    """

    def __init__(self, x_max: int = 50):
        self.x_max = x_max

    def fit(self, X, y=None):
        values = _as_values(X)
        self.values_ = values
        self.curve_ = expected_max_curve(values, self.x_max)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "curve_")
        xs = column_or_1d(check_array(X, ensure_2d=False, dtype=None)).astype(int)
        hi = int(xs.max()) if xs.size else 1
        curve = self.curve_ if hi <= self.x_max else expected_max_curve(self.values_, hi)
        if xs.size and xs.min() < 1:
            raise ValueError("budgets must be >= 1")
        return np.array([curve.at(int(x)).mean for x in xs])

    def predict_std(self, X) -> np.ndarray:
        check_is_fitted(self, "curve_")
        xs = column_or_1d(check_array(X, ensure_2d=False, dtype=None)).astype(int)
        hi = int(xs.max()) if xs.size else 1
        curve = self.curve_ if hi <= self.x_max else expected_max_curve(self.values_, hi)
        return np.array([curve.at(int(x)).std for x in xs])


class GaussianKDE(BaseEstimator):
    def __init__(self, bandwidth=None, eval_points: int = 512):
        self.bandwidth = bandwidth
        self.eval_points = eval_points

    def fit(self, X, y=None):
        values = _as_values(X)
        self.values_ = values
        self.bandwidth_ = silverman_bandwidth(values) if self.bandwidth is None else float(self.bandwidth)
        self.grid_, self.density_ = kde(values, self.bandwidth_, self.eval_points)
        return self

    def score_samples(self, X) -> np.ndarray:
        """Log density at arbitrary points."""
        check_is_fitted(self, "bandwidth_")
        x = column_or_1d(check_array(X, ensure_2d=False, dtype=float))
        h = self.bandwidth_
        z = (x[:, None] - self.values_[None, :]) / h
        dens = np.exp(-0.5 * z * z).sum(axis=1) / (self.values_.size * h * np.sqrt(2 * np.pi))
        with np.errstate(divide="ignore"):
            return np.log(dens)


class EarlyStoppingSearch(BaseEstimator):
    """Searches (t, f, p) policies for one budget on a recorded TrialPool."""

    def __init__(
        self,
        budget_trials: int = 10,
        f_grid=None,
        reps: int = DEFAULT_REPS,
        master_seed: int | None = None,
        steps_per_trial: float = DEFAULT_STEPS_PER_TRIAL,
        max_trials: int | None = None,
        threads: int | None = None,
    ):
        self.budget_trials = budget_trials
        self.f_grid = f_grid
        self.reps = reps
        self.master_seed = master_seed
        self.steps_per_trial = steps_per_trial
        self.max_trials = max_trials
        self.threads = threads

    def fit(self, pool: TrialPool, y=None):
        if not isinstance(pool, TrialPool):
            raise TypeError("EarlyStoppingSearch.fit expects a validated TrialPool")
        res = optimize_policy(
            pool,
            self.budget_trials,
            self.f_grid,
            self.reps,
            self.master_seed,
            self.steps_per_trial,
            self.max_trials,
            self.threads,
        )
        self.result_ = res
        self.best_policy_ = res.best_policy
        self.best_score_ = res.expected_perf
        self.baseline_score_ = res.baseline_perf
        return self
