"""scikit-learn style wrappers over energy evaluation and the optimizer."""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exponents import ParamSet, exponent_bundle, quotient_exponents
from .functionals import evaluate
from .optimize import AscentConfig, default_grid, multi_start

FEATURES = ("lp_p", "seminorm_sq", "coulomb", "quotient")


class EnergyEvaluator(BaseEstimator, TransformerMixin):
    """Maps radial grid functions to rows (lp^p, seminorm^2, D, Q)."""

    def __init__(self, d: int = 3, s=1, alpha=2, q=2, p=4, threads: int = 1):
        self.d = d
        self.s = s
        self.alpha = alpha
        self.q = q
        self.p = p
        self.threads = threads

    def _params(self) -> ParamSet:
        return ParamSet(self.d, self.s, self.alpha, self.q, self.p)

    def fit(self, X=None, y=None):
        params = self._params()
        self.params_ = params
        self.exponents_ = quotient_exponents(params)
        self.bundle_ = exponent_bundle(params)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        rows = []
        for f in X:
            rep = evaluate(f, self.params_, self.exponents_, threads=self.threads)
            rows.append((rep.lp_power, rep.seminorm_sq, rep.coulomb, rep.quotient))
        return np.array(rows, dtype=float).reshape(-1, len(FEATURES))

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)


class QuotientMaximizer(BaseEstimator):
    """Multi-start constrained ascent; fit() ignores X and searches on a geometric grid."""

    def __init__(self, d: int = 3, s=1, alpha=2, q=2, p=4, epsilon=None, n_nodes: int = 401,
                 r_min: float = 1e-3, r_max: float = 40.0, starts: int = 5,
                 random_state: int = 0, tol: float = 1e-6, max_iter: int = 5000,
                 include_default: bool = True, threads: int = 1):
        self.d = d
        self.s = s
        self.alpha = alpha
        self.q = q
        self.p = p
        self.epsilon = epsilon
        self.n_nodes = n_nodes
        self.r_min = r_min
        self.r_max = r_max
        self.starts = starts
        self.random_state = random_state
        self.tol = tol
        self.max_iter = max_iter
        self.include_default = include_default
        self.threads = threads

    def fit(self, X=None, y=None):
        params = ParamSet(self.d, self.s, self.alpha, self.q, self.p)
        grid = default_grid(self.d, n=self.n_nodes, r_min=self.r_min, r_max=self.r_max)
        cfg = AscentConfig(tol=self.tol, max_iter=self.max_iter, epsilon=self.epsilon,
                           threads=self.threads)
        states = multi_start(params, grid, starts=self.starts, seed=self.random_state,
                             config=cfg, include_default=self.include_default)
        best = max(states, key=lambda st: st.Q)
        self.states_ = states
        self.best_state_ = best
        self.Q_ = best.Q
        self.start_values_ = np.array([st.Q for st in states])
        self.optimizer_ = best.f
        self.n_iter_ = len(best.history) - 1
        return self

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "Q_")
        return float(self.Q_)

    @property
    def spread_(self) -> Optional[float]:
        check_is_fitted(self, "start_values_")
        v = self.start_values_
        return float((v.max() - v.min()) / v.max())
