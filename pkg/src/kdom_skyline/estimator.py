"""scikit-learn style front end for the streaming engine.

Rows of ``X`` are items in arrival order; ``sample_prob`` carries their
occurrence probabilities. ``partial_fit`` streams more rows through the
window, ``fit`` starts over.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .core import NormalizationSpec, UncertainItem, UsageError, ksky_probability, make_entry
from .engine import EngineConfig, StreamEngine


class KDominantSkyline(BaseEstimator):
    """Sliding-window k-dominant skyline probabilities over uncertain rows.

    Parameters
    ----------
    k : int
        Dominance threshold, ``1 <= k <= n_features``.
    window_size : int
        Count-based window capacity.
    scheme : {"naive", "ci", "mi", "ai"}
        Pruning scheme; all give the same probabilities.
    u_min_pos : int or None
        MI threshold position, defaults to ``k - 1``.
    tau : float
        Membership threshold used by :meth:`predict` and ``skyline_``.
    bounds : sequence of (lo, hi) or None
        Per-feature min-max bounds for threshold profiles.

    Attributes
    ----------
    window_ids_ : ndarray of int
        Ids of the rows currently in the window, oldest first.
    window_proba_ : ndarray of float
        Their k-dominant skyline probabilities.
    skyline_ : list of (id, probability)
        Window rows with probability >= ``tau``, most probable first.
    stats_ : list of EventStats
        Per-row instrumentation from the last fit/partial_fit call.
    """

    def __init__(self, k=11, window_size=500, scheme="mi", u_min_pos=None, tau=0.0, bounds=None):
        self.k = k
        self.window_size = window_size
        self.scheme = scheme
        self.u_min_pos = u_min_pos
        self.tau = tau
        self.bounds = bounds

    def _make_engine(self, n_features):
        spec = NormalizationSpec(tuple(self.bounds)) if self.bounds is not None else None
        cfg = EngineConfig(n_features, self.k, self.window_size, scheme=self.scheme,
                           u_min_pos=self.u_min_pos, tau=self.tau, normalization=spec)
        return StreamEngine(cfg)

    def _validate(self, X, sample_prob, reset):
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if sample_prob is None:
            raise UsageError("sample_prob is required: one occurrence probability per row")
        p = np.asarray(sample_prob, dtype=np.float64).ravel()
        if p.shape[0] != X.shape[0]:
            raise UsageError(f"sample_prob has {p.shape[0]} entries for {X.shape[0]} rows")
        if not reset and X.shape[1] != self.n_features_in_:
            raise UsageError(f"X has {X.shape[1]} features, estimator was fitted with {self.n_features_in_}")
        return X, p

    def fit(self, X, y=None, sample_prob=None):
        X, p = self._validate(X, sample_prob, reset=True)
        self.n_features_in_ = X.shape[1]
        self.engine_ = self._make_engine(self.n_features_in_)
        self._next_id = 0
        return self._stream(X, p)

    def partial_fit(self, X, y=None, sample_prob=None):
        if not hasattr(self, "engine_"):
            return self.fit(X, y, sample_prob=sample_prob)
        X, p = self._validate(X, sample_prob, reset=False)
        return self._stream(X, p)

    def _stream(self, X, p):
        stats = []
        for row, prob in zip(X.tolist(), p.tolist()):
            stats.append(self.engine_.process_event(UncertainItem(self._next_id, tuple(row), prob)))
            self._next_id += 1
        self.stats_ = stats
        return self

    def _check_fitted(self):
        if not hasattr(self, "engine_"):
            raise NotFittedError("call fit or partial_fit first")

    @property
    def window_ids_(self):
        self._check_fitted()
        return np.array(self.engine_.window.ids(), dtype=int)

    @property
    def window_proba_(self):
        self._check_fitted()
        return np.array([e.ksky_prob for e in self.engine_.window], dtype=float)

    @property
    def skyline_(self):
        self._check_fitted()
        return self.engine_.query_skyline(self.tau)

    def score_samples(self, X, sample_prob=None):
        """Probability each row would have if it arrived now, scored against
        the current window contents (no eviction, no insertion)."""
        self._check_fitted()
        X, p = self._validate(X, sample_prob, reset=False)
        k = self.engine_.k
        spec = self.engine_.config.normalization
        out = np.empty(X.shape[0])
        for i, (row, prob) in enumerate(zip(X.tolist(), p.tolist())):
            # id -1 never collides with a window entry
            cand = make_entry(UncertainItem(-1, tuple(row), prob), spec)
            out[i] = ksky_probability(cand.item, self.engine_.window, k)
        return out

    def predict(self, X, sample_prob=None):
        return self.score_samples(X, sample_prob) >= self.tau
