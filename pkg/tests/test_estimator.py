import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kdom_skyline.core import UsageError, oracle_window_probabilities
from kdom_skyline.estimator import KDominantSkyline

from conftest import EXAMPLE_TABLE, random_items, window_of


def table_arrays():
    X = np.array([v for v, _ in EXAMPLE_TABLE.values()], dtype=float)
    p = np.array([q for _, q in EXAMPLE_TABLE.values()])
    return X, p


def test_params_round_trip():
    est = KDominantSkyline(k=3, window_size=5, scheme="ai")
    assert est.get_params() == dict(k=3, window_size=5, scheme="ai", u_min_pos=None, tau=0.0, bounds=None)
    assert clone(est).get_params() == est.get_params()
    assert est.set_params(tau=0.1).tau == 0.1


def test_fit_example_table():
    X, p = table_arrays()
    est = KDominantSkyline(k=3, window_size=5, tau=0.05).fit(X, sample_prob=p)
    assert est.window_ids_.tolist() == [0, 1, 2, 3, 4]
    # rows are zero-based: u2 -> 1, u4 -> 3
    assert est.window_proba_[1] == pytest.approx(0.0288, abs=1e-12)
    assert est.window_proba_[3] == pytest.approx(0.1, abs=1e-15)
    ids = [i for i, _ in est.skyline_]
    assert 3 in ids and 1 not in ids
    assert len(est.stats_) == 5


def test_partial_fit_equals_fit():
    items = random_items(120, 4, seed=1)
    X = np.array([u.values for u in items])
    p = np.array([u.prob for u in items])
    a = KDominantSkyline(k=3, window_size=30).fit(X, sample_prob=p)
    b = KDominantSkyline(k=3, window_size=30)
    for lo in range(0, 120, 25):
        b.partial_fit(X[lo:lo + 25], sample_prob=p[lo:lo + 25])
    assert np.array_equal(a.window_ids_, b.window_ids_)
    assert np.array_equal(a.window_proba_, b.window_proba_)
    # refit starts over
    a.fit(X[:3], sample_prob=p[:3])
    assert a.window_ids_.tolist() == [0, 1, 2]


def test_score_samples_matches_oracle():
    items = random_items(60, 4, seed=2)
    X = np.array([u.values for u in items])
    p = np.array([u.prob for u in items])
    est = KDominantSkyline(k=3, window_size=40).fit(X[:50], sample_prob=p[:50])
    before = est.window_proba_.copy()
    scores = est.score_samples(X[50:], sample_prob=p[50:])
    for j, u in enumerate(items[50:]):
        resident = [v for v in items[10:50]]
        oracle = oracle_window_probabilities(window_of(resident + [u]), 3)
        assert scores[j] == pytest.approx(oracle[u.id], abs=1e-12)
    assert np.array_equal(est.window_proba_, before)
    assert est.predict(X[50:], sample_prob=p[50:]).dtype == bool


def test_bounds_do_not_change_probabilities():
    items = random_items(80, 3, seed=3)
    X = np.array([u.values for u in items])
    p = np.array([u.prob for u in items])
    a = KDominantSkyline(k=2, window_size=20).fit(X, sample_prob=p)
    b = KDominantSkyline(k=2, window_size=20, bounds=[(0, 1)] * 3).fit(X, sample_prob=p)
    assert np.allclose(a.window_proba_, b.window_proba_, atol=1e-12)


def test_errors():
    X, p = table_arrays()
    est = KDominantSkyline(k=3, window_size=5)
    with pytest.raises(NotFittedError):
        est.window_proba_
    with pytest.raises(UsageError):
        est.fit(X)
    with pytest.raises(UsageError):
        est.fit(X, sample_prob=p[:3])
    with pytest.raises(ValueError):
        est.fit(np.array([[1.0, np.nan, 2.0, 3.0]]), sample_prob=[0.5])
    est.fit(X, sample_prob=p)
    with pytest.raises(UsageError):
        est.partial_fit(X[:, :3], sample_prob=p)
