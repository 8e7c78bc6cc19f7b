import numpy as np
import pytest

from kdom_skyline.core import SlidingWindow, UncertainItem, make_entry

# five-item uncertain data set: Attr1..Attr4, probability
EXAMPLE_TABLE = {
    1: ((10, 3, 4, 6), 0.2),
    2: ((9, 8, 5, 9), 0.4),
    3: ((2, 10, 4, 4), 0.5),
    4: ((5, 2, 3, 8), 0.1),
    5: ((7, 6, 4, 6), 0.8),
}

# running example for the indexing schemes; rows are already ascending and
# the source gives no probabilities, so these are arbitrary
RUNNING_EXAMPLE = {
    1: ((30, 40, 70, 70), 0.3),
    2: ((50, 80, 90, 90), 0.6),
    3: ((20, 40, 40, 90), 0.25),
    4: ((20, 30, 50, 60), 0.45),
    5: ((40, 60, 80, 80), 0.7),
}


def items_from(table):
    return {i: UncertainItem(i, tuple(float(v) for v in vals), p) for i, (vals, p) in table.items()}


@pytest.fixture
def example_items():
    return items_from(EXAMPLE_TABLE)


@pytest.fixture
def running_items():
    return items_from(RUNNING_EXAMPLE)


def window_of(items, capacity=None):
    items = list(items)
    w = SlidingWindow(capacity or max(1, len(items)))
    for u in items:
        w.push(make_entry(u, None))
    return w


def brute_kdom(a, b, k):
    """k-dominance by explicit index sets (independent of the library loop)."""
    not_worse = {j for j in range(len(a)) if a[j] <= b[j]}
    better = {j for j in range(len(a)) if a[j] < b[j]}
    return len(not_worse) >= k and len(better) > 0


def brute_probs(items, k):
    """Pure-Python from-scratch probabilities, no numpy, no library predicates."""
    out = {}
    for u in items:
        p = u.prob
        for v in items:
            if v.id != u.id and brute_kdom(v.values, u.values, k):
                p *= 1.0 - v.prob
        out[u.id] = p
    return out


def random_items(n, d, seed, ties=False, prob_range=(0.01, 0.99), start=0):
    rng = np.random.default_rng(seed)
    if ties:
        vals = rng.integers(0, 4, size=(n, d)).astype(float)
    else:
        vals = rng.random((n, d))
    probs = rng.uniform(*prob_range, size=n)
    return [UncertainItem(start + i, tuple(r), float(p)) for i, (r, p) in enumerate(zip(vals.tolist(), probs))]
