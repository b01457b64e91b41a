import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trialpool.errors import EmptyValues
from trialpool.expected import expected_max, expected_max_curve


def enumerate_max(values, x):
    """Mean and population std of max over all n**x equiprobable draw tuples."""
    maxima = [max(t) for t in itertools.product(values, repeat=x)]
    mean = math.fsum(maxima) / len(maxima)
    var = math.fsum((m - mean) ** 2 for m in maxima) / len(maxima)
    return mean, math.sqrt(var)


def test_single_value():
    curve = expected_max_curve([0.5], 7)
    assert all(p.mean == 0.5 and p.std == 0 for p in curve.points)


def test_two_values():
    assert expected_max_curve([0, 1], 2).at(2).mean == 0.75


def test_three_values():
    # P(max=1)=1/9, P(max=2)=3/9, P(max=3)=5/9
    assert expected_max_curve([1, 2, 3], 2).at(2).mean == pytest.approx(22 / 9, abs=1e-12)


def test_x1_is_mean_and_population_std():
    p = expected_max_curve([1, 2, 3], 1).at(1)
    assert p.mean == pytest.approx(2.0, abs=1e-15)
    assert p.std == pytest.approx(math.sqrt(2 / 3), abs=1e-12)


def test_minmax_fields_and_bands():
    curve = expected_max_curve([0.2, 0.9, 0.5], 4)
    assert {(p.min, p.max) for p in curve.points} == {(0.2, 0.9)}
    lo, hi = curve.band("minmax")
    assert set(lo) == {0.2} and set(hi) == {0.9}
    lo, hi = curve.band("std")
    np.testing.assert_allclose(hi - lo, 2 * curve.std)
    with pytest.raises(ValueError):
        curve.band("iqr")


def test_errors():
    with pytest.raises(EmptyValues):
        expected_max_curve([], 3)
    with pytest.raises(ValueError):
        expected_max_curve([1.0], 0)


small_pools = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=5)


@settings(max_examples=150, deadline=None)
@given(small_pools, st.integers(1, 4))
def test_matches_enumeration(values, x):
    p = expected_max_curve(values, x).at(x)
    mean, std = enumerate_max(values, x)
    assert p.mean == pytest.approx(mean, abs=1e-12)
    assert p.std == pytest.approx(std, abs=1e-12)
    assert expected_max(values, x) == pytest.approx(mean, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=30))
def test_monotone_and_bounded(values):
    m = expected_max_curve(values, 200).mean
    assert np.all(np.diff(m) >= 0)
    assert m.min() >= min(values) and m.max() <= max(values)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([0.1, 0.4, 0.7]), min_size=1, max_size=8), st.integers(1, 6))
def test_duplicates_equal_weighted_distinct(values, x):
    distinct, counts = np.unique(values, return_counts=True)
    cdf = np.cumsum(counts) / len(values)
    prev = np.concatenate(([0.0], cdf[:-1]))
    weighted = float(((cdf**x - prev**x) * distinct).sum())
    assert expected_max_curve(values, x).at(x).mean == pytest.approx(weighted, abs=1e-12)


def test_converges_to_max():
    rng = np.random.default_rng(3)
    values = rng.uniform(size=50)
    assert expected_max_curve(values, 1000).at(1000).mean == pytest.approx(values.max(), abs=1e-6)
