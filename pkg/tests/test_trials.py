import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_pool, make_trial
from trialpool.errors import (
    DuplicateSeedPair,
    IncompleteGrid,
    MissingFinalEval,
    MixedMetricKinds,
    NoCheckpointBefore,
    NonMonotoneFractions,
    OutOfRangeValue,
    ParseError,
)
from trialpool.trials import (
    MetricKind,
    best_value,
    build_seed_grid,
    dumps_jsonl,
    parse_jsonl,
    validate_pool,
    value_at_fraction,
)


def test_minimal_pool():
    pool = make_pool({(1, 1): [(0.5, 0.6), (1.0, 0.7)], (1, 2): [(0.5, 0.5), (1.0, 0.8)]})
    assert len(pool) == 2
    assert [t.seeds for t in pool] == [(1, 1), (1, 2)]


def test_records_sorted_by_seed_pair():
    recs = [make_trial(2, 1, [(1, 0.5)]), make_trial(1, 3, [(1, 0.5)]), make_trial(1, 2, [(1, 0.5)])]
    assert [t.seeds for t in validate_pool(recs)] == [(1, 2), (1, 3), (2, 1)]


@pytest.mark.parametrize(
    "records, exc",
    [
        ([make_trial(1, 1, [(1, 0.5)]), make_trial(1, 1, [(1, 0.6)])], DuplicateSeedPair),
        ([make_trial(1, 1, [(0.5, 0.1), (0.4, 0.2), (1.0, 0.3)])], NonMonotoneFractions),
        ([make_trial(1, 1, [(0.5, 0.1), (0.5, 0.2), (1.0, 0.3)])], NonMonotoneFractions),
        ([make_trial(1, 1, [(0.5, 0.1), (0.9, 0.2)])], MissingFinalEval),
        ([make_trial(1, 1, [(1.0, 1.2)])], OutOfRangeValue),
        ([make_trial(1, 1, [(1.0, -0.5)])], OutOfRangeValue),
        ([make_trial(1, 1, [(1.0, float("nan"))])], OutOfRangeValue),
        ([make_trial(1, 1, [(1.0, 0.5)]), make_trial(1, 2, [(1.0, 0.5)], metric="mcc")], MixedMetricKinds),
    ],
)
def test_validation_errors(records, exc):
    with pytest.raises(exc) as info:
        validate_pool(records)
    assert "wi=1" in str(info.value) or exc is DuplicateSeedPair


def test_mcc_allows_negative_values():
    pool = validate_pool([make_trial(1, 1, [(1.0, -0.5)], metric="mcc")])
    assert pool.final_values[0] == -0.5


def test_error_names_offending_trial():
    with pytest.raises(NonMonotoneFractions, match=r"wi=4, do=9"):
        validate_pool([make_trial(4, 9, [(0.5, 0.1), (0.4, 0.2), (1.0, 0.3)])])


@pytest.fixture
def three_point_trial():
    return make_trial(1, 1, [(0.1, 0.5), (0.3, 0.7), (1.0, 0.9)])


@pytest.mark.parametrize("f, expected", [(0.35, 0.7), (1.0, 0.9), (0.3, 0.7), (0.1, 0.5), (0.99, 0.7)])
def test_value_at_fraction(three_point_trial, f, expected):
    assert value_at_fraction(three_point_trial, f) == expected


def test_value_at_fraction_tolerates_float_grid():
    trial = make_trial(1, 1, [(0.1 * 3, 0.4), (1.0, 0.9)])  # 0.30000000000000004
    assert value_at_fraction(trial, 0.3) == 0.4


def test_no_checkpoint_before(three_point_trial):
    with pytest.raises(NoCheckpointBefore):
        value_at_fraction(three_point_trial, 0.05)


def test_best_value(three_point_trial):
    trial = make_trial(1, 1, [(0.1, 0.5), (0.3, 0.95), (1.0, 0.9)])
    assert best_value(trial) == 0.95
    assert best_value(trial, [1.0]) == 0.9
    assert best_value(three_point_trial, [0.35, 1.0]) == 0.9


GRID_SPEC = {(1, 1): 0.8, (1, 2): 0.6, (2, 1): 0.7, (2, 2): 0.9}


def grid_pool(spec=GRID_SPEC):
    return make_pool({k: [(1.0, v)] for k, v in spec.items()})


def test_build_seed_grid():
    grid = build_seed_grid(grid_pool())
    np.testing.assert_array_equal(grid.final_values, [[0.8, 0.6], [0.7, 0.9]])
    assert grid.wi_seeds == (1, 2) and grid.do_seeds == (1, 2)
    assert grid.trials[1][0].seeds == (2, 1)


def test_build_seed_grid_sorted():
    # Row means: WI 1 -> 0.7, WI 2 -> 0.8, so WI 2 goes on top.
    grid = build_seed_grid(grid_pool(), sort=True)
    assert grid.wi_seeds == (2, 1)
    # Column means tie at 0.75; seed order is kept.
    assert grid.do_seeds == (1, 2)
    np.testing.assert_array_equal(grid.final_values, [[0.7, 0.9], [0.8, 0.6]])


def test_incomplete_grid():
    spec = dict(GRID_SPEC)
    del spec[(2, 2)]
    with pytest.raises(IncompleteGrid) as info:
        build_seed_grid(grid_pool(spec))
    assert info.value.details["missing"] == [(2, 2)]


def test_grid_is_read_only():
    grid = build_seed_grid(grid_pool())
    with pytest.raises(ValueError):
        grid.final_values[0, 0] = 1.0


def test_parse_jsonl_example():
    line = (
        '{"task": "mrpc", "metric": "acc_f1_mean", "wi_seed": 3, "do_seed": 7, '
        '"evals": [{"frac": 0.1, "value": 0.812}, {"frac": 1.0, "value": 0.897}], "meta": {"epochs": "3"}}'
    )
    (rec,) = parse_jsonl([line, ""])
    assert rec.metric_kind is MetricKind.ACC_F1_MEAN
    assert rec.meta == {"epochs": "3"}
    assert rec.final_value == 0.897


@pytest.mark.parametrize(
    "line",
    ["{not json", '{"task": "x"}', '{"task": "x", "metric": "bleu", "wi_seed": 1, "do_seed": 1, "evals": []}',
     '{"task": "x", "metric": "f1", "wi_seed": 1.5, "do_seed": 1, "evals": []}'],
)
def test_parse_errors(line):
    with pytest.raises(ParseError):
        parse_jsonl([line])


values = st.floats(0, 1, allow_nan=False)


@st.composite
def pools(draw):
    n = draw(st.integers(1, 6))
    k = draw(st.integers(1, 4))
    fracs = sorted(draw(st.sets(st.floats(0.01, 0.99), min_size=k - 1, max_size=k - 1))) + [1.0]
    recs = []
    for i in range(n):
        recs.append(make_trial(i // 3, i % 3, [(f, draw(values)) for f in fracs]))
    return validate_pool(recs)


@settings(max_examples=60, deadline=None)
@given(pools())
def test_roundtrip_is_bit_exact(pool):
    again = validate_pool(parse_jsonl(dumps_jsonl(pool).splitlines()))
    assert again == pool
    for a, b in zip(again, pool):
        assert [e.value for e in a.evals] == [e.value for e in b.evals]


@settings(max_examples=60, deadline=None)
@given(pools())
def test_value_at_one_is_final(pool):
    for t in pool:
        assert value_at_fraction(t, 1.0) == t.final_value


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_grid_flatten_recovers_finals(n_wi, n_do, data):
    recs = [make_trial(i, j, [(1.0, data.draw(values))]) for i in range(n_wi) for j in range(n_do)]
    pool = validate_pool(recs)
    for sort in (False, True):
        grid = build_seed_grid(pool, sort=sort)
        assert sorted(grid.final_values.ravel()) == sorted(pool.final_values)


def test_jsonl_file_is_json_per_line(tmp_path):
    pool = grid_pool()
    path = tmp_path / "p.jsonl"
    path.write_text(dumps_jsonl(pool))
    lines = path.read_text().splitlines()
    assert len(lines) == 4 and all(json.loads(l)["task"] == "t" for l in lines)
