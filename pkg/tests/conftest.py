import pytest

from trialpool import EvalPoint, MetricKind, TrialRecord, validate_pool

ACCEPTANCE_RESULTS = []


def make_trial(wi, do, points, task="t", metric=MetricKind.ACCURACY, meta=None):
    evals = tuple(EvalPoint(float(f), float(v)) for f, v in points)
    return TrialRecord(task, wi, do, MetricKind.parse(metric), evals, meta or {})


def make_pool(spec, **kw):
    """spec: {(wi, do): [(frac, value), ...]}"""
    return validate_pool([make_trial(wi, do, pts, **kw) for (wi, do), pts in spec.items()])


def final_only_pool(values):
    return validate_pool([make_trial(0, i, [(1.0, v)]) for i, v in enumerate(values)])


@pytest.fixture
def ab_pool():
    # A looks best at f = 0.5 but finishes worse than B.
    return make_pool({(1, 1): [(0.5, 0.9), (1.0, 0.8)], (1, 2): [(0.5, 0.1), (1.0, 0.9)]})


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
