"""Exit criteria, one test each. A PASS/FAIL line per criterion is printed in
the terminal summary."""

import contextlib
import os
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, make_pool
from trialpool import (
    EarlyStopPolicy,
    SeedAxis,
    SeedGrid,
    SynthConfig,
    aggregated_std,
    anova_f_test,
    budget_of,
    build_seed_grid,
    enumerate_policy,
    expected_max_curve,
    generate,
    generate_pool,
    kde,
    optimize_policy,
    pearson,
    simulate_policy,
    spearman,
)
from trialpool.trials import best_value, dumps_jsonl, read_pool

RELEASED_ENV = "TRIALPOOL_RELEASED_DATA"


@contextlib.contextmanager
def criterion(name):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_RESULTS.append((name, False, f"{type(exc).__name__}: {str(exc).splitlines()[0][:120]}"))
        raise
    ACCEPTANCE_RESULTS.append((name, True, f"({time.perf_counter() - start:.1f}s)"))


def enumerate_max(values, x):
    maxima = [max(t) for t in itertools.product(values, repeat=x)]
    mean = math.fsum(maxima) / len(maxima)
    return mean, math.sqrt(math.fsum((m - mean) ** 2 for m in maxima) / len(maxima))


def test_ac01_expected_max_oracle():
    with criterion("AC1  expected-max vs n^x enumeration, 200 pools, tol 1e-12, <5s"):
        rng = np.random.default_rng(101)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(200):
            values = rng.uniform(0, 1, rng.integers(1, 6)).tolist()
            curve = expected_max_curve(values, 4)
            for x in range(1, 5):
                mean, std = enumerate_max(values, x)
                worst = max(worst, abs(curve.at(x).mean - mean), abs(curve.at(x).std - std))
        assert worst <= 1e-12, worst
        assert time.perf_counter() - start < 5


def test_ac02_monotone_and_convergent():
    with criterion("AC2  expected-max monotone to x=1000, mean(1000) within 1e-6 of max, <5s"):
        rng = np.random.default_rng(102)
        start = time.perf_counter()
        checked = 0
        for _ in range(50):
            n = int(rng.integers(1, 51))
            values = rng.uniform(0, 1, n)
            if rng.random() < 0.3:
                values = np.round(values, 1)  # ties
            mean = expected_max_curve(values, 1000).mean
            assert np.all(np.diff(mean) >= 0)
            if np.mean(values == values.max()) >= 1 / 50:
                assert abs(mean[-1] - values.max()) <= 1e-6
                checked += 1
        assert checked == 50
        assert time.perf_counter() - start < 5


def test_ac03_budget_identity():
    with criterion("AC3  budget_of(41, 0.3, 11, 3) == 60 epochs == 20 trials"):
        epochs = budget_of(EarlyStopPolicy(41, 0.3, 11, 3))
        assert epochs == 60
        assert epochs / 3 == 20


def test_ac04_early_stopping_oracle(ab_pool):
    with criterion("AC4  enumerate A/B == 0.825 (1e-12); MC(200k) within 4 SE on 50 cases, <60s"):
        start = time.perf_counter()
        assert abs(enumerate_policy(ab_pool, EarlyStopPolicy(2, 0.5, 1)).expected_perf - 0.825) <= 1e-12
        rng = np.random.default_rng(104)
        for case in range(50):
            n = int(rng.integers(1, 6))
            spec = {(0, i): [(0.5, float(rng.choice([0.2, 0.4, 0.6, 0.8]))), (1.0, float(rng.uniform()))]
                    for i in range(n)}
            pool = make_pool(spec)
            t = int(rng.integers(1, 5))
            policy = EarlyStopPolicy(t, 0.5, int(rng.integers(1, t + 1)))
            exact = enumerate_policy(pool, policy)
            mc = simulate_policy(pool, policy, reps=200_000, master_seed=case)
            assert abs(mc.expected_perf - exact.expected_perf) <= 4 * mc.std_perf / math.sqrt(mc.reps) + 1e-12
        assert time.perf_counter() - start < 60


def test_ac05_degenerate_policy():
    with criterion("AC5  enumerate(t, f, p=t) == expected_max(x=t), 100 cases, tol 1e-12"):
        rng = np.random.default_rng(105)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            spec = {(0, i): [(0.3, float(rng.uniform())), (1.0, float(rng.uniform()))] for i in range(n)}
            pool = make_pool(spec)
            t = int(rng.integers(1, 5))
            f = float(rng.choice([0.3, 1.0]))
            got = enumerate_policy(pool, EarlyStopPolicy(t, f, t)).expected_perf
            assert abs(got - expected_max_curve(pool.final_values, t).at(t).mean) <= 1e-12


def test_ac06_early_stopping_helps():
    with criterion("AC6  rer > 0 at x in {5, 10, 20} on divergent synthetic pool, 50k reps, <10min"):
        start = time.perf_counter()
        cfg = SynthConfig(n_wi=20, n_do=20, base=0.85, diverge_prob=0.3, diverge_value=0.5, curve_rate=5.0,
                          master_seed=7)
        pool = generate_pool(cfg)
        for x in (5, 10, 20):
            res = optimize_policy(pool, x, reps=50_000)
            assert res.relative_error_reduction > 0, res
            assert res.best_policy.budget <= x * res.best_policy.s + 1e-9
        assert time.perf_counter() - start < 600


def test_ac07_statistics_reference_values():
    with criterion("AC7  ANOVA F=13.5 p=0.0213+-1e-3; spearman 0.9487+-1e-4; pearson 0.8+-1e-12"):
        r = anova_f_test([[1, 2, 3], [4, 5, 6]])
        assert r.f_stat == 13.5
        # F(1, 4) = t(4)^2: two-sided t tail, t density integrated independently.
        t_obs = math.sqrt(13.5)
        grid = np.linspace(t_obs, 200.0, 400_001)
        dens = (1 + grid**2 / 4) ** -2.5 * math.gamma(2.5) / (math.sqrt(4 * math.pi) * math.gamma(2))
        p_oracle = 2 * np.trapezoid(dens, grid)
        assert abs(r.p_value - p_oracle) <= 1e-6
        assert abs(r.p_value - 0.0213) <= 1e-3
        assert abs(spearman([1, 2, 2, 3], [1, 2, 3, 4]) - 0.9487) <= 1e-4
        assert abs(pearson([1, 2, 3, 4], [1, 3, 2, 4]) - 0.8) <= 1e-12


def test_ac08_variance_decomposition():
    with criterion("AC8  aggregated_std transpose symmetry (100 grids, exact); per-WI std 0 w/o DO effects"):
        rng = np.random.default_rng(108)
        for _ in range(100):
            shape = tuple(rng.integers(2, 8, size=2))
            m = rng.uniform(size=shape)
            g = SeedGrid(tuple(range(shape[0])), tuple(range(shape[1])), m)
            a, b = aggregated_std(g, SeedAxis.WI), aggregated_std(g.transpose(), SeedAxis.DO)
            assert a.per_seed == b.per_seed and a.expected_std == b.expected_std
        for seed in range(5):
            cfg = SynthConfig(n_wi=6, n_do=7, do_effect_scale=0.0, noise_scale=0.0, wi_effect_scale=0.05,
                              master_seed=seed)
            rep = aggregated_std(build_seed_grid(generate_pool(cfg)), SeedAxis.WI)
            assert all(s == 0.0 for _, s in rep.per_seed)


def test_ac09_kde_normalization():
    with criterion("AC9  KDE trapezoid integral in [0.99, 1.01], 50 random sets, 512 points"):
        rng = np.random.default_rng(109)
        for k in range(50):
            n = int(rng.integers(1, 200))
            values = rng.normal(0.8, 0.05, n) if k % 2 else rng.uniform(0, 1, n)
            xs, dens = kde(values, eval_points=512)
            assert 0.99 <= np.trapezoid(dens, xs) <= 1.01


def test_ac10_determinism():
    with criterion("AC10 simulate_policy/generate_pool bit-identical across runs and threads {1, 4}"):
        cfg = SynthConfig(n_wi=6, n_do=6, diverge_prob=0.2, master_seed=110)
        pools = [generate_pool(cfg), generate_pool(cfg)]
        assert dumps_jsonl(pools[0]) == dumps_jsonl(pools[1])
        _, truth_a = generate(cfg)
        _, truth_b = generate(cfg)
        assert truth_a.finals.tobytes() == truth_b.finals.tobytes()
        policy = EarlyStopPolicy(8, 0.3, 3)
        reports = [simulate_policy(pools[0], policy, reps=30_000, master_seed=5, threads=th) for th in (1, 4, 1, 4)]
        assert len({(r.expected_perf, r.std_perf) for r in reports}) == 1


# Agg. over WI, Agg. over DO, Total, as published.
PUBLISHED_STD = {
    "mrpc": (0.058, 0.059, 0.061),
    "rte": (0.066, 0.067, 0.069),
    "cola": (0.090, 0.095, 0.101),
    "sst": (0.0028, 0.0024, 0.0028),
}


@pytest.mark.skipif(
    not os.environ.get(RELEASED_ENV), reason=f"optional: set {RELEASED_ENV} to a directory of converted <task>.jsonl pools"
)
def test_ac11_released_data():
    with criterion("AC11 (optional) released data: seed stds within 0.005; eval-frequency curve ordering"):
        root = Path(os.environ[RELEASED_ENV])
        found = 0
        for task, published in PUBLISHED_STD.items():
            path = root / f"{task}.jsonl"
            if not path.exists():
                continue
            found += 1
            pool = read_pool(path)
            grid = build_seed_grid(pool)
            wi, do = aggregated_std(grid, SeedAxis.WI), aggregated_std(grid, SeedAxis.DO)
            got = (wi.expected_std, do.expected_std, wi.overall_std)
            assert all(abs(g - p) <= 0.005 for g, p in zip(got, published)), (task, got, published)
            x_max = 50
            final = expected_max_curve(pool.final_values, x_max).mean
            per_epoch = expected_max_curve([best_value(t, [1 / 3, 2 / 3, 1.0]) for t in pool], x_max).mean
            frequent = expected_max_curve([best_value(t) for t in pool], x_max).mean
            assert np.all(frequent >= per_epoch) and np.all(per_epoch >= final), task
        assert found, f"no <task>.jsonl files under {root}"
