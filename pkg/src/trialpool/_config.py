import os

DEFAULT_MASTER_SEED = 1234
DEFAULT_REPS = 50_000
DEFAULT_STEPS_PER_TRIAL = 3.0
SEED_ENV = "TRIALPOOL_SEED"
THREADS_ENV = "TRIALPOOL_THREADS"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else DEFAULT_MASTER_SEED


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    return max(1, int(raw)) if raw else 1
