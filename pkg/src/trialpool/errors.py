"""Exception hierarchy. Every error carries a stable ``code`` used by the CLI."""


class TrialPoolError(ValueError):
    code = "E_TRIALPOOL"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(v):
    if isinstance(v, (list, tuple, set, frozenset)):
        return [_jsonable(x) for x in v]
    return v


class ParseError(TrialPoolError):
    code = "E_PARSE"


class DuplicateSeedPair(TrialPoolError):
    code = "E_DUP_SEED_PAIR"


class MissingFinalEval(TrialPoolError):
    code = "E_MISSING_FINAL"


class NonMonotoneFractions(TrialPoolError):
    code = "E_NON_MONOTONE"


class MixedMetricKinds(TrialPoolError):
    code = "E_MIXED_METRIC"


class MixedTasks(TrialPoolError):
    code = "E_MIXED_TASK"


class OutOfRangeValue(TrialPoolError):
    code = "E_OUT_OF_RANGE"


class NoCheckpointBefore(TrialPoolError):
    code = "E_NO_CHECKPOINT"


class IncompleteGrid(TrialPoolError):
    code = "E_INCOMPLETE_GRID"


class EmptyPool(TrialPoolError):
    code = "E_EMPTY_POOL"


class EmptyValues(TrialPoolError):
    code = "E_EMPTY_VALUES"


class EmptyInput(TrialPoolError):
    code = "E_EMPTY_INPUT"


class LengthMismatch(TrialPoolError):
    code = "E_LENGTH_MISMATCH"


class DegenerateAxis(TrialPoolError):
    code = "E_DEGENERATE_AXIS"


class TooFewGroups(TrialPoolError):
    code = "E_TOO_FEW_GROUPS"


class TooFewSamples(TrialPoolError):
    code = "E_TOO_FEW_SAMPLES"


class NoCommonCheckpoints(TrialPoolError):
    code = "E_NO_COMMON_CHECKPOINTS"


class EnumerationTooLarge(TrialPoolError):
    code = "E_ENUMERATION_TOO_LARGE"


class EmptyFeasibleSet(TrialPoolError):
    code = "E_BUDGET_INFEASIBLE"


class PerfectBaseline(TrialPoolError):
    code = "E_PERFECT_BASELINE"


class InvalidPolicy(TrialPoolError):
    code = "E_INVALID_POLICY"


class InvalidConfig(TrialPoolError):
    code = "E_INVALID_CONFIG"
