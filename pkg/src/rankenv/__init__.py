"""Global rank envelope tests, their combinations and a small point-pattern toolkit."""
from .combined import (CombinedCurveSet, CurveSet, DeviationVector, Measure,
                       combined_deviation_test, concatenate, deviation_measures,
                       deviation_vector, two_stage_extreme_ranks)
from .envelope import (Decision, GlobalEnvelope, PInterval, RankTestResult, build_envelope,
                       critical_rank, p_erc, p_interval, recommend_simulations, run_rank_test)
from .rank_core import Side, TestMatrix, erc_ranks, extreme_ranks, pointwise_ranks

__version__ = "0.1.0"

__all__ = [
    "CombinedCurveSet", "CurveSet", "Decision", "DeviationVector", "GlobalEnvelope",
    "Measure", "PInterval", "RankTestResult", "Side", "TestMatrix", "build_envelope",
    "combined_deviation_test", "concatenate", "critical_rank", "deviation_measures",
    "deviation_vector", "erc_ranks", "extreme_ranks", "p_erc", "p_interval",
    "pointwise_ranks", "recommend_simulations", "run_rank_test", "two_stage_extreme_ranks",
]
