"""Path tracking, monodromy and parameter homotopy."""
from .cc import GenericStart, monodromy_solve, solve_target
from .monodromy import MonodromyResult, StoppingRule, monodromy, parameter_homotopy
from .solutions import Solution, SolutionSet, classify, dedup_indices, is_real
from .tracker import TrackerConfig, newton_polish, track

__all__ = ["GenericStart", "monodromy_solve", "solve_target", "MonodromyResult", "StoppingRule",
           "monodromy", "parameter_homotopy", "Solution", "SolutionSet", "classify",
           "dedup_indices", "is_real", "TrackerConfig", "newton_polish", "track"]
