"""Multifactorial evolutionary optimization with residual-learning crossover."""

from .benchmarks import BaseFunction, EvalCounter, ProblemSpec, Suite, evaluate_base, evaluate_task, make_cec17_pair
from .encoding import (
    Individual,
    MultitaskProblem,
    Population,
    Task,
    assign_fitness,
    decode,
    encode,
    factorial_ranks,
    scalar_fitness,
)
from .estimators import GaussianProjection, ResidualExpander, SkillFactorClassifier
from .exceptions import (
    BudgetError,
    DegenerateLabelsError,
    DimensionMismatchError,
    EmptyInputError,
    InvalidInputError,
    MfeaError,
    MismatchedRunsError,
    NumericError,
    UndefinedFitnessError,
)
from .harness import ExperimentConfig, run_experiment, run_random_search
from .mfea import MFEA, MfeaConfig, run_mfea
from .mfea_rl import MFEARL, MfeaRlConfig, Mode, build_training_batch, random_row_map, residual_crossover, run_mfea_rl
from .operators import (
    Mating,
    assortative_mating,
    boundary_repair,
    polynomial_mutation,
    sbx_crossover,
    select_next_generation,
)
from .records import RunRecord, RunResult
from .stats import Decision, summarize, wilcoxon_rank_sum

__version__ = "0.1.0"

__all__ = [
    "BaseFunction", "BudgetError", "Decision", "DegenerateLabelsError", "DimensionMismatchError",
    "EmptyInputError", "EvalCounter", "ExperimentConfig", "GaussianProjection", "Individual", "InvalidInputError",
    "MFEA", "MFEARL", "Mating", "MfeaConfig", "MfeaError", "MfeaRlConfig", "MismatchedRunsError", "Mode",
    "MultitaskProblem", "NumericError", "Population", "ProblemSpec", "ResidualExpander", "RunRecord", "RunResult",
    "SkillFactorClassifier", "Suite", "Task", "UndefinedFitnessError", "assign_fitness", "assortative_mating",
    "boundary_repair", "build_training_batch", "decode", "encode", "evaluate_base", "evaluate_task",
    "factorial_ranks", "make_cec17_pair", "polynomial_mutation", "random_row_map", "residual_crossover",
    "run_experiment", "run_mfea", "run_mfea_rl", "run_random_search", "sbx_crossover", "scalar_fitness",
    "select_next_generation", "summarize", "wilcoxon_rank_sum",
]
