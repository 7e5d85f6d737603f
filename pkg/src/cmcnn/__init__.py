"""Compressed multi-function CNNs chosen by genetic search and compensatory fitness."""

__version__ = "0.1.0"

from .activations import DEFAULT_FUNCTION_SET, Activation  # noqa: E402
from .compensatory import (EvalRecord, alpha, build_comparison_table,  # noqa: E402
                           compensatory_argmax, run_compensatory, size_ratio)
from .estimator import CompensatorySearch, MultiFunctionCNNClassifier  # noqa: E402
from .ga import GaConfig, random_search, run_ga  # noqa: E402
from .genome import (Genome, crossover, mutate, random_genome,  # noqa: E402
                     search_space_size)
from .metrics import f1_score, macro_f1, micro_f1  # noqa: E402
from .nn import ArchSpec, build_model  # noqa: E402

__all__ = [
    "Activation", "ArchSpec", "CompensatorySearch", "DEFAULT_FUNCTION_SET", "EvalRecord",
    "GaConfig", "Genome", "MultiFunctionCNNClassifier", "alpha", "build_comparison_table",
    "build_model", "compensatory_argmax", "crossover", "f1_score", "macro_f1", "micro_f1",
    "mutate", "random_genome", "random_search", "run_compensatory", "run_ga",
    "search_space_size", "size_ratio", "__version__",
]
