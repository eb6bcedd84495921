"""Point estimates of clustering partitions from MCMC output via NMF of the
posterior similarity matrix."""

__version__ = "0.1.0"

from .baselines import (CandidateSet, best_in_set, bell, enumerate_partitions, hclust_candidates,
                        medvedovic, oracle, stirling2)
from .metrics import adjusted_rand, contingency, rand, variation_of_information
from .nmf import (NmfConfig, NmfSolution, NmfVariant, extract_hard, extract_soft, factorize,
                  multi_start)
from .penalties import PenaltyKind, binder_penalty, dahl_penalty, evaluate, pear_penalty, vi_penalty
from .selection import SelectionReport, penalty_curve, select
from .similarity import (Partition, ValidationError, block_similarity, build_similarity,
                         partition_affinity, validate_similarity)

__all__ = [
    "CandidateSet", "NmfConfig", "NmfSolution", "NmfVariant", "Partition", "PenaltyKind",
    "SelectionReport", "ValidationError", "adjusted_rand", "bell", "best_in_set", "binder_penalty",
    "block_similarity", "build_similarity", "contingency", "dahl_penalty", "enumerate_partitions",
    "evaluate", "extract_hard", "extract_soft", "factorize", "hclust_candidates", "medvedovic",
    "multi_start", "oracle", "partition_affinity", "pear_penalty", "penalty_curve", "rand",
    "select", "stirling2", "validate_similarity", "variation_of_information", "vi_penalty",
]
