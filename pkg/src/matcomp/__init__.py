"""matcomp: exact low-rank matrix completion by decomposition and trimming.

Fills the unknown entries of a partially known matrix to (near-)minimum rank
over GF(p), the rationals, or tolerance reals, by stripping junk lines,
splitting into independent clusters, recursively sub-splitting along
conjoined lines, trimming linearly dependent lines, and recombining with
rank-preserving constructive fills.
"""

from .fields import GF2, DenseMatrix, FieldSpec, KernelCounters, column_basis, matvec, rank, solve_membership
from .partial import COL, ROW, JunkReport, PartialMatrix
from .oracle import (BudgetExceeded, OracleBudget, OracleError, UnsupportedField,
                     brute_min_rank, brute_zero, check_mr_properties)
from .clusters import (Cluster, ClusterCountRecord, ClusterDecomposition, aggregate_records,
                       decompose, geometric_k_grid, merge_udiag, render_aggregate_csv,
                       render_raw_csv, simulate_cluster_counts)
from .subdiag import (SubDecomposition, SubPiece, ZeroVerdict, conjoined_candidates,
                      is_donor, merge_subdiag, sub_decompose, zero_predicate)
from .trim import (RestoreResult, TrimLog, TrimOutcome, TrimRecord, complete_comparable,
                   find_trimmable_column, restore, trim_to_fixpoint, trim_with_approximation)
from .pipeline import CompletionOptions, CompletionResult, complete, rank_bounds

__version__ = "0.1.0"

__all__ = [
    "FieldSpec", "DenseMatrix", "GF2", "KernelCounters", "rank", "solve_membership",
    "column_basis", "matvec",
    "PartialMatrix", "JunkReport", "ROW", "COL",
    "OracleBudget", "OracleError", "UnsupportedField", "BudgetExceeded",
    "brute_min_rank", "brute_zero", "check_mr_properties",
    "Cluster", "ClusterDecomposition", "ClusterCountRecord", "decompose", "merge_udiag",
    "simulate_cluster_counts", "aggregate_records", "render_raw_csv", "render_aggregate_csv",
    "geometric_k_grid",
    "SubPiece", "SubDecomposition", "ZeroVerdict", "is_donor", "conjoined_candidates",
    "sub_decompose", "zero_predicate", "merge_subdiag",
    "TrimRecord", "TrimLog", "TrimOutcome", "RestoreResult", "find_trimmable_column",
    "trim_to_fixpoint", "trim_with_approximation", "restore", "complete_comparable",
    "CompletionOptions", "CompletionResult", "complete", "rank_bounds",
    "__version__",
]
