from .lr_test import LrTestResult, test_dim, compare_nested, chi2_pvalue, is_coarsening, is_nested
from .clustering import ClusterTrace, class_item, suggest_cut, leaf_order
from .criteria import information_table
from .dendrogram import merge_table, to_dot

__all__ = [
    "LrTestResult",
    "test_dim",
    "compare_nested",
    "chi2_pvalue",
    "is_coarsening",
    "is_nested",
    "ClusterTrace",
    "class_item",
    "suggest_cut",
    "leaf_order",
    "information_table",
    "merge_table",
    "to_dot",
]
