from .search import (
    Evaluator,
    MctsSearch,
    NetEvaluator,
    PriorMode,
    PriorSource,
    RolloutEvaluator,
    RootStats,
    SearchConfig,
    SearchNode,
    apply_root_dirichlet,
    backup,
    extract_policy,
    select_child_index,
)

__all__ = [
    "Evaluator",
    "MctsSearch",
    "NetEvaluator",
    "PriorMode",
    "PriorSource",
    "RolloutEvaluator",
    "RootStats",
    "SearchConfig",
    "SearchNode",
    "apply_root_dirichlet",
    "backup",
    "extract_policy",
    "select_child_index",
]
