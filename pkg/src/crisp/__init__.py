"""Reward-model-guided inference-time search.

Six selection strategies over pluggable generation/reward backends: majority
voting (sc), reward argmax (bon), score-weighted voting (weighted_bon), step
beam search, MCTS over reasoning steps, and CRISP, which clusters sampled
paths by final answer, sums normalized reward scores per cluster, exits early
on near-consensus, and extends prefixes of the best paths each round.
"""

__version__ = "0.1.0"

from .analysis import (
    DiagnosticReport,
    build_report,
    compute_return_points,
    difficulty_proxies,
    estimate_difficulty,
    incorrect_answer_entropy,
    longtail_histogram,
    transition_count,
)
from .backends import (
    Backend,
    BackendConfig,
    BackendError,
    GenerationRequest,
    RemoteBackend,
    SCENARIOS,
    SimulatorBackend,
    SimulatorScenario,
    TransportError,
    build_backend,
    build_prompt,
)
from .extraction import (
    AnswerCluster,
    FinalAnswer,
    RawResponse,
    ReasoningPath,
    cluster_paths,
    extract_answer,
    normalize_answer,
    path_from_response,
    split_steps,
)
from .harness import (
    DatasetItem,
    RunRecord,
    load_dataset,
    make_scenario_dataset,
    read_results,
    run_experiment,
    summarize,
    write_results,
)
from .rewards import (
    ClusterScore,
    RewardSignal,
    aggregate_path_score,
    cluster_score,
    normalize_scores,
    rerank_margin,
)
from .strategies import (
    ConfigError,
    SearchConfig,
    SelectionResult,
    StrategyError,
    crisp_extract_prefixes,
    crisp_should_terminate,
    default_config,
    run_beam,
    run_bon,
    run_crisp,
    run_mcts,
    run_sc,
    run_strategy,
    run_weighted_bon,
)

__all__ = [
    "AnswerCluster",
    "Backend",
    "BackendConfig",
    "BackendError",
    "ClusterScore",
    "ConfigError",
    "DatasetItem",
    "DiagnosticReport",
    "FinalAnswer",
    "GenerationRequest",
    "RawResponse",
    "ReasoningPath",
    "RemoteBackend",
    "RewardSignal",
    "RunRecord",
    "SCENARIOS",
    "SearchConfig",
    "SelectionResult",
    "SimulatorBackend",
    "SimulatorScenario",
    "StrategyError",
    "TransportError",
    "aggregate_path_score",
    "build_backend",
    "build_prompt",
    "build_report",
    "cluster_paths",
    "cluster_score",
    "compute_return_points",
    "crisp_extract_prefixes",
    "crisp_should_terminate",
    "default_config",
    "difficulty_proxies",
    "estimate_difficulty",
    "extract_answer",
    "incorrect_answer_entropy",
    "load_dataset",
    "longtail_histogram",
    "make_scenario_dataset",
    "normalize_answer",
    "normalize_scores",
    "path_from_response",
    "read_results",
    "rerank_margin",
    "run_beam",
    "run_bon",
    "run_crisp",
    "run_experiment",
    "run_mcts",
    "run_sc",
    "run_strategy",
    "run_weighted_bon",
    "split_steps",
    "summarize",
    "transition_count",
    "write_results",
]
