from .basic import run_bon, run_sc, run_weighted_bon
from .beam import run_beam
from .common import QuestionRun, RoundTrace, SelectionResult, StrategyError
from .config import MCTS_SCORING, RM_MODES, STRATEGIES, ConfigError, SearchConfig, default_config
from .crisp import crisp_extract_prefixes, crisp_should_terminate, run_crisp
from .mcts import TreeNode, run_mcts, select_child_index, ucb_score

_RUNNERS = {
    "sc": run_sc,
    "bon": run_bon,
    "weighted_bon": run_weighted_bon,
    "beam": run_beam,
    "mcts": run_mcts,
    "crisp": run_crisp,
}


def run_strategy(question, config, backend, **kwargs):
    """Dispatch to the runner named by ``config.strategy``."""
    try:
        runner = _RUNNERS[config.strategy]
    except KeyError:
        raise ConfigError(f"unknown strategy {config.strategy!r}") from None
    return runner(question, config, backend, **kwargs)


__all__ = [
    "ConfigError",
    "MCTS_SCORING",
    "QuestionRun",
    "RM_MODES",
    "RoundTrace",
    "STRATEGIES",
    "SearchConfig",
    "SelectionResult",
    "StrategyError",
    "TreeNode",
    "crisp_extract_prefixes",
    "crisp_should_terminate",
    "default_config",
    "run_beam",
    "run_bon",
    "run_crisp",
    "run_mcts",
    "run_sc",
    "run_strategy",
    "run_weighted_bon",
    "select_child_index",
    "ucb_score",
]
