"""Search strategy selection and hyperparameters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import Optional

STRATEGIES = ("sc", "bon", "weighted_bon", "beam", "mcts", "crisp")
RM_MODES = ("orm", "prm")
MCTS_SCORING = ("reward", "maj_vote", "q_value", "n_greedy", "q_greedy", "self")

from ..rewards import AGGREGATE_MODES


class ConfigError(ValueError):
    """Invalid search configuration; raised before any generation happens."""


@dataclass
class SearchConfig:
    """Strategy choice plus every knob the strategies read.

    ``n`` is the sample count of the initial round; ``refine_n`` the per-round
    count of prefix-conditioned rounds (defaults to 8 in outcome-reward mode,
    4 in process-reward mode). ``top_k`` defaults to 1 (orm) / 2 (prm).
    ``max_depth`` bounds CRISP's prefix rounds, the MCTS tree depth, and the
    beam search depth. The three ablation switches disable the cluster-count
    early exit, cluster-level score aggregation, and full-completion prefix
    decoding respectively.
    """

    strategy: str = "crisp"
    n: int = 16
    refine_n: Optional[int] = None
    temperature: float = 0.7
    max_depth: int = 3
    width: int = 5
    beam_count: int = 8
    explore_weight: float = 0.1
    top_k: Optional[int] = None
    cluster_threshold: int = 2
    rm_mode: str = "orm"
    mcts_scoring: str = "reward"
    prm_aggregate: str = "min"
    max_tokens: int = 512
    termination_on: bool = True
    aggregation_on: bool = True
    prefixing_on: bool = True

    @property
    def resolved_refine_n(self) -> int:
        if self.refine_n is not None:
            return self.refine_n
        return 8 if self.rm_mode == "orm" else 4

    @property
    def resolved_top_k(self) -> int:
        if self.top_k is not None:
            return self.top_k
        return 1 if self.rm_mode == "orm" else 2

    def validate(self):
        problems = []
        if self.strategy not in STRATEGIES:
            problems.append(f"unknown strategy {self.strategy!r}")
        if self.rm_mode not in RM_MODES:
            problems.append(f"unknown rm_mode {self.rm_mode!r}")
        if self.mcts_scoring not in MCTS_SCORING:
            problems.append(f"unknown mcts_scoring {self.mcts_scoring!r}")
        if self.prm_aggregate not in AGGREGATE_MODES:
            problems.append(f"unknown prm_aggregate {self.prm_aggregate!r}")
        for name in ("n", "max_depth", "width", "beam_count", "max_tokens", "cluster_threshold"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                problems.append(f"{name} must be an integer")
        for name in ("refine_n", "top_k"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
                problems.append(f"{name} must be an integer")
        for name in ("temperature", "explore_weight"):
            if not isinstance(getattr(self, name), (int, float)):
                problems.append(f"{name} must be a number")
        for name in ("termination_on", "aggregation_on", "prefixing_on"):
            if not isinstance(getattr(self, name), bool):
                problems.append(f"{name} must be a boolean")
        if problems:
            raise ConfigError("; ".join(problems))
        for name in ("n", "max_depth", "width", "beam_count", "max_tokens"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be positive")
        if self.refine_n is not None and self.refine_n < 1:
            problems.append("refine_n must be positive")
        if self.top_k is not None and self.top_k < 1:
            problems.append("top_k must be >= 1")
        if self.cluster_threshold < 1:
            problems.append("cluster_threshold must be >= 1")
        if self.explore_weight < 0:
            problems.append("explore_weight must be >= 0")
        if self.temperature < 0:
            problems.append("temperature must be >= 0")
        if self.strategy == "beam" and self.rm_mode != "prm":
            problems.append("beam search needs step scores: set rm_mode to 'prm'")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "SearchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def default_config(strategy: str, rm_mode: str = "orm") -> SearchConfig:
    """Tuned per-strategy defaults: 32 samples for the single-round strategies,
    16 rollouts / width 5 / depth 5 / c=0.1 for MCTS, 8/5/5 for beam search,
    16 initial samples / 3 prefix rounds / threshold 2 for CRISP."""
    if strategy in ("sc", "bon", "weighted_bon"):
        return SearchConfig(strategy=strategy, n=32, rm_mode=rm_mode)
    if strategy == "mcts":
        return SearchConfig(strategy=strategy, n=16, width=5, max_depth=5,
                            explore_weight=0.1, rm_mode=rm_mode)
    if strategy == "beam":
        return SearchConfig(strategy=strategy, beam_count=8, width=5, max_depth=5,
                            rm_mode="prm")
    if strategy == "crisp":
        return SearchConfig(strategy=strategy, n=16, max_depth=3, cluster_threshold=2,
                            rm_mode=rm_mode)
    raise ConfigError(f"unknown strategy {strategy!r}")
