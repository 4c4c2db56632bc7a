"""Shared per-question run state and trace types for the search strategies.

Every strategy is a deterministic function of (ordered samples, config): all
tie-breaks fall back to earliest generation order, then canonical answer
order, so a rerun against a seeded backend reproduces the SelectionResult
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..backends.base import Backend, GenerationRequest, prefix_for_index
from ..extraction import AnswerCluster, ReasoningPath, path_from_response
from ..rewards import aggregate_path_score, normalize_scores
from ..seeding import stable_seed
from .config import SearchConfig


class StrategyError(RuntimeError):
    """A strategy could not produce an answer (e.g. nothing extractable)."""


@dataclass
class RoundTrace:
    """What one round added and decided."""

    round_index: int
    added: list
    cluster_sizes: dict = field(default_factory=dict)
    cluster_scores: dict = field(default_factory=dict)
    prefixes: list = field(default_factory=list)
    termination: str = "complete"
    raw_scores: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)


@dataclass
class SelectionResult:
    chosen: ReasoningPath
    rounds: list
    total_tokens: int
    wall_time: float


class QuestionRun:
    """Accumulates generated paths, raw scores, and token counts for one question."""

    def __init__(self, question: str, config: SearchConfig, backend: Backend,
                 task_kind: str = "math", options: Optional[Sequence[str]] = None,
                 question_id: Optional[str] = None, seed: int = 0):
        self.question = question
        self.config = config
        self.backend = backend
        self.task_kind = task_kind
        self.options = list(options) if options else None
        self.question_id = question_id if question_id is not None else question
        self.seed = seed
        self.paths: list = []
        self.total_tokens = 0
        self._raw: dict = {}

    def generate(self, n: int, prefixes: Optional[Sequence[Sequence[str]]] = None,
                 round_index: int = 0, step_mode: bool = False) -> list:
        """Sample n completions, re-attach prefixes, and absorb them into the run."""
        prefixes = [list(p) for p in prefixes] if prefixes else []
        request = GenerationRequest(
            question=self.question,
            task_kind=self.task_kind,
            n=n,
            prefixes=prefixes,
            temperature=self.config.temperature,
            max_tokens=self.config.max_tokens,
            seed=stable_seed(self.seed, round_index),
            options=self.options,
            question_id=self.question_id,
            round_index=round_index,
            step_mode=step_mode,
        )
        responses = self.backend.generate(request)
        new_paths = []
        for i, response in enumerate(responses):
            prefix = prefix_for_index(prefixes, i) if prefixes else None
            path = path_from_response(self.question_id, response, self.task_kind, prefix)
            new_paths.append(path)
            self.paths.append(path)
            self.total_tokens += response.token_count
        return new_paths

    def score(self, path: ReasoningPath) -> float:
        """Raw path score under the configured reward mode; scored once, then cached."""
        if path not in self._raw:
            self._score_batch([path])
        return self._raw[path]

    def score_all(self, paths: Optional[Sequence[ReasoningPath]] = None):
        pending = [p for p in (paths if paths is not None else self.paths) if p not in self._raw]
        if pending:
            self._score_batch(pending)

    def _score_batch(self, paths: Sequence[ReasoningPath]):
        mode = "outcome" if self.config.rm_mode == "orm" else "steps"
        signals = self.backend.score_paths(paths, mode=mode, question=self.question)
        for path, signal in zip(paths, signals):
            if mode == "steps":
                if signal.step_scores is None or len(signal.step_scores) != len(path.steps):
                    raise StrategyError(
                        f"step score count mismatch for {path.describe()}: "
                        f"{0 if signal.step_scores is None else len(signal.step_scores)} scores "
                        f"for {len(path.steps)} steps"
                    )
                self._raw[path] = aggregate_path_score(signal.step_scores, self.config.prm_aggregate)
            else:
                self._raw[path] = signal.raw

    def raw_score_of(self, path: ReasoningPath) -> Optional[float]:
        return self._raw.get(path)

    def normalized(self) -> dict:
        """Min-max normalize raw scores over the full current path set."""
        self.score_all()
        norms = normalize_scores([self._raw[p] for p in self.paths])
        return dict(zip(self.paths, norms))


def earliest_argmax(items: Sequence, key: Callable) -> int:
    """Index of the maximum; first occurrence wins ties."""
    best_idx = 0
    best = key(items[0])
    for i in range(1, len(items)):
        v = key(items[i])
        if v > best:
            best, best_idx = v, i
    return best_idx


def modal_cluster_sc(clusters: Sequence[AnswerCluster], paths: Sequence[ReasoningPath]) -> AnswerCluster:
    """Most frequent cluster, ties broken by earliest first occurrence of the answer."""
    order = {id(p): i for i, p in enumerate(paths)}
    first_seen = {id(c): min(order[id(m)] for m in c.members) for c in clusters}
    return min(clusters, key=lambda c: (-c.frequency, first_seen[id(c)]))


def cluster_sizes_map(clusters: Sequence[AnswerCluster]) -> dict:
    return {c.answer.canonical: c.frequency for c in clusters}
