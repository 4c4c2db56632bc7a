"""Single-round selection strategies: self-consistency and best-of-n variants."""

from __future__ import annotations

import time
from typing import Optional, Sequence

from ..backends.base import Backend
from ..extraction import cluster_paths
from ..rewards import cluster_score
from .common import (
    QuestionRun,
    RoundTrace,
    SelectionResult,
    StrategyError,
    earliest_argmax,
    cluster_sizes_map,
    modal_cluster_sc,
)
from .config import SearchConfig


def run_sc(question: str, config: SearchConfig, backend: Backend, *,
           task_kind: str = "math", options: Optional[Sequence[str]] = None,
           question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    """Sample n paths and return a representative of the modal answer.

    Ties between equally frequent answers go to the answer seen first. Null
    answers never vote; if every path is null there is nothing to return.
    """
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)
    added = run.generate(config.n)
    clusters = cluster_paths(run.paths)
    if not clusters:
        raise StrategyError("no extractable answer")
    winner = modal_cluster_sc(clusters, run.paths)
    chosen = winner.members[0]
    trace = RoundTrace(
        round_index=0,
        added=added,
        cluster_sizes=cluster_sizes_map(clusters),
        raw_scores=[None] * len(added),
    )
    return SelectionResult(chosen, [trace], run.total_tokens, time.perf_counter() - t0)


def run_bon(question: str, config: SearchConfig, backend: Backend, *,
            task_kind: str = "math", options: Optional[Sequence[str]] = None,
            question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    """Sample n paths and return the one the reward model scores highest.

    Null-answer paths are scored (they stay in the normalization pool) but can
    never be selected.
    """
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)
    added = run.generate(config.n)
    run.score_all()
    candidates = [p for p in run.paths if not p.answer.is_null]
    if not candidates:
        raise StrategyError("no extractable answer")
    chosen = candidates[earliest_argmax(candidates, run.score)]
    trace = RoundTrace(
        round_index=0,
        added=added,
        cluster_sizes=cluster_sizes_map(cluster_paths(run.paths)),
        raw_scores=[run.raw_score_of(p) for p in added],
    )
    return SelectionResult(chosen, [trace], run.total_tokens, time.perf_counter() - t0)


def run_weighted_bon(question: str, config: SearchConfig, backend: Backend, *,
                     task_kind: str = "math", options: Optional[Sequence[str]] = None,
                     question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    """Weighted vote: each answer's weight is the sum of its paths' normalized
    scores; return the best-scored path inside the winning answer."""
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)
    added = run.generate(config.n)
    normalized = run.normalized()
    clusters = cluster_paths(run.paths)
    if not clusters:
        raise StrategyError("no extractable answer")
    weights = {id(c): cluster_score(c, normalized).score for c in clusters}
    order = {id(p): i for i, p in enumerate(run.paths)}
    first_seen = {id(c): min(order[id(m)] for m in c.members) for c in clusters}
    winner = min(clusters, key=lambda c: (-weights[id(c)], first_seen[id(c)]))
    chosen = winner.members[earliest_argmax(winner.members, lambda p: normalized[p])]
    trace = RoundTrace(
        round_index=0,
        added=added,
        cluster_sizes=cluster_sizes_map(clusters),
        cluster_scores={c.answer.canonical: weights[id(c)] for c in clusters},
        raw_scores=[run.raw_score_of(p) for p in added],
    )
    return SelectionResult(chosen, [trace], run.total_tokens, time.perf_counter() - t0)
