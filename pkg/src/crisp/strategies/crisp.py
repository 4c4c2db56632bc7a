"""Clustered reward integration with stepwise prefixing.

Each round samples full completions conditioned on the current prefix set,
clusters the accumulated paths by final answer, and sums pool-normalized
reward scores per cluster. A cluster count below the threshold ends the search
immediately with the modal answer (the self-consistency regime for easy
questions); otherwise prefixes of the best paths in the top-scored clusters
seed the next round, one step longer each iteration. Raw scores are queried
once per path; only the normalization is refreshed as the pool grows.
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

from ..backends.base import Backend
from ..extraction import AnswerCluster, cluster_paths
from ..rewards import cluster_score
from .common import (
    QuestionRun,
    RoundTrace,
    SelectionResult,
    StrategyError,
    cluster_sizes_map,
    earliest_argmax,
)
from .config import SearchConfig

CONTINUE = "continue"
STOP_RETURN_MODAL = "stop_return_modal"
STOP_RETURN_BEST = "stop_return_best"


def crisp_should_terminate(clusters: Sequence[AnswerCluster], round_index: int,
                           config: SearchConfig) -> str:
    """Decide after a round whether to keep searching.

    Fewer clusters than the threshold means the question is easy: stop and
    return the modal answer. Hitting the round budget stops with the
    best-scored cluster. The check runs after every round, round 0 included.
    """
    if config.termination_on and len(clusters) < config.cluster_threshold:
        return STOP_RETURN_MODAL
    if round_index >= config.max_depth:
        return STOP_RETURN_BEST
    return CONTINUE


def crisp_extract_prefixes(clusters: Sequence[AnswerCluster], cluster_scores: dict,
                           path_scores: dict, round_index: int,
                           config: SearchConfig) -> list:
    """Prefixes for the next round: the first (round_index + 1) steps of the
    best-scored member of each of the top-k clusters.

    Cluster ties go to the larger frequency, then answer order; member ties to
    the earliest-generated path. Paths shorter than the cut keep all steps.
    """
    if not clusters:
        raise ValueError("prefix extraction needs at least one cluster")
    k = min(config.resolved_top_k, len(clusters))
    ranked = sorted(
        clusters,
        key=lambda c: (-cluster_scores[id(c)], -c.frequency, c.answer.canonical),
    )
    cut = round_index + 1
    prefixes = []
    for cluster in ranked[:k]:
        best = cluster.members[earliest_argmax(cluster.members, lambda p: path_scores[p])]
        prefixes.append(list(best.steps[:cut]))
    return prefixes


def _top_paths_prefixes(paths, path_scores, round_index, config) -> list:
    """Prefix sources without cluster aggregation: the top-k paths by raw score."""
    candidates = [p for p in paths if not p.answer.is_null]
    ranked = sorted(range(len(candidates)), key=lambda i: (-path_scores[candidates[i]], i))
    cut = round_index + 1
    k = min(config.resolved_top_k, len(ranked))
    return [list(candidates[i].steps[:cut]) for i in ranked[:k]]


def run_crisp(question: str, config: SearchConfig, backend: Backend, *,
              task_kind: str = "math", options: Optional[Sequence[str]] = None,
              question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)
    added = run.generate(config.n, round_index=0)
    if all(p.answer.is_null for p in run.paths):
        raise StrategyError("no extractable answer")

    rounds = []
    round_index = 0
    chosen = None
    while True:
        normalized = run.normalized()
        clusters = cluster_paths(run.paths)
        scores = {id(c): cluster_score(c, normalized).score for c in clusters}

        decision = crisp_should_terminate(clusters, round_index, config)
        prefixes = []
        if decision == CONTINUE:
            if config.aggregation_on:
                prefixes = crisp_extract_prefixes(clusters, scores, normalized, round_index, config)
            else:
                raw = {p: run.score(p) for p in run.paths}
                prefixes = _top_paths_prefixes(run.paths, raw, round_index, config)

        rounds.append(RoundTrace(
            round_index=round_index,
            added=added,
            cluster_sizes=cluster_sizes_map(clusters),
            cluster_scores={c.answer.canonical: scores[id(c)] for c in clusters},
            prefixes=prefixes,
            termination=decision,
            raw_scores=[run.raw_score_of(p) for p in added],
        ))

        if decision == STOP_RETURN_MODAL:
            winner = min(clusters, key=lambda c: (-c.frequency, -scores[id(c)], c.answer.canonical))
            chosen = winner.members[0]
            break
        if decision == STOP_RETURN_BEST:
            if config.aggregation_on:
                top = min(clusters, key=lambda c: (-scores[id(c)], -c.frequency, c.answer.canonical))
                chosen = top.members[earliest_argmax(top.members, lambda p: normalized[p])]
            else:
                candidates = [p for p in run.paths if not p.answer.is_null]
                chosen = candidates[earliest_argmax(candidates, run.score)]
            break

        added = run.generate(
            config.resolved_refine_n,
            prefixes=prefixes,
            round_index=round_index + 1,
            step_mode=not config.prefixing_on,
        )
        round_index += 1

    return SelectionResult(chosen, rounds, run.total_tokens, time.perf_counter() - t0)
