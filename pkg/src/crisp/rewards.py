"""Score normalization, step aggregation, and cluster-level reward integration.

All pure functions. The cluster score of an answer is the sum of its members'
pool-normalized path scores, which equals frequency x mean member score; the
re-ranking predicate compares those frequency-weighted products directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .extraction import AnswerCluster, ReasoningPath

AGGREGATE_MODES = ("min", "mean", "last", "product")

TIE_TOLERANCE = 1e-12


@dataclass
class RewardSignal:
    """A reward model's verdict on one path.

    ``normalized`` is only populated after pool normalization; ``step_scores``
    only in process-reward mode, one entry per reasoning step.
    """

    raw: float
    normalized: Optional[float] = None
    step_scores: Optional[list] = None

    def __post_init__(self):
        if self.normalized is not None and not (0.0 <= self.normalized <= 1.0):
            raise ValueError(f"normalized score must lie in [0, 1]: {self.normalized}")


@dataclass
class ClusterScore:
    cluster: AnswerCluster
    score: float


def aggregate_path_score(step_scores: Sequence[float], mode: str = "min") -> float:
    """Reduce per-step scores to one path-level score."""
    if not step_scores:
        raise ValueError("no steps to aggregate")
    if mode == "min":
        return min(step_scores)
    if mode == "mean":
        return sum(step_scores) / len(step_scores)
    if mode == "last":
        return step_scores[-1]
    if mode == "product":
        out = 1.0
        for s in step_scores:
            out *= s
        return out
    raise ValueError(f"unknown aggregation mode: {mode!r} (expected one of {AGGREGATE_MODES})")


def normalize_scores(raws: Sequence[float]) -> list:
    """Min-max normalize a pool of raw scores into [0, 1].

    A degenerate pool (all scores equal) maps to 0.5 everywhere, which keeps
    cluster scores proportional to frequency.
    """
    if not raws:
        raise ValueError("cannot normalize an empty score pool")
    lo, hi = min(raws), max(raws)
    if hi == lo:
        return [0.5] * len(raws)
    span = hi - lo
    return [(x - lo) / span for x in raws]


def cluster_score(cluster: AnswerCluster, normalized_scores: Mapping[ReasoningPath, float]) -> ClusterScore:
    """Sum the normalized scores of a cluster's members.

    Equivalent to frequency x mean member score; every member must already
    have a normalized score.
    """
    total = 0.0
    for member in cluster.members:
        if member not in normalized_scores:
            raise ValueError(f"no normalized score for {member.describe()}")
        total += normalized_scores[member]
    return ClusterScore(cluster=cluster, score=total)


def rerank_margin(f_i: float, mean_i: float, f_j: float, mean_j: float) -> str:
    """Compare two clusters by frequency-weighted mean score.

    Returns "i_wins", "j_wins", or "tie" (equal within 1e-12). Cluster i beats
    cluster j exactly when f_i * mean_i > f_j * mean_j, i.e. when the
    frequency ratio f_i/f_j exceeds the mean-score ratio mean_j/mean_i.
    """
    if f_i <= 0 or f_j <= 0:
        raise ValueError("cluster frequencies must be positive")
    if mean_i < 0 or mean_j < 0:
        raise ValueError("mean scores must be >= 0")
    lhs = f_i * mean_i
    rhs = f_j * mean_j
    if abs(lhs - rhs) <= TIE_TOLERANCE:
        return "tie"
    return "i_wins" if lhs > rhs else "j_wins"
