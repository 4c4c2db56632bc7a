"""Experiment orchestration: one RunRecord per dataset item.

Questions run in a bounded worker pool; per-question seeds derive from
(run seed, question id) so parallelism never changes outputs, and records come
back in dataset order. A failing question produces a failed record instead of
aborting the run.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..backends.base import Backend
from ..seeding import stable_seed
from ..strategies import SearchConfig, SelectionResult, run_strategy
from .datasets import DatasetItem

log = logging.getLogger(__name__)


@dataclass
class RunRecord:
    question_id: str
    strategy: str
    config_digest: str
    chosen_answer: str = ""
    chosen_kind: str = "null"
    gold_answer: str = ""
    correct: bool = False
    tokens: int = 0
    wall_time: float = 0.0
    seed: int = 0
    failed: bool = False
    error: Optional[str] = None
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "strategy": self.strategy,
            "config_digest": self.config_digest,
            "chosen_answer": self.chosen_answer,
            "chosen_kind": self.chosen_kind,
            "gold_answer": self.gold_answer,
            "correct": self.correct,
            "tokens": self.tokens,
            "wall_time": self.wall_time,
            "seed": self.seed,
            "failed": self.failed,
            "error": self.error,
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(**data)


def _trace_payload(result: SelectionResult) -> list:
    rounds = []
    for rt in result.rounds:
        raws = rt.raw_scores if rt.raw_scores else [None] * len(rt.added)
        rounds.append({
            "round": rt.round_index,
            "added": [
                {
                    "answer": p.answer.canonical,
                    "kind": p.answer.kind,
                    "raw": raws[i],
                    "tokens": p.token_count,
                    "source_round": p.source_round,
                }
                for i, p in enumerate(rt.added)
            ],
            "cluster_sizes": rt.cluster_sizes,
            "cluster_scores": rt.cluster_scores,
            "prefixes": rt.prefixes,
            "termination": rt.termination,
            "detail": rt.detail,
        })
    return rounds


def run_question(item: DatasetItem, config: SearchConfig, backend: Backend,
                 seed: int = 0) -> RunRecord:
    digest = config.digest()
    question_seed = stable_seed(seed, item.id)
    t0 = time.perf_counter()
    try:
        result = run_strategy(
            item.question, config, backend,
            task_kind=item.task_kind,
            options=item.options,
            question_id=item.id,
            seed=question_seed,
        )
    except Exception as exc:  # isolate the failure to this record
        log.warning("question %s failed: %s", item.id, exc)
        return RunRecord(
            question_id=item.id,
            strategy=config.strategy,
            config_digest=digest,
            gold_answer=item.gold.canonical,
            wall_time=time.perf_counter() - t0,
            seed=seed,
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )
    chosen = result.chosen.answer
    return RunRecord(
        question_id=item.id,
        strategy=config.strategy,
        config_digest=digest,
        chosen_answer=chosen.canonical,
        chosen_kind=chosen.kind,
        gold_answer=item.gold.canonical,
        correct=(not chosen.is_null) and chosen == item.gold,
        tokens=result.total_tokens,
        wall_time=result.wall_time,
        seed=seed,
        trace=_trace_payload(result),
    )


def run_experiment(dataset: Sequence[DatasetItem], config: SearchConfig, backend: Backend,
                   seed: int = 0, parallelism: int = 1,
                   skip_ids: Optional[set] = None) -> list:
    """Run every dataset item, in order. ``skip_ids`` supports resuming from an
    existing results file."""
    config.validate()
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    items = [it for it in dataset if not (skip_ids and it.id in skip_ids)]
    if parallelism == 1 or len(items) <= 1:
        return [run_question(it, config, backend, seed) for it in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(run_question, it, config, backend, seed) for it in items]
        return [f.result() for f in futures]
