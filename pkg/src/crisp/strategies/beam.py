"""Step-level beam search guided by process reward scores."""

from __future__ import annotations

import time
from typing import Optional, Sequence

from ..backends.base import Backend
from ..rewards import aggregate_path_score
from .common import (
    QuestionRun,
    RoundTrace,
    SelectionResult,
    StrategyError,
    earliest_argmax,
)
from .config import SearchConfig


class _Beam:
    __slots__ = ("path", "step_scores")

    def __init__(self, path, step_scores):
        self.path = path
        self.step_scores = step_scores

    @property
    def last_score(self) -> float:
        return self.step_scores[-1]

    def aggregate(self, mode: str) -> float:
        return aggregate_path_score(self.step_scores, mode)


def run_beam(question: str, config: SearchConfig, backend: Backend, *,
             task_kind: str = "math", options: Optional[Sequence[str]] = None,
             question_id: Optional[str] = None, seed: int = 0) -> SelectionResult:
    """Expand ``beam_count`` partial paths one step at a time, keeping the
    continuations whose newest step the process reward model likes best.

    Stops when every beam has emitted a final answer or the depth budget runs
    out; the winner is the completed beam with the best aggregated path score.
    With no completion inside the budget, the best partial is returned and the
    final round is flagged "incomplete".
    """
    if config.rm_mode != "prm":
        raise StrategyError("beam search needs step scores: set rm_mode to 'prm'")
    t0 = time.perf_counter()
    run = QuestionRun(question, config, backend, task_kind, options, question_id, seed)

    live: list = [None]  # the root: expand from an empty prefix
    completed: list = []
    rounds = []

    for depth in range(1, config.max_depth + 1):
        prefixes = [list(b.path.steps) for b in live if b is not None]
        n = config.width * len(live)
        new_paths = run.generate(n, prefixes=prefixes or None, round_index=depth - 1,
                                 step_mode=True)
        candidates = []
        for path in new_paths:
            signal = backend.score_steps(path, question=question)
            if not signal.step_scores or len(signal.step_scores) != len(path.steps):
                raise StrategyError(f"step score count mismatch for {path.describe()}")
            candidates.append(_Beam(path, list(signal.step_scores)))
        newly_completed = [b for b in candidates if not b.path.answer.is_null]
        still_open = [b for b in candidates if b.path.answer.is_null]
        completed.extend(newly_completed)
        ranked = sorted(range(len(still_open)), key=lambda i: (-still_open[i].last_score, i))
        live = [still_open[i] for i in ranked[: config.beam_count]]
        rounds.append(RoundTrace(
            round_index=depth - 1,
            added=new_paths,
            raw_scores=[b.last_score for b in candidates],
            termination="continue",
            detail={
                "live": len(live),
                "completed": len(completed),
                "kept_scores": [b.last_score for b in live],
            },
        ))
        if not live:
            break

    if completed:
        mode = config.prm_aggregate
        chosen = completed[earliest_argmax(completed, lambda b: b.aggregate(mode))].path
        rounds[-1].termination = "complete"
    else:
        if not live:
            raise StrategyError("no beams left to return")
        chosen = live[earliest_argmax(live, lambda b: b.aggregate(config.prm_aggregate))].path
        rounds[-1].termination = "incomplete"
    return SelectionResult(chosen, rounds, run.total_tokens, time.perf_counter() - t0)
