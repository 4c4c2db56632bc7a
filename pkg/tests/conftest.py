"""Shared test helpers: a scripted backend with canned completions and scores."""

from __future__ import annotations

from typing import Callable, Optional

from crisp.backends.base import Backend, GenerationRequest
from crisp.extraction import RawResponse, ReasoningPath
from crisp.rewards import RewardSignal


def math_text(answer: str, steps: int = 2) -> str:
    """A minimal well-formed math completion committing to ``answer``."""
    body = [f"Step {k}: working." for k in range(1, steps)]
    body.append(f"Step {steps}: The answer is: \\boxed{{{answer}}}")
    return "\n".join(body)


def choice_text(answer: str, steps: int = 2) -> str:
    body = [f"Step {k}: thinking." for k in range(1, steps)]
    body.append(f"Step {steps}: The answer is: {answer}")
    return "\n".join(body)


class ScriptedBackend(Backend):
    """Replays canned completion texts and scores paths via a callable.

    ``texts`` may be a flat list (consumed across generate calls) or a
    callable(request) -> list of texts. ``outcome`` maps a path to its raw
    score; ``steps`` maps a path to its per-step scores (defaults to the
    outcome score at every step).
    """

    def __init__(self, texts, outcome: Optional[Callable] = None,
                 steps: Optional[Callable] = None, tokens: int = 10):
        self._texts = texts
        self._cursor = 0
        self._outcome = outcome or (lambda path: 0.5)
        self._steps = steps
        self._tokens = tokens
        self.requests: list = []

    def generate(self, request: GenerationRequest) -> list:
        self.requests.append(request)
        if callable(self._texts):
            batch = self._texts(request)
        else:
            batch = self._texts[self._cursor : self._cursor + request.n]
            self._cursor += request.n
        if len(batch) != request.n:
            raise AssertionError(f"script exhausted: wanted {request.n}, had {len(batch)}")
        return [
            RawResponse(text=t, token_count=self._tokens, source_round=request.round_index)
            for t in batch
        ]

    def score_outcome(self, path: ReasoningPath, question=None) -> RewardSignal:
        return RewardSignal(raw=float(self._outcome(path)))

    def score_steps(self, path: ReasoningPath, question=None) -> RewardSignal:
        if self._steps is not None:
            scores = [float(s) for s in self._steps(path)]
        else:
            scores = [float(self._outcome(path))] * len(path.steps)
        return RewardSignal(raw=scores[-1] if scores else 0.0, step_scores=scores)


class FailingBackend(Backend):
    """Raises on every call; used to test failure isolation."""

    def __init__(self, exc: Exception = None):
        self._exc = exc or RuntimeError("backend down")

    def generate(self, request):
        raise self._exc

    def score_outcome(self, path, question=None):
        raise self._exc

    def score_steps(self, path, question=None):
        raise self._exc
