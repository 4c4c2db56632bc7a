"""Uniform generation/scoring contract shared by the simulator and the remote client."""

from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..extraction import TASK_KINDS, RawResponse, ReasoningPath
from ..rewards import RewardSignal

BACKEND_KINDS = ("remote", "simulator")

ENDPOINT_ENV = "CRISP_ENDPOINT"
REWARD_ENDPOINT_ENV = "CRISP_REWARD_ENDPOINT"
API_KEY_ENV = "CRISP_API_KEY"


class BackendError(Exception):
    """Base class for generation/scoring backend failures."""


class TransportError(BackendError):
    """Network-level failure after retries were exhausted."""

    def __init__(self, message: str, attempts: int = 1, cause: Optional[Exception] = None):
        super().__init__(message)
        self.attempts = attempts
        self.cause = cause


class ResponseDecodeError(BackendError):
    """The endpoint answered, but the body was not what the protocol promises."""


@dataclass
class GenerationRequest:
    """One sampling request: n completions of a question, optionally conditioned
    on step prefixes.

    When ``prefixes`` is non-empty, the n completions are distributed
    round-robin across them (completion i continues prefixes[i % len(prefixes)]).
    ``step_mode`` asks for a single next step per completion instead of a full
    continuation. ``options`` carries the labeled alternatives for multiple
    choice questions; ``question_id`` keys the simulator's per-question streams
    and defaults to the question text.
    """

    question: str
    task_kind: str = "math"
    n: int = 1
    prefixes: list = field(default_factory=list)
    temperature: float = 0.7
    max_tokens: int = 512
    seed: int = 0
    options: Optional[list] = None
    question_id: Optional[str] = None
    round_index: int = 0
    step_mode: bool = False
    template: Optional[str] = None

    def __post_init__(self):
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind: {self.task_kind!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @property
    def effective_question_id(self) -> str:
        return self.question_id if self.question_id is not None else self.question


def prefix_for_index(prefixes: Sequence[Sequence[str]], i: int) -> Sequence[str]:
    """Round-robin assignment of completion index i to a prefix."""
    return prefixes[i % len(prefixes)]


class Backend(ABC):
    """Generation plus outcome/process reward scoring."""

    @abstractmethod
    def generate(self, request: GenerationRequest) -> list:
        """Return exactly ``request.n`` RawResponses, in request order."""

    @abstractmethod
    def score_outcome(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        """One scalar raw score for the whole path."""

    @abstractmethod
    def score_steps(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        """One raw score per reasoning step (``step_scores`` populated)."""

    def score_paths(self, paths: Sequence[ReasoningPath], mode: str = "outcome",
                    question: Optional[str] = None) -> list:
        """Score many paths, preserving input order. Subclasses may parallelize."""
        if mode == "outcome":
            return [self.score_outcome(p, question=question) for p in paths]
        if mode == "steps":
            return [self.score_steps(p, question=question) for p in paths]
        raise ValueError(f"unknown scoring mode: {mode!r}")

    def close(self):
        pass


@dataclass
class BackendConfig:
    """Which backend to build and how to reach it.

    For kind="remote" the endpoint/auth fields may come from the environment
    (CRISP_ENDPOINT, CRISP_REWARD_ENDPOINT, CRISP_API_KEY); everything else is
    file-configured. For kind="simulator" a scenario is required.
    """

    kind: str = "simulator"
    endpoint: Optional[str] = None
    reward_endpoint: Optional[str] = None
    api_key: Optional[str] = None
    model: str = ""
    template: Optional[str] = None
    scenario: Optional[object] = None
    timeout: float = 30.0
    max_parallel: int = 4
    retry_backoff: float = 0.5

    def resolve_env(self) -> "BackendConfig":
        if self.kind == "remote":
            if self.endpoint is None:
                self.endpoint = os.environ.get(ENDPOINT_ENV)
            if self.reward_endpoint is None:
                self.reward_endpoint = os.environ.get(REWARD_ENDPOINT_ENV)
            if self.api_key is None:
                self.api_key = os.environ.get(API_KEY_ENV)
        return self

    def validate(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError(f"remote backend needs an endpoint (flag, config, or ${ENDPOINT_ENV})")
        if self.kind == "simulator" and self.scenario is None:
            raise ValueError("simulator backend needs a scenario")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be positive")


def build_backend(config: BackendConfig, seed: int = 0) -> Backend:
    """Construct the backend described by ``config``."""
    config.resolve_env()
    config.validate()
    if config.kind == "simulator":
        from .simulator import SimulatorBackend

        return SimulatorBackend(config.scenario, seed=seed)
    from .remote import RemoteBackend

    return RemoteBackend(config)
