"""Deterministic seeded simulator of generation and reward scoring.

The simulator draws each completion's final answer from a fixed distribution
and writes a synthetic step-by-step derivation committing to it. Reward scores
follow the normative rule

    raw = clamp(mu_class + boost * [answer wrong] * max(0, 1 - (freq - 1) / 4) + eps, 0, 1)

where mu_class is the correct/wrong mean, freq is the answer's frequency in
the question's pool of completions generated so far, and eps is Gaussian noise
derived per path. A frequency-1 wrong answer therefore receives the full
rarity boost: the mechanism that makes reward argmax chase rare negatives.

Determinism contract:
  - generation streams are per-question, seeded by (run seed, question id),
    so identical request sequences reproduce identical responses byte-for-byte
    and parallel questions never perturb each other;
  - scoring noise is a pure function of (run seed, question id, path text),
    so re-scoring the same path always returns the same value.

Cost model: every completion bills steps_per_path * tokens_per_step tokens,
including prefix-conditioned and single-step completions, which keeps token
accounting exactly checkable (total = paths * steps_per_path * tokens_per_step).
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..extraction import RawResponse, ReasoningPath, extract_answer, normalize_answer
from ..rewards import RewardSignal
from ..seeding import stable_seed
from .base import Backend, GenerationRequest, prefix_for_index

_COMMIT = re.compile(r"keeps candidate (.+?) in play")


@dataclass(frozen=True)
class SimulatorScenario:
    """Answer distribution and reward behavior for one simulated world.

    ``answer_space`` maps answer strings to sampling probabilities;
    ``gold_answer`` marks exactly one of them as correct. ``rarity_boost`` is
    the score bonus a frequency-1 wrong answer receives (decaying to zero at
    frequency 5), ``noise_sigma`` the per-path Gaussian score noise.
    """

    answer_space: tuple
    gold_answer: str
    correct_reward_mean: float = 0.6
    wrong_reward_mean: float = 0.4
    rarity_boost: float = 0.0
    noise_sigma: float = 0.0
    steps_per_path: int = 3
    tokens_per_step: int = 20

    def __post_init__(self):
        answers = [a for a, _ in self.answer_space]
        if len(set(answers)) != len(answers):
            raise ValueError("answer_space entries must be distinct")
        if self.gold_answer not in answers:
            raise ValueError("gold_answer must appear in answer_space")
        total = sum(p for _, p in self.answer_space)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"answer probabilities must sum to 1 (got {total})")
        for name, value in (("correct_reward_mean", self.correct_reward_mean),
                            ("wrong_reward_mean", self.wrong_reward_mean)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.rarity_boost < 0:
            raise ValueError("rarity_boost must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.steps_per_path < 1 or self.tokens_per_step < 1:
            raise ValueError("steps_per_path and tokens_per_step must be positive")

    @property
    def answers(self) -> list:
        return [a for a, _ in self.answer_space]

    @property
    def probabilities(self) -> list:
        return [p for _, p in self.answer_space]

    def to_dict(self) -> dict:
        return {
            "answer_space": [[a, p] for a, p in self.answer_space],
            "gold_answer": self.gold_answer,
            "correct_reward_mean": self.correct_reward_mean,
            "wrong_reward_mean": self.wrong_reward_mean,
            "rarity_boost": self.rarity_boost,
            "noise_sigma": self.noise_sigma,
            "steps_per_path": self.steps_per_path,
            "tokens_per_step": self.tokens_per_step,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulatorScenario":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        kwargs = dict(data)
        kwargs["answer_space"] = tuple((str(a), float(p)) for a, p in data["answer_space"])
        return cls(**kwargs)


# Ready-made worlds used by the CLI and the test suite.
SCENARIOS = {
    # Gold at 0.6 over five answers; noise-free reward with a strong rarity
    # boost, so reward argmax reliably picks a rare wrong answer while
    # cluster-summed scores recover the gold one.
    "adversarial-longtail": SimulatorScenario(
        answer_space=(("42", 0.6), ("17", 0.1), ("23", 0.1), ("56", 0.1), ("71", 0.1)),
        gold_answer="42",
        correct_reward_mean=0.6,
        wrong_reward_mean=0.4,
        rarity_boost=0.5,
        noise_sigma=0.0,
        steps_per_path=3,
        tokens_per_step=20,
    ),
    # Near-consensus sampling: most questions collapse to a single cluster.
    "easy-consensus": SimulatorScenario(
        answer_space=(("7", 0.97), ("8", 0.01), ("9", 0.01), ("10", 0.01)),
        gold_answer="7",
        correct_reward_mean=0.7,
        wrong_reward_mean=0.4,
        rarity_boost=0.2,
        noise_sigma=0.0,
        steps_per_path=3,
        tokens_per_step=20,
    ),
    # Mild noise and boost; useful for smoke runs that should look lifelike.
    "noisy-moderate": SimulatorScenario(
        answer_space=(("12", 0.5), ("15", 0.2), ("18", 0.15), ("21", 0.15)),
        gold_answer="12",
        correct_reward_mean=0.65,
        wrong_reward_mean=0.45,
        rarity_boost=0.25,
        noise_sigma=0.05,
        steps_per_path=4,
        tokens_per_step=25,
    ),
    # Option-letter world for multiple choice runs.
    "choice-longtail": SimulatorScenario(
        answer_space=(("B", 0.6), ("A", 0.1), ("C", 0.1), ("D", 0.1), ("E", 0.1)),
        gold_answer="B",
        correct_reward_mean=0.6,
        wrong_reward_mean=0.4,
        rarity_boost=0.5,
        noise_sigma=0.0,
        steps_per_path=3,
        tokens_per_step=20,
    ),
}


class SimulatorBackend(Backend):
    """Seeded, stateful-per-question stand-in for a policy model + reward model."""

    def __init__(self, scenario: SimulatorScenario, seed: int = 0):
        self.scenario = scenario
        self.seed = seed
        self._streams: dict = {}
        self._pools: dict = {}
        self._lock = threading.Lock()

    # -- generation ---------------------------------------------------------

    def _stream(self, question_id: str) -> np.random.Generator:
        with self._lock:
            if question_id not in self._streams:
                self._streams[question_id] = np.random.default_rng(stable_seed(self.seed, question_id))
                self._pools[question_id] = {}
            return self._streams[question_id]

    def _canonical(self, answer: str, task_kind: str) -> str:
        canon = normalize_answer(answer, task_kind)
        if canon.is_null:
            raise ValueError(
                f"scenario answer {answer!r} is not usable for task {task_kind!r} "
                f"(multiple choice needs option letters, math needs values)"
            )
        if canon.canonical != answer:
            raise ValueError(
                f"scenario answer {answer!r} is not canonical for task {task_kind!r}; "
                f"use its canonical form {canon.canonical!r}"
            )
        return canon.canonical

    def _committed_answer(self, prefix_steps) -> Optional[str]:
        for step in reversed(list(prefix_steps)):
            found = extract_answer(step, "math")
            if not found.is_null:
                return found.canonical
            m = _COMMIT.search(step)
            if m:
                return m.group(1)
        return None

    def _step_text(self, answer: str, branch: int, k: int, task_kind: str) -> str:
        if k < self.scenario.steps_per_path:
            return f"Step {k}: branch {branch} keeps candidate {answer} in play."
        if task_kind == "multiple_choice":
            return f"Step {k}: The answer is: {answer}"
        return f"Step {k}: The answer is: \\boxed{{{answer}}}"

    def generate(self, request: GenerationRequest) -> list:
        qid = request.effective_question_id
        rng = self._stream(qid)
        scenario = self.scenario
        n = request.n
        drawn = rng.choice(len(scenario.answers), size=n, p=scenario.probabilities)
        branches = rng.integers(0, 1_000_000, size=n)
        per_path_tokens = scenario.steps_per_path * scenario.tokens_per_step
        responses = []
        for i in range(n):
            prefix = prefix_for_index(request.prefixes, i) if request.prefixes else []
            answer = None
            if prefix:
                answer = self._committed_answer(prefix)
            if answer is None:
                answer = self._canonical(scenario.answers[int(drawn[i])], request.task_kind)
            start = len(prefix) + 1
            if request.step_mode:
                step_indices = range(start, min(start, scenario.steps_per_path) + 1)
            else:
                step_indices = range(start, scenario.steps_per_path + 1)
            steps = [self._step_text(answer, int(branches[i]), k, request.task_kind) for k in step_indices]
            text = "\n".join(steps)
            responses.append(RawResponse(text=text, token_count=per_path_tokens,
                                         source_round=request.round_index))
            if not request.step_mode:
                with self._lock:
                    pool = self._pools.setdefault(qid, {})
                    pool[answer] = pool.get(answer, 0) + 1
        return responses

    # -- scoring ------------------------------------------------------------

    def _base_score(self, path: ReasoningPath) -> float:
        scenario = self.scenario
        answer = None
        if not path.answer.is_null:
            answer = path.answer.canonical
        if answer is None:
            answer = self._committed_answer(path.steps)
        is_gold = answer == scenario.gold_answer
        mu = scenario.correct_reward_mean if is_gold else scenario.wrong_reward_mean
        if is_gold or scenario.rarity_boost == 0:
            return mu
        with self._lock:
            pool = self._pools.get(path.question_id, {})
            freq = max(1, pool.get(answer, 0))
        decay = max(0.0, 1.0 - (freq - 1) / 4.0)
        return mu + scenario.rarity_boost * decay

    def _noise(self, path: ReasoningPath, salt: str = "") -> float:
        if self.scenario.noise_sigma == 0:
            return 0.0
        rng = np.random.default_rng(stable_seed(self.seed, path.question_id, "eps", salt, path.text))
        return float(rng.normal(0.0, self.scenario.noise_sigma))

    def score_outcome(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        raw = self._base_score(path) + self._noise(path)
        return RewardSignal(raw=min(1.0, max(0.0, raw)))

    def score_steps(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        base = self._base_score(path)
        scores = []
        for i in range(len(path.steps)):
            raw = base + self._noise(path, salt=f"step{i}")
            scores.append(min(1.0, max(0.0, raw)))
        return RewardSignal(raw=scores[-1] if scores else base, step_scores=scores)
