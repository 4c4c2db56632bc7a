"""HTTP client for OpenAI-compatible completion endpoints and reward services.

Generation: POST {model, prompt, n, temperature, max_tokens, seed?} to the
completions endpoint; the response must carry a list of n text choices and a
usage block with completion token counts. Reward scoring: POST
{question, steps: [...]} to the reward endpoint, which answers either
{"score": x} (outcome mode) or {"step_scores": [...]} (process mode).

Transport failures and 5xx responses are retried up to 3 times with
exponential backoff; 4xx responses are never retried. Fewer choices than
requested is an error, never a silent truncation.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import requests

from ..extraction import RawResponse, ReasoningPath
from ..rewards import RewardSignal
from .base import (
    Backend,
    BackendConfig,
    BackendError,
    GenerationRequest,
    ResponseDecodeError,
    TransportError,
)
from .prompts import build_prompt

log = logging.getLogger(__name__)

MAX_RETRIES = 3


class RemoteBackend(Backend):
    def __init__(self, config: BackendConfig):
        config.validate()
        self.config = config
        self._session = requests.Session()
        if config.api_key:
            self._session.headers["Authorization"] = f"Bearer {config.api_key}"
        self._session.headers["Content-Type"] = "application/json"

    def close(self):
        self._session.close()

    # -- transport ----------------------------------------------------------

    def _post_json(self, url: str, payload: dict) -> dict:
        last_exc: Optional[Exception] = None
        attempts = 0
        for attempt in range(MAX_RETRIES + 1):
            attempts = attempt + 1
            if attempt > 0:
                delay = self.config.retry_backoff * (2 ** (attempt - 1))
                log.debug("retrying %s in %.2fs (attempt %d)", url, delay, attempts)
                time.sleep(delay)
            try:
                resp = self._session.post(url, json=payload, timeout=self.config.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                continue
            if 400 <= resp.status_code < 500:
                raise BackendError(f"endpoint rejected request ({resp.status_code}): {resp.text[:200]}")
            if resp.status_code >= 500:
                last_exc = BackendError(f"server error {resp.status_code}")
                continue
            try:
                return resp.json()
            except ValueError as exc:
                raise ResponseDecodeError(f"endpoint returned non-JSON body: {exc}") from exc
        raise TransportError(
            f"request to {url} failed after {attempts} attempts: {last_exc}",
            attempts=attempts,
            cause=last_exc,
        )

    # -- generation ---------------------------------------------------------

    def _completion_payload(self, request: GenerationRequest, prompt: str, n: int) -> dict:
        payload = {
            "model": self.config.model,
            "prompt": prompt,
            "n": n,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed:
            payload["seed"] = request.seed
        if request.step_mode:
            payload["stop"] = ["\nStep"]
        return payload

    def _decode_choices(self, body: dict, n: int) -> list:
        choices = body.get("choices")
        if not isinstance(choices, list):
            raise ResponseDecodeError("response has no 'choices' list")
        if len(choices) < n:
            raise BackendError(f"endpoint returned {len(choices)} completions, expected {n}")
        texts = []
        for choice in choices[:n]:
            text = choice.get("text")
            if text is None:
                raise ResponseDecodeError("choice without a 'text' field")
            texts.append(text)
        usage = body.get("usage") or {}
        total_tokens = usage.get("completion_tokens")
        if total_tokens is None:
            raise ResponseDecodeError("response usage block lacks 'completion_tokens'")
        per, extra = divmod(int(total_tokens), n)
        counts = [per + (1 if i < extra else 0) for i in range(n)]
        return list(zip(texts, counts))

    def _generate_for_prompt(self, request: GenerationRequest, prompt: str, n: int) -> list:
        body = self._post_json(self.config.endpoint, self._completion_payload(request, prompt, n))
        return self._decode_choices(body, n)

    def generate(self, request: GenerationRequest) -> list:
        template = request.template or self.config.template
        if not request.prefixes:
            prompt = build_prompt(request.question, request.task_kind,
                                  options=request.options, template=template)
            pairs = self._generate_for_prompt(request, prompt, request.n)
            out = []
            for text, tokens in pairs:
                if request.step_mode:
                    text = _first_step(text)
                out.append(RawResponse(text=text, token_count=tokens, source_round=request.round_index))
            return out

        # Round-robin across prefixes: completion i continues prefixes[i % P].
        n_prefixes = len(request.prefixes)
        counts = [request.n // n_prefixes + (1 if j < request.n % n_prefixes else 0)
                  for j in range(n_prefixes)]
        jobs = []
        for j, prefix in enumerate(request.prefixes):
            if counts[j] == 0:
                continue
            prompt = build_prompt(request.question, request.task_kind, prefix=prefix,
                                  options=request.options, template=template)
            jobs.append((j, prompt, counts[j]))
        with ThreadPoolExecutor(max_workers=self.config.max_parallel) as pool:
            futures = [pool.submit(self._generate_for_prompt, request, prompt, n) for _, prompt, n in jobs]
            per_prefix = {j: fut.result() for (j, _, _), fut in zip(jobs, futures)}
        out = []
        cursor = {j: 0 for j, _, _ in jobs}
        for i in range(request.n):
            j = i % n_prefixes
            text, tokens = per_prefix[j][cursor[j]]
            cursor[j] += 1
            if request.step_mode:
                text = _first_step(text)
            out.append(RawResponse(text=text, token_count=tokens, source_round=request.round_index))
        return out

    # -- scoring ------------------------------------------------------------

    def _reward_request(self, path: ReasoningPath, question: Optional[str]) -> dict:
        if not self.config.reward_endpoint:
            raise BackendError("no reward endpoint configured")
        if question is None:
            raise BackendError("remote reward scoring needs the question text")
        return {"question": question, "steps": list(path.steps)}

    def score_outcome(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        body = self._post_json(self.config.reward_endpoint, self._reward_request(path, question))
        if "score" not in body:
            raise ResponseDecodeError("reward endpoint did not return a 'score' field")
        return RewardSignal(raw=float(body["score"]))

    def score_steps(self, path: ReasoningPath, question: Optional[str] = None) -> RewardSignal:
        body = self._post_json(self.config.reward_endpoint, self._reward_request(path, question))
        scores = body.get("step_scores")
        if not isinstance(scores, list) or not scores:
            raise ResponseDecodeError("reward endpoint did not return a 'step_scores' list")
        scores = [float(s) for s in scores]
        return RewardSignal(raw=scores[-1], step_scores=scores)

    def score_paths(self, paths: Sequence[ReasoningPath], mode: str = "outcome",
                    question: Optional[str] = None) -> list:
        """Score paths concurrently (bounded by max_parallel), results in input order."""
        scorer = self.score_outcome if mode == "outcome" else self.score_steps
        if mode not in ("outcome", "steps"):
            raise ValueError(f"unknown scoring mode: {mode!r}")
        if len(paths) <= 1 or self.config.max_parallel <= 1:
            return [scorer(p, question=question) for p in paths]
        with ThreadPoolExecutor(max_workers=self.config.max_parallel) as pool:
            futures = [pool.submit(scorer, p, question=question) for p in paths]
            return [f.result() for f in futures]


def _first_step(text: str) -> str:
    from ..extraction import split_steps

    steps = split_steps(text)
    return steps[0] if steps else text
