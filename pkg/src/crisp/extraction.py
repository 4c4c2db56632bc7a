"""Turn raw model completions into structured reasoning paths and answer clusters.

Everything in this module is a pure function: unparseable input degrades to a
null answer instead of raising, so extraction can run inside worker pools
without coordination.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

TASK_KINDS = ("math", "multiple_choice")

ANSWER_KINDS = ("numeric", "choice", "expression", "null")

_STEP_MARKER = re.compile(r"Step\s+\d+\s*:")
_ANSWER_MARKER = re.compile(r"(?:the\s+)?answers?\s+is\s*:?", re.IGNORECASE)
_CHOICE_TOKEN = re.compile(r"\b([A-Ha-h])\b")
_TEXTBF = re.compile(r"\\textbf\s*\{([^}]*)\}")
_LEADING_NUMBER = re.compile(r"[-+]?[\d,]*\.?\d+(?:\s*/\s*\d+)?(?:[eE][-+]?\d+)?")
_DIGIT_COMMA = re.compile(r"(?<=\d),(?=\d)")


@dataclass(frozen=True)
class FinalAnswer:
    """A canonicalized final answer; the clustering key for reasoning paths."""

    canonical: str
    kind: str

    def __post_init__(self):
        if self.kind not in ANSWER_KINDS:
            raise ValueError(f"unknown answer kind: {self.kind!r}")
        if self.kind == "null" and self.canonical != "":
            raise ValueError("null answers must have empty canonical form")
        if self.kind == "choice" and not (
            len(self.canonical) == 1 and self.canonical.isalpha() and self.canonical.isupper()
        ):
            raise ValueError(f"choice answers must be a single uppercase letter: {self.canonical!r}")

    @classmethod
    def null(cls) -> "FinalAnswer":
        return cls("", "null")

    @property
    def is_null(self) -> bool:
        return self.kind == "null"


@dataclass
class RawResponse:
    """One completion as returned by a generation backend.

    ``text`` may be empty (a degenerate completion is data, not an error).
    ``source_round`` is the iteration the completion was sampled in; 0 for
    single-shot strategies.
    """

    text: str
    token_count: int
    source_round: int = 0

    def __post_init__(self):
        if self.token_count < 0:
            raise ValueError("token_count must be >= 0")
        if self.source_round < 0:
            raise ValueError("source_round must be >= 0")


@dataclass(eq=False)
class ReasoningPath:
    """An ordered sequence of reasoning steps plus the extracted final answer.

    Identity (not content) equality: two paths with the same text are still
    distinct samples, and score maps key on the path object.
    """

    question_id: str
    steps: list
    answer: FinalAnswer
    token_count: int
    source_round: int = 0

    def __post_init__(self):
        if self.token_count < 0:
            raise ValueError("token_count must be >= 0")
        if self.source_round < 0:
            raise ValueError("source_round must be >= 0")

    @property
    def text(self) -> str:
        return "\n".join(self.steps)

    def describe(self) -> str:
        return f"path(question={self.question_id!r}, round={self.source_round}, answer={self.answer.canonical!r})"


@dataclass
class AnswerCluster:
    """All paths sharing one canonical (non-null) final answer."""

    answer: FinalAnswer
    members: list
    frequency: int = field(default=0)

    def __post_init__(self):
        if self.answer.is_null:
            raise ValueError("clusters cannot hold null answers")
        if not self.members:
            raise ValueError("clusters must be non-empty")
        if self.frequency == 0:
            self.frequency = len(self.members)
        if self.frequency != len(self.members):
            raise ValueError("frequency must equal the member count")
        for m in self.members:
            if m.answer != self.answer:
                raise ValueError(f"member answer {m.answer} does not match cluster answer {self.answer}")


def split_steps(text: str) -> list:
    """Split completion text into ordered step strings.

    Splits on explicit "Step <k>:" markers when present, otherwise falls back
    to newline-delimited non-empty lines. Non-empty text never yields an empty
    list (the whole text becomes a single step).
    """
    if not text:
        return []
    starts = [m.start() for m in _STEP_MARKER.finditer(text)]
    if not starts:
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        return lines if lines else [text]
    pieces = []
    if starts[0] > 0:
        head = text[: starts[0]].strip()
        if head:
            pieces.append(head)
    for i, s in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else len(text)
        piece = text[s:end].strip()
        if piece:
            pieces.append(piece)
    return pieces


def _last_boxed_payload(text: str) -> Optional[str]:
    idx = text.rfind("\\boxed")
    if idx == -1:
        return None
    open_brace = text.find("{", idx)
    if open_brace == -1:
        return None
    depth = 0
    for j in range(open_brace, len(text)):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                return text[open_brace + 1 : j]
    # unbalanced braces: take everything after the opening brace
    return text[open_brace + 1 :]


def _payload_after_last_marker(text: str) -> Optional[str]:
    last = None
    for m in _ANSWER_MARKER.finditer(text):
        last = m
    if last is None:
        return None
    rest = text[last.end() :]
    return rest.split("\n", 1)[0]


def _strip_math_decorations(s: str) -> str:
    s = s.strip()
    changed = True
    while changed and s:
        changed = False
        if s.startswith("$") and s.endswith("$") and len(s) > 1:
            s = s[1:-1].strip()
            changed = True
        if s.startswith("\\(") and s.endswith("\\)"):
            s = s[2:-2].strip()
            changed = True
        if s.endswith("."):
            s = s[:-1].strip()
            changed = True
    return s


def _leading_value(payload: str) -> str:
    """Reduce an "answer is" payload to its value: a leading number when one
    is present, otherwise the cleaned payload verbatim."""
    cleaned = _strip_math_decorations(payload)
    m = _LEADING_NUMBER.match(cleaned)
    if m and m.group(0):
        return m.group(0)
    return cleaned


def _try_fraction(s: str) -> Optional[Fraction]:
    s = _DIGIT_COMMA.sub("", s)
    s = s.replace(" ", "")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        return None


def _render_fraction(f: Fraction) -> str:
    num, den = f.numerator, f.denominator
    if den == 1:
        return str(num)
    d, twos, fives = den, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        # terminating decimal: render exactly, trailing zeros stripped
        k = max(twos, fives)
        scaled = abs(num) * 10**k // den
        digits = str(scaled).rjust(k + 1, "0")
        out = (digits[:-k] + "." + digits[-k:]).rstrip("0").rstrip(".")
        return ("-" + out) if num < 0 else out
    return f"{num}/{den}"


def normalize_answer(raw: str, task_kind: str = "math") -> FinalAnswer:
    """Canonicalize an extracted answer payload.

    Numeric strings are parsed exactly (rationals reduced, trailing zeros
    stripped, simple a/b fractions evaluated); choice letters are uppercased;
    anything else is kept verbatim with whitespace collapsed.
    """
    if task_kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind: {task_kind!r}")
    if raw is None:
        return FinalAnswer.null()
    if task_kind == "multiple_choice":
        cleaned = _TEXTBF.sub(r"\1", raw)
        cleaned = cleaned.strip().strip("()[]{}*_.: \t")
        if len(cleaned) == 1 and cleaned.isalpha():
            return FinalAnswer(cleaned.upper(), "choice")
        m = _CHOICE_TOKEN.search(cleaned)
        if m:
            return FinalAnswer(m.group(1).upper(), "choice")
        return FinalAnswer.null()
    s = _strip_math_decorations(raw)
    if not s:
        return FinalAnswer.null()
    frac = _try_fraction(s)
    if frac is not None:
        return FinalAnswer(_render_fraction(frac), "numeric")
    return FinalAnswer(" ".join(s.split()), "expression")


def extract_answer(text: str, task_kind: str = "math") -> FinalAnswer:
    """Extract and canonicalize the final answer committed by ``text``.

    The last answer marker wins: models sometimes restate intermediate
    results, and the final conclusion is the path's commitment. For math the
    last boxed expression takes precedence, then the last "answer is" value;
    for multiple choice, the last standalone option letter after the marker.
    Text with no recognizable marker yields a null answer.
    """
    if task_kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind: {task_kind!r}")
    if not text:
        return FinalAnswer.null()
    if task_kind == "math":
        payload = _last_boxed_payload(text)
        if payload is None:
            marker_payload = _payload_after_last_marker(text)
            if marker_payload is None:
                return FinalAnswer.null()
            payload = _leading_value(marker_payload)
        return normalize_answer(payload, "math")
    payload = _payload_after_last_marker(text)
    if payload is None:
        return FinalAnswer.null()
    return normalize_answer(payload, "multiple_choice")


def path_from_response(
    question_id: str,
    response: RawResponse,
    task_kind: str = "math",
    prefix: Optional[Sequence[str]] = None,
) -> ReasoningPath:
    """Assemble a ReasoningPath from a completion, re-attaching the prefix the
    completion was conditioned on (backends return only the continuation)."""
    steps = list(prefix) if prefix else []
    steps.extend(split_steps(response.text))
    answer = extract_answer("\n".join(steps), task_kind)
    return ReasoningPath(
        question_id=question_id,
        steps=steps,
        answer=answer,
        token_count=response.token_count,
        source_round=response.source_round,
    )


def cluster_paths(paths: Iterable[ReasoningPath]) -> list:
    """Group paths by canonical final answer.

    Null-answer paths never join a cluster (they still count toward the null
    difficulty proxy upstream). Output is ordered by descending frequency,
    then canonical answer ascending, so downstream tie-breaks are
    deterministic. Members keep generation order.
    """
    groups: dict = {}
    for p in paths:
        if p.answer.is_null:
            continue
        groups.setdefault(p.answer, []).append(p)
    clusters = [AnswerCluster(answer=a, members=ms) for a, ms in groups.items()]
    clusters.sort(key=lambda c: (-c.frequency, c.answer.canonical))
    return clusters
