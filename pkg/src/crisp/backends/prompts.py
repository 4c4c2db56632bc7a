"""Few-shot prompt construction from the bundled templates."""

from __future__ import annotations

import string
from importlib import resources
from typing import Optional, Sequence

TEMPLATES = ("gsm8k", "math", "olympiad", "csqa", "siqa", "logiqa")

_DEFAULT_TEMPLATE = {"math": "gsm8k", "multiple_choice": "csqa"}

_cache: dict = {}


def load_template(name: str) -> str:
    if name not in TEMPLATES:
        raise ValueError(f"unknown prompt template: {name!r} (expected one of {TEMPLATES})")
    if name not in _cache:
        ref = resources.files("crisp").joinpath("data", "prompts", f"{name}.txt")
        _cache[name] = ref.read_text(encoding="utf-8")
    return _cache[name]


def render_options(options: Sequence[str]) -> str:
    """Label options (A), (B), ... on one line, matching the template exemplars."""
    if len(options) > len(string.ascii_uppercase):
        raise ValueError("too many options to label")
    return " ".join(f"({string.ascii_uppercase[i]}) {opt}" for i, opt in enumerate(options))


def build_prompt(
    question: str,
    task_kind: str = "math",
    prefix: Optional[Sequence[str]] = None,
    options: Optional[Sequence[str]] = None,
    template: Optional[str] = None,
) -> str:
    """Build the few-shot prompt for a question, optionally continuing a prefix.

    Prefix steps are appended verbatim after the final "# Reasoning:" line so
    the model continues from them.
    """
    if task_kind not in _DEFAULT_TEMPLATE:
        raise ValueError(f"unknown task kind: {task_kind!r}")
    name = template or _DEFAULT_TEMPLATE[task_kind]
    body = load_template(name)
    if "{options}" in body:
        if options is None:
            raise ValueError(f"template {name!r} requires options")
        body = body.replace("{options}", render_options(options))
    body = body.replace("{question}", question)
    if prefix:
        body = body + "".join(step + "\n" for step in prefix)
    return body
