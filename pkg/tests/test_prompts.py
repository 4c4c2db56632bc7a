"""Prompt construction and the bundled few-shot templates.

The exemplar check walks every template: extracting the answer from each
exemplar's reasoning block must return exactly the boxed/lettered answer the
template prints.
"""

import re

import pytest

from crisp.backends.prompts import TEMPLATES, build_prompt, load_template, render_options
from crisp.extraction import extract_answer

EXPECTED_EXEMPLAR_ANSWERS = {
    "gsm8k": ["32", "40", "120"],
    "math": ["37", "105", "25 + 2\\sqrt{159}"],
    "olympiad": ["1", "14", "11"],
    "csqa": ["A", "D", "C"],
    "siqa": ["C", "B", "C"],
    "logiqa": ["A"],
}

MC_TEMPLATES = ("csqa", "siqa", "logiqa")


def exemplar_reasonings(template_text):
    """The reasoning block of each few-shot exemplar (placeholder block excluded)."""
    blocks = re.split(r"# Reasoning:\n", template_text)[1:]
    out = []
    for block in blocks:
        body = block.split("# Question:")[0].strip()
        if body:
            out.append(body)
    return out


class TestTemplates:
    @pytest.mark.parametrize("name", TEMPLATES)
    def test_exemplar_answers_extract_exactly(self, name):
        task = "multiple_choice" if name in MC_TEMPLATES else "math"
        reasonings = exemplar_reasonings(load_template(name))
        assert len(reasonings) == len(EXPECTED_EXEMPLAR_ANSWERS[name])
        for body, expected in zip(reasonings, EXPECTED_EXEMPLAR_ANSWERS[name]):
            assert extract_answer(body, task).canonical == expected

    def test_unknown_template(self):
        with pytest.raises(ValueError):
            load_template("mystery")


class TestBuildPrompt:
    def test_math_prompt_ends_with_reasoning_header(self):
        prompt = build_prompt("What is 2+2?", "math")
        assert prompt.endswith("# Reasoning:\n")
        assert "What is 2+2?" in prompt

    def test_prefix_appended_verbatim(self):
        prompt = build_prompt("Q?", "math", prefix=["Step 1: x=2."])
        assert prompt.endswith("# Reasoning:\nStep 1: x=2.\n")

    def test_multi_step_prefix(self):
        prompt = build_prompt("Q?", "math", prefix=["Step 1: a.", "Step 2: b."])
        assert prompt.endswith("Step 1: a.\nStep 2: b.\n")

    def test_options_block_rendered(self):
        prompt = build_prompt(
            "Pick one.", "multiple_choice",
            options=["atlas", "mexico", "countryside"],
        )
        assert "# Options:\n(A) atlas (B) mexico (C) countryside" in prompt
        idx_options = prompt.rindex("# Options:")
        idx_reasoning = prompt.rindex("# Reasoning:")
        assert idx_options < idx_reasoning

    def test_multiple_choice_requires_options(self):
        with pytest.raises(ValueError, match="options"):
            build_prompt("Pick one.", "multiple_choice")

    def test_unknown_task_kind(self):
        with pytest.raises(ValueError):
            build_prompt("Q?", "essay")

    def test_template_override(self):
        prompt = build_prompt("Q?", "math", template="olympiad")
        assert "Compute $n$" in prompt

    def test_render_options_labels(self):
        assert render_options(["x", "y"]) == "(A) x (B) y"
