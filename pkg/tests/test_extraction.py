"""Extraction, canonicalization, and clustering."""

import numpy as np
import pytest

from crisp.extraction import (
    FinalAnswer,
    RawResponse,
    cluster_paths,
    extract_answer,
    normalize_answer,
    path_from_response,
    split_steps,
)


def make_path(answer_text, qid="q", tokens=10, round_=0, task="math"):
    return path_from_response(qid, RawResponse(answer_text, tokens, round_), task)


class TestSplitSteps:
    def test_marker_split(self):
        assert split_steps("Step 1: A.\nStep 2: B.") == ["Step 1: A.", "Step 2: B."]

    def test_fallback_single_line(self):
        assert split_steps("just one line") == ["just one line"]

    def test_empty(self):
        assert split_steps("") == []

    def test_fallback_multiline(self):
        assert split_steps("first\n\nsecond\n") == ["first", "second"]

    def test_preamble_before_first_marker(self):
        steps = split_steps("Let me think.\nStep 1: A.\nStep 2: B.")
        assert steps == ["Let me think.", "Step 1: A.", "Step 2: B."]

    def test_inline_markers(self):
        assert split_steps("Step 1: x. Step 2: y.") == ["Step 1: x.", "Step 2: y."]

    def test_whitespace_only_text_is_one_step(self):
        assert split_steps("   ") == ["   "]

    def test_reconstruction_modulo_whitespace(self):
        text = "Step 1: A b c.\nStep 2: D e.\nStep 3: The answer is: \\boxed{4}"
        joined = "\n".join(split_steps(text))
        assert " ".join(joined.split()) == " ".join(text.split())


class TestExtractAnswer:
    def test_boxed(self):
        assert extract_answer("Step 4: The answer is: \\boxed{32}") == FinalAnswer("32", "numeric")

    def test_choice_marker(self):
        got = extract_answer("Step 3: The answer is: C", "multiple_choice")
        assert got == FinalAnswer("C", "choice")

    def test_no_marker_is_null(self):
        assert extract_answer("I cannot solve this.").is_null

    def test_last_boxed_wins(self):
        text = "Step 1: maybe \\boxed{7}.\nStep 2: The answer is: \\boxed{9}"
        assert extract_answer(text).canonical == "9"

    def test_nested_braces_in_boxed(self):
        text = "Step 5: The answer is: \\boxed{25 + 2\\sqrt{159}}"
        got = extract_answer(text)
        assert got == FinalAnswer("25 + 2\\sqrt{159}", "expression")

    def test_marker_without_boxed(self):
        assert extract_answer("So the answer is: 105.").canonical == "105"

    def test_marker_with_units(self):
        assert extract_answer("The answer is 32 hectares") == FinalAnswer("32", "numeric")

    def test_textbf_choice(self):
        got = extract_answer("Step 3: The answer is: \\textbf{C}", "multiple_choice")
        assert got == FinalAnswer("C", "choice")

    def test_parenthesized_choice(self):
        got = extract_answer("The answer is: (B) radio", "multiple_choice")
        assert got == FinalAnswer("B", "choice")

    def test_last_marker_wins(self):
        text = "The answer is: A\nWait.\nThe answer is: D"
        assert extract_answer(text, "multiple_choice").canonical == "D"

    def test_empty_text(self):
        assert extract_answer("", "math").is_null
        assert extract_answer("", "multiple_choice").is_null

    def test_unknown_task_kind(self):
        with pytest.raises(ValueError):
            extract_answer("x", "trivia")


class TestNormalizeAnswer:
    def test_numeric_identity(self):
        assert normalize_answer("32.0") == normalize_answer("32")

    def test_fraction_equals_decimal(self):
        # independent oracle: both render the same exact rational
        from fractions import Fraction

        assert Fraction("1/2") == Fraction("0.5")
        assert normalize_answer("1/2") == normalize_answer("0.5")

    def test_choice_case_whitespace(self):
        assert normalize_answer(" c ", "multiple_choice") == FinalAnswer("C", "choice")

    def test_trailing_zeros_stripped(self):
        assert normalize_answer("2.50").canonical == "2.5"

    def test_comma_separators(self):
        assert normalize_answer("1,234").canonical == "1234"

    def test_non_terminating_fraction_kept_reduced(self):
        assert normalize_answer("2/6").canonical == "1/3"

    def test_expression_whitespace_collapsed(self):
        got = normalize_answer("25 +  2\\sqrt{159}")
        assert got == FinalAnswer("25 + 2\\sqrt{159}", "expression")

    def test_negative(self):
        assert normalize_answer("-50").canonical == "-50"
        assert normalize_answer("-0.5").canonical == "-0.5"

    def test_empty_is_null(self):
        assert normalize_answer("  ").is_null

    def test_idempotence_grid(self):
        samples = ["32", "32.0", "1/2", "0.5", "2/6", "-7", "3.14", "x + 1",
                   "25 + 2\\sqrt{159}", "1,234", "1e3", "0", "-0"]
        for s in samples:
            once = normalize_answer(s)
            again = normalize_answer(once.canonical) if not once.is_null else once
            assert once == again, s


class TestClusterPaths:
    def test_shared_answer_clusters_together(self):
        paths = [make_path(f"The answer is: \\boxed{{{a}}}") for a in ("-50", "50", "-50")]
        clusters = cluster_paths(paths)
        assert len(clusters) == 2
        big = next(c for c in clusters if c.answer.canonical == "-50")
        assert big.members == [paths[0], paths[2]]

    def test_empty(self):
        assert cluster_paths([]) == []

    def test_single_answer(self):
        paths = [make_path("The answer is: \\boxed{5}") for _ in range(4)]
        clusters = cluster_paths(paths)
        assert len(clusters) == 1 and clusters[0].frequency == 4

    def test_null_excluded(self):
        paths = [make_path("no marker here"), make_path("The answer is: \\boxed{1}")]
        clusters = cluster_paths(paths)
        assert len(clusters) == 1 and clusters[0].frequency == 1

    def test_ordering_frequency_then_answer(self):
        texts = ["\\boxed{2}", "\\boxed{2}", "\\boxed{1}", "\\boxed{3}"]
        clusters = cluster_paths([make_path(t) for t in texts])
        assert [c.answer.canonical for c in clusters] == ["2", "1", "3"]

    def test_partition_property(self):
        rng = np.random.default_rng(42)
        answers = ["1", "2", "3", None]
        for _ in range(50):
            picks = rng.integers(0, len(answers), size=rng.integers(1, 20))
            paths = []
            for k in picks:
                a = answers[k]
                text = f"The answer is: \\boxed{{{a}}}" if a else "hmm"
                paths.append(make_path(text))
            clusters = cluster_paths(paths)
            non_null = [p for p in paths if not p.answer.is_null]
            assert sum(c.frequency for c in clusters) == len(non_null)
            seen = set()
            for c in clusters:
                for m in c.members:
                    assert id(m) not in seen
                    seen.add(id(m))

    def test_cluster_equivalence_biconditional(self):
        rng = np.random.default_rng(7)
        paths = [
            make_path(f"The answer is: \\boxed{{{rng.integers(0, 4)}}}") for _ in range(30)
        ]
        clusters = cluster_paths(paths)
        membership = {}
        for i, c in enumerate(clusters):
            for m in c.members:
                membership[id(m)] = i
        for p1 in paths:
            for p2 in paths:
                same_cluster = membership[id(p1)] == membership[id(p2)]
                assert same_cluster == (p1.answer == p2.answer)


class TestTypes:
    def test_raw_response_accepts_empty_text(self):
        assert RawResponse("", 0).text == ""

    def test_raw_response_rejects_negative_tokens(self):
        with pytest.raises(ValueError):
            RawResponse("x", -1)

    def test_final_answer_null_shape(self):
        with pytest.raises(ValueError):
            FinalAnswer("x", "null")

    def test_choice_must_be_single_upper(self):
        with pytest.raises(ValueError):
            FinalAnswer("ab", "choice")

    def test_path_identity_semantics(self):
        a = make_path("The answer is: \\boxed{1}")
        b = make_path("The answer is: \\boxed{1}")
        assert a != b and len({a, b}) == 2

    def test_path_from_response_reattaches_prefix(self):
        prefix = ["Step 1: setup."]
        resp = RawResponse("Step 2: The answer is: \\boxed{8}", 30, source_round=2)
        path = path_from_response("q", resp, "math", prefix)
        assert path.steps[0] == "Step 1: setup."
        assert path.answer.canonical == "8"
        assert path.source_round == 2

    def test_prefix_carrying_marker_still_extracts(self):
        prefix = ["Step 1: The answer is: \\boxed{8}"]
        resp = RawResponse("", 30)
        path = path_from_response("q", resp, "math", prefix)
        assert path.answer.canonical == "8"
