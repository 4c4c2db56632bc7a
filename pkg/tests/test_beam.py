"""Step-level beam search."""

import pytest

from conftest import ScriptedBackend

from crisp.backends.simulator import SCENARIOS, SimulatorBackend
from crisp.strategies import ConfigError, SearchConfig, StrategyError, run_beam


def beam_config(**kw):
    base = dict(strategy="beam", beam_count=8, width=5, max_depth=5, rm_mode="prm")
    base.update(kw)
    return SearchConfig(**base)


class TestConfigValidation:
    def test_reference_defaults_accepted(self):
        beam_config().validate()

    def test_orm_mode_rejected(self):
        with pytest.raises(ConfigError, match="prm"):
            beam_config(rm_mode="orm").validate()


class TestRunBeam:
    def test_degenerate_greedy_single_path(self):
        backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=1)
        result = run_beam("q", beam_config(width=1, beam_count=1), backend, question_id="greedy")
        # width 1, beam 1: exactly one candidate per depth until completion
        assert all(len(r.added) == 1 for r in result.rounds)
        assert not result.chosen.answer.is_null

    def test_higher_step_score_survives(self):
        # two root steps; the 0.9 step must be the surviving beam
        texts = {
            0: ["Step 1: good start.", "Step 1: bad start."],
            1: ["Step 2: The answer is: \\boxed{1}", "Step 2: The answer is: \\boxed{2}"],
        }
        calls = {"i": 0}

        def script(request):
            batch = texts[calls["i"]]
            calls["i"] += 1
            return batch

        def step_scores(path):
            return [0.9 if "good" in s else 0.1 for s in path.steps]

        backend = ScriptedBackend(script, steps=step_scores)
        result = run_beam("q", beam_config(width=2, beam_count=1, max_depth=2), backend)
        assert result.chosen.steps[0] == "Step 1: good start."

    def test_completion_and_winner_by_aggregate(self):
        backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=3)
        result = run_beam("q", beam_config(), backend, question_id="full")
        assert result.rounds[-1].termination == "complete"
        assert not result.chosen.answer.is_null

    def test_incomplete_flagged_when_depth_too_small(self):
        # paths need 4 steps in this scenario; depth 2 cannot finish any beam
        backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=3)
        result = run_beam("q", beam_config(max_depth=2), backend, question_id="short")
        assert result.rounds[-1].termination == "incomplete"
        assert result.chosen.answer.is_null

    def test_deterministic_rerun(self):
        def once():
            backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=5)
            result = run_beam("q", beam_config(), backend, question_id="det")
            return result.chosen.answer.canonical, result.total_tokens

        assert once() == once()

    def test_rejects_orm_mode_at_runtime(self):
        backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=5)
        with pytest.raises(StrategyError, match="prm"):
            run_beam("q", beam_config(rm_mode="orm"), backend)

    def test_beam_width_expansion_counts(self):
        backend = SimulatorBackend(SCENARIOS["noisy-moderate"], seed=7)
        config = beam_config(width=3, beam_count=2, max_depth=4)
        result = run_beam("q", config, backend, question_id="counts")
        assert len(result.rounds[0].added) == 3  # root expands width candidates
        for trace in result.rounds[1:]:
            assert len(trace.added) <= 3 * 2  # width x live beams
