"""Diagnostic statistics over runs: difficulty binning and proxies, selection
transition counts, long-tail histograms of top-scored negatives, wrong-answer
entropy, and compute-return points.

The core operations take distilled inputs (paths, flags, frequencies); the
record-level helpers at the bottom pull those inputs out of result-file
records so the CLI can compute every statistic offline.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .extraction import FinalAnswer, ReasoningPath

log = logging.getLogger(__name__)

# Pass-rate cut points for the five difficulty levels. The endpoints (<= 1 of
# 10 is level 5, >= 9 of 10 is level 1) are fixed; the interior bins are
# contiguous near-quantiles.
_LEVEL_CUTS = ((0.15, 5), (0.35, 4), (0.65, 3), (0.85, 2))


def estimate_difficulty(correct_count: int, sample_count: int = 10) -> int:
    """Bin a question's pass rate into difficulty levels 1 (easiest) to 5 (hardest)."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    if not 0 <= correct_count <= sample_count:
        raise ValueError(f"correct_count must lie in [0, {sample_count}]: got {correct_count}")
    rate = correct_count / sample_count
    for cut, level in _LEVEL_CUTS:
        if rate <= cut:
            return level
    return 1


def difficulty_proxies(paths: Sequence[ReasoningPath]) -> dict:
    """Ground-truth-free difficulty signals for one question's sample set:
    distinct answer count, mean token length, and null-answer count."""
    if not paths:
        raise ValueError("difficulty proxies need at least one path")
    answers = {p.answer.canonical for p in paths if not p.answer.is_null}
    nulls = sum(1 for p in paths if p.answer.is_null)
    mean_tokens = sum(p.token_count for p in paths) / len(paths)
    return {"count": len(answers), "length": mean_tokens, "null": nulls}


def transition_count(correct_flags: Sequence[bool]) -> int:
    """How many times a selection timeline flips from correct to incorrect."""
    return sum(1 for a, b in zip(correct_flags, correct_flags[1:]) if a and not b)


def longtail_histogram(top_negative_frequencies: Iterable[int]) -> dict:
    """Histogram of the pool frequency of each question's highest-scored
    incorrect answer."""
    return dict(Counter(top_negative_frequencies))


def incorrect_answer_entropy(paths: Sequence[ReasoningPath],
                             gold: Union[FinalAnswer, str]) -> float:
    """Shannon entropy (bits) of the distribution over distinct incorrect answers."""
    gold_canonical = gold.canonical if isinstance(gold, FinalAnswer) else gold
    counts = Counter(
        p.answer.canonical
        for p in paths
        if not p.answer.is_null and p.answer.canonical != gold_canonical
    )
    if not counts:
        raise ValueError("undefined entropy: no incorrect answers")
    return entropy_bits(counts.values())


def entropy_bits(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts)


def compute_return_points(records: Sequence[dict]) -> list:
    """One (mean wall time, accuracy) point per strategy/config group."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec["strategy"], rec["config_digest"]), []).append(rec)
    points = []
    for (strategy, digest), recs in sorted(groups.items()):
        valid = [r for r in recs if not r.get("failed")]
        if not valid:
            log.warning("skipping %s/%s: no successful records", strategy, digest)
            continue
        points.append({
            "strategy": strategy,
            "config_digest": digest,
            "mean_wall_time": sum(r["wall_time"] for r in valid) / len(valid),
            "accuracy": sum(1 for r in valid if r["correct"]) / len(recs),
            "questions": len(recs),
        })
    return points


# -- selection timelines ----------------------------------------------------

def selection_timeline(answers: Sequence[Optional[str]], raws: Sequence[Optional[float]],
                       gold_canonical: str, method: str = "rm") -> list:
    """Correctness of the running selection after each successive sample.

    method="rm" replays a reward argmax (best-of-n); method="sc" replays a
    majority vote with earliest-first tie-breaking. Samples with no extracted
    answer never become the selection.
    """
    if method not in ("rm", "sc"):
        raise ValueError(f"unknown timeline method: {method!r}")
    flags = []
    counts: dict = {}
    first_seen: dict = {}
    best_idx = None
    for i, answer in enumerate(answers):
        if answer is not None:
            counts[answer] = counts.get(answer, 0) + 1
            first_seen.setdefault(answer, i)
            if method == "rm" and raws[i] is not None:
                if best_idx is None or raws[i] > raws[best_idx]:
                    best_idx = i
        if method == "rm":
            current = answers[best_idx] if best_idx is not None else None
        else:
            current = min(counts, key=lambda a: (-counts[a], first_seen[a])) if counts else None
        flags.append(current == gold_canonical)
    return flags


def top_negative_frequency(answers: Sequence[Optional[str]], raws: Sequence[Optional[float]],
                           gold_canonical: str) -> Optional[int]:
    """Pool frequency of the highest-scored incorrect answer, or None when
    every extracted answer is correct (such questions are skipped upstream)."""
    counts = Counter(a for a in answers if a is not None)
    best_answer = None
    best_score = float("-inf")
    for answer, raw in zip(answers, raws):
        if answer is None or answer == gold_canonical or raw is None:
            continue
        if raw > best_score:
            best_score, best_answer = raw, answer
    if best_answer is None:
        return None
    return counts[best_answer]


# -- record-level extraction --------------------------------------------------

def iter_trace_samples(record: dict):
    """Yield (answer_or_None, raw_or_None, tokens) per generated sample, in order."""
    for round_trace in record.get("trace", []):
        for sample in round_trace.get("added", []):
            answer = sample["answer"] if sample["kind"] != "null" else None
            yield answer, sample.get("raw"), sample.get("tokens", 0)


@dataclass
class DiagnosticReport:
    """Per-question rows plus aggregates recomputable from them."""

    per_question: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)


def build_report(records: Sequence[dict]) -> DiagnosticReport:
    rows = []
    for rec in records:
        if rec.get("failed"):
            continue
        samples = list(iter_trace_samples(rec))
        if not samples:
            continue
        answers = [s[0] for s in samples]
        raws = [s[1] for s in samples]
        tokens = [s[2] for s in samples]
        gold = rec["gold_answer"]
        non_null = [a for a in answers if a is not None]
        distinct = len(set(non_null))
        incorrect = Counter(a for a in non_null if a != gold)
        row = {
            "question_id": rec["question_id"],
            "count": distinct,
            "length": sum(tokens) / len(samples),
            "null": sum(1 for a in answers if a is None),
            "correct_count": sum(1 for a in non_null if a == gold),
            "sample_count": len(samples),
            "sc_transitions": transition_count(selection_timeline(answers, raws, gold, "sc")),
            "rm_transitions": (
                transition_count(selection_timeline(answers, raws, gold, "rm"))
                if any(r is not None for r in raws) else None
            ),
            "top_negative_freq": (
                top_negative_frequency(answers, raws, gold)
                if any(r is not None for r in raws) else None
            ),
            "incorrect_entropy": entropy_bits(incorrect.values()) if incorrect else None,
            "tokens": rec["tokens"],
            "wall_time": rec["wall_time"],
        }
        rows.append(row)
    freqs = [r["top_negative_freq"] for r in rows if r["top_negative_freq"] is not None]
    entropies = [r["incorrect_entropy"] for r in rows if r["incorrect_entropy"] is not None]
    aggregate = {
        "questions": len(rows),
        "total_tokens": sum(r["tokens"] for r in rows),
        "total_wall_time": sum(r["wall_time"] for r in rows),
        "mean_answer_count": (sum(r["count"] for r in rows) / len(rows)) if rows else 0.0,
        "longtail_histogram": longtail_histogram(freqs),
        "mean_incorrect_entropy": (sum(entropies) / len(entropies)) if entropies else None,
    }
    return DiagnosticReport(per_question=rows, aggregate=aggregate)


# -- CSV emission -------------------------------------------------------------

STAT_NAMES = ("difficulty", "proxies", "transitions", "longtail", "entropy", "curve")


def stat_rows(records: Sequence[dict], stat: str):
    """(fieldnames, rows) for one statistic, ready for CSV emission."""
    report = build_report(records)
    if stat == "difficulty":
        rows = [
            {
                "question_id": r["question_id"],
                "correct_count": r["correct_count"],
                "sample_count": r["sample_count"],
                "level": estimate_difficulty(r["correct_count"], r["sample_count"]),
            }
            for r in report.per_question
        ]
        return ["question_id", "correct_count", "sample_count", "level"], rows
    if stat == "proxies":
        rows = [
            {k: r[k] for k in ("question_id", "count", "length", "null")}
            for r in report.per_question
        ]
        return ["question_id", "count", "length", "null"], rows
    if stat == "transitions":
        rows = [
            {k: r[k] for k in ("question_id", "sc_transitions", "rm_transitions")}
            for r in report.per_question
        ]
        return ["question_id", "sc_transitions", "rm_transitions"], rows
    if stat == "longtail":
        hist = report.aggregate["longtail_histogram"]
        rows = [{"frequency": f, "questions": hist[f]} for f in sorted(hist)]
        return ["frequency", "questions"], rows
    if stat == "entropy":
        rows = [
            {"question_id": r["question_id"], "incorrect_entropy": r["incorrect_entropy"]}
            for r in report.per_question
            if r["incorrect_entropy"] is not None
        ]
        return ["question_id", "incorrect_entropy"], rows
    if stat == "curve":
        rows = compute_return_points(records)
        return ["strategy", "config_digest", "mean_wall_time", "accuracy", "questions"], rows
    raise ValueError(f"unknown statistic: {stat!r} (expected one of {STAT_NAMES})")


def write_stat_csv(records: Sequence[dict], stat: str, out_path: str):
    fieldnames, rows = stat_rows(records, stat)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
