"""Result persistence and summaries.

Result files are append-only newline-delimited JSON: an optional header line
({"_meta": ...}, carrying the timestamp and run metadata) followed by one
record per question. Record lines are serialized with sorted keys, so two runs
with the same seed produce identical bytes once the volatile fields (the
header timestamp and per-record wall times) are canonicalized away.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from scipy import stats as scipy_stats

from .runner import RunRecord

log = logging.getLogger(__name__)

# Normal-approximation 95% interval over per-seed accuracies.
_Z95 = 1.959963984540054


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_results(records: Sequence[RunRecord], out_path, append: bool = False,
                  meta: Optional[dict] = None):
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "a" if append and path.exists() else "w"
    with path.open(mode, encoding="utf-8") as f:
        if mode == "w":
            header = {"_meta": dict(meta or {})}
            header["_meta"].setdefault("timestamp", datetime.now(timezone.utc).isoformat())
            f.write(_dump(header) + "\n")
        for rec in records:
            f.write(_dump(rec.to_dict()) + "\n")


def read_results(path) -> list:
    """Load record dicts, skipping header lines."""
    out = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "_meta" in data:
                continue
            out.append(data)
    return out


def existing_ids(path) -> set:
    path = Path(path)
    if not path.exists():
        return set()
    return {rec["question_id"] for rec in read_results(path)}


def canonical_bytes(path) -> bytes:
    """The file's content with volatile fields removed: header dropped,
    wall times zeroed. Equal canonical bytes == equal runs."""
    lines = []
    for rec in read_results(path):
        rec = dict(rec)
        rec["wall_time"] = 0.0
        lines.append(_dump(rec))
    return ("\n".join(lines) + "\n").encode("utf-8")


# -- summaries ----------------------------------------------------------------

def summarize(records: Sequence[dict]) -> dict:
    """Aggregate records into per-strategy rows; with several seeds per
    strategy, add mean/variance/CI rows and pairwise t-tests."""
    by_strategy: dict = {}
    for rec in records:
        by_strategy.setdefault((rec["strategy"], rec["config_digest"]), []).append(rec)

    rows = []
    per_seed_accuracy: dict = {}
    for (strategy, digest), recs in sorted(by_strategy.items()):
        n = len(recs)
        correct = sum(1 for r in recs if r["correct"])
        failed = sum(1 for r in recs if r.get("failed"))
        rows.append({
            "strategy": strategy,
            "config_digest": digest,
            "questions": n,
            "accuracy": correct / n,
            "mean_tokens": sum(r["tokens"] for r in recs) / n,
            "mean_wall_time": sum(r["wall_time"] for r in recs) / n,
            "failed": failed,
        })
        seeds: dict = {}
        for r in recs:
            seeds.setdefault(r["seed"], []).append(r)
        if len(seeds) > 1:
            per_seed_accuracy[strategy] = [
                sum(1 for r in batch if r["correct"]) / len(batch)
                for _, batch in sorted(seeds.items())
            ]

    multi_seed = []
    for strategy, accs in sorted(per_seed_accuracy.items()):
        k = len(accs)
        mean = sum(accs) / k
        variance = sum((a - mean) ** 2 for a in accs) / (k - 1)
        half_width = _Z95 * math.sqrt(variance / k)
        multi_seed.append({
            "strategy": strategy,
            "runs": k,
            "mean": mean,
            "variance": variance,
            "ci95_low": mean - half_width,
            "ci95_high": mean + half_width,
        })

    return {
        "rows": rows,
        "multi_seed": multi_seed,
        "ttests": pairwise_ttests(per_seed_accuracy),
    }


def pairwise_ttests(per_strategy_runs: dict) -> list:
    """Paired t-tests between strategies' per-seed accuracy vectors."""
    names = sorted(per_strategy_runs)
    out = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            xs, ys = per_strategy_runs[a], per_strategy_runs[b]
            if len(xs) != len(ys) or len(xs) < 2:
                log.warning("skipping t-test %s vs %s: unaligned run counts", a, b)
                continue
            with warnings.catch_warnings():
                # zero-variance differences give t = +-inf; that is the honest
                # degenerate answer, no need for scipy's precision warning
                warnings.simplefilter("ignore", RuntimeWarning)
                result = scipy_stats.ttest_rel(xs, ys)
            out.append({
                "a": a,
                "b": b,
                "t_statistic": float(result.statistic),
                "p_value": float(result.pvalue),
            })
    return out


def write_summary_csv(summary: dict, out_path):
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(
            f,
            fieldnames=["strategy", "config_digest", "questions", "accuracy",
                        "mean_tokens", "mean_wall_time", "failed"],
        )
        writer.writeheader()
        writer.writerows(summary["rows"])
    if summary["multi_seed"]:
        stats_path = path.with_name(path.stem + "_multiseed" + path.suffix)
        with stats_path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(
                f,
                fieldnames=["strategy", "runs", "mean", "variance", "ci95_low", "ci95_high"],
            )
            writer.writeheader()
            writer.writerows(summary["multi_seed"])
    if summary["ttests"]:
        ttest_path = path.with_name(path.stem + "_ttests" + path.suffix)
        with ttest_path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["a", "b", "t_statistic", "p_value"])
            writer.writeheader()
            writer.writerows(summary["ttests"])
