"""Dataset loading and synthetic dataset construction.

Datasets are newline-delimited JSON records with fields
{id, question, answer, task, options?}. Gold answers are canonicalized on
load so correctness checks reduce to canonical equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..extraction import TASK_KINDS, FinalAnswer, normalize_answer


class DatasetError(ValueError):
    pass


@dataclass
class DatasetItem:
    id: str
    question: str
    gold: FinalAnswer
    task_kind: str
    options: Optional[list] = None


def load_dataset(path) -> list:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    items = []
    seen = set()
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            items.append(_parse_item(record, path, lineno, seen))
    if not items:
        raise DatasetError(f"empty dataset: {path}")
    return items


def _parse_item(record: dict, path, lineno: int, seen: set) -> DatasetItem:
    for fieldname in ("id", "question", "answer", "task"):
        if fieldname not in record:
            raise DatasetError(f"{path}:{lineno}: missing field {fieldname!r}")
    item_id = str(record["id"])
    if item_id in seen:
        raise DatasetError(f"{path}:{lineno}: duplicate id {item_id!r}")
    seen.add(item_id)
    task = record["task"]
    if task not in TASK_KINDS:
        raise DatasetError(f"{path}:{lineno}: unknown task {task!r} (expected one of {TASK_KINDS})")
    options = record.get("options")
    if task == "multiple_choice":
        if not options or not isinstance(options, list):
            raise DatasetError(f"{path}:{lineno}: multiple_choice items need a non-empty options list")
    gold = normalize_answer(str(record["answer"]), task)
    if gold.is_null:
        raise DatasetError(f"{path}:{lineno}: gold answer {record['answer']!r} canonicalizes to null")
    return DatasetItem(
        id=item_id,
        question=str(record["question"]),
        gold=gold,
        task_kind=task,
        options=[str(o) for o in options] if options else None,
    )


def make_scenario_dataset(scenario, count: int, task_kind: str = "math") -> list:
    """Synthetic questions whose gold answer is the scenario's gold answer.

    Useful for simulator runs: the simulator ignores question text, so only
    the ids (which key its per-question streams) and the gold answer matter.
    """
    if count < 1:
        raise DatasetError("scenario dataset size must be positive")
    gold = normalize_answer(scenario.gold_answer, task_kind)
    if gold.is_null:
        raise DatasetError(
            f"scenario gold answer {scenario.gold_answer!r} is not valid for task {task_kind!r}"
        )
    options = None
    if task_kind == "multiple_choice":
        options = [f"option {a}" for a in scenario.answers]
    return [
        DatasetItem(
            id=f"q{i:04d}",
            question=f"simulated question {i}",
            gold=gold,
            task_kind=task_kind,
            options=options,
        )
        for i in range(count)
    ]
