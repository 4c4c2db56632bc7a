from .datasets import DatasetError, DatasetItem, load_dataset, make_scenario_dataset
from .results import (
    canonical_bytes,
    existing_ids,
    pairwise_ttests,
    read_results,
    summarize,
    write_results,
    write_summary_csv,
)
from .runner import RunRecord, run_experiment, run_question

__all__ = [
    "DatasetError",
    "DatasetItem",
    "RunRecord",
    "canonical_bytes",
    "existing_ids",
    "load_dataset",
    "make_scenario_dataset",
    "pairwise_ttests",
    "read_results",
    "run_experiment",
    "run_question",
    "summarize",
    "write_results",
    "write_summary_csv",
]
