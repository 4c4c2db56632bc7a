"""Command line interface: run experiments, analyze results, summarize runs."""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click
import yaml

from .. import __version__
from ..analysis import STAT_NAMES, write_stat_csv
from ..backends.base import BackendConfig, BackendError, build_backend
from ..backends.simulator import SCENARIOS, SimulatorScenario
from ..strategies import STRATEGIES, ConfigError, SearchConfig, StrategyError, default_config
from .datasets import DatasetError, load_dataset, make_scenario_dataset
from .results import (
    canonical_bytes,
    existing_ids,
    read_results,
    summarize,
    write_results,
    write_summary_csv,
)
from .runner import run_experiment

log = logging.getLogger(__name__)

_KNOWN_ERRORS = (ConfigError, DatasetError, BackendError, StrategyError, ValueError, OSError)


def _fail(exc: Exception):
    click.echo(f"error[{type(exc).__name__}]: {exc}", err=True)
    sys.exit(2)


def _load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file must hold a mapping: {path}")
    return data


def _build_search_config(config_path, strategy, rm_mode) -> tuple:
    """Merge config file and CLI flags into (SearchConfig, backend section)."""
    file_data = _load_config_file(config_path) if config_path else {}
    backend_section = file_data.pop("backend", {}) or {}
    if strategy and "strategy" not in file_data:
        config = default_config(strategy, rm_mode or file_data.get("rm_mode", "orm")).to_dict()
        config.update(file_data)
        config["strategy"] = strategy
    else:
        config = default_config(file_data.get("strategy", strategy or "crisp")).to_dict()
        config.update(file_data)
        if strategy:
            config["strategy"] = strategy
    if rm_mode:
        config["rm_mode"] = rm_mode
    return SearchConfig.from_dict(config), backend_section


def _backend_config_from(section: dict) -> BackendConfig:
    if isinstance(section.get("scenario"), dict):
        section["scenario"] = SimulatorScenario.from_dict(section["scenario"])
    try:
        return BackendConfig(**section)
    except TypeError as exc:
        raise ConfigError(f"bad backend section: {exc}") from exc


def load_scenario(name_or_path) -> SimulatorScenario:
    """A built-in scenario name, or a YAML/JSON file with scenario fields."""
    if name_or_path in SCENARIOS:
        return SCENARIOS[name_or_path]
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(
            f"unknown scenario {name_or_path!r}: not a built-in "
            f"({', '.join(sorted(SCENARIOS))}) and no such file"
        )
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return SimulatorScenario.from_dict(data)


@click.group()
@click.version_option(version=__version__, prog_name="crisp")
@click.option("-v", "--verbose", is_flag=True, help="Log progress details.")
def main(verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--dataset", "dataset_arg", required=True,
              help="Dataset JSONL path, or scenario:<count> for synthetic questions.")
@click.option("--strategy", type=click.Choice(STRATEGIES), default=None,
              help="Search strategy (overrides the config file).")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML/JSON search configuration file.")
@click.option("--backend", "backend_kind", type=click.Choice(["remote", "sim"]), default=None,
              help="Backend kind; overrides the config file (default: sim).")
@click.option("--scenario", "scenario_arg", default="adversarial-longtail",
              help="Simulator scenario: built-in name or file path.")
@click.option("--rm-mode", type=click.Choice(["orm", "prm"]), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Results JSONL output path (default: print summary only).")
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--resume", is_flag=True, help="Skip question ids already present in --out.")
def run(dataset_arg, strategy, config_path, backend_kind, scenario_arg, rm_mode,
        seed, out_path, parallelism, resume):
    """Run a strategy over a dataset and record one result per question."""
    try:
        config, backend_section = _build_search_config(config_path, strategy, rm_mode)
        config.validate()

        if backend_kind is not None:
            backend_section["kind"] = "simulator" if backend_kind == "sim" else "remote"
        else:
            backend_section.setdefault("kind", "simulator")
        if backend_section["kind"] == "simulator" and "scenario" not in backend_section:
            backend_section["scenario"] = load_scenario(scenario_arg)
        backend_config = _backend_config_from(backend_section)
        backend = build_backend(backend_config, seed=seed)

        if dataset_arg.startswith("scenario:"):
            if backend_config.kind != "simulator":
                raise ConfigError("scenario:<count> datasets need the simulator backend")
            count = int(dataset_arg.split(":", 1)[1])
            dataset = make_scenario_dataset(backend_config.scenario, count)
        else:
            dataset = load_dataset(dataset_arg)

        skip = existing_ids(out_path) if (resume and out_path) else None
        records = run_experiment(dataset, config, backend, seed=seed,
                                 parallelism=parallelism, skip_ids=skip)
        if out_path:
            write_results(records, out_path, append=bool(skip),
                          meta={"strategy": config.strategy, "seed": seed,
                                "config_digest": config.digest(), "dataset": dataset_arg})
        done = [r for r in records if not r.failed]
        accuracy = (sum(1 for r in done if r.correct) / len(records)) if records else 0.0
        total_tokens = sum(r.tokens for r in records)
        click.echo(
            f"{config.strategy}: {len(records)} questions, accuracy {accuracy:.3f}, "
            f"{len(records) - len(done)} failed, {total_tokens} tokens"
            + (f" -> {out_path}" if out_path else "")
        )
    except _KNOWN_ERRORS as exc:
        _fail(exc)


@main.command()
@click.option("--results", "results_path", type=click.Path(exists=True), required=True)
@click.option("--stat", type=click.Choice(STAT_NAMES), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def analyze(results_path, stat, out_path):
    """Compute one diagnostic statistic from a results file and write it as CSV."""
    try:
        records = read_results(results_path)
        write_stat_csv(records, stat, out_path)
        click.echo(f"{stat} -> {out_path}")
    except _KNOWN_ERRORS as exc:
        _fail(exc)


@main.command(name="summarize")
@click.option("--results", "results_paths", type=click.Path(exists=True), multiple=True,
              required=True, help="One or more results files (repeat the flag).")
@click.option("--out", "out_path", type=click.Path(), required=True)
def summarize_cmd(results_paths, out_path):
    """Summarize results: accuracy, token and time costs; multi-seed inputs also
    get mean/variance/confidence intervals and pairwise t-tests."""
    try:
        records = []
        for p in results_paths:
            records.extend(read_results(p))
        if not records:
            raise DatasetError("no records in the given results files")
        summary = summarize(records)
        write_summary_csv(summary, out_path)
        click.echo(f"{len(records)} records -> {out_path}")
    except _KNOWN_ERRORS as exc:
        _fail(exc)


@main.command(name="validate-config")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--strategy", type=click.Choice(STRATEGIES), default=None)
def validate_config(config_path, strategy):
    """Check a configuration file and exit nonzero if it is invalid."""
    try:
        config, backend_section = _build_search_config(config_path, strategy, None)
        config.validate()
        if backend_section:
            _backend_config_from(backend_section).resolve_env()
        click.echo(f"ok: {config.strategy} configuration is valid")
    except _KNOWN_ERRORS as exc:
        _fail(exc)


@main.command(name="canonicalize")
@click.option("--results", "results_path", type=click.Path(exists=True), required=True)
def canonicalize(results_path):
    """Print the canonical (timestamp-free) form of a results file."""
    try:
        sys.stdout.write(canonical_bytes(results_path).decode("utf-8"))
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed the pipe (e.g. | head); not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        sys.exit(0)
    except _KNOWN_ERRORS as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
