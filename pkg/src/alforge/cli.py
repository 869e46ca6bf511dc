"""Command-line entry point: generate benchmarks, run experiments, compare.

Exit codes are a stable contract: 0 success, 2 usage/config error, 3 data
error, 4 numeric failure. The environment variable ``AL_FORGE_LOG`` (error,
info, debug) controls verbosity. Config files are flat ``key = value`` INI
text with sections ``[experiment]``, ``[benchmark]``, and ``[train.rep]``,
``[train.continue]``, ``[train.finetune]``, ``[train.baseline]``; unknown
sections or keys are errors, and command-line flags override file values.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
import typing
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .acquisition import STRATEGIES
from .benchgen import BenchmarkSpec, assemble, build, dataset_digest, ingest_embeddings
from .core import AlforgeError, DatasetFormatError
from .driver import (
    ExperimentConfig,
    ZeroAccuracy,
    cost_per_accuracy,
    metrics_to_csv,
    run_experiment,
    summarize,
)
from .learner import DivergedLoss, TrainConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

log = logging.getLogger("alforge")

_TRAIN_SECTIONS = {
    "train.rep": "rep_train",
    "train.continue": "rep_continue",
    "train.finetune": "finetune",
    "train.baseline": "baseline_train",
}
_EXPERIMENT_KEYS = {
    "strategy": str,
    "dataset": str,
    "test_dataset": str,
    "initial_id": int,
    "per_stage_id": int,
    "target_id": int,
    "seed": int,
    "baseline_free_bootstrap": bool,
    "refresh_radius_per_sample": bool,
    "cluster_restarts": int,
}


class ConfigError(AlforgeError):
    pass


def _setup_logging() -> None:
    name = os.environ.get("AL_FORGE_LOG", "info").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(name, logging.INFO), format="%(levelname)s %(name)s: %(message)s"
    )


def _coerce(raw: str, typ, key: str):
    if typ is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"key {key}: expected a boolean, got {raw!r}")
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"key {key}: expected {typ.__name__}, got {raw!r}") from None


def _dataclass_hints(cls) -> dict:
    return {k: t for k, t in typing.get_type_hints(cls).items() if not k.startswith("_")}


def _parse_config_file(path: str) -> dict:
    """Parse the INI file into {section: {key: value}} with types applied."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    known_sections = {"experiment", "benchmark", *_TRAIN_SECTIONS}
    out: dict[str, dict] = {}
    bench_hints = _dataclass_hints(BenchmarkSpec)
    train_hints = _dataclass_hints(TrainConfig)
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown config section [{section}]")
        items = {}
        for key, raw in parser.items(section):
            if section == "experiment":
                if key not in _EXPERIMENT_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [experiment]")
                items[key] = _coerce(raw, _EXPERIMENT_KEYS[key], key)
            elif section == "benchmark":
                if key not in bench_hints:
                    raise ConfigError(f"unknown key {key!r} in [benchmark]")
                items[key] = _coerce(raw, bench_hints[key], key)
            else:
                if key not in train_hints:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                items[key] = _coerce(raw, train_hints[key], key)
        out[section] = items
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alforge",
        description="Active-learning engine and benchmark simulator for contaminated pools",
    )
    parser.add_argument("--version", action="version", version=f"alforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("benchgen", help="generate a synthetic benchmark pool")
    p_gen.add_argument("--k", type=int, default=8, help="number of iD classes")
    p_gen.add_argument("--dim", type=int, default=16)
    p_gen.add_argument("--n-id", type=int, default=4000)
    p_gen.add_argument("--n-ambiguous", type=int, default=1000)
    p_gen.add_argument("--n-ood", type=int, default=1000)
    p_gen.add_argument("--n-test", type=int, default=1000)
    p_gen.add_argument("--separation", type=float, default=6.0)
    p_gen.add_argument("--ood-offset", type=float, default=12.0)
    p_gen.add_argument("--committee-size", type=int, default=10)
    p_gen.add_argument("--interp-lambda", type=float, default=0.7)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output dataset path")
    p_gen.set_defaults(func=cmd_benchgen)

    p_run = sub.add_parser("run", help="run one active-learning experiment")
    p_run.add_argument("--config", help="INI config file")
    p_run.add_argument("--dataset", help="pool dataset path (overrides config)")
    p_run.add_argument("--test-dataset", help="held-out iD test set path")
    p_run.add_argument("--strategy", choices=STRATEGIES)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--initial-id", type=int)
    p_run.add_argument("--per-stage-id", type=int)
    p_run.add_argument("--target-id", type=int)
    p_run.add_argument("--out-dir", default=".")
    p_run.add_argument("--out-base", help="output base name (default <strategy>_seed<seed>)")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="tabulate run summaries")
    p_cmp.add_argument("summaries", nargs="+", help="summary JSON files (at least two)")
    p_cmp.add_argument("--out", default="compare.csv", help="CSV output path")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def cmd_benchgen(args) -> int:
    try:
        spec = BenchmarkSpec(
            n_classes=args.k,
            dim=args.dim,
            n_id=args.n_id,
            n_ambiguous=args.n_ambiguous,
            n_ood=args.n_ood,
            n_test=args.n_test,
            class_separation=args.separation,
            ood_offset=args.ood_offset,
            committee_size=args.committee_size,
            interp_lambda=args.interp_lambda,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"invalid benchmark spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = assemble(spec, args.out)
    for key, value in result.manifest.items():
        print(f"{key} = {value}")
    return EXIT_OK


def _resolve_run_config(args) -> tuple[ExperimentConfig, dict | None, dict]:
    sections = _parse_config_file(args.config) if args.config else {}
    exp = dict(sections.get("experiment", {}))
    for key in ("dataset", "test_dataset", "strategy", "seed", "initial_id", "per_stage_id", "target_id"):
        override = getattr(args, key)
        if override is not None:
            exp[key] = override
    if "strategy" not in exp:
        raise ConfigError("no strategy given (flag --strategy or [experiment] strategy)")
    dataset_info = {
        "dataset": exp.pop("dataset", None),
        "test_dataset": exp.pop("test_dataset", None),
    }
    trains = {}
    for section, field_name in _TRAIN_SECTIONS.items():
        if section in sections:
            trains[field_name] = replace(TrainConfig(), **sections[section])
    config = ExperimentConfig(**exp, **trains)
    bench = sections.get("benchmark")
    bench_spec = dict(bench) if bench else None
    return config, bench_spec, dataset_info


def cmd_run(args) -> int:
    try:
        config, bench_spec, dataset_info = _resolve_run_config(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    resolved = {f"experiment.{k}": v for k, v in sorted(asdict(config).items())}
    log.info("resolved config: %s", json.dumps(resolved, sort_keys=True, default=str))

    try:
        if dataset_info["dataset"]:
            dataset = ingest_embeddings(dataset_info["dataset"])
            if not dataset_info["test_dataset"]:
                raise DatasetFormatError("a --test-dataset is required with --dataset")
            test_dataset = ingest_embeddings(dataset_info["test_dataset"])
            digest = dataset_digest(dataset)
        elif bench_spec is not None:
            result = build(BenchmarkSpec(**bench_spec))
            dataset, test_dataset = result.dataset, result.test_dataset
            digest = result.manifest["digest"]
        else:
            raise DatasetFormatError("no dataset path and no [benchmark] section")
    except (DatasetFormatError, FileNotFoundError, OSError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        metrics = run_experiment(dataset, test_dataset, config)
    except DivergedLoss as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = args.out_base or f"{config.strategy}_seed{config.seed}"
    csv_path = out_dir / f"{base}.csv"
    json_path = out_dir / f"{base}.json"
    csv_path.write_text(metrics_to_csv(metrics))
    summary = summarize(config, metrics, digest)
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(
        f"strategy={config.strategy} accuracy={summary['final_accuracy']:.2f} "
        f"cost={summary['final_cost']} cost_per_acc={summary['cost_per_accuracy']:.2f}"
    )
    log.info("wrote %s and %s", csv_path, json_path)
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.summaries) < 2:
        print("need at least two summary files to compare", file=sys.stderr)
        return EXIT_USAGE
    rows = []
    for path in args.summaries:
        try:
            blob = json.loads(Path(path).read_text())
            strategy = blob["strategy"]
            acc = float(blob["final_accuracy"])
            cost = int(blob["final_cost"])
            cpa = cost_per_accuracy(cost, acc)
        except (OSError, json.JSONDecodeError, KeyError, ValueError, ZeroAccuracy) as exc:
            print(f"malformed summary {path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        rows.append((strategy, acc, cost, cpa))
    rows.sort(key=lambda r: r[3])

    header = f"{'Strategy':<18}{'Acc.':>8}{'Cost':>10}{'Cost/Acc.':>12}"
    print(header)
    print("-" * len(header))
    for strategy, acc, cost, cpa in rows:
        print(f"{strategy:<18}{acc:>8.2f}{cost:>10d}{cpa:>12.2f}")

    csv_lines = ["strategy,accuracy,cost,cost_per_accuracy"]
    csv_lines += [f"{s},{a!r},{c},{p!r}" for s, a, c, p in rows]
    Path(args.out).write_text("\n".join(csv_lines) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
