"""JSON-configured experiments: dataset generation, runs, alpha sweeps, suites.

Config schema (every key optional unless noted)::

    {
      "name": "mnist_demo",
      "dataset": {
        "preset": "mnist_like",          # or "femnist_like(1)", ...; or
        "path": "train.json",            # a LEAF-style file (+ optional "test_path"), or
        "num_clients": 50, ...           # explicit generator arguments
        "scale": 0.1, "seed": 0          # preset scale factor, generator seed
      },
      "learner": {"architecture": "mlr", "hidden": [], "learning_rate": 0.03,
                  "local_epochs": 20, "batch_size": null},
      "strategy": {"strategy": "fedavg" | ["fedavg", "fedsim"],
                   "fedft": true | [false, true],
                   "route": "difference", "alpha": 0.0 | [0.0, 0.1],
                   "prune_start_round": 0, "clients_per_round": 20,
                   "n_clusters": 5, "rounds": 50, "variant": "IV",
                   "proximal_mu": 0.01, "bytes_per_value": 4,
                   "dct_method": "direct"},
      "alphas": [0, 0.1, 0.2],           # used by the sweep command
      "seeds": [0, 1, 2],
      "output_dir": "results"
    }

Values left out fall back to the preset (learning rate, clients per round,
cluster count) or to the library defaults.
"""

from __future__ import annotations

import copy
import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .data import (
    FederatedDataset, dataset_presets, generate_synthetic, load_leaf_json, write_leaf_json,
)
from .errors import ConfigError
from .federation import STRATEGIES, ROUTES, StrategyConfig, run_seeds
from .learning import LearnerSpec
from .reporting import aggregate_seeds, csv_filename, write_csv, write_summary_csv
from .transform import DctVariant

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "build_dataset",
    "build_learner",
    "strategy_configs",
    "cmd_generate",
    "cmd_run",
    "cmd_sweep_alpha",
    "suite_manifest",
    "run_suite",
]

log = logging.getLogger(__name__)

_GENERATOR_KEYS = ("num_clients", "num_classes", "feature_dim", "classes_per_client",
                   "samples_range", "class_separation")
_DATASET_KEYS = {"preset", "path", "test_path", "scale", "seed", *_GENERATOR_KEYS}
_LEARNER_KEYS = {"architecture", "hidden", "learning_rate", "local_epochs", "batch_size",
                 "proximal_mu"}
_STRATEGY_KEYS = {"strategy", "fedft", "route", "alpha", "prune_start_round",
                  "clients_per_round", "n_clusters", "rounds", "variant", "proximal_mu",
                  "bytes_per_value", "dct_method"}
_TOP_KEYS = {"name", "dataset", "learner", "strategy", "alphas", "seeds", "output_dir"}


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    dataset: dict = field(default_factory=lambda: {"preset": "mnist_like"})
    learner: dict = field(default_factory=dict)
    strategy: dict = field(default_factory=dict)
    alphas: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    output_dir: str = "results"

    def to_dict(self) -> dict:
        return {
            "name": self.name, "dataset": self.dataset, "learner": self.learner,
            "strategy": self.strategy, "alphas": self.alphas, "seeds": self.seeds,
            "output_dir": self.output_dir,
        }

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Deep-merge dict sections; replace scalars."""
        doc = copy.deepcopy(self.to_dict())
        for key, value in changes.items():
            if isinstance(value, dict) and isinstance(doc.get(key), dict):
                doc[key].update(value)
            else:
                doc[key] = value
        return parse_config(doc)

    # Resolved views -------------------------------------------------------

    def preset(self):
        name = self.dataset.get("preset")
        if name is None:
            return None
        return dataset_presets(name, scale=self.dataset.get("scale", 0.1))

    @property
    def rounds(self) -> int:
        return int(self.strategy.get("rounds", 50))


def _listify(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_dataset(d, problems):
    unknown = set(d) - _DATASET_KEYS
    if unknown:
        problems.append(f"dataset: unknown keys {sorted(unknown)}")
    sources = [k for k in ("preset", "path") if k in d]
    if len(sources) > 1:
        problems.append("dataset: give either 'preset' or 'path', not both")
    preset = None
    if "preset" in d:
        try:
            preset = dataset_presets(str(d["preset"]), scale=d.get("scale", 0.1))
        except (ValueError, TypeError) as exc:
            problems.append(f"dataset.preset: {exc}")
    if "scale" in d and not (_is_num(d["scale"]) and d["scale"] > 0):
        problems.append("dataset.scale must be a positive number")
    if "seed" in d and not _is_int(d["seed"]):
        problems.append("dataset.seed must be an integer")
    if "path" in d:
        if not Path(d["path"]).exists():
            problems.append(f"dataset.path: {d['path']} does not exist")
        if "test_path" in d and not Path(d["test_path"]).exists():
            problems.append(f"dataset.test_path: {d['test_path']} does not exist")
        return
    params = preset.generator_kwargs() if preset else {}
    params.update({k: d[k] for k in _GENERATOR_KEYS if k in d})
    if preset is None and not sources:
        missing = [k for k in ("num_clients", "num_classes", "feature_dim", "classes_per_client")
                   if k not in d]
        if missing:
            problems.append(f"dataset: missing {missing} (or give a preset / path)")
            return
    for key in ("num_clients", "num_classes", "feature_dim", "classes_per_client"):
        if key in params and not (_is_int(params[key]) and params[key] >= 1):
            problems.append(f"dataset.{key} must be a positive integer")
    if _is_int(params.get("classes_per_client")) and _is_int(params.get("num_classes")):
        if params["classes_per_client"] > params["num_classes"]:
            problems.append(
                f"dataset.classes_per_client {params['classes_per_client']} exceeds "
                f"num_classes {params['num_classes']}")
    if _is_int(params.get("feature_dim")) and _is_int(params.get("num_classes")):
        if params["feature_dim"] < params["num_classes"]:
            problems.append("dataset.feature_dim must be >= num_classes")
    rng = params.get("samples_range", (10, 60))
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2 and all(_is_int(v) for v in rng)
            and 2 <= rng[0] <= rng[1]):
        problems.append("dataset.samples_range must be [min, max] with 2 <= min <= max")
    if "class_separation" in params and not (_is_num(params["class_separation"])
                                             and params["class_separation"] >= 0):
        problems.append("dataset.class_separation must be a non-negative number")


def _check_learner(d, problems):
    unknown = set(d) - _LEARNER_KEYS
    if unknown:
        problems.append(f"learner: unknown keys {sorted(unknown)}")
    arch = d.get("architecture", "mlr")
    if arch not in ("mlr", "mlp"):
        problems.append(f"learner.architecture must be 'mlr' or 'mlp', got {arch!r}")
    hidden = d.get("hidden", [64] if arch == "mlp" else [])
    if not (isinstance(hidden, list) and all(_is_int(h) and h > 0 for h in hidden)):
        problems.append("learner.hidden must be a list of positive integers")
    elif arch == "mlr" and hidden:
        problems.append("learner.hidden must be empty for mlr")
    if "learning_rate" in d and not (_is_num(d["learning_rate"]) and d["learning_rate"] >= 0):
        problems.append("learner.learning_rate must be a non-negative number")
    if "local_epochs" in d and not (_is_int(d["local_epochs"]) and d["local_epochs"] >= 1):
        problems.append("learner.local_epochs must be a positive integer")
    bs = d.get("batch_size")
    if bs is not None and not (_is_int(bs) and bs >= 1):
        problems.append("learner.batch_size must be a positive integer or null")
    if "proximal_mu" in d and not (_is_num(d["proximal_mu"]) and d["proximal_mu"] >= 0):
        problems.append("learner.proximal_mu must be a non-negative number")


def _check_strategy(d, problems):
    unknown = set(d) - _STRATEGY_KEYS
    if unknown:
        problems.append(f"strategy: unknown keys {sorted(unknown)}")
    for s in _listify(d.get("strategy", "fedavg")):
        if str(s).lower() not in STRATEGIES:
            problems.append(f"strategy.strategy: {s!r} is not one of {list(STRATEGIES)}")
    for f in _listify(d.get("fedft", True)):
        if not isinstance(f, bool):
            problems.append("strategy.fedft must be true/false or a list of them")
    if str(d.get("route", "difference")).lower() not in ROUTES:
        problems.append(f"strategy.route must be one of {list(ROUTES)}")
    for a in _listify(d.get("alpha", 0.0)):
        if not (_is_num(a) and 0 <= a < 1):
            problems.append(f"strategy.alpha values must lie in [0, 1), got {a!r}")
    rounds = d.get("rounds", 50)
    if not (_is_int(rounds) and rounds >= 0):
        problems.append("strategy.rounds must be a non-negative integer")
    start = d.get("prune_start_round", 0)
    if not (_is_int(start) and start >= 0):
        problems.append("strategy.prune_start_round must be a non-negative integer")
    elif _is_int(rounds) and start > rounds:
        problems.append("strategy.prune_start_round exceeds rounds")
    for key in ("clients_per_round", "n_clusters"):
        if key in d and not (_is_int(d[key]) and d[key] >= 1):
            problems.append(f"strategy.{key} must be a positive integer")
    try:
        DctVariant.parse(d.get("variant", "IV"))
    except ValueError as exc:
        problems.append(f"strategy.variant: {exc}")
    if "proximal_mu" in d and not (_is_num(d["proximal_mu"]) and d["proximal_mu"] >= 0):
        problems.append("strategy.proximal_mu must be a non-negative number")
    if d.get("bytes_per_value", 4) not in (4, 8):
        problems.append("strategy.bytes_per_value must be 4 or 8")
    if d.get("dct_method", "direct") not in ("direct", "fft"):
        problems.append("strategy.dct_method must be 'direct' or 'fft'")


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document, reporting every problem in one error."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    problems = []
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")
    sections = {}
    for key in ("dataset", "learner", "strategy"):
        value = doc.get(key, {"preset": "mnist_like"} if key == "dataset" else {})
        if not isinstance(value, dict):
            problems.append(f"{key} must be an object")
            value = {}
        sections[key] = dict(value)
    _check_dataset(sections["dataset"], problems)
    _check_learner(sections["learner"], problems)
    _check_strategy(sections["strategy"], problems)
    seeds = doc.get("seeds", [0])
    if not (isinstance(seeds, list) and seeds and all(_is_int(s) for s in seeds)):
        problems.append("seeds must be a non-empty list of integers")
    alphas = doc.get("alphas", [])
    if not (isinstance(alphas, list) and all(_is_num(a) and 0 <= a < 1 for a in alphas)):
        problems.append("alphas must be a list of numbers in [0, 1)")
    name = doc.get("name", "experiment")
    if not (isinstance(name, str) and name and "/" not in name):
        problems.append("name must be a non-empty string without '/'")
    if not isinstance(doc.get("output_dir", "results"), str):
        problems.append("output_dir must be a string")

    # Cross-field checks that need the preset resolved.
    if not problems:
        cfg = ExperimentConfig(name, sections["dataset"], sections["learner"],
                               sections["strategy"], list(alphas), list(seeds),
                               doc.get("output_dir", "results"))
        preset = cfg.preset()
        num_clients = sections["dataset"].get(
            "num_clients", preset.num_clients if preset else None)
        k = sections["strategy"].get("clients_per_round",
                                     preset.clients_per_round if preset else 10)
        clusters = sections["strategy"].get("n_clusters", preset.n_clusters if preset else 1)
        if num_clients is not None and k > num_clients:
            problems.append(f"strategy.clients_per_round {k} exceeds {num_clients} clients")
        if "fedsim" in [str(s).lower() for s in _listify(sections["strategy"].get("strategy", "fedavg"))]:
            if clusters > k:
                problems.append(f"strategy.n_clusters {clusters} exceeds clients_per_round {k}")
        if not problems:
            return cfg
    raise ConfigError(problems)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(doc)


def build_dataset(cfg: ExperimentConfig) -> FederatedDataset:
    d = cfg.dataset
    if "path" in d:
        return load_leaf_json(d["path"], d.get("test_path"))
    preset = cfg.preset()
    params = preset.generator_kwargs() if preset else {}
    params.update({k: d[k] for k in _GENERATOR_KEYS if k in d})
    params["samples_range"] = tuple(params.get("samples_range", (10, 60)))
    return generate_synthetic(**params, seed=d.get("seed", 0))


def build_learner(cfg: ExperimentConfig, dataset: FederatedDataset) -> LearnerSpec:
    d = cfg.learner
    preset = cfg.preset()
    arch = d.get("architecture", "mlr")
    return LearnerSpec(
        input_dim=dataset.feature_dim,
        num_classes=dataset.num_classes,
        architecture=arch,
        hidden=tuple(d.get("hidden", [64] if arch == "mlp" else [])),
        learning_rate=d.get("learning_rate", preset.learning_rate if preset else 0.03),
        local_epochs=d.get("local_epochs", 20),
        batch_size=d.get("batch_size"),
        proximal_mu=d.get("proximal_mu", 0.0),
    )


def strategy_configs(cfg: ExperimentConfig, alphas=None, fedft=None) -> list[StrategyConfig]:
    """Every (strategy, mode, alpha) combination the config asks for.

    Baseline runs ignore alpha, so they appear once with alpha 0.
    """
    s = cfg.strategy
    preset = cfg.preset()
    alphas = _listify(s.get("alpha", 0.0)) if alphas is None else list(alphas)
    modes = _listify(s.get("fedft", True)) if fedft is None else _listify(fedft)
    mu = s.get("proximal_mu", cfg.learner.get("proximal_mu"))
    out = []
    for name, mode in itertools.product(_listify(s.get("strategy", "fedavg")), modes):
        for alpha in (alphas if mode else [0.0]):
            out.append(StrategyConfig(
                strategy=str(name).lower(),
                fedft=mode,
                route=s.get("route", "difference"),
                alpha=float(alpha),
                prune_start_round=s.get("prune_start_round", 0),
                clients_per_round=s.get("clients_per_round",
                                        preset.clients_per_round if preset else 10),
                n_clusters=s.get("n_clusters", preset.n_clusters if preset else 1),
                total_rounds=cfg.rounds,
                variant=s.get("variant", "IV"),
                proximal_mu=mu,
                bytes_per_value=s.get("bytes_per_value", 4),
                dct_method=s.get("dct_method", "direct"),
            ))
    return out


def _check_against_dataset(cfg, dataset, configs):
    problems = []
    for sc in configs:
        problems += sc.problems(len(dataset.shards))
    if problems:
        raise ConfigError(sorted(set(problems)))


def cmd_generate(cfg: ExperimentConfig, path=None) -> Path:
    """Write the configured dataset as LEAF-style JSON."""
    if "path" in cfg.dataset:
        raise ConfigError("generate needs a preset or generator parameters, not a path")
    dataset = build_dataset(cfg)
    path = Path(path) if path else Path(cfg.output_dir) / f"{cfg.name}.json"
    return write_leaf_json(dataset, path)


def _run_one(cfg, dataset, spec, sc):
    runs = run_seeds(dataset, spec, sc, cfg.seeds)
    curve = aggregate_seeds(runs)
    path = Path(cfg.output_dir) / csv_filename(cfg.name, sc.label, sc.alpha)
    write_csv(curve, path)
    log.info("wrote %s", path)
    return path, curve


def cmd_run(cfg: ExperimentConfig) -> list[Path]:
    """One seed-averaged CSV per configured (strategy, alpha)."""
    dataset = build_dataset(cfg)
    spec = build_learner(cfg, dataset)
    configs = strategy_configs(cfg)
    _check_against_dataset(cfg, dataset, configs)
    return [_run_one(cfg, dataset, spec, sc)[0] for sc in configs]


def cmd_sweep_alpha(cfg: ExperimentConfig, alphas=None) -> tuple[list[Path], list[Path]]:
    """FedFT runs over a list of pruning rates plus one summary CSV per strategy.

    Summary rows: alpha, final accuracy (seed mean at the last round) and
    cumulative per-client upstream cost in MB.
    """
    alphas = list(alphas if alphas is not None else (cfg.alphas or [0.0]))
    if not alphas or not all(0 <= a < 1 for a in alphas):
        raise ConfigError("alphas must be a non-empty list of numbers in [0, 1)")
    dataset = build_dataset(cfg)
    spec = build_learner(cfg, dataset)
    configs = strategy_configs(cfg, alphas=alphas, fedft=True)
    _check_against_dataset(cfg, dataset, configs)
    paths, summaries, by_strategy = [], [], {}
    for sc in configs:
        path, curve = _run_one(cfg, dataset, spec, sc)
        paths.append(path)
        final_acc = float(curve.mean["weighted_accuracy"][-1]) if len(curve) else float("nan")
        cost = float(curve.mean["cumulative_payload_mb"][-1]) if len(curve) else 0.0
        by_strategy.setdefault(sc.label, []).append((sc.alpha, final_acc, cost))
    for label, rows in by_strategy.items():
        summaries.append(write_summary_csv(
            rows, Path(cfg.output_dir) / f"{cfg.name}_{label}_sweep.csv"))
    return paths, summaries


SUITE_PRESETS = ("mnist_like", "femnist_like", "mex_like", "goodreads_like")


def suite_manifest(name: str) -> list[ExperimentConfig]:
    """Experiment configs making up a named suite.

    ``paper``: all four presets x {FedAvg, FedProx, FedSim} x {baseline, FedFT}
    at alpha 0, 100 rounds.  ``smoke``: a tiny mnist_like run of all three
    strategies in both modes, a few rounds each.
    """
    if name == "paper":
        return [
            parse_config({
                "name": preset,
                "dataset": {"preset": preset, "seed": 0},
                "strategy": {"strategy": list(STRATEGIES), "fedft": [False, True],
                             "alpha": 0.0, "rounds": 100},
                "seeds": [0],
            })
            for preset in SUITE_PRESETS
        ]
    if name == "smoke":
        return [parse_config({
            "name": "smoke",
            "dataset": {"preset": "mnist_like", "num_clients": 12, "feature_dim": 64, "seed": 0},
            "learner": {"local_epochs": 5},
            "strategy": {"strategy": list(STRATEGIES), "fedft": [False, True],
                         "alpha": [0.0, 0.2], "rounds": 5, "clients_per_round": 6,
                         "n_clusters": 2},
            "seeds": [0],
        })]
    raise ConfigError(f"unknown suite {name!r}; expected 'paper' or 'smoke'")


def run_suite(name: str, output_dir=None, overrides: dict | None = None,
              seeds=None) -> list[Path]:
    paths = []
    for cfg in suite_manifest(name):
        changes = dict(overrides or {})
        if output_dir is not None:
            changes["output_dir"] = str(output_dir)
        if seeds is not None:
            changes["seeds"] = list(seeds)
        if changes:
            cfg = cfg.with_overrides(**changes)
        paths += cmd_run(cfg)
    return paths
