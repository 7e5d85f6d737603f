"""Experiment configuration.

A config file is YAML holding a single mapping with flat dotted keys::

    data.source: cifar10
    data.dir: /data/cifar-10-batches-bin
    data.partition: first
    data.n_train: 20000
    data.n_test: 5000
    arch.grid: [4, 6, 8, 10]
    arch.reference_m: 10
    fitness.w: 0.7
    ga.population: 4
    ga.generations: 5
    train.epochs: 15
    seed: 0

Every key can be overridden on the command line by ``--<key>`` (for example
``--ga.generations 10``); the command line wins over the file, and the file
wins over the defaults below.
"""

from dataclasses import dataclass
from pathlib import Path

import yaml

from .activations import Activation
from .exceptions import ConfigError
from .ga import FITNESS_METRICS, SELECTION_METHODS, GaConfig
from .nn.arch import ArchSpec
from .nn.training import TrainConfig

DEFAULTS = {
    "data.source": "cifar10",
    "data.dir": None,
    "data.partition": "first",
    "data.n_train": 2000,
    "data.n_test": 500,
    "data.num_classes": 10,
    "data.image_shape": [3, 32, 32],
    "data.separation": 5.0,
    "arch.grid": [4, 6, 8, 10],
    "arch.reference_m": 10,
    "arch.base_channels": 16,
    "arch.max_channels": 128,
    "fitness.w": 0.7,
    "ga.population": 4,
    "ga.generations": 5,
    "ga.mutation_prob": 1.0,
    "ga.function_set": ["RELU", "SIG", "TANH", "ELU"],
    "ga.selection": "roulette",
    "ga.fitness_metric": "train_f1",
    "train.epochs": 10,
    "train.batch_size": 32,
    "train.learning_rate": 0.01,
    "train.momentum": 0.9,
    "evaluator.kind": "train",
    "evaluator.landscape": "relu_fraction",
    "evaluator.average": "macro",
    "baseline.compare": True,
    "enumerate.n": 4,
    "enumerate.cap": 65536,
    "report.formats": ["json", "csv", "txt"],
    "out": "results",
    "seed": 0,
    "jobs": 1,
}

DATA_SOURCES = ("cifar10", "synthetic")
EVALUATOR_KINDS = ("train", "surrogate")
REPORT_FORMATS = ("json", "csv", "txt")


def _int_list(v):
    if isinstance(v, str):
        return [int(x) for x in v.replace(" ", "").split(",") if x]
    return [int(x) for x in v]


def _str_list(v):
    if isinstance(v, str):
        return [x for x in v.replace(" ", "").split(",") if x]
    return [str(x) for x in v]


def _bool(v):
    if isinstance(v, str):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {v!r}")
    return bool(v)


def _opt_str(v):
    return None if v is None else str(v)


COERCE = {
    "data.source": str, "data.dir": _opt_str, "data.partition": str,
    "data.n_train": int, "data.n_test": int, "data.num_classes": int,
    "data.image_shape": _int_list, "data.separation": float,
    "arch.grid": _int_list, "arch.reference_m": int, "arch.base_channels": int,
    "arch.max_channels": int, "fitness.w": float, "ga.population": int,
    "ga.generations": int, "ga.mutation_prob": float, "ga.function_set": _str_list,
    "ga.selection": str, "ga.fitness_metric": str, "train.epochs": int,
    "train.batch_size": int, "train.learning_rate": float, "train.momentum": float,
    "evaluator.kind": str, "evaluator.landscape": str, "evaluator.average": str,
    "baseline.compare": _bool, "enumerate.n": int, "enumerate.cap": int,
    "report.formats": _str_list, "out": str, "seed": int, "jobs": int,
}


def load_file(path):
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping of dotted keys")
    return raw


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict

    @classmethod
    def build(cls, *layers):
        """Merge ``DEFAULTS`` with each mapping in ``layers``, later ones winning."""
        merged = dict(DEFAULTS)
        for layer in layers:
            for key, value in (layer or {}).items():
                if key not in DEFAULTS:
                    raise ConfigError(f"unknown config key {key!r}")
                if value is not None or key == "data.dir":
                    merged[key] = value
        try:
            values = {k: (COERCE[k](v) if v is not None else None) for k, v in merged.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        cfg = cls(values)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides=None):
        return cls.build(load_file(path) if path else {}, overrides)

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["data.source"] not in DATA_SOURCES:
            raise ConfigError(f"data.source must be one of {DATA_SOURCES}")
        if v["data.partition"] not in ("first", "second"):
            raise ConfigError("data.partition must be 'first' or 'second'")
        if v["evaluator.kind"] not in EVALUATOR_KINDS:
            raise ConfigError(f"evaluator.kind must be one of {EVALUATOR_KINDS}")
        if v["evaluator.average"] not in ("macro", "micro"):
            raise ConfigError("evaluator.average must be 'macro' or 'micro'")
        if v["ga.selection"] not in SELECTION_METHODS:
            raise ConfigError(f"ga.selection must be one of {SELECTION_METHODS}")
        if v["ga.fitness_metric"] not in FITNESS_METRICS:
            raise ConfigError(f"ga.fitness_metric must be one of {FITNESS_METRICS}")
        bad = set(v["report.formats"]) - set(REPORT_FORMATS)
        if bad:
            raise ConfigError(f"unknown report formats {sorted(bad)}")
        if not v["arch.grid"]:
            raise ConfigError("arch.grid is empty")
        if any(n > v["arch.reference_m"] or n < 1 for n in v["arch.grid"]):
            raise ConfigError(f"arch.grid values must lie in [1, {v['arch.reference_m']}]")
        if not 0 <= v["fitness.w"] <= 1:
            raise ConfigError("fitness.w must lie in [0, 1]")
        if v["jobs"] < 1:
            raise ConfigError("jobs must be >= 1")
        # construct once so nested invariants are checked up front
        self.ga_config()
        self.arch_list()

    def train_config(self):
        v = self.values
        return TrainConfig(v["train.epochs"], v["train.batch_size"],
                           v["train.learning_rate"], v["train.momentum"], v["seed"])

    def ga_config(self):
        v = self.values
        try:
            fs = tuple(Activation.parse(f) for f in v["ga.function_set"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return GaConfig(v["ga.population"], v["ga.generations"], v["ga.mutation_prob"],
                        fs, v["ga.fitness_metric"], v["ga.selection"],
                        self.train_config(), v["seed"])

    @property
    def num_classes(self):
        return 10 if self.values["data.source"] == "cifar10" else self.values["data.num_classes"]

    @property
    def image_shape(self):
        if self.values["data.source"] == "cifar10":
            return (3, 32, 32)
        return tuple(self.values["data.image_shape"])

    def arch_list(self):
        v = self.values
        return [ArchSpec(n, v["arch.reference_m"], v["arch.base_channels"], self.num_classes,
                         self.image_shape, v["arch.max_channels"])
                for n in v["arch.grid"]]

    @property
    def out_dir(self):
        return Path(self.values["out"])

    def to_dict(self):
        return dict(sorted(self.values.items()))
