"""Compensatory fitness and selection across compressed depths.

The fitness ``alpha = w * F + (1 - w) * (1 - S)`` trades a classification
score ``F`` against the size ratio ``S = n / m`` of a network with ``n``
conv layers relative to an ``m``-layer reference. Selection runs the genetic
search once per candidate depth and keeps the depth whose best genome has
the highest alpha.
"""

from dataclasses import dataclass, replace
import logging
import math
import numbers
import time

from . import rng as rngs
from .exceptions import ConfigError, DomainError, ReportingError
from .ga import GaConfig, run_ga

log = logging.getLogger(__name__)

DEFAULT_W = 0.7
METRIC_ROWS = ("F1_train", "F1_test", "Fit_train", "Fit_test")


def _check_unit(name, x, lo_open=False):
    if not isinstance(x, numbers.Real) or math.isnan(x):
        raise DomainError(f"{name} must be a real number, got {x!r}")
    if lo_open and not 0 < x <= 1:
        raise DomainError(f"{name} must lie in (0, 1], got {x}")
    if not 0 <= x <= 1:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")


def alpha(f, s, w=DEFAULT_W):
    """Compensatory fitness ``w * f + (1 - w) * (1 - s)``.

    >>> round(alpha(0.852, 0.4, 0.7), 4)
    0.7764
    """
    _check_unit("F", f)
    _check_unit("S", s, lo_open=True)
    _check_unit("w", w)
    return w * f + (1 - w) * (1 - s)


def size_ratio(n_conv_layers, reference_layers):
    if reference_layers < 1:
        raise DomainError("reference depth must be >= 1")
    if not 1 <= n_conv_layers <= reference_layers:
        raise DomainError(
            f"need 1 <= n <= m, got n={n_conv_layers}, m={reference_layers}")
    return n_conv_layers / reference_layers


def estimate_energy(c, t, speed, exponent):
    """Energy ``c * t * speed ** exponent`` in Joules.

    With ``c``, ``speed`` and ``exponent`` fixed, energy is directly
    proportional to execution time ``t``, which is why fewer conv layers
    (shorter runs) stand in for lower energy use. Reporting only; this never
    enters the fitness.
    """
    for name, v in (("c", c), ("t", t), ("speed", speed), ("exponent", exponent)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    return c * t * speed ** exponent


@dataclass(frozen=True)
class EvalRecord:
    """Scores, size and timings of one trained model.

    Build with :meth:`from_scores` so the size ratio and both alphas are
    derived rather than supplied.
    """

    f1_train: float
    f1_test: float
    n_conv_layers: int
    reference_layers: int
    w: float
    size_ratio: float
    alpha_train: float
    alpha_test: float
    t_train_seconds: float = 0.0
    t_predict_seconds: float = 0.0
    param_bytes: int = 0

    @classmethod
    def from_scores(cls, f1_train, f1_test, n_conv_layers, reference_layers,
                    w=DEFAULT_W, t_train_seconds=0.0, t_predict_seconds=0.0,
                    param_bytes=0):
        s = size_ratio(n_conv_layers, reference_layers)
        return cls(float(f1_train), float(f1_test), int(n_conv_layers),
                   int(reference_layers), float(w), s,
                   alpha(float(f1_train), s, w), alpha(float(f1_test), s, w),
                   float(t_train_seconds), float(t_predict_seconds), int(param_bytes))

    @property
    def kilobytes(self):
        return round(self.param_bytes / 1024)

    def to_dict(self):
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d):
        """Rebuild from stored scores; stored alphas and S are recomputed."""
        return cls.from_scores(d["f1_train"], d["f1_test"], d["n_conv_layers"],
                               d["reference_layers"], d["w"],
                               d.get("t_train_seconds", 0.0),
                               d.get("t_predict_seconds", 0.0),
                               d.get("param_bytes", 0))


def compensatory_argmax(alphas, n_layers):
    """Index of the highest alpha; ties go to the smaller depth, then the earlier entry."""
    if not alphas:
        raise ConfigError("nothing to choose from")
    return min(range(len(alphas)), key=lambda i: (-alphas[i], n_layers[i], i))


@dataclass
class ArchResult:
    arch: object
    search: object
    size_ratio: float
    alpha: float
    seconds: float = 0.0

    @property
    def best(self):
        return self.search.best


@dataclass
class CompensatoryResult:
    winner: ArchResult
    per_arch: list


def run_compensatory(arch_list, make_evaluator, ga_cfg=GaConfig(), w=DEFAULT_W,
                     jobs=1, on_generation=None):
    """Genetic search per depth, then pick the depth with the highest alpha.

    Parameters
    ----------
    arch_list : sequence of ArchSpec
        Candidate architectures; all must share ``reference_layers``.
    make_evaluator : callable
        ``make_evaluator(arch)`` returns the ``evaluator(genome, seed)`` used
        for that architecture.
    ga_cfg : GaConfig
        Each architecture runs with a master seed derived from
        ``ga_cfg.master_seed`` and its depth.
    w : float
    jobs : int
    on_generation : callable, optional
        Called as ``on_generation(arch, record)``.
    """
    arch_list = list(arch_list)
    if not arch_list:
        raise ConfigError("arch_list is empty")
    refs = {a.reference_layers for a in arch_list}
    if len(refs) != 1:
        raise ConfigError(f"architectures disagree on reference depth: {sorted(refs)}")
    _check_unit("w", w)

    results = []
    for arch in arch_list:
        cfg = replace(ga_cfg, master_seed=rngs.derive_seed(
            ga_cfg.master_seed, "arch", arch.n_conv_layers))
        hook = None if on_generation is None else (
            lambda rec, arch=arch: on_generation(arch, rec))
        start = time.perf_counter()
        search = run_ga(arch, make_evaluator(arch), cfg, jobs=jobs, on_generation=hook)
        seconds = time.perf_counter() - start
        s = size_ratio(arch.n_conv_layers, arch.reference_layers)
        a = alpha(min(max(search.best.fitness, 0.0), 1.0), s, w)
        log.info("%s best=%s F=%.4f alpha=%.4f", arch.name, search.best.genome,
                 search.best.fitness, a)
        results.append(ArchResult(arch, search, s, a, seconds))

    i = compensatory_argmax([r.alpha for r in results],
                            [r.arch.n_conv_layers for r in results])
    return CompensatoryResult(results[i], results)


@dataclass
class ComparisonTable:
    """Metric rows by model columns, with each row's maxima flagged."""

    models: list
    rows: dict
    flags: dict

    def cells(self):
        for metric in METRIC_ROWS:
            for model, value, flag in zip(self.models, self.rows[metric], self.flags[metric]):
                yield metric, model, value, flag


def build_comparison_table(records, models=None, decimals=None):
    """Tabulate ``{model_id: EvalRecord}`` the way the result tables do.

    Fit rows are recomputed from each record's F1 scores and size ratio,
    never copied from the record. With ``decimals`` set, values are rounded
    before flagging so printed ties are flagged together.
    """
    models = list(records) if models is None else list(models)
    if not models:
        raise ReportingError("no models to tabulate")
    missing = [m for m in models if records.get(m) is None]
    if missing:
        raise ReportingError(f"missing evaluation records for: {', '.join(map(str, missing))}")

    rows = {k: [] for k in METRIC_ROWS}
    for m in models:
        r = records[m]
        s = size_ratio(r.n_conv_layers, r.reference_layers)
        vals = (r.f1_train, r.f1_test, alpha(r.f1_train, s, r.w), alpha(r.f1_test, s, r.w))
        for k, v in zip(METRIC_ROWS, vals):
            rows[k].append(round(v, decimals) if decimals is not None else v)
    flags = {}
    for k, vals in rows.items():
        top = max(vals)
        flags[k] = [v == top for v in vals]
    return ComparisonTable(models, rows, flags)
