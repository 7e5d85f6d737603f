"""End-to-end runs driven by an :class:`~cmcnn.config.ExperimentConfig`.

Each ``run_*`` function writes its artifacts under ``cfg.out_dir`` and
returns the results dictionary it saved. ``results.json`` is written last
with ``"complete": true``; if anything fails midway a ``results.json`` with
``"complete": false`` and the error text is left instead.
"""

import csv
import json
import logging
import math
import time
from dataclasses import replace

import numpy as np

from . import rng as rngs
from .compensatory import EvalRecord, run_compensatory, size_ratio
from .data import load_cifar10, partition, synthetic_blobs
from .evaluators import LANDSCAPES, SurrogateEvaluator, TrainingEvaluator
from .exceptions import ConfigError, SearchSpaceTooLarge
from .ga import enumerate_space, random_search
from .genome import Genome, search_space_size
from .nn.arch import ArchSpec
from .nn.checkpoint import save_checkpoint
from .report import FORMAT, VERSION, model_id, save_results, write_tables

log = logging.getLogger(__name__)

GEN_LOG = "generations.jsonl"


def load_data(cfg):
    """``(train, test)`` subsets selected by ``data.partition``."""
    v = cfg.values
    if v["data.source"] == "cifar10":
        train, test = load_cifar10(v["data.dir"])
    else:
        k = cfg.num_classes
        per_train = math.ceil(v["data.n_train"] / k)
        per_test = math.ceil(v["data.n_test"] / k)
        common = dict(num_classes=k, image_shape=cfg.image_shape,
                      separation=v["data.separation"], pattern_seed=v["seed"])
        train = synthetic_blobs(samples_per_class=per_train,
                                seed=rngs.derive_seed(v["seed"], "synthetic:train"), **common)
        test = synthetic_blobs(samples_per_class=per_test,
                               seed=rngs.derive_seed(v["seed"], "synthetic:test"), **common)
    return partition(v["data.partition"], train, test, v["data.n_train"], v["data.n_test"])


def evaluator_factory(cfg, data=None):
    """Return ``make_evaluator(arch)`` for the configured evaluator kind."""
    v = cfg.values
    if v["evaluator.kind"] == "surrogate":
        try:
            landscape = LANDSCAPES[v["evaluator.landscape"]]()
        except KeyError:
            raise ConfigError(f"unknown landscape {v['evaluator.landscape']!r}; "
                              f"choose from {sorted(LANDSCAPES)}") from None
        return lambda arch: SurrogateEvaluator(arch, landscape, v["fitness.w"])
    train, test = data if data is not None else load_data(cfg)
    train_cfg = cfg.train_config()
    return lambda arch: TrainingEvaluator(arch, train, test, train_cfg,
                                          v["ga.fitness_metric"], v["fitness.w"],
                                          v["evaluator.average"])


def _avg(values):
    values = [x for x in values if x is not None]
    return float(np.mean(values)) if values else None


def _model_entry(arch, search, variant, seconds, w, out_dir):
    best = search.best
    rec = best.evaluation.record if best.evaluation is not None else None
    records = [ind.evaluation.record for ind in search.evaluated
               if ind.evaluation is not None and ind.evaluation.record is not None]
    s = size_ratio(arch.n_conv_layers, arch.reference_layers)
    f = min(max(best.fitness, 0.0), 1.0)
    mid = model_id(arch.n_conv_layers, arch.reference_layers, variant)
    checkpoint = None
    model = best.evaluation.model if best.evaluation is not None else None
    if model is not None:
        path = out_dir / "checkpoints" / f"{mid}.npz"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(model, path)
        checkpoint = str(path.relative_to(out_dir))
    return {
        "model_id": mid,
        "variant": variant,
        "n_conv_layers": arch.n_conv_layers,
        "reference_layers": arch.reference_layers,
        "size_ratio": s,
        "param_bytes": arch.param_bytes(),
        "kilobytes": round(arch.param_bytes() / 1024),
        "best_genome": str(best.genome),
        "fitness": best.fitness,
        "alpha": w * f + (1 - w) * (1 - s),
        "failed": best.failed,
        "record": rec.to_dict() if rec is not None else None,
        "evaluations": search.evaluations,
        "unique_evaluations": len(search.evaluated),
        "history": [h.to_dict() for h in search.history],
        "avg_t_train_seconds": _avg([r.t_train_seconds for r in records]),
        "avg_t_predict_seconds": _avg([r.t_predict_seconds for r in records]),
        "search_seconds": seconds,
        "checkpoint": checkpoint,
    }


def _envelope(cfg, command):
    return {"format": FORMAT, "version": VERSION, "command": command,
            "complete": False, "error": None, "config": cfg.to_dict(),
            "models": [], "winner": None}


def _finish(results, cfg, start):
    results["wall_seconds"] = time.perf_counter() - start
    out = cfg.out_dir
    write_tables(results, out, cfg["report.formats"])
    results["complete"] = True
    save_results(results, out / "results.json")
    return results


def _guarded(command):
    """Write an incomplete ``results.json`` when the wrapped run raises."""

    def wrap(fn):
        def run(cfg, *args, **kwargs):
            cfg.out_dir.mkdir(parents=True, exist_ok=True)
            results = _envelope(cfg, command)
            try:
                return fn(cfg, results, *args, **kwargs)
            except BaseException as exc:
                results["complete"] = False
                results["error"] = f"{type(exc).__name__}: {exc}"
                try:
                    save_results(results, cfg.out_dir / "results.json")
                except Exception:  # pragma: no cover - best effort
                    log.exception("could not write partial results")
                raise
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_guarded("search")
def run_search(cfg, results):
    """Per-depth GA, compensatory selection and, optionally, the random baseline."""
    start = time.perf_counter()
    out = cfg.out_dir
    make_evaluator = evaluator_factory(cfg)
    ga_cfg = cfg.ga_config()
    w = cfg["fitness.w"]
    archs = cfg.arch_list()

    with open(out / GEN_LOG, "w") as gen_log:
        def on_generation(arch, rec):
            line = {"model_id": model_id(arch.n_conv_layers, arch.reference_layers, "ga"),
                    **rec.to_dict()}
            gen_log.write(json.dumps(line, sort_keys=True) + "\n")
            gen_log.flush()

        comp = run_compensatory(archs, make_evaluator, ga_cfg, w, cfg["jobs"], on_generation)

    for r in comp.per_arch:
        results["models"].append(_model_entry(r.arch, r.search, "ga", r.seconds, w, out))

    if cfg["baseline.compare"]:
        for arch in archs:
            bcfg = replace(ga_cfg, master_seed=rngs.derive_seed(
                ga_cfg.master_seed, "arch", arch.n_conv_layers))
            t0 = time.perf_counter()
            search = random_search(arch, make_evaluator(arch), bcfg, jobs=cfg["jobs"])
            results["models"].append(_model_entry(
                arch, search, "random", time.perf_counter() - t0, w, out))

    win = comp.winner
    results["winner"] = {
        "model_id": model_id(win.arch.n_conv_layers, win.arch.reference_layers, "ga"),
        "genome": str(win.best.genome),
        "n": win.arch.n_conv_layers,
        "m": win.arch.reference_layers,
        "S": win.size_ratio,
        "alpha": win.alpha,
        "fitness": win.best.fitness,
    }
    return _finish(results, cfg, start)


@_guarded("baseline")
def run_baseline(cfg, results):
    """Random search alone, with the GA's evaluation budget ``N * (M + 1)``."""
    start = time.perf_counter()
    make_evaluator = evaluator_factory(cfg)
    ga_cfg = cfg.ga_config()
    for arch in cfg.arch_list():
        bcfg = replace(ga_cfg, master_seed=rngs.derive_seed(
            ga_cfg.master_seed, "arch", arch.n_conv_layers))
        t0 = time.perf_counter()
        search = random_search(arch, make_evaluator(arch), bcfg, jobs=cfg["jobs"])
        results["models"].append(_model_entry(
            arch, search, "random", time.perf_counter() - t0, cfg["fitness.w"], cfg.out_dir))
    return _finish(results, cfg, start)


def space_summary(n, m):
    total, multi, single = search_space_size(n, m)
    return f"{total} genomes ({multi} multi-function, {single} single-function)"


@_guarded("enumerate")
def run_enumerate(cfg, results):
    """Score every genome of length ``enumerate.n`` and write a ranking.

    Refuses, before loading any data, when the space exceeds ``enumerate.cap``.
    """
    start = time.perf_counter()
    v = cfg.values
    n = v["enumerate.n"]
    fs = cfg.ga_config().function_set
    total, _, _ = search_space_size(n, len(fs))
    if total > v["enumerate.cap"]:
        raise SearchSpaceTooLarge(total, v["enumerate.cap"])
    arch = ArchSpec(n, max(n, v["arch.reference_m"]), v["arch.base_channels"],
                    cfg.num_classes, cfg.image_shape, v["arch.max_channels"])
    individuals = enumerate_space(n, fs, evaluator_factory(cfg)(arch), v["seed"],
                                  v["enumerate.cap"], v["jobs"])
    order = sorted(range(len(individuals)), key=lambda i: -individuals[i].fitness)
    with open(cfg.out_dir / "ranking.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "genome", "fitness", "single_function", "failed"])
        for rank, i in enumerate(order, 1):
            ind = individuals[i]
            writer.writerow([rank, str(ind.genome), repr(float(ind.fitness)),
                             int(ind.genome.is_single_function), int(ind.failed)])
    results["enumeration"] = {
        "n": n, "m": len(fs), "summary": space_summary(n, len(fs)),
        "best_genome": str(individuals[order[0]].genome),
        "best_fitness": individuals[order[0]].fitness,
        "ranking": "ranking.csv",
    }
    results["wall_seconds"] = time.perf_counter() - start
    results["complete"] = True
    save_results(results, cfg.out_dir / "results.json")
    return results


@_guarded("train")
def run_train(cfg, results, genome):
    """Train and score one genome; writes ``checkpoints/<model>.npz``."""
    start = time.perf_counter()
    genome = Genome.parse(genome) if isinstance(genome, str) else genome
    v = cfg.values
    n = len(genome)
    arch = ArchSpec(n, max(n, v["arch.reference_m"]), v["arch.base_channels"],
                    cfg.num_classes, cfg.image_shape, v["arch.max_channels"])
    train, test = load_data(cfg)
    evaluator = TrainingEvaluator(arch, train, test, cfg.train_config(),
                                  v["ga.fitness_metric"], v["fitness.w"], v["evaluator.average"])
    seed = rngs.derive_seed(v["seed"], f"eval:{genome}")
    evaluation = evaluator(genome, seed)
    rec = evaluation.record
    mid = model_id(n, arch.reference_layers, "single")
    path = cfg.out_dir / "checkpoints" / f"{mid}.npz"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(evaluation.model, path)
    s = size_ratio(n, arch.reference_layers)
    results["models"].append({
        "model_id": mid, "variant": "single", "n_conv_layers": n,
        "reference_layers": arch.reference_layers, "size_ratio": s,
        "param_bytes": arch.param_bytes(), "kilobytes": round(arch.param_bytes() / 1024),
        "best_genome": str(genome), "fitness": evaluation.fitness,
        "alpha": rec.alpha_train if v["ga.fitness_metric"] == "train_f1" else rec.alpha_test,
        "failed": False, "record": rec.to_dict(), "evaluations": 1,
        "unique_evaluations": 1, "history": [],
        "avg_t_train_seconds": rec.t_train_seconds,
        "avg_t_predict_seconds": rec.t_predict_seconds,
        "search_seconds": rec.t_train_seconds + rec.t_predict_seconds,
        "checkpoint": str(path.relative_to(cfg.out_dir)),
    })
    return _finish(results, cfg, start)


def record_of(entry):
    """The :class:`EvalRecord` stored on a results model entry, or ``None``."""
    rec = entry.get("record")
    return EvalRecord.from_dict(rec) if rec else None
