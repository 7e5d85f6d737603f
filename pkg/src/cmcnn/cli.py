"""Command-line entry point: ``cmcnn {search,baseline,enumerate,report,train}``.

Every config key is a flag of the same name (``--ga.generations 10``), and
the common ones have short aliases (``--generations 10``). Precedence is
command line, then ``--config`` file, then built-in defaults. When no data
directory is configured anywhere, ``$CMCNN_DATA_DIR`` is used.

Exit status is 0 only after every artifact has been written. Failures print
a one-line JSON diagnostic to stderr and exit 1 (runtime) or 2 (bad
configuration or input).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import DEFAULTS, ExperimentConfig
from .exceptions import (CMCNNError, ConfigError, DataError, DomainError,
                         GenomeArityError, SearchSpaceTooLarge)
from .experiment import (run_baseline, run_enumerate, run_search, run_train,
                         space_summary)
from .genome import Genome
from .report import load_results, render_text, write_tables

ALIASES = {
    "data.dir": "--data-dir",
    "data.partition": "--partition",
    "data.n_train": "--n-train",
    "data.n_test": "--n-test",
    "arch.grid": "--arch-grid",
    "arch.reference_m": "--reference-m",
    "fitness.w": "--w",
    "ga.population": "--population",
    "ga.generations": "--generations",
    "ga.mutation_prob": "--mutation-prob",
    "train.epochs": "--epochs",
    "evaluator.kind": "--evaluator",
    "seed": "--seed",
    "jobs": "--jobs",
    "out": "--out",
}

USAGE_ERRORS = (ConfigError, DomainError, GenomeArityError, DataError, SearchSpaceTooLarge)


def _add_config_flags(parser):
    group = parser.add_argument_group("configuration (flat dotted keys)")
    group.add_argument("--config", metavar="FILE", help="YAML file of dotted keys")
    for key, default in DEFAULTS.items():
        flags = [f"--{key}"]
        if key in ALIASES and ALIASES[key] != flags[0]:
            flags.insert(0, ALIASES[key])
        shown = ",".join(map(str, default)) if isinstance(default, list) else default
        group.add_argument(*flags, dest=key, default=argparse.SUPPRESS, metavar="V",
                           help=f"(default: {shown})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cmcnn", description="Genetic search over per-layer activations of compressed CNNs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="GA per depth, then compensatory selection")
    _add_config_flags(p)
    p = sub.add_parser("baseline", help="random search with the GA's evaluation budget")
    _add_config_flags(p)
    p = sub.add_parser("enumerate", help="score every genome of one length")
    _add_config_flags(p)
    p = sub.add_parser("train", help="train and score a single genome")
    p.add_argument("--genome", required=True, help="e.g. RELU-SIG-TANH-ELU")
    _add_config_flags(p)
    p = sub.add_parser("report", help="render tables from a results.json")
    p.add_argument("results", help="results.json file or the directory holding it")
    p.add_argument("--formats", default="json,csv,txt", help="comma list of json,csv,txt")
    p.add_argument("--to", metavar="DIR", help="output directory (default: beside results)")
    return parser


def config_from_args(args):
    overrides = {k: v for k, v in vars(args).items() if k in DEFAULTS}
    return ExperimentConfig.from_file(getattr(args, "config", None), overrides)


def _diagnose(exc, code):
    print(json.dumps({"complete": False, "error": type(exc).__name__, "message": str(exc),
                      "exit_code": code}), file=sys.stderr)
    return code


def _report(args):
    path = Path(args.results)
    if path.is_dir():
        path = path / "results.json"
    results = load_results(path)
    formats = [f for f in args.formats.split(",") if f]
    write_tables(results, Path(args.to) if args.to else path.parent, formats)
    if not results["complete"]:
        print(f"warning: {path} is marked incomplete: {results.get('error')}", file=sys.stderr)
    if results["models"]:
        sys.stdout.write(render_text(results))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return _report(args)
        cfg = config_from_args(args)
        if args.command == "search":
            results = run_search(cfg)
            sys.stdout.write(render_text(results))
        elif args.command == "baseline":
            results = run_baseline(cfg)
            sys.stdout.write(render_text(results))
        elif args.command == "enumerate":
            fs = cfg.ga_config().function_set
            print(space_summary(cfg["enumerate.n"], len(fs)))
            results = run_enumerate(cfg)
            e = results["enumeration"]
            print(f"best {e['best_genome']} fitness={e['best_fitness']:.4f}; "
                  f"ranking in {cfg.out_dir / e['ranking']}")
        elif args.command == "train":
            results = run_train(cfg, Genome.parse(args.genome))
            rec = results["models"][0]["record"]
            print(f"{results['models'][0]['model_id']} {args.genome}: "
                  f"F1_train={rec['f1_train']:.4f} F1_test={rec['f1_test']:.4f}")
        return 0
    except USAGE_ERRORS as exc:
        return _diagnose(exc, 2)
    except (CMCNNError, ValueError, OSError, FloatingPointError) as exc:
        return _diagnose(exc, 1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
