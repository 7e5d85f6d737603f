"""Result files and rendered tables.

``results.json`` layout (``"format": "cmcnn-results"``, ``"version": 1``)::

    {
      "format": "cmcnn-results", "version": 1,
      "command": "search", "complete": true, "error": null,
      "config": {...flat dotted keys...},
      "models": [
        {"model_id": "CM4_GA", "variant": "ga", "n_conv_layers": 4,
         "reference_layers": 10, "size_ratio": 0.4, "param_bytes": 67944,
         "kilobytes": 66, "best_genome": "RELU-SIG-TANH-ELU", "fitness": 0.85,
         "alpha": 0.775, "failed": false, "record": {...EvalRecord...},
         "evaluations": 24, "unique_evaluations": 19, "history": [...],
         "avg_t_train_seconds": 1.2, "avg_t_predict_seconds": 0.1,
         "search_seconds": 30.5, "checkpoint": "checkpoints/CM4_GA.npz"},
        ...
      ],
      "winner": {...summary of the highest-alpha GA model...},
      "wall_seconds": 123.4
    }

Every key ending in ``_seconds`` is a wall-clock measurement; everything
else is a deterministic function of the config.
"""

import csv
import io
import json
from pathlib import Path

from .compensatory import METRIC_ROWS, EvalRecord, build_comparison_table
from .exceptions import FormatError, ReportingError

FORMAT = "cmcnn-results"
VERSION = 1
TIMING_SUFFIX = "_seconds"


def model_id(n_conv_layers, reference_layers, variant):
    base = f"M{n_conv_layers}" if n_conv_layers == reference_layers else f"CM{n_conv_layers}"
    return f"{base}_GA" if variant == "ga" else base


def dumps(results):
    return json.dumps(results, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_results(results, path):
    path = Path(path)
    path.write_text(dumps(results))
    return path


def load_results(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: unreadable results file ({exc})") from exc
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise FormatError(f"{path}: not a {FORMAT} file")
    if data.get("version") != VERSION:
        raise FormatError(
            f"{path}: results version {data.get('version')} is not supported "
            f"(this build reads version {VERSION})")
    for key in ("models", "config", "complete"):
        if key not in data:
            raise FormatError(f"{path}: missing required key {key!r}")
    return data


def strip_timing(obj):
    """Copy of ``obj`` without any ``*_seconds`` entries, at any depth."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if not k.endswith(TIMING_SUFFIX)}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def _sort_key(m):
    return (m["n_conv_layers"], 0 if m["variant"] == "ga" else 1)


def ordered_models(results):
    return sorted(results["models"], key=_sort_key)


def comparison_table(results):
    models = ordered_models(results)
    records = {}
    for m in models:
        rec = m.get("record")
        records[m["model_id"]] = EvalRecord.from_dict(rec) if rec else None
    return build_comparison_table(records, [m["model_id"] for m in models])


def properties_rows(results):
    """Rows of the model-properties table as ``(label, [values])``."""
    models = ordered_models(results)

    def col(key):
        return [m.get(key) for m in models]

    return [m["model_id"] for m in models], [
        ("No. of CLs", col("n_conv_layers")),
        ("Model Size (KB)", col("kilobytes")),
        ("S", col("size_ratio")),
        ("Avg. T_train per model (s)", col("avg_t_train_seconds")),
        ("Total search time (s)", col("search_seconds")),
        ("Avg. T_predict (s)", col("avg_t_predict_seconds")),
    ]


def table_cells(results):
    """Long-form cells of both tables: dicts with table, metric, model_id, value, flagged."""
    cells = []
    ids, rows = properties_rows(results)
    for label, values in rows:
        for mid, v in zip(ids, values):
            cells.append({"table": "properties", "metric": label, "model_id": mid,
                          "value": v, "flagged": False})
    table = comparison_table(results)
    for metric, mid, v, flag in table.cells():
        cells.append({"table": "comparison", "metric": metric, "model_id": mid,
                      "value": v, "flagged": bool(flag)})
    return cells


def render_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["table", "metric", "model_id", "value", "flagged"])
    for c in table_cells(results):
        v = "" if c["value"] is None else repr(c["value"])
        writer.writerow([c["table"], c["metric"], c["model_id"], v, int(c["flagged"])])
    return buf.getvalue()


def render_json(results):
    return json.dumps(table_cells(results), indent=2, sort_keys=True) + "\n"


def _fmt(v, digits=3):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def _grid(header, rows):
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    line = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)  # noqa: E731
                               for i, (c, w) in enumerate(zip(r, widths)))
    return "\n".join([line(header), "  ".join("-" * w for w in widths),
                      *(line(r) for r in rows)])


def render_text(results):
    """Aligned plain-text properties and comparison tables; ``*`` marks row maxima."""
    ids, rows = properties_rows(results)
    digits = {"S": 1, "Avg. T_predict (s)": 2}
    prop = _grid(["Model:", *ids],
                 [[label, *(_fmt(v, digits.get(label, 1)) for v in vals)]
                  for label, vals in rows])
    table = comparison_table(results)
    comp = _grid(["Model:", *table.models],
                 [[metric, *(_fmt(v) + ("*" if f else " ")
                             for v, f in zip(table.rows[metric], table.flags[metric]))]
                  for metric in METRIC_ROWS])
    parts = ["Properties of different models", prop, "",
             "Model comparisons (* = best in row)", comp]
    if results.get("winner"):
        w = results["winner"]
        parts += ["", f"Selected: {w['model_id']} genome={w['genome']} "
                      f"n={w['n']} m={w['m']} S={w['S']:.1f} alpha={w['alpha']:.4f}"]
    return "\n".join(parts) + "\n"


RENDERERS = {"txt": render_text, "csv": render_csv, "json": render_json}


def write_tables(results, out_dir, formats=("json", "csv", "txt")):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        try:
            text = RENDERERS[fmt](results)
        except KeyError:
            raise ReportingError(f"unknown table format {fmt!r}") from None
        path = out_dir / f"tables.{fmt}"
        path.write_text(text)
        written.append(path)
    return written
