import json

import pytest

from cmcnn.config import ExperimentConfig
from cmcnn.exceptions import FormatError, ReportingError
from cmcnn.experiment import run_search
from cmcnn.report import (load_results, model_id, render_csv, render_json, render_text,
                          save_results, strip_timing, write_tables)


@pytest.fixture(scope="module")
def results(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = ExperimentConfig.build({"evaluator.kind": "surrogate", "ga.generations": 3,
                                  "out": str(out), "data.source": "synthetic"})
    return run_search(cfg), out


def test_model_ids():
    assert model_id(4, 10, "ga") == "CM4_GA"
    assert model_id(10, 10, "ga") == "M10_GA"
    assert model_id(6, 10, "random") == "CM6"


def test_results_document(results):
    res, out = results
    assert res["complete"] and res["error"] is None
    assert [m["model_id"] for m in res["models"]] == [
        "CM4_GA", "CM6_GA", "CM8_GA", "M10_GA", "CM4", "CM6", "CM8", "M10"]
    w = res["winner"]
    ga = [m for m in res["models"] if m["variant"] == "ga"]
    assert w["alpha"] == max(m["alpha"] for m in ga)
    assert load_results(out / "results.json") == json.loads(json.dumps(res))
    for name in ("tables.csv", "tables.txt", "tables.json", "generations.jsonl"):
        assert (out / name).is_file()
    lines = (out / "generations.jsonl").read_text().splitlines()
    assert len(lines) == 4 * 4  # four depths, generations 0..3


def test_text_table_layout(results):
    text = render_text(results[0])
    assert "Model:" in text and "F1_train" in text and "Fit_test" in text
    assert "Selected: " + results[0]["winner"]["model_id"] in text
    assert "*" in text


def test_csv_and_json_cells_agree(results):
    res = results[0]
    rows = render_csv(res).splitlines()
    cells = json.loads(render_json(res))
    assert rows[0] == "table,metric,model_id,value,flagged"
    assert len(rows) - 1 == len(cells) == 8 * 6 + 8 * 4
    flagged = [c for c in cells if c["flagged"]]
    assert {c["metric"] for c in flagged} == {"F1_train", "F1_test", "Fit_train", "Fit_test"}


def test_strip_timing():
    doc = {"a_seconds": 1, "b": [{"c_seconds": 2, "d": 3}], "e": {"f": 1}}
    assert strip_timing(doc) == {"b": [{"d": 3}], "e": {"f": 1}}


def test_load_rejects_other_files(tmp_path, results):
    p = tmp_path / "r.json"
    p.write_text("{}")
    with pytest.raises(FormatError):
        load_results(p)
    doc = dict(results[0], version=99)
    save_results(doc, p)
    with pytest.raises(FormatError, match="version 99"):
        load_results(p)
    p.write_text("not json")
    with pytest.raises(FormatError):
        load_results(p)
    with pytest.raises(FormatError):
        load_results(tmp_path / "missing.json")


def test_unknown_table_format(tmp_path, results):
    with pytest.raises(ReportingError):
        write_tables(results[0], tmp_path, ["xml"])


def test_missing_record_is_reported(results):
    doc = json.loads(json.dumps(results[0]))
    doc["models"][1]["record"] = None
    with pytest.raises(ReportingError, match="CM6_GA"):
        render_text(doc)


def test_write_read_write_is_byte_stable(tmp_path, results):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_results(results[0], a)
    save_results(load_results(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_emitted_alphas_recompute_from_f_and_s(results):
    from cmcnn.compensatory import alpha

    cells = json.loads(render_json(results[0]))
    comp = {(c["metric"], c["model_id"]): c["value"] for c in cells if c["table"] == "comparison"}
    for m in results[0]["models"]:
        rec, mid = m["record"], m["model_id"]
        s = m["size_ratio"]
        assert comp[("Fit_train", mid)] == alpha(comp[("F1_train", mid)], s, rec["w"])
        assert comp[("Fit_test", mid)] == alpha(comp[("F1_test", mid)], s, rec["w"])
    w = results[0]["winner"]
    assert w["alpha"] == alpha(w["fitness"], w["S"], results[0]["config"]["fitness.w"])


def test_size_ratio_row_for_the_default_grid(results):
    cells = json.loads(render_json(results[0]))
    s_row = [c["value"] for c in cells if c["metric"] == "S" and c["model_id"].endswith("_GA")]
    assert s_row == [0.4, 0.6, 0.8, 1.0]


def test_winner_genome_is_hyphenated(results):
    g = results[0]["winner"]["genome"]
    assert len(g.split("-")) == results[0]["winner"]["n"]
    assert f"genome={g}" in render_text(results[0])


def test_rerun_gives_identical_tables_without_timing(tmp_path):
    docs = []
    for name in ("one", "two"):
        cfg = ExperimentConfig.build({"evaluator.kind": "surrogate", "ga.generations": 2,
                                      "out": str(tmp_path / name), "data.source": "synthetic"})
        res = run_search(cfg)
        res["config"].pop("out")
        docs.append(json.dumps(strip_timing(res), sort_keys=True))
        assert (tmp_path / name / "tables.json").is_file()
    assert docs[0] == docs[1]
