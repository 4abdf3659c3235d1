from __future__ import annotations

import json
from pathlib import Path

import pytest

from smartvector.cli import build_parser, main
from smartvector.core import VectorStore

GOLDEN_DEMO = Path(__file__).parent / "golden" / "demo.txt"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments_prints_usage(capsys):
    code, out, err = run(capsys)
    assert code != 0
    assert "usage" in (out + err).lower()


def test_help_shows_defaults(capsys):
    top = build_parser().format_help()
    for cmd in ("gen", "consolidate", "update", "query", "feedback", "eval", "ablate", "sweep", "tune", "cost", "demo"):
        assert cmd in top
    with pytest.raises(SystemExit) as exc:
        main(["query", "--help"])
    assert exc.value.code == 0
    text = " ".join(capsys.readouterr().out.split())
    assert "(default: 0.35,0.25,0.25,0.15)" in text
    assert "(default: 30.0)" in text
    assert "(default: 0.15)" in text


def test_demo_matches_golden(capsys):
    code, out, _ = run(capsys, "demo")
    assert code == 0
    assert "penalty 0.150" in out and "penalty 0.075" in out
    assert "(CONFLICTS WITH DOC 1)" in out
    assert out == GOLDEN_DEMO.read_text(encoding="utf-8")


def test_workflow_round_trip(tmp_path, capsys):
    store = tmp_path / "store.json"
    queries = tmp_path / "queries.json"
    files = ("--store", str(store), "--queries", str(queries))
    code, out, _ = run(capsys, "gen", *files)
    assert code == 0 and "258 vectors" in out and "138 queries" in out
    assert VectorStore.load(store).dumps() == store.read_text()

    code, out, _ = run(capsys, "consolidate", "--store", str(store), "--now", "2026-01-15T00:00:00Z",
                       "--report", str(tmp_path / "cons.json"))
    assert code == 0 and "promoted" in out
    assert json.loads((tmp_path / "cons.json").read_text())["counts"]["promoted"] == 18

    code, out, _ = run(capsys, "query", "What is the current parental leave?", "--store", str(store), "-k", "2")
    assert code == 0 and "Document 2" in out

    code, out, _ = run(capsys, "eval", *files, "--report", str(tmp_path / "eval.json"), "--check")
    assert "M4_smart_default" in out
    report = json.loads((tmp_path / "eval.json").read_text())
    assert [m["name"] for m in report["methods"]] == ["M1_plain", "M2_temporal", "M3_confidence", "M4_smart_default"]


def test_update_and_feedback(tmp_path, capsys):
    store = tmp_path / "store.json"
    run(capsys, "gen", "--store", str(store), "--queries", str(tmp_path / "q.json"))
    loaded = VectorStore.load(store)
    doc = next(iter(loaded.by_doc))
    text = loaded.doc_text(doc)
    code, out, _ = run(capsys, "update", "--store", str(store), "--doc", doc, "--text", text + " Revised.")
    assert code == 0 and "1 re-embedded" in out
    vid = VectorStore.load(store).doc_chunks(doc)[0].vector_id
    code, out, _ = run(capsys, "feedback", vid, "down", "--store", str(store))
    assert code == 0 and "-1" in out


def test_errors_exit_nonzero(tmp_path, capsys):
    code, _, err = run(capsys, "query", "x", "--store", str(tmp_path / "missing.json"))
    assert code == 1 and err
    bad = tmp_path / "cfg.json"
    bad.write_text('{"bogus": 1}')
    with pytest.raises(SystemExit):
        main(["cost", "--config", str(bad)])


def test_config_file_overrides(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"seed": 7, "gamma": 0.2}')
    code, out, _ = run(capsys, "cost", "--config", str(cfg), "--report", str(tmp_path / "c.json"))
    assert code == 0
    assert json.loads((tmp_path / "c.json").read_text())["cost"]["mean_smart"] == 1.0
