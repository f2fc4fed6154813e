"""Exit codes and flag handling for the embed command."""

import json

from embedder_sidecar.cli import main


def args_for(tmp_path, *extra):
    return [
        "--in", str(tmp_path / "texts.jsonl"),
        "--out", str(tmp_path / "emb.sseb"),
        "--ids", str(tmp_path / "emb.ids"),
        "--model", "hashed/8",
        *extra,
    ]


def write_texts(tmp_path, rows):
    with (tmp_path / "texts.jsonl").open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


def test_success(tmp_path):
    write_texts(tmp_path, [{"id": "a", "text": "hello"}])
    assert main(args_for(tmp_path)) == 0
    assert (tmp_path / "emb.sseb").exists()
    assert (tmp_path / "emb.ids").read_text() == "a\n"


def test_missing_input_is_exit_2(tmp_path, capsys):
    assert main(args_for(tmp_path)) == 2
    assert "texts.jsonl" in capsys.readouterr().err


def test_bad_batch_is_exit_2(tmp_path, capsys):
    write_texts(tmp_path, [{"id": "a", "text": "hello"}])
    assert main(args_for(tmp_path, "--batch", "0")) == 2
    assert "batch" in capsys.readouterr().err


def test_bad_model_spec_is_exit_2(tmp_path, capsys):
    write_texts(tmp_path, [{"id": "a", "text": "hello"}])
    assert main(args_for(tmp_path)[:-2] + ["--model", "hashed/x"]) == 2
    assert "hashed" in capsys.readouterr().err


def test_duplicate_id_is_exit_1(tmp_path, capsys):
    write_texts(tmp_path, [{"id": "a", "text": "one"}, {"id": "a", "text": "two"}])
    assert main(args_for(tmp_path)) == 1
    assert "duplicate id" in capsys.readouterr().err


def test_invalid_log_level_notes_and_runs(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EMBEDDER_LOG", "loud")
    write_texts(tmp_path, [{"id": "a", "text": "hello"}])
    assert main(args_for(tmp_path)) == 0
    assert "EMBEDDER_LOG" in capsys.readouterr().err
