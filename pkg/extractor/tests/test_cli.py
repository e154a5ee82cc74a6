"""Extractor CLI: exit codes and end-to-end file handoff."""

import json

from sempool.fileio import read_embeddings

from sempool_extractor.cli import main


def test_text_command_end_to_end(tmp_path):
    manifest = tmp_path / "prompts.jsonl"
    manifest.write_text(
        json.dumps({"label": "cat", "kind": "original", "prompts": ["the cat."]}) + "\n",
        encoding="utf-8",
    )
    out = tmp_path / "labels.emb"
    code = main(["text", "--manifest", str(manifest), "--out", str(out), "--model", "hash-24"])
    assert code == 0
    assert read_embeddings(out).count == 1


def test_images_command_end_to_end(tmp_path):
    root = tmp_path / "imgs"
    root.mkdir()
    (root / "a.png").write_bytes(b"not-really-a-png")
    out = tmp_path / "imgs.emb"
    assert main(["images", "--dir", str(root), "--out", str(out)]) == 0
    assert read_embeddings(out).count == 1


def test_bad_input_exit_code(tmp_path):
    code = main(["text", "--manifest", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "o")])
    assert code == 2
