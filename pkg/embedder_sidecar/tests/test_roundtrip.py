"""Round-trip acceptance: sidecar output loads in the curation core."""

import json

import numpy as np
from procurate.embedindex import load_embeddings

from embedder_sidecar.cli import main
from embedder_sidecar.sseb import read_rows


def test_hundred_texts_round_trip_through_core(tmp_path):
    texts = tmp_path / "texts.jsonl"
    ids = []
    with texts.open("w", encoding="utf-8") as f:
        for i in range(100):
            text_id = f"t{i:03d}"
            ids.append(text_id)
            if i in (40, 41, 42):
                text = "preheat the oven to 180 degrees"  # deliberate duplicates
            elif i == 77:
                text = ""
            else:
                text = f"step {i}: stir the mixture for {i} seconds"
            f.write(json.dumps({"id": text_id, "text": text}) + "\n")

    out = tmp_path / "emb.sseb"
    out_ids = tmp_path / "emb.ids"
    assert main([
        "--in", str(texts), "--out", str(out), "--ids", str(out_ids),
        "--model", "hashed/32", "--batch", "16",
    ]) == 0

    matrix = load_embeddings(out, out_ids)
    assert len(matrix.ids) == 100
    assert matrix.rows.shape == (100, 32)
    assert list(matrix.ids) == ids

    raw = read_rows(out)
    norms = np.linalg.norm(raw.astype(np.float64), axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-4)

    assert np.array_equal(raw[40], raw[41])
    assert np.array_equal(raw[40], raw[42])
    assert not np.array_equal(raw[40], raw[43])
    print("ACCEPTANCE PASS: 100 sidecar-embedded texts load in the core, "
          "normalized and id-aligned, duplicates bit-identical")
