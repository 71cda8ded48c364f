"""CLI verbs and exit codes."""
import json
from pathlib import Path

import numpy as np

from semleak.cli import main
from semleak.store import EmbeddingMatrix, l2_normalize, load_embedding_matrix, load_tags

FIXTURE = Path(__file__).resolve().parent / "fixtures" / "e2e"


def _save_random(path, rows=20, dim=6, seed=0, prefix="i"):
    rng = np.random.default_rng(seed)
    m = EmbeddingMatrix([f"{prefix}{k}" for k in range(rows)],
                        rng.normal(size=(rows, dim)))
    m.save(path)
    return m


def test_ingest_summary(tmp_path, capsys):
    _save_random(tmp_path / "e.embmat")
    code = main(["ingest", "--embeddings", str(tmp_path / "e.embmat"),
                 "--tags", str(FIXTURE / "tags.jsonl"),
                 "--captions", str(FIXTURE / "captions.jsonl"),
                 "--seed", "3", "--val-n", "5", "--test-n", "5"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["embeddings"]["normalized"] is True
    assert summary["tags"]["records"] == 9
    assert summary["split"] == {"train": 10, "val": 5, "test": 5, "seed": 3}


def test_ingest_no_normalize_writes_raw(tmp_path, capsys):
    original = _save_random(tmp_path / "e.embmat")
    code = main(["ingest", "--embeddings", str(tmp_path / "e.embmat"),
                 "--no-normalize", "--out", str(tmp_path / "copy.embmat")])
    assert code == 0
    copied = load_embedding_matrix(tmp_path / "copy.embmat")
    assert np.array_equal(copied.values,
                          original.values.astype(np.float32).astype(np.float64))


def test_ingest_without_inputs_is_config_error(capsys):
    assert main(["ingest"]) == 2


def test_missing_embeddings_file_is_data_error(tmp_path):
    assert main(["ingest", "--embeddings", str(tmp_path / "nope.embmat")]) == 3


def test_align_fit_and_apply(tmp_path, capsys):
    rng = np.random.default_rng(1)
    victim = l2_normalize(EmbeddingMatrix(
        [f"i{k}" for k in range(30)], rng.normal(size=(30, 5))))
    attack = l2_normalize(EmbeddingMatrix(
        [f"i{k}" for k in range(30)], rng.normal(size=(30, 4))))
    victim.save(tmp_path / "v.embmat")
    attack.save(tmp_path / "a.embmat")
    code = main(["align", "fit", "--victim", str(tmp_path / "v.embmat"),
                 "--attack", str(tmp_path / "a.embmat"),
                 "--samples", "20", "--solver", "svd_pinv",
                 "--out", str(tmp_path / "map.embmat")])
    assert code == 0
    info = json.loads(capsys.readouterr().out)
    assert info["samples_used"] == 20
    assert (tmp_path / "map.embmat.json").exists()

    code = main(["align", "apply", "--embeddings", str(tmp_path / "v.embmat"),
                 "--map", str(tmp_path / "map.embmat"),
                 "--out", str(tmp_path / "aligned.embmat")])
    assert code == 0
    aligned = load_embedding_matrix(tmp_path / "aligned.embmat")
    assert aligned.dim == 4 and aligned.rows == 30


def test_retriever_train_and_retrieve(tmp_path, capsys):
    code = main(["retriever-train",
                 "--tags", str(FIXTURE / "tags.jsonl"),
                 "--img-emb", str(FIXTURE / "attack.embmat"),
                 "--tag-emb", str(FIXTURE / "tag_emb.embmat"),
                 "--config", str(_train_config(tmp_path)),
                 "--stage", "both",
                 "--out", str(tmp_path / "ckpt")])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["stage"] == "both"
    assert (tmp_path / "ckpt" / "manifest.json").exists()

    code = main(["retrieve", "--embeddings", str(FIXTURE / "attack.embmat"),
                 "--tag-emb", str(FIXTURE / "tag_emb.embmat"),
                 "--checkpoint", str(tmp_path / "ckpt"),
                 "--k", "5", "--by", "ranker",
                 "--out", str(tmp_path / "hits.jsonl")])
    assert code == 0
    rows = [json.loads(l) for l in
            (tmp_path / "hits.jsonl").read_text().splitlines()]
    assert len(rows) == 9
    assert all(len(r["topk"]) == 5 for r in rows)


def _train_config(tmp_path):
    path = tmp_path / "train.json"
    path.write_text(json.dumps({
        "proj_epochs": 2, "ranker_epochs": 2, "batch_size": 4,
        "proj_lr": 0.1, "ranker_lr": 0.05, "hard_negatives": 4,
        "ranker_negatives": 8, "seed": 3,
    }))
    return path


def test_attack_captions_via_cli_and_provider_error(tmp_path):
    raw = json.loads((FIXTURE / "config.json").read_text())
    raw["output_dir"] = str(tmp_path / "out")
    cfg_path = tmp_path / "config.json"
    # paths in the committed config are relative to the fixture dir
    for key in ("attack_embeddings", "tag_embeddings", "tags", "captions"):
        raw["data"][key] = str(FIXTURE / raw["data"][key])
    raw["data"]["victim_embeddings"] = {
        "victim_a": str(FIXTURE / "victim.embmat")}
    raw["client"]["cache_path"] = str(FIXTURE / "replay_cache.jsonl")
    raw["adaptive"]["image_dir"] = str(FIXTURE / "images")
    raw["adaptive"]["reference_image_dir"] = str(FIXTURE / "ref_images")
    cfg_path.write_text(json.dumps(raw))
    assert main(["attack-captions", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "out" / "caption_attack.json").exists()
    assert main(["attack-adaptive", "--config", str(cfg_path)]) == 0

    # an empty replay cache in replay mode -> CacheMiss -> exit 4
    empty_cache = tmp_path / "empty.jsonl"
    empty_cache.write_text("")
    raw["client"]["cache_path"] = str(empty_cache)
    raw["output_dir"] = str(tmp_path / "out2")
    cfg_path.write_text(json.dumps(raw))
    assert main(["attack-captions", "--config", str(cfg_path)]) == 4


def test_bad_config_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    assert main(["attack-captions", "--config", str(path)]) == 2


def test_report_renders_markdown(tmp_path, capsys):
    report = {"manifest": {"config_hash": "abc", "seed": 1, "mode": "replay",
                           "prompt_templates": ["x-v1"]},
              "rows": [{"victim": "v", "b": 1, "mean_cosine": 0.5}]}
    src = tmp_path / "r.json"
    src.write_text(json.dumps(report))
    code = main(["report", "--json", str(src), "--title", "T",
                 "--out", str(tmp_path / "r.md")])
    assert code == 0
    text = (tmp_path / "r.md").read_text()
    assert text.startswith("# T")
    assert "mean_cosine" in text


def test_tag_validation_via_ingest(tmp_path):
    bad = tmp_path / "tags.jsonl"
    bad.write_text('{"image_id": "x"}\n')
    assert main(["ingest", "--tags", str(bad)]) == 3
    good = tmp_path / "good.jsonl"
    good.write_text('# header\n{"image_id": "x", "tags": ["wooden table"]}\n')
    assert main(["ingest", "--tags", str(good)]) == 0
    assert load_tags(good)[0].tags == ["wooden table"]