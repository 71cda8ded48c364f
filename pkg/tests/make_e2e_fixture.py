#!/usr/bin/env python3
"""Regenerate the committed end-to-end fixture.

Run from the repository root:

    python3 tests/make_e2e_fixture.py

Writes tests/fixtures/e2e/: synthetic inputs, a replay cache recorded
against the deterministic stub provider, and the expected replay-mode
reports that the offline acceptance test compares byte-for-byte.
"""
import shutil
import sys
from pathlib import Path

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

import e2efixture  # noqa: E402
from semleak.clients import ChatClient, FailOnUseTransport, ReplayCache  # noqa: E402
from semleak.pipeline.config import ExperimentConfig  # noqa: E402
from semleak.pipeline.runs import run_adaptive_attack, run_caption_attack  # noqa: E402


def main() -> int:
    root = TESTS_DIR / "fixtures" / "e2e"
    if root.exists():
        shutil.rmtree(root)
    e2efixture.build_inputs(root)

    cache_path = root / "replay_cache.jsonl"

    # pass 1: record every response from the stub provider (single worker so
    # the cache file order is stable)
    import json

    raw = json.loads((root / "config.json").read_text(encoding="utf-8"))
    record_raw = dict(raw)
    record_raw["client"] = dict(raw["client"], mode="record")
    record_raw["workers"] = 1
    record_cfg = ExperimentConfig.from_dict(record_raw, base=root)
    record_cfg.output_dir = str(root / "_record_out")
    client = ChatClient("stub", "stub-model", mode="record",
                        cache=ReplayCache(cache_path),
                        transport=e2efixture.stub_transport,
                        base_url="https://stub.invalid/v1", concurrency=2)
    run_caption_attack(record_cfg, client)
    run_adaptive_attack(record_cfg, client)
    shutil.rmtree(record_cfg.output_dir)

    # pass 2: replay offline to produce the committed expected reports
    replay_cfg = ExperimentConfig.from_file(root / "config.json")
    replay_client = ChatClient("stub", "stub-model", mode="replay",
                               cache=ReplayCache(cache_path),
                               transport=FailOnUseTransport(),
                               concurrency=2)
    run_caption_attack(replay_cfg, replay_client)
    run_adaptive_attack(replay_cfg, replay_client)

    n_files = len(list((root / "expected").iterdir()))
    print(f"fixture written to {root} ({n_files} expected artifacts, "
          f"{sum(1 for _ in open(cache_path))} cached responses)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
