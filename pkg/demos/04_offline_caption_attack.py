#!/usr/bin/env python3
"""The full attack pipeline, offline: replaying recorded model responses.

Uses the committed fixture under tests/fixtures/e2e (synthetic embeddings,
a recorded response cache) to run the caption-reconstruction and adaptive
scene attacks without any network access, then prints the headline scores.

Run:  python3 demos/04_offline_caption_attack.py
"""
import json
import tempfile
from pathlib import Path

from semleak.clients import ChatClient, FailOnUseTransport, ReplayCache
from semleak.pipeline.config import ExperimentConfig
from semleak.pipeline.runs import run_adaptive_attack, run_caption_attack

fixture = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "e2e"
raw = json.loads((fixture / "config.json").read_text())
config = ExperimentConfig.from_dict(raw, base=fixture)
config.output_dir = tempfile.mkdtemp(prefix="semleak-demo-")

client = ChatClient("stub", "stub-model", mode="replay",
                    cache=ReplayCache(fixture / "replay_cache.jsonl"),
                    transport=FailOnUseTransport(), concurrency=2)

captions = run_caption_attack(config, client)
adaptive = run_adaptive_attack(config, client)

print(f"reports written to {config.output_dir}\n")
print("caption reconstruction (best-match ROUGE-L):")
for row in captions["scores"]:
    if row["metric"] == "rougeL" and row["K"] == config.K:
        print(f"  b={row['b']:>2} vs {row['reference']}: {row['value']:6.2f}")

print("\nadaptive attack (per conditioning setting, scene/triple F1):")
for row in adaptive["structured_scores"]:
    print(f"  {row['setting']:>22}: scenes {row['scenes_f1']:.2f}  "
          f"triples {row['triples_f1']:.2f}  objects {row['objects_f1']:.2f}")

print("\nablation (captions regenerated from scene parts, ROUGE-L vs C_gt):")
for row in adaptive["ablation"]:
    if row["metric"] == "rougeL" and row["reference"] == "C_gt":
        print(f"  {row['conditioning']:>26}: {row['value']:6.2f}")
