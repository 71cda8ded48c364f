"""Acceptance for the caption-to-tags extractor.

Three checks: the committed indoor caption yields its two expected
attribute pairs; the mean tag yield over the committed 200-caption corpus
sits within +/-40% of 14.3 tags per image; and the emitted file loads
error-free in the embedding pipeline, exercised through its installed CLI
(the JSONL format is the only interface between the two packages).
"""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from tagextract import extract_tags
from tagextract.cli import process_file

FIXTURE = Path(__file__).resolve().parent / "fixtures" / "coco_style_captions.jsonl"


def _report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE 12 {name}: {status}" + (f"  [{detail}]" if detail else ""))
    assert ok, f"{name} failed: {detail}"


def test_12a_known_caption_pairs():
    tags = extract_tags("A kitchen with a wooden table surrounded by black chairs.")
    ok = "wooden table" in tags and "black chair" in tags
    _report("tag-extraction-known-caption", ok, f"tags={tags}")


def test_12b_mean_tags_per_image_band(tmp_path):
    out = tmp_path / "tags.jsonl"
    summary = process_file(FIXTURE, out)
    mean = summary["mean_tags_per_image"]
    low, high = 14.3 * 0.6, 14.3 * 1.4
    _report("tag-yield-band", low <= mean <= high and
            summary["parser_failures"] == 0,
            f"mean {mean:.2f} tags/image, band [{low:.2f}, {high:.2f}]")


def test_12c_output_loads_in_primary_pipeline(tmp_path):
    out = tmp_path / "tags.jsonl"
    summary = process_file(FIXTURE, out)
    semleak = shutil.which("semleak")
    if semleak:
        proc = subprocess.run([semleak, "ingest", "--tags", str(out)],
                              capture_output=True, text=True)
    else:
        proc = subprocess.run([sys.executable, "-m", "semleak.cli",
                               "ingest", "--tags", str(out)],
                              capture_output=True, text=True)
    ok = proc.returncode == 0
    detail = f"exit {proc.returncode}"
    if ok:
        stats = json.loads(proc.stdout)["tags"]
        # lossless round trip: the pipeline sees the same records and the
        # same tag counts that the extractor wrote
        ok = (stats["records"] == summary["images"]
              and stats["total_tags"] == summary["total_tags"])
        detail += f", {stats['records']} records, " \
                  f"{stats['total_tags']} tags on both sides"
    else:
        detail += f", stderr: {proc.stderr.strip()[:120]}"
    _report("output-loads-in-pipeline", ok, detail)
