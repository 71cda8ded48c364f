"""Report writers: JSON (machine), Markdown (human), CSV (sweep tables).

All writers emit byte-deterministic output — sorted keys, fixed line
endings, no floating timestamps — so replay-mode runs are reproducible.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

PACKAGE_VERSION = "0.1.0"
REPLAY_TIMESTAMP = "1970-01-01T00:00:00Z"


@dataclass
class RunManifest:
    config_hash: str
    package_version: str
    prompt_templates: list
    seed: int
    timestamp: str
    mode: str
    tokenizer_version: str
    warnings: list = field(default_factory=list)
    skipped_items: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "package_version": self.package_version,
            "prompt_templates": list(self.prompt_templates),
            "seed": self.seed,
            "timestamp": self.timestamp,
            "mode": self.mode,
            "tokenizer_version": self.tokenizer_version,
            "warnings": sorted(self.warnings),
            "skipped_items": sorted(self.skipped_items),
        }


def build_manifest(config) -> RunManifest:
    from ..clients import prompt_template_ids
    from ..metrics.text import TOKENIZER_VERSION

    if config.client_mode == "replay":
        timestamp = REPLAY_TIMESTAMP  # replay reports must be byte-identical
    else:
        import datetime

        timestamp = datetime.datetime.now(datetime.timezone.utc).strftime(
            "%Y-%m-%dT%H:%M:%SZ")
    return RunManifest(
        config_hash=config.config_hash,
        package_version=PACKAGE_VERSION,
        prompt_templates=prompt_template_ids(),
        seed=config.seed,
        timestamp=timestamp,
        mode=config.client_mode,
        tokenizer_version=TOKENIZER_VERSION,
    )


def _round_floats(obj, digits=10):
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = json.dumps(_round_floats(obj), indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"
    path.write_text(blob, encoding="utf-8")
    return path


def write_jsonl(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(_round_floats(row), sort_keys=True,
                                ensure_ascii=False) + "\n")
    return path


def write_csv(header, rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(c) for c in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _format_cell(cell):
    if isinstance(cell, float):
        return f"{cell:.6f}"
    return cell


def write_markdown(title: str, manifest: RunManifest, sections, path) -> Path:
    """sections: list of (heading, header, rows) tables."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {title}", ""]
    lines.append(f"- config: `{manifest.config_hash[:16]}`")
    lines.append(f"- seed: {manifest.seed}  |  mode: {manifest.mode}")
    lines.append(f"- prompts: {', '.join(manifest.prompt_templates)}")
    lines.append("")
    for heading, header, rows in sections:
        lines.append(f"## {heading}")
        lines.append("")
        lines.append("| " + " | ".join(str(h) for h in header) + " |")
        lines.append("|" + "---|" * len(header))
        for row in rows:
            lines.append("| " + " | ".join(str(_format_cell(c)) for c in row) + " |")
        lines.append("")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_artifact_manifest(manifest: RunManifest, artifacts, path) -> Path:
    doc = manifest.to_dict()
    doc["artifacts"] = {
        str(Path(p).name): sha256_file(p) for p in sorted(map(str, artifacts))
    }
    return write_json(doc, path)
