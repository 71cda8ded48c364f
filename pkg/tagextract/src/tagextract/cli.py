"""slime-tags: caption JSONL in, relational-tag JSONL out.

Input lines look like {"image_id": ..., "captions": [...]} (a single
"caption" string field also works). Output lines are
{"image_id": ..., "tags": [...]} — the tag-file format the embedding
pipeline ingests — behind a header comment recording the extractor
version and rule set. Captions the parser cannot handle are written to an
error sidecar (<out>.errors.jsonl) instead of aborting the batch.
"""
from __future__ import annotations

import argparse
import json
import sys

from .extract import RULESET, VERSION, ParserFailure, extract_tags


def process_file(in_path: str, out_path: str, lemmatize: bool = True) -> dict:
    records = []
    failures = []
    with open(in_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            obj = json.loads(stripped)
            image_id = str(obj["image_id"])
            captions = obj.get("captions")
            if captions is None:
                captions = [obj["caption"]]
            tags = []
            seen = set()
            for caption in captions:
                try:
                    extracted = extract_tags(str(caption))
                except ParserFailure as exc:
                    failures.append({"image_id": image_id, "line": lineno,
                                     "caption": str(caption),
                                     "error": str(exc)})
                    continue
                for tag in extracted:
                    if tag not in seen:
                        seen.add(tag)
                        tags.append(tag)
            records.append({"image_id": image_id, "tags": tags})

    header = f"slime-tags v{VERSION} rules={RULESET} lemmatize={str(lemmatize).lower()}"
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    if failures:
        with open(str(out_path) + ".errors.jsonl", "w", encoding="utf-8") as fh:
            for failure in failures:
                fh.write(json.dumps(failure, ensure_ascii=False) + "\n")
    total = sum(len(r["tags"]) for r in records)
    return {
        "images": len(records),
        "total_tags": total,
        "mean_tags_per_image": total / len(records) if records else 0.0,
        "parser_failures": len(failures),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slime-tags",
        description="Extract relational tags from caption files.")
    parser.add_argument("--in", dest="in_path", required=True,
                        help="caption JSONL")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="tag JSONL to write")
    args = parser.parse_args(argv)
    try:
        summary = process_file(args.in_path, args.out_path)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
