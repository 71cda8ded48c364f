"""Command-line interface.

Verbs: ingest, align (fit/apply), retriever-train, retrieve,
eval-neighborhood, attack-captions, attack-adaptive, eval-cross-domain,
report. Exit codes: 0 success, 2 config error, 3 data error,
4 provider error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import errors
from .align import apply_alignment, fit_alignment, load_alignment_map, save_alignment_map
from .pipeline.config import ExperimentConfig
from .pipeline.reports import write_markdown
from .pipeline.runs import (
    make_client,
    run_adaptive_attack,
    run_alignment_sweep,
    run_caption_attack,
    run_cross_domain,
    run_leakage_eval,
)
from .retriever import (
    TagVocabulary,
    TrainConfig,
    batch_retrieve,
    init_retriever,
    load_retriever,
    save_retriever,
    train_projections,
    train_ranker,
)
from .store import (
    l2_normalize,
    load_captions,
    load_embedding_matrix,
    load_tags,
    make_split,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROVIDER = 4


def _cmd_ingest(args) -> int:
    summary = {}
    if args.embeddings:
        matrix = load_embedding_matrix(args.embeddings, args.ids)
        if not args.no_normalize:
            matrix = l2_normalize(matrix)
        if args.out:
            matrix.save(args.out)
        summary["embeddings"] = {
            "rows": matrix.rows, "dim": matrix.dim,
            "normalized": matrix.normalized,
        }
    if args.tags:
        records = load_tags(args.tags)
        n_tags = sum(len(r.tags) for r in records)
        summary["tags"] = {
            "records": len(records),
            "total_tags": n_tags,
            "mean_tags_per_image": (n_tags / len(records)) if records else 0.0,
        }
    if args.captions:
        sets = load_captions(args.captions)
        summary["captions"] = {
            "records": len(sets),
            "total_captions": sum(len(c.captions) for c in sets),
        }
    if args.embeddings and (args.val_n or args.test_n):
        split = make_split(load_embedding_matrix(args.embeddings, args.ids).ids,
                           args.seed, args.val_n, args.test_n)
        summary["split"] = {"train": len(split.train), "val": len(split.val),
                            "test": len(split.test), "seed": split.seed}
    if not summary:
        raise errors.ConfigError("ingest needs --embeddings, --tags, or --captions")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_align(args) -> int:
    if args.align_cmd == "fit":
        victim = l2_normalize(load_embedding_matrix(args.victim, args.victim_ids))
        attack = l2_normalize(load_embedding_matrix(args.attack, args.attack_ids))
        if args.samples:
            ids = victim.ids[: args.samples]
            victim, attack = victim.subset(ids), attack.subset(ids)
        amap = fit_alignment(victim, attack, solver=args.solver,
                             ridge_lambda=args.ridge_lambda)
        save_alignment_map(amap, args.out)
        print(json.dumps({"samples_used": amap.samples_used,
                          "source_dim": amap.source_dim,
                          "target_dim": amap.target_dim,
                          "solver": amap.solver, "out": str(args.out)}))
        return EXIT_OK
    if args.align_cmd == "apply":
        matrix = load_embedding_matrix(args.embeddings, args.ids)
        amap = load_alignment_map(args.map)
        aligned = apply_alignment(matrix, amap, renormalize=args.renormalize)
        aligned.save(args.out)
        print(json.dumps({"rows": aligned.rows, "dim": aligned.dim,
                          "out": str(args.out)}))
        return EXIT_OK
    raise errors.ConfigError("align requires a subcommand: fit or apply")


def _cmd_retriever_train(args) -> int:
    records = [r for r in load_tags(args.tags) if r.tags]
    tag_emb = load_embedding_matrix(args.tag_emb)
    images = l2_normalize(load_embedding_matrix(args.img_emb))
    train_config = TrainConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            train_config = TrainConfig.from_dict(json.load(fh))
    record_ids = {r.image_id for r in records}
    trainable = [i for i in images.ids if i in record_ids]
    if not trainable:
        raise errors.MissingItem("no image embeddings with tag records")
    images = images.subset(trainable)
    vocab = TagVocabulary.build([r for r in records if r.image_id in set(trainable)],
                                tag_emb)
    model = init_retriever(images.dim, train_config)
    if args.stage in ("projections", "both"):
        model = train_projections(images, vocab, train_config, model)
    if args.stage in ("ranker", "both"):
        model = train_ranker(model, images, vocab, train_config)
    save_retriever(model, args.out)
    print(json.dumps({"checkpoint": str(args.out), "dim": model.dim,
                      "alpha": model.alpha, "stage": args.stage,
                      "train_log": model.train_log}))
    return EXIT_OK


def _cmd_retrieve(args) -> int:
    tag_emb = load_embedding_matrix(args.tag_emb)
    vocab = TagVocabulary(tags=list(tag_emb.ids), embeddings=tag_emb)
    queries = l2_normalize(load_embedding_matrix(args.embeddings, args.ids))
    model = load_retriever(args.checkpoint) if args.checkpoint \
        else init_retriever(queries.dim, seed=args.seed)
    results = batch_retrieve(model, vocab, queries, args.k, by=args.by)
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for res in results:
            out_fh.write(json.dumps({
                "item_id": res.item_id, "K": res.K,
                "topk": [[t, round(s, 8)] for t, s in res.topk],
            }, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out_fh.close()
    return EXIT_OK


def _cmd_report(args) -> int:
    with open(args.json, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    manifest = doc.get("manifest", {})
    sections = []
    for key in ("rows", "scores", "structured_scores", "ablation"):
        rows = doc.get(key)
        if not rows:
            continue
        header = sorted({k for row in rows for k in row})
        table = [[row.get(h, "") for h in header] for row in rows]
        sections.append((key, header, table))

    class _M:  # minimal manifest view for the writer
        config_hash = manifest.get("config_hash", "?")
        seed = manifest.get("seed", "?")
        mode = manifest.get("mode", "?")
        prompt_templates = manifest.get("prompt_templates", [])

    write_markdown(args.title, _M, sections, args.out)
    print(json.dumps({"out": str(args.out)}))
    return EXIT_OK


def _config_runner(fn, needs_client: bool):
    def run(args) -> int:
        config = ExperimentConfig.from_file(args.config)
        if getattr(args, "mode", None):
            config.client_mode = args.mode
        if needs_client:
            fn(config, make_client(config))
        else:
            fn(config)
        print(json.dumps({"output_dir": config.output_dir}))
        return EXIT_OK
    return run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semleak",
        description="Quantify semantic leakage from shared image embeddings.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ingest", help="validate/normalize embeddings, tags, captions")
    p.add_argument("--embeddings")
    p.add_argument("--ids")
    p.add_argument("--tags")
    p.add_argument("--captions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--val-n", type=int, default=0)
    p.add_argument("--test-n", type=int, default=0)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("align", help="fit or apply a victim-to-attack map")
    asub = p.add_subparsers(dest="align_cmd", required=True)
    pf = asub.add_parser("fit")
    pf.add_argument("--victim", required=True)
    pf.add_argument("--victim-ids")
    pf.add_argument("--attack", required=True)
    pf.add_argument("--attack-ids")
    pf.add_argument("--samples", type=int, default=0,
                    help="use only the first b rows")
    pf.add_argument("--solver", default="svd_pinv",
                    choices=["svd_pinv", "normal_equation", "ridge"])
    pf.add_argument("--ridge-lambda", type=float, default=0.0)
    pf.add_argument("--out", required=True)
    pa = asub.add_parser("apply")
    pa.add_argument("--embeddings", required=True)
    pa.add_argument("--ids")
    pa.add_argument("--map", required=True)
    pa.add_argument("--renormalize", action="store_true")
    pa.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_align)

    p = sub.add_parser("retriever-train", help="train projections and ranker")
    p.add_argument("--tags", required=True)
    p.add_argument("--img-emb", required=True)
    p.add_argument("--tag-emb", required=True)
    p.add_argument("--config", help="JSON TrainConfig overrides")
    p.add_argument("--stage", default="both",
                   choices=["projections", "ranker", "both"])
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.set_defaults(fn=_cmd_retriever_train)

    p = sub.add_parser("retrieve", help="top-K tags for each embedding row")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--ids")
    p.add_argument("--tag-emb", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--by", default="ranker", choices=["ranker", "similarity"])
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_retrieve)

    for verb, fn, needs_client in (
        ("eval-neighborhood", run_leakage_eval, False),
        ("attack-captions", run_caption_attack, True),
        ("attack-adaptive", run_adaptive_attack, True),
        ("eval-cross-domain", run_cross_domain, True),
    ):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True)
        if needs_client:
            p.add_argument("--mode", choices=["live", "record", "replay"],
                           help="override the configured client mode")
        p.set_defaults(fn=_config_runner(fn, needs_client))

    p = sub.add_parser("align-sweep", help="cosine/residual vs alignment samples")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_config_runner(run_alignment_sweep, False))

    p = sub.add_parser("report", help="render a JSON report as Markdown")
    p.add_argument("--json", required=True)
    p.add_argument("--title", default="Report")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except errors.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (errors.ProviderError, errors.CacheMiss) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (errors.SemleakError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
