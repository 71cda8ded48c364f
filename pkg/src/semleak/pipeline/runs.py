"""Experiment workflows: alignment sweeps, leakage eval, attacks, cross-domain.

Each run function takes a validated ExperimentConfig (plus an optional
pre-built ChatClient for the attack stages), writes its artifacts under
config.output_dir, and returns the report dict it wrote. Items whose
generation fails are excluded from aggregates and recorded in the manifest.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from ..align import alignment_cosine, apply_alignment, fit_alignment, residual_norm
from ..clients import (
    ChatClient,
    ReplayCache,
    SceneInputs,
    extract_scene,
    generate_captions_from_scene,
    generate_captions_from_tags,
)
from ..errors import (
    ConfigError,
    MissingItem,
    NotEnoughIds,
    ParseError,
    ProviderError,
)
from ..metrics import (
    METRICS,
    NeighborhoodReport,
    best_match_score,
    structured_f1,
)
from ..retriever import (
    TagVocabulary,
    batch_retrieve,
    init_retriever,
    load_retriever,
)
from ..store import l2_normalize, load_captions, load_embedding_matrix, load_tags, make_split
from .config import ExperimentConfig
from .reports import (
    build_manifest,
    write_artifact_manifest,
    write_csv,
    write_json,
    write_jsonl,
    write_markdown,
)

SCENE_PARTS = ("objects", "relations", "scenes")


@dataclass
class LoadedData:
    attack: "EmbeddingMatrix"
    victims: dict
    tag_emb: "EmbeddingMatrix"
    records: list
    tags_by_item: dict
    captions_by_item: dict
    split: "DatasetSplit"
    domains: dict = field(default_factory=dict)


def _load_dataset(paths, seed: int) -> LoadedData:
    attack = load_embedding_matrix(paths.attack_embeddings)
    if paths.normalize:
        attack = l2_normalize(attack)
    victims = {}
    for name, vpath in sorted(paths.victim_embeddings.items()):
        vm = load_embedding_matrix(vpath)
        if paths.normalize:
            vm = l2_normalize(vm)
        if set(vm.ids) != set(attack.ids):
            raise MissingItem(f"victim space {name!r} ids differ from attack ids")
        victims[name] = vm.subset(attack.ids)
    tag_emb = load_embedding_matrix(paths.tag_embeddings)
    records = load_tags(paths.tags)
    caption_sets = load_captions(paths.captions)
    domains = {}
    if paths.domains:
        domains = json.loads(Path(paths.domains).read_text(encoding="utf-8"))
    split = make_split(list(attack.ids), seed, paths.val_n, paths.test_n)
    return LoadedData(
        attack=attack,
        victims=victims,
        tag_emb=tag_emb,
        records=records,
        tags_by_item={r.image_id: r.tags for r in records},
        captions_by_item={c.image_id: c.captions for c in caption_sets},
        split=split,
        domains=domains,
    )


def _build_vocab(data: LoadedData) -> TagVocabulary:
    usable = [r for r in data.records if r.tags]
    if not usable:
        raise MissingItem("no tag records with tags")
    return TagVocabulary.build(usable, data.tag_emb)


def _get_model(config: ExperimentConfig, dim: int):
    if config.checkpoint:
        model = load_retriever(config.checkpoint)
        if model.dim != dim:
            raise ConfigError(f"checkpoint dim {model.dim} != data dim {dim}")
        return model
    return init_retriever(dim, seed=config.seed)


def make_client(config: ExperimentConfig, transport=None) -> ChatClient:
    cache = ReplayCache(config.cache_path) if config.cache_path else ReplayCache()
    return ChatClient(
        provider=config.client_provider,
        model=config.client_model,
        mode=config.client_mode,
        cache=cache,
        transport=transport,
        concurrency=config.concurrency,
    )


def _fit_at_b(data: LoadedData, victim, b: int, config: ExperimentConfig, manifest):
    pool = data.split.train
    if not pool:
        raise NotEnoughIds("empty alignment pool (train split has no items)")
    b_eff = min(b, len(pool))
    if b_eff < b:
        warning = f"b={b} clipped to {b_eff} available alignment samples"
        if warning not in manifest.warnings:
            manifest.warnings.append(warning)
    sample_ids = pool[:b_eff]
    return fit_alignment(
        victim.subset(sample_ids),
        data.attack.subset(sample_ids),
        solver=config.solver,
        ridge_lambda=config.ridge_lambda,
    )


def _eval_b(config: ExperimentConfig) -> int:
    return config.eval_b if config.eval_b is not None else max(config.b_sweep)


def _pmap(fn, keys, workers: int) -> dict:
    """Apply fn over keys with a bounded pool; aggregation is key-ordered."""
    keys = list(keys)
    if workers <= 1 or len(keys) <= 1:
        return {k: fn(k) for k in keys}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(fn, keys))
    return dict(zip(keys, values))


# --- alignment sweep -----------------------------------------------------------


def run_alignment_sweep(config: ExperimentConfig) -> dict:
    data = _load_dataset(config.data, config.seed)
    manifest = build_manifest(config)
    out = Path(config.output_dir)
    test_ids = data.split.test
    if not test_ids:
        raise NotEnoughIds("test split is empty")
    rows = []
    monotone = {}
    for name, victim in data.victims.items():
        cosines = []
        for b in config.b_sweep:
            amap = _fit_at_b(data, victim, b, config, manifest)
            aligned = apply_alignment(victim.subset(test_ids), amap)
            attack_test = data.attack.subset(test_ids)
            _, mean_cos = alignment_cosine(attack_test, aligned)
            rows.append({
                "victim": name,
                "b": b,
                "mean_cosine": mean_cos,
                "mean_residual": residual_norm(attack_test,
                                               victim.subset(test_ids), amap),
            })
            cosines.append(mean_cos)
        monotone[name] = all(b2 > b1 for b1, b2 in zip(cosines, cosines[1:]))
    report = {"manifest": manifest.to_dict(), "rows": rows, "monotone": monotone}
    artifacts = [
        write_json(report, out / "alignment_sweep.json"),
        write_csv(["victim", "b", "mean_cosine", "mean_residual"],
                  [(r["victim"], r["b"], r["mean_cosine"], r["mean_residual"])
                   for r in rows],
                  out / "alignment_sweep.csv"),
        write_markdown(
            "Alignment sweep", manifest,
            [("Mean cosine vs alignment samples",
              ["victim", "b", "mean_cosine", "mean_residual"],
              [(r["victim"], r["b"], r["mean_cosine"], r["mean_residual"])
               for r in rows])],
            out / "alignment_sweep.md"),
    ]
    write_artifact_manifest(manifest, artifacts, out / "alignment_sweep.manifest.json")
    return report


# --- leakage eval (neighborhood metrics) ------------------------------------------


def run_leakage_eval(config: ExperimentConfig) -> dict:
    data = _load_dataset(config.data, config.seed)
    vocab = _build_vocab(data)
    model = _get_model(config, data.attack.dim)
    manifest = build_manifest(config)
    out = Path(config.output_dir)
    test_ids = data.split.test
    K = min(config.K, vocab.size)
    m_sweep = [m for m in config.m_sweep if m <= vocab.size]

    attack_test = data.attack.subset(test_ids)
    G_attack = {
        r.item_id: [t for t, _ in r.topk]
        for r in batch_retrieve(model, vocab, attack_test, K, by=config.retrieval_by)
    }
    G_gt = {}
    for item in test_ids:
        tags = [t for t in data.tags_by_item.get(item, []) if t in set(vocab.tags)]
        if tags:
            G_gt[item] = tags
        else:
            manifest.skipped_items.append(f"{item}:no-gt-tags-in-vocab")

    report_rows = []
    per_item_doc = {}
    for name, victim in data.victims.items():
        amap = _fit_at_b(data, victim, _eval_b(config), config, manifest)
        aligned = apply_alignment(victim.subset(test_ids), amap, renormalize=True)
        P = {
            r.item_id: [t for t, _ in r.topk]
            for r in batch_retrieve(model, vocab, aligned, K, by=config.retrieval_by)
        }
        vs_attack = NeighborhoodReport.compute(G_attack, P, vocab, m_sweep, K)
        vs_gt = NeighborhoodReport.compute(
            G_gt, {i: P[i] for i in G_gt}, vocab, m_sweep, K)
        per_item_doc[name] = {}
        for ref_name, rep in (("t_attack", vs_attack), ("t_gt", vs_gt)):
            for m in m_sweep:
                prf = rep.means[m]
                report_rows.append({
                    "victim": name, "reference": ref_name, "m": m,
                    "recall": prf.recall, "precision": prf.precision, "f1": prf.f1,
                })
            exact = rep.exact_mean
            report_rows.append({
                "victim": name, "reference": ref_name, "m": 0,
                "recall": exact.recall, "precision": exact.precision,
                "f1": exact.f1,
            })
            per_item_doc[name][ref_name] = {
                item: {
                    **{str(m): list(by_m[m]) for m in rep.m_sweep},
                    "exact": list(rep.exact_per_item[item]),
                }
                for item, by_m in rep.per_item.items()
            }
    report = {
        "manifest": manifest.to_dict(),
        "K": K,
        "eval_b": _eval_b(config),
        "rows": report_rows,
        "per_item": per_item_doc,
        "note": "m=0 rows carry the exact-match baseline",
    }
    table = [(r["victim"], r["reference"], r["m"], r["recall"],
              r["precision"], r["f1"]) for r in report_rows]
    artifacts = [
        write_json(report, out / "leakage_eval.json"),
        write_csv(["victim", "reference", "m", "recall", "precision", "f1"],
                  table, out / "leakage_eval.csv"),
        write_markdown(
            "Semantic-neighborhood leakage evaluation", manifest,
            [("Mean PRF per neighborhood size (m=0 is the exact-match baseline)",
              ["victim", "reference", "m", "recall", "precision", "f1"], table)],
            out / "leakage_eval.md"),
    ]
    write_artifact_manifest(manifest, artifacts, out / "leakage_eval.manifest.json")
    return report


# --- caption reconstruction attack ---------------------------------------------------


def run_caption_attack(config: ExperimentConfig, client: ChatClient | None = None) -> dict:
    data = _load_dataset(config.data, config.seed)
    vocab = _build_vocab(data)
    model = _get_model(config, data.attack.dim)
    client = client or make_client(config)
    manifest = build_manifest(config)
    out = Path(config.output_dir)
    test_ids = data.split.test

    # reference captions generated from ground-truth tags, one set per item
    def _gen_cgt(item):
        tags = data.tags_by_item.get(item, [])
        if not tags:
            return None
        try:
            return generate_captions_from_tags(tags, client, config.n_captions)
        except (ParseError, ProviderError):
            return None

    c_gt = {}
    for item, caps in _pmap(_gen_cgt, test_ids, config.workers).items():
        if caps is None:
            manifest.skipped_items.append(f"{item}:c_gt-generation-failed")
        else:
            c_gt[item] = caps
    c_h = {i: data.captions_by_item[i] for i in test_ids
           if data.captions_by_item.get(i)}

    retrieval_rows, caption_rows, score_rows = [], [], []
    for name, victim in data.victims.items():
        for b in config.b_sweep:
            amap = _fit_at_b(data, victim, b, config, manifest)
            aligned = apply_alignment(victim.subset(test_ids), amap,
                                      renormalize=True)
            for K in config.K_sweep:
                K_eff = min(K, vocab.size)
                results = batch_retrieve(model, vocab, aligned, K_eff,
                                         by=config.retrieval_by)
                tag_lists = {}
                for res in results:
                    tags = [t for t, _ in res.topk]
                    retrieval_rows.append({
                        "item": res.item_id, "victim": name, "b": b, "K": K,
                        "tags": tags,
                    })
                    if tags:
                        tag_lists[res.item_id] = tags
                    else:
                        manifest.skipped_items.append(
                            f"{res.item_id}:{name}:b{b}:K{K}:empty-retrieval")

                def _gen(item):
                    try:
                        return generate_captions_from_tags(
                            tag_lists[item], client, config.n_captions)
                    except (ParseError, ProviderError):
                        return None

                hyps = {}
                for item, caps in _pmap(_gen, sorted(tag_lists), config.workers).items():
                    if caps is None:
                        manifest.skipped_items.append(
                            f"{item}:{name}:b{b}:K{K}:generation-failed")
                        continue
                    hyps[item] = caps
                    caption_rows.append({
                        "item": item, "victim": name, "b": b, "K": K,
                        "captions": caps,
                    })
                for ref_name, refs in (("C_gt", c_gt), ("C_h", c_h)):
                    scorable = {i: h for i, h in hyps.items() if refs.get(i)}
                    for metric in sorted(METRICS):
                        if scorable:
                            score = best_match_score(scorable, refs, metric)
                            value, per_item = score.value, score.per_item
                        else:
                            value, per_item = None, {}
                        score_rows.append({
                            "victim": name, "b": b, "K": K, "metric": metric,
                            "reference": ref_name, "value": value,
                            "n_items": len(scorable), "per_item": per_item,
                        })
    report = {"manifest": manifest.to_dict(), "scores": score_rows}
    artifacts = [
        write_jsonl(retrieval_rows, out / "retrieval.jsonl"),
        write_jsonl(caption_rows, out / "captions_generated.jsonl"),
        write_jsonl([{"item": i, "captions": c} for i, c in sorted(c_gt.items())],
                    out / "captions_gt.jsonl"),
        write_json(report, out / "caption_attack.json"),
        write_csv(["victim", "b", "K", "metric", "reference", "value", "n_items"],
                  [(r["victim"], r["b"], r["K"], r["metric"], r["reference"],
                    r["value"] if r["value"] is not None else "",
                    r["n_items"]) for r in score_rows],
                  out / "caption_attack.csv"),
        write_markdown(
            "Caption reconstruction attack", manifest,
            [("Best-match scores",
              ["victim", "b", "K", "metric", "reference", "value"],
              [(r["victim"], r["b"], r["K"], r["metric"], r["reference"],
                r["value"] if r["value"] is not None else "") for r in score_rows])],
            out / "caption_attack.md"),
    ]
    write_artifact_manifest(manifest, artifacts, out / "caption_attack.manifest.json")
    return report


# --- adaptive (structured) attack ------------------------------------------------------


def _scene_to_doc(scene) -> dict:
    return {
        "objects": sorted(scene.objects),
        "relations": [list(r) for r in sorted(scene.relations)],
        "scenes": [[label, conf] for label, conf in scene.scenes],
        "dropped_predicates": scene.dropped_predicates,
    }


def _read_stage_rows(path, stage: str) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise MissingItem(f"{stage} output {path.name} not found; "
                          f"run the earlier stage first")
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return rows


def run_adaptive_attack(config: ExperimentConfig, client: ChatClient | None = None) -> dict:
    data = _load_dataset(config.data, config.seed)
    client = client or make_client(config)
    manifest = build_manifest(config)
    out = Path(config.output_dir)
    b_key = _eval_b(config)
    K_key = config.K

    retrieval_rows = _read_stage_rows(out / "retrieval.jsonl", "attack-captions")
    caption_rows = _read_stage_rows(out / "captions_generated.jsonl",
                                    "attack-captions")
    tags_pred = {}
    caps_pred = {}
    victims = sorted({r["victim"] for r in retrieval_rows})
    for row in retrieval_rows:
        if row["b"] == b_key and row["K"] == K_key:
            tags_pred[(row["victim"], row["item"])] = row["tags"]
    for row in caption_rows:
        if row["b"] == b_key and row["K"] == K_key:
            caps_pred[(row["victim"], row["item"])] = row["captions"]
    if not tags_pred:
        raise MissingItem(f"no retrieval rows at b={b_key}, K={K_key}")

    test_ids = sorted({item for (_, item) in tags_pred})
    c_h = {i: data.captions_by_item.get(i, []) for i in test_ids}
    c_gt_rows = _read_stage_rows(out / "captions_gt.jsonl", "attack-captions")
    c_gt = {r["item"]: r["captions"] for r in c_gt_rows}

    def _image_for(directory, item):
        if not directory:
            return None
        for ext in (".png", ".jpg", ".jpeg", ".webp"):
            p = Path(directory) / f"{item}{ext}"
            if p.exists():
                return str(p)
        return None

    # reference scenes from ground-truth context
    def _ref_scene(item):
        inputs = SceneInputs(
            tags=data.tags_by_item.get(item) or None,
            captions=c_h.get(item) or None,
            image_path=_image_for(config.reference_image_dir, item),
        )
        if not inputs.modalities():
            return None
        try:
            return extract_scene(inputs, client)
        except (ParseError, ProviderError):
            return None

    ref_scenes = {}
    for item, scene in _pmap(_ref_scene, test_ids, config.workers).items():
        if scene is None:
            manifest.skipped_items.append(f"{item}:reference-scene-failed")
        else:
            ref_scenes[item] = scene

    settings = config.conditioning
    fields = ("objects", "triples", "pairs", "predicates", "scenes")
    pred_scene_rows, f1_rows, per_item_f1_rows = [], [], []
    scenes_for_ablation = {}
    richest = max(settings, key=len)
    for victim in victims:
        for setting in settings:
            name = "+".join(setting)
            per_item = {}

            def _pred_scene(item):
                inputs = SceneInputs(
                    tags=tags_pred.get((victim, item)) if "tags" in setting else None,
                    captions=caps_pred.get((victim, item)) if "captions" in setting else None,
                    image_path=_image_for(config.image_dir, item)
                    if "image" in setting else None,
                )
                if set(inputs.modalities()) != set(setting):
                    return None
                try:
                    return extract_scene(inputs, client)
                except (ParseError, ProviderError):
                    return None

            for item, scene in _pmap(_pred_scene, test_ids, config.workers).items():
                if scene is None:
                    manifest.skipped_items.append(
                        f"{item}:{victim}:{name}:scene-failed")
                    continue
                per_item[item] = scene
                pred_scene_rows.append({
                    "item": item, "victim": victim, "setting": name,
                    "scene": _scene_to_doc(scene),
                })
                if setting == richest:
                    scenes_for_ablation[(victim, item)] = scene
            scored = {i: s for i, s in per_item.items() if i in ref_scenes}
            per_field = {f: [] for f in fields}
            for item, scene in sorted(scored.items()):
                scores = structured_f1(scene, ref_scenes[item])
                for f in fields:
                    per_field[f].append(scores[f])
                per_item_f1_rows.append({
                    "item": item, "victim": victim, "setting": name,
                    **{f"{f}_f1": scores[f].f1 for f in fields},
                    **{f"{f}_recall": scores[f].recall for f in fields},
                    **{f"{f}_precision": scores[f].precision for f in fields},
                })
            row = {"victim": victim, "setting": name, "n_items": len(scored)}
            for f in fields:
                vals = per_field[f]
                row[f"{f}_f1"] = float(np.mean([v.f1 for v in vals])) if vals else None
                row[f"{f}_recall"] = (float(np.mean([v.recall for v in vals]))
                                      if vals else None)
                row[f"{f}_precision"] = (float(np.mean([v.precision for v in vals]))
                                         if vals else None)
            f1_rows.append(row)

    # ablation: regenerate captions from subsets of the predicted scene parts
    subsets = [list(c) for r in range(1, len(SCENE_PARTS) + 1)
               for c in combinations(SCENE_PARTS, r)]
    ablation_rows = []
    for victim in victims:
        for subset in subsets:
            subset_name = "+".join(subset)
            hyps = {}
            for item in test_ids:
                scene = scenes_for_ablation.get((victim, item))
                if scene is None:
                    continue
                kwargs = {
                    "objects": scene.objects if "objects" in subset else None,
                    "relations": scene.relations if "relations" in subset else None,
                    "scenes": scene.scenes if "scenes" in subset else None,
                }
                if not any(kwargs.values()):
                    manifest.skipped_items.append(
                        f"{item}:{victim}:ablation-{subset_name}:empty-parts")
                    continue
                try:
                    hyps[item] = generate_captions_from_scene(
                        client, n_captions=config.n_captions, **kwargs)
                except (ParseError, ProviderError):
                    manifest.skipped_items.append(
                        f"{item}:{victim}:ablation-{subset_name}:generation-failed")
            for ref_name, refs in (("C_gt", c_gt), ("C_h", c_h)):
                scorable = {i: h for i, h in hyps.items() if refs.get(i)}
                for metric in sorted(METRICS):
                    value = (best_match_score(scorable, refs, metric).value
                             if scorable else None)
                    ablation_rows.append({
                        "victim": victim, "conditioning": subset_name,
                        "metric": metric, "reference": ref_name, "value": value,
                        "n_items": len(scorable),
                    })

    report = {
        "manifest": manifest.to_dict(),
        "b": b_key,
        "K": K_key,
        "structured_scores": f1_rows,
        "structured_per_item": per_item_f1_rows,
        "ablation": ablation_rows,
    }
    f1_header = ["victim", "setting", "n_items"] + [
        f"{f}_{suffix}" for f in fields for suffix in ("f1", "recall", "precision")
    ]
    f1_table = [[r["victim"], r["setting"], r["n_items"]] +
                [r[f"{f}_{suffix}"] if r[f"{f}_{suffix}"] is not None else ""
                 for f in fields for suffix in ("f1", "recall", "precision")]
                for r in f1_rows]
    ablation_header = ["victim", "conditioning", "metric", "reference",
                       "value", "n_items"]
    ablation_table = [(r["victim"], r["conditioning"], r["metric"],
                       r["reference"],
                       r["value"] if r["value"] is not None else "",
                       r["n_items"]) for r in ablation_rows]
    artifacts = [
        write_jsonl(pred_scene_rows, out / "scenes_pred.jsonl"),
        write_jsonl([{"item": i, "scene": _scene_to_doc(s)}
                     for i, s in sorted(ref_scenes.items())],
                    out / "scenes_ref.jsonl"),
        write_json(report, out / "adaptive_attack.json"),
        write_csv(f1_header, f1_table, out / "adaptive_attack.csv"),
        write_csv(ablation_header, ablation_table, out / "ablation_grid.csv"),
        write_markdown(
            "Adaptive structured-scene attack", manifest,
            [("Structured F1 per conditioning setting", f1_header, f1_table),
             ("Caption regeneration ablation", ablation_header, ablation_table)],
            out / "adaptive_attack.md"),
    ]
    write_artifact_manifest(manifest, artifacts, out / "adaptive_attack.manifest.json")
    return report


# --- cross-domain evaluation -------------------------------------------------------------


def run_cross_domain(config: ExperimentConfig, client: ChatClient | None = None) -> dict:
    if config.cross_domain is None:
        raise ConfigError("config has no cross_domain section")
    primary = _load_dataset(config.data, config.seed)
    cross = _load_dataset(config.cross_domain, config.seed)
    vocab = _build_vocab(primary)  # retriever vocabulary comes from the attack domain
    model = _get_model(config, primary.attack.dim)
    client = client or make_client(config)
    manifest = build_manifest(config)
    out = Path(config.output_dir)

    eval_ids = cross.split.test if cross.split.test else list(cross.attack.ids)
    missing = [i for i in eval_ids if i not in cross.domains]
    if missing:
        raise ConfigError(f"cross-domain items missing domain labels: {missing[:3]}")

    common_victims = sorted(set(primary.victims) & set(cross.victims))
    if not common_victims:
        raise ConfigError("no victim space present in both datasets")

    score_rows = []
    for name in common_victims:
        amap = _fit_at_b(primary, primary.victims[name], _eval_b(config), config,
                         manifest)
        aligned = apply_alignment(cross.victims[name].subset(eval_ids), amap,
                                  renormalize=True)
        K_eff = min(config.K, vocab.size)
        results = batch_retrieve(model, vocab, aligned, K_eff,
                                 by=config.retrieval_by)
        tags_by_item = {r.item_id: [t for t, _ in r.topk] for r in results}

        def _gen(item):
            try:
                return generate_captions_from_tags(tags_by_item[item], client,
                                                   config.n_captions)
            except (ParseError, ProviderError):
                return None

        caps_by_item = {}
        for item, caps in _pmap(_gen, sorted(tags_by_item), config.workers).items():
            if caps is None:
                manifest.skipped_items.append(f"{item}:{name}:generation-failed")
            else:
                caps_by_item[item] = caps

        for domain in ("near", "out"):
            ids = [i for i in eval_ids if cross.domains.get(i) == domain]
            c_h = {i: cross.captions_by_item.get(i, []) for i in ids}
            gt_tags = {i: cross.tags_by_item.get(i, []) for i in ids}
            caption_hyps = {i: caps_by_item[i] for i in ids
                            if i in caps_by_item and c_h.get(i)}
            tag_hyps = {i: tags_by_item[i] for i in ids
                        if i in tags_by_item and gt_tags.get(i)}
            for metric in sorted(METRICS):
                cap_val = (best_match_score(caption_hyps, c_h, metric).value
                           if caption_hyps else None)
                tag_val = (best_match_score(tag_hyps, gt_tags, metric).value
                           if tag_hyps else None)
                score_rows.append({
                    "victim": name, "domain": domain, "target": "captions_vs_C_h",
                    "metric": metric, "value": cap_val,
                    "n_items": len(caption_hyps),
                })
                score_rows.append({
                    "victim": name, "domain": domain, "target": "tags_vs_t_gt",
                    "metric": metric, "value": tag_val, "n_items": len(tag_hyps),
                })
    report = {"manifest": manifest.to_dict(), "rows": score_rows}
    header = ["victim", "domain", "target", "metric", "value", "n_items"]
    table = [(r["victim"], r["domain"], r["target"], r["metric"],
              r["value"] if r["value"] is not None else "", r["n_items"])
             for r in score_rows]
    artifacts = [
        write_json(report, out / "cross_domain.json"),
        write_csv(header, table, out / "cross_domain.csv"),
        write_markdown("Cross-domain evaluation", manifest,
                       [("Scores by domain partition", header, table)],
                       out / "cross_domain.md"),
    ]
    write_artifact_manifest(manifest, artifacts, out / "cross_domain.manifest.json")
    return report
