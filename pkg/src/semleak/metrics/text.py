"""Text-overlap metrics and best-match aggregation, all scored in [0, 100].

Tokenization is pinned (lowercase, Unicode letter/digit runs, punctuation
and underscores stripped) and versioned; scores therefore depend only on
this module, not on any external tokenizer.

Definitions:
* BLEU-4: per-text modified n-gram precision (clipped against all
  references) for n=1..4, geometric mean, brevity penalty against the
  closest reference length. Zero counts are smoothed with eps=1e-9.
* ROUGE-1/2: n-gram overlap F-measure, max over references.
* ROUGE-L: longest-common-subsequence F-measure, max over references.
* METEOR: exact + Porter-stem matching, recall-weighted harmonic mean
  (9:1), fragmentation penalty 0.5 * frag^3 where frag = (chunks-1)/(m-1);
  the rescaled fraction makes a single contiguous alignment penalty-free,
  so identical texts score exactly 100. No synonym stage.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from ..errors import EmptyText, MissingItem
from .stem import porter_stem

TOKENIZER_VERSION = "unicode-words-v1"
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_BLEU_EPS = 1e-9


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _prepared(hypothesis: str, references) -> tuple[list[str], list[list[str]]]:
    hyp = tokenize(hypothesis)
    if not hyp:
        raise EmptyText("hypothesis has no tokens")
    refs = [tokenize(r) for r in references]
    refs = [r for r in refs if r]
    if not refs:
        raise EmptyText("need at least one non-empty reference")
    return hyp, refs


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypothesis: str, references) -> float:
    hyp, refs = _prepared(hypothesis, references)
    log_sum = 0.0
    for n in range(1, 5):
        hyp_counts = _ngrams(hyp, n)
        total = max(len(hyp) - n + 1, 0)
        clipped = 0
        if hyp_counts:
            max_ref = Counter()
            for ref in refs:
                for gram, count in _ngrams(ref, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            clipped = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        if total == 0:
            p_n = _BLEU_EPS
        elif clipped == 0:
            p_n = _BLEU_EPS / total
        else:
            p_n = clipped / total
        log_sum += 0.25 * math.log(p_n)
    c = len(hyp)
    r = min((len(ref) for ref in refs), key=lambda L: (abs(L - c), L))
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(log_sum)


def _fmeasure(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2.0 * p * r / (p + r)


def _rouge_n(hypothesis: str, references, n: int) -> float:
    hyp, refs = _prepared(hypothesis, references)
    hyp_counts = _ngrams(hyp, n)
    hyp_total = sum(hyp_counts.values())
    best = 0.0
    for ref in refs:
        ref_counts = _ngrams(ref, n)
        ref_total = sum(ref_counts.values())
        if hyp_total == 0 or ref_total == 0:
            continue
        overlap = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        best = max(best, _fmeasure(overlap / hyp_total, overlap / ref_total))
    return 100.0 * best


def rouge1(hypothesis: str, references) -> float:
    return _rouge_n(hypothesis, references, 1)


def rouge2(hypothesis: str, references) -> float:
    return _rouge_n(hypothesis, references, 2)


def _lcs_length(a: list[str], b: list[str]) -> int:
    # two-row DP over the shorter second dimension
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    return prev[len(b)]


def rougeL(hypothesis: str, references) -> float:
    hyp, refs = _prepared(hypothesis, references)
    best = 0.0
    for ref in refs:
        lcs = _lcs_length(hyp, ref)
        best = max(best, _fmeasure(lcs / len(hyp), lcs / len(ref)))
    return 100.0 * best


def _align(hyp: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Greedy left-to-right unigram alignment: exact stage, then stems."""
    matches = []
    used_ref = [False] * len(ref)
    matched_hyp = [False] * len(hyp)
    for i, tok in enumerate(hyp):
        for j, rtok in enumerate(ref):
            if not used_ref[j] and rtok == tok:
                matches.append((i, j))
                used_ref[j] = True
                matched_hyp[i] = True
                break
    hyp_stems = [porter_stem(t) for t in hyp]
    ref_stems = [porter_stem(t) for t in ref]
    for i, stem in enumerate(hyp_stems):
        if matched_hyp[i]:
            continue
        for j, rstem in enumerate(ref_stems):
            if not used_ref[j] and rstem == stem:
                matches.append((i, j))
                used_ref[j] = True
                matched_hyp[i] = True
                break
    return sorted(matches)


def _count_chunks(matches: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in matches:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(hypothesis: str, references) -> float:
    hyp, refs = _prepared(hypothesis, references)
    best = 0.0
    for ref in refs:
        matches = _align(hyp, ref)
        m = len(matches)
        if m == 0:
            continue
        precision = m / len(hyp)
        recall = m / len(ref)
        fmean = 10.0 * precision * recall / (recall + 9.0 * precision)
        chunks = _count_chunks(matches)
        frag = 0.0 if m == 1 else (chunks - 1) / (m - 1)
        penalty = 0.5 * frag ** 3
        best = max(best, fmean * (1.0 - penalty))
    return 100.0 * best


METRICS = {
    "bleu4": bleu4,
    "rouge1": rouge1,
    "rouge2": rouge2,
    "rougeL": rougeL,
    "meteor": meteor,
}


@dataclass
class TextScore:
    metric: str
    value: float
    aggregation: str = "best_match"
    per_item: dict = field(default_factory=dict)


def best_match_score(hypotheses_by_item: dict, references_by_item: dict,
                     metric: str, aggregation: str = "best_match") -> TextScore:
    """Per item: mean over hypotheses of max (or mean) over single references;
    corpus score: mean over items."""
    if metric not in METRICS:
        raise KeyError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}")
    if aggregation not in ("best_match", "mean"):
        raise ValueError("aggregation must be 'best_match' or 'mean'")
    fn = METRICS[metric]
    per_item = {}
    for item_id, hyps in hypotheses_by_item.items():
        if item_id not in references_by_item:
            raise MissingItem(f"no references for item {item_id!r}")
        refs = references_by_item[item_id]
        if not hyps or not refs:
            raise MissingItem(f"empty hypotheses/references for item {item_id!r}")
        hyp_scores = []
        for hyp in hyps:
            ref_scores = [fn(hyp, [ref]) for ref in refs]
            hyp_scores.append(max(ref_scores) if aggregation == "best_match"
                              else sum(ref_scores) / len(ref_scores))
        per_item[item_id] = sum(hyp_scores) / len(hyp_scores)
    if not per_item:
        raise MissingItem("no items to score")
    corpus = sum(per_item.values()) / len(per_item)
    return TextScore(metric=metric, value=corpus, aggregation=aggregation,
                     per_item=per_item)
