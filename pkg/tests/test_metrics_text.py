import numpy as np
import pytest

from oracles import NAIVE_METRICS, best_match_naive
from textpairs import PAIRS
from semleak.errors import EmptyText, MissingItem
from semleak.metrics import (
    METRICS,
    TextScore,
    best_match_score,
    bleu4,
    meteor,
    porter_stem,
    rouge1,
    rouge2,
    rougeL,
    tokenize,
)


def test_tokenizer_pinned_behavior():
    assert tokenize("The Cat, sat!") == ["the", "cat", "sat"]
    assert tokenize("hanging_over x2") == ["hanging", "over", "x2"]
    assert tokenize("café au lait") == ["café", "au", "lait"]
    assert tokenize("...") == []


def test_porter_stemmer_known_pairs():
    cases = {
        "caresses": "caress", "ponies": "poni", "cats": "cat",
        "feed": "feed", "agreed": "agre", "plastered": "plaster",
        "motoring": "motor", "sing": "sing", "conflated": "conflat",
        "hopping": "hop", "relational": "relat", "rational": "ration",
        "chairs": "chair", "running": "run",
    }
    for word, stem in cases.items():
        assert porter_stem(word) == stem, word


def test_identity_scores_100():
    text = "a kitchen with a wooden table"
    assert rougeL(text, [text]) == pytest.approx(100.0)
    assert bleu4(text, [text]) == pytest.approx(100.0)
    assert meteor(text, [text]) == pytest.approx(100.0)
    assert rouge1(text, [text]) == pytest.approx(100.0)
    assert rouge2(text, [text]) == pytest.approx(100.0)


def test_disjoint_scores_near_zero():
    hyp = "alpha beta gamma delta"
    refs = ["one two three four"]
    for name, fn in METRICS.items():
        assert fn(hyp, refs) < 0.01, name


def test_empty_text_raises():
    with pytest.raises(EmptyText):
        bleu4("", ["ref"])
    with pytest.raises(EmptyText):
        rougeL("...", ["ref"])
    with pytest.raises(EmptyText):
        meteor("hyp", [""])


def test_fixed_pair_against_oracle():
    hyp = "the cat sat on the mat"
    refs = ["the cat is on the mat"]
    for name, fn in METRICS.items():
        assert fn(hyp, refs) == pytest.approx(NAIVE_METRICS[name](hyp, refs),
                                              abs=1e-6), name


def test_thirty_pair_corpus_against_oracle():
    for name, fn in METRICS.items():
        for hyp, refs in PAIRS:
            got = fn(hyp, refs)
            exp = NAIVE_METRICS[name](hyp, refs)
            assert got == pytest.approx(exp, abs=1e-6), (name, hyp)
            assert 0.0 <= got <= 100.0


def test_scores_bounded_on_random_text():
    rng = np.random.default_rng(0)
    words = ["cat", "dog", "table", "runs", "blue", "near", "the", "a"]
    for _ in range(50):
        hyp = " ".join(rng.choice(words, size=rng.integers(1, 10)))
        refs = [" ".join(rng.choice(words, size=rng.integers(1, 10)))
                for _ in range(rng.integers(1, 4))]
        for fn in METRICS.values():
            assert 0.0 <= fn(hyp, refs) <= 100.0 + 1e-9


def test_best_match_exact_hypothesis():
    refs = {"x": ["a b c", "d e f", "g h i", "j k l", "m n o"]}
    hyp = {"x": ["d e f"]}
    score = best_match_score(hyp, refs, "rougeL")
    assert score.value == pytest.approx(100.0)
    assert score.per_item["x"] == pytest.approx(100.0)


def test_best_match_single_reference_equals_mean():
    refs = {"x": ["the cat sat"], "y": ["a dog ran"]}
    hyps = {"x": ["the cat sat down", "a cat sat"], "y": ["dogs run fast"]}
    best = best_match_score(hyps, refs, "rouge1", aggregation="best_match")
    mean = best_match_score(hyps, refs, "rouge1", aggregation="mean")
    assert best.value == pytest.approx(mean.value)


def test_best_match_small_grid_matches_enumeration():
    refs = {"x": ["one two three", "two three four", "nine ten"]}
    hyps = {"x": ["one two", "three four five"]}
    for name, fn in METRICS.items():
        got = best_match_score(hyps, refs, name).value
        exp = best_match_naive(hyps, refs, NAIVE_METRICS[name])
        assert got == pytest.approx(exp, abs=1e-6), name


def test_best_match_dominates_mean_random():
    rng = np.random.default_rng(1)
    words = ["cat", "dog", "sat", "mat", "tree", "house", "red", "big"]
    for _ in range(100):
        hyps = {"i": [" ".join(rng.choice(words, size=rng.integers(2, 8)))
                      for _ in range(rng.integers(1, 4))]}
        refs = {"i": [" ".join(rng.choice(words, size=rng.integers(2, 8)))
                      for _ in range(rng.integers(2, 5))]}
        best = best_match_score(hyps, refs, "rougeL").value
        mean = best_match_score(hyps, refs, "rougeL", aggregation="mean").value
        assert best >= mean - 1e-9


def test_best_match_missing_item():
    with pytest.raises(MissingItem):
        best_match_score({"x": ["h"]}, {}, "rougeL")


def test_textscore_shape():
    score = best_match_score({"x": ["a b"]}, {"x": ["a b"]}, "meteor")
    assert isinstance(score, TextScore)
    assert score.metric == "meteor"
    assert score.aggregation == "best_match"
