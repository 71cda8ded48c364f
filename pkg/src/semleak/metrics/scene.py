"""Structured scenes (objects, relation triples, scene labels) and their F1s."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidPredicate
from .neighborhood import PRF, _f1

PREDICATES = frozenset({
    "on", "over", "under", "inside", "covering", "hanging_over",
    "enclosing", "next_to", "part_of",
})

_IRREGULAR_PLURALS = {
    "men": "man", "women": "woman", "children": "child", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse", "geese": "goose",
    "shelves": "shelf", "knives": "knife", "leaves": "leaf", "loaves": "loaf",
    "wolves": "wolf", "lives": "life", "glasses": "glass", "dishes": "dish",
}


def singular_noun(word: str) -> str:
    """Light plural stripping for object/scene labels (not a full lemmatizer)."""
    w = word.lower()
    if w in _IRREGULAR_PLURALS:
        return _IRREGULAR_PLURALS[w]
    if len(w) > 3 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 3 and w.endswith(("ches", "shes", "sses", "xes", "zes")):
        return w[:-2]
    if len(w) > 2 and w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


def lemma_phrase(phrase: str) -> str:
    """Lowercase a noun phrase and singularize its head (final) word."""
    words = str(phrase).strip().lower().split()
    if not words:
        return ""
    words[-1] = singular_noun(words[-1])
    return " ".join(words)


@dataclass
class StructuredScene:
    """Objects, predicate-restricted relation triples, and scene labels."""

    objects: set = field(default_factory=set)
    relations: set = field(default_factory=set)  # (subject, predicate, object)
    scenes: list = field(default_factory=list)   # (label, confidence in [0,1])
    dropped_predicates: int = field(default=0, compare=False)

    def __post_init__(self):
        self.objects = {lemma_phrase(o) for o in self.objects if str(o).strip()}
        relations = set()
        for subj, pred, obj in self.relations:
            pred = str(pred).strip().lower()
            if pred not in PREDICATES:
                raise InvalidPredicate(f"predicate {pred!r} not in fixed vocabulary")
            relations.add((lemma_phrase(subj), pred, lemma_phrase(obj)))
        self.relations = relations
        self.scenes = [
            (lemma_phrase(label), min(1.0, max(0.0, float(conf))))
            for label, conf in self.scenes
        ]

    @property
    def scene_labels(self) -> set:
        return {label for label, _ in self.scenes}


def _set_prf(pred: set, ref: set) -> PRF:
    if not pred and not ref:
        return PRF(1.0, 1.0, 1.0)
    if not pred or not ref:
        return PRF(0.0, 0.0, 0.0)
    inter = len(pred & ref)
    recall = inter / len(ref)
    precision = inter / len(pred)
    return PRF(recall, precision, _f1(recall, precision))


def structured_f1(pred: StructuredScene, ref: StructuredScene) -> dict:
    """Exact-match PRF for objects, full triples, entity pairs, predicate
    types, and scene labels (confidences ignored for matching)."""
    return {
        "objects": _set_prf(pred.objects, ref.objects),
        "triples": _set_prf(pred.relations, ref.relations),
        "pairs": _set_prf({(s, o) for s, _, o in pred.relations},
                          {(s, o) for s, _, o in ref.relations}),
        "predicates": _set_prf({p for _, p, _ in pred.relations},
                               {p for _, p, _ in ref.relations}),
        "scenes": _set_prf(pred.scene_labels, ref.scene_labels),
    }
