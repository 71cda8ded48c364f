#!/usr/bin/env python3
"""The evaluation toolkit: text overlap with best-match aggregation, and
structured-scene F1 over objects, relation triples, and scene labels.

Run:  python3 demos/03_text_and_scene_metrics.py
"""
from semleak.metrics import (
    METRICS,
    StructuredScene,
    best_match_score,
    structured_f1,
)

hypothesis = "A wooden table surrounded by black chairs in a kitchen."
references = [
    "The kitchen area is clean and ready for us to use.",
    "A kitchen with a wooden table surrounded by black chairs.",
    "The kitchen and eating area of an apartment.",
]

print("single hypothesis vs three references:")
for name, fn in sorted(METRICS.items()):
    print(f"  {name:>7}: {fn(hypothesis, references):6.2f}")

hyps = {"img1": [hypothesis, "An empty kitchen with chairs."]}
refs = {"img1": references}
best = best_match_score(hyps, refs, "rougeL")
mean = best_match_score(hyps, refs, "rougeL", aggregation="mean")
print(f"\nbest-match ROUGE-L {best.value:.2f} >= mean-aggregated {mean.value:.2f}")
print("(one accurate reconstruction is all an attacker needs, so the")
print(" best-match view is the honest leakage estimate)")

predicted = StructuredScene(
    objects={"table", "chair", "cabinet", "stove"},
    relations={("chair", "next_to", "table"), ("cabinet", "over", "stove")},
    scenes=[("kitchen", 1.0)],
)
reference = StructuredScene(
    objects={"table", "chair", "shelf", "sink", "window"},
    relations={("chair", "next_to", "table"), ("blind", "covering", "window")},
    scenes=[("kitchen", 0.95), ("living room", 0.40)],
)
print("\nstructured scene scores (predicted vs reference):")
for field, prf in structured_f1(predicted, reference).items():
    print(f"  {field:>10}: recall={prf.recall:.2f} precision={prf.precision:.2f} "
          f"f1={prf.f1:.2f}")
