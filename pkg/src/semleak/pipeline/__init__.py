from .config import ExperimentConfig
from .reports import RunManifest, build_manifest
from .runs import (
    make_client,
    run_adaptive_attack,
    run_alignment_sweep,
    run_caption_attack,
    run_cross_domain,
    run_leakage_eval,
)

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "build_manifest",
    "make_client",
    "run_adaptive_attack",
    "run_alignment_sweep",
    "run_caption_attack",
    "run_cross_domain",
    "run_leakage_eval",
]
