"""One-step linear alignment between embedding spaces.

Fits W minimizing ||E_A - E_V W||^2 over paired rows, optionally with a
ridge term. The default solver builds the pseudo-inverse from an SVD with
a relative singular-value cutoff so the single-sample regime (where
E_V^T E_V is singular) still has a well-defined minimum-norm solution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import DimMismatch, IdOrderMismatch, NonFiniteInput, SolverFailure, ZeroRow
from .store import EmbeddingMatrix, l2_normalize, load_embedding_matrix, save_embedding_matrix

SOLVERS = ("svd_pinv", "normal_equation", "ridge")


@dataclass
class AlignmentMap:
    """Learned linear map from victim space (m dims) to attack space (n dims)."""

    W: np.ndarray
    source_dim: int
    target_dim: int
    samples_used: int
    solver: str
    ridge_lambda: float = 0.0
    sv_cutoff: float = 1e-10
    normalized_inputs: bool = True

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.W.shape != (self.source_dim, self.target_dim):
            raise DimMismatch(
                f"W shape {self.W.shape} != ({self.source_dim}, {self.target_dim})"
            )
        if not np.all(np.isfinite(self.W)):
            raise NonFiniteInput("alignment map contains NaN/Inf")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be nonnegative")


def fit_alignment(
    E_V: EmbeddingMatrix,
    E_A: EmbeddingMatrix,
    solver: str = "svd_pinv",
    ridge_lambda: float = 0.0,
    sv_cutoff: float = 1e-10,
) -> AlignmentMap:
    """Solve min_W ||E_A - E_V W||^2 (+ lambda ||W||^2 for the ridge solver).

    Rows of E_V and E_A must carry identical ids in identical order: each
    row pair is one leaked (victim, attack) embedding of the same item.
    """
    if list(E_V.ids) != list(E_A.ids):
        raise IdOrderMismatch("victim/attack row ids differ (or are reordered)")
    if E_V.rows < 1:
        raise IdOrderMismatch("need at least one aligned sample")
    if solver not in SOLVERS:
        raise SolverFailure(f"unknown solver {solver!r}")
    X = np.asarray(E_V.values, dtype=np.float64)
    Y = np.asarray(E_A.values, dtype=np.float64)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NonFiniteInput("fit_alignment inputs contain NaN/Inf")

    if solver == "svd_pinv":
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        keep = s > (sv_cutoff * s[0] if s[0] > 0 else np.inf)
        W = Vt[keep].T @ ((U[:, keep].T @ Y) / s[keep, None])
    else:
        lam = ridge_lambda if solver == "ridge" else 0.0
        G = X.T @ X + lam * np.eye(X.shape[1])
        try:
            W = np.linalg.solve(G, X.T @ Y)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(
                f"normal equations are singular (b={X.shape[0]}, m={X.shape[1]}); "
                "use solver='svd_pinv'"
            ) from exc

    if not np.all(np.isfinite(W)):
        raise SolverFailure("solver produced non-finite W")
    return AlignmentMap(
        W=W,
        source_dim=X.shape[1],
        target_dim=Y.shape[1],
        samples_used=X.shape[0],
        solver=solver,
        ridge_lambda=ridge_lambda if solver == "ridge" else 0.0,
        sv_cutoff=sv_cutoff,
        normalized_inputs=bool(E_V.normalized and E_A.normalized),
    )


def apply_alignment(E_V: EmbeddingMatrix, amap: AlignmentMap,
                    renormalize: bool = False) -> EmbeddingMatrix:
    """Map victim rows into the attack space: E_V @ W.

    With renormalize=True rows are rescaled to unit norm (retrieval assumes
    unit vectors); raw aligned vectors are what cosine reporting uses.
    """
    if E_V.dim != amap.source_dim:
        raise DimMismatch(f"dim {E_V.dim} != map source_dim {amap.source_dim}")
    aligned = EmbeddingMatrix(list(E_V.ids), E_V.values @ amap.W)
    return l2_normalize(aligned) if renormalize else aligned


def alignment_cosine(E_A_test: EmbeddingMatrix, E_aligned: EmbeddingMatrix):
    """Per-row cosine between attack and aligned embeddings, plus the mean."""
    if list(E_A_test.ids) != list(E_aligned.ids):
        raise IdOrderMismatch("cosine requires matching id order")
    if E_A_test.values.shape != E_aligned.values.shape:
        raise DimMismatch("cosine requires equal shapes")
    na = np.linalg.norm(E_A_test.values, axis=1)
    nb = np.linalg.norm(E_aligned.values, axis=1)
    if np.any(na < 1e-12) or np.any(nb < 1e-12):
        raise ZeroRow("zero row in cosine input")
    cos = np.sum(E_A_test.values * E_aligned.values, axis=1) / (na * nb)
    cos = np.clip(cos, -1.0, 1.0)
    return cos, float(np.mean(cos))


def residual_norm(E_A: EmbeddingMatrix, E_V: EmbeddingMatrix, amap: AlignmentMap) -> float:
    """Mean squared row residual ||e_A - e_V W||^2."""
    diff = E_A.values - E_V.values @ amap.W
    return float(np.mean(np.sum(diff * diff, axis=1)))


def save_alignment_map(amap: AlignmentMap, path) -> None:
    """Serialize W in the EMBMAT01 container plus a JSON metadata sidecar."""
    path = Path(path)
    holder = EmbeddingMatrix([str(i) for i in range(amap.source_dim)], amap.W)
    save_embedding_matrix(holder, path)
    meta = {k: v for k, v in asdict(amap).items() if k != "W"}
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_alignment_map(path) -> AlignmentMap:
    path = Path(path)
    holder = load_embedding_matrix(path)
    with open(str(path) + ".json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    return AlignmentMap(W=holder.values, **meta)
