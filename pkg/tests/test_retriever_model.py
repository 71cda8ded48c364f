import numpy as np
import pytest

from oracles import central_diff, cross_two_layer_unrolled, interaction_features_naive
from semleak.errors import DimMismatch, KOutOfRange
from semleak.retriever import (
    RankGroup,
    TagVocabulary,
    TrainConfig,
    init_retriever,
    interaction_features,
    load_retriever,
    pairwise_features,
    project,
    ranker_loss,
    ranker_score,
    retrieve_topk,
    save_retriever,
    similarities,
)
from semleak.retriever.model import _dcn_backward, _dcn_forward, _proj_backward, _proj_forward
from semleak.retriever.losses import ranker_loss_grad
from semleak.store import EmbeddingMatrix, l2_normalize


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_projection_near_identity_at_init():
    rng = np.random.default_rng(0)
    model = init_retriever(16, seed=1)
    for _ in range(20):
        e = _unit(rng, 16)
        out = project(model, e, "image")
        assert np.linalg.norm(out - e) <= 0.05


def test_projection_output_unit_norm():
    rng = np.random.default_rng(1)
    model = init_retriever(12, seed=2)
    # exercise far-from-init parameters too
    model.params["img.W"] += rng.normal(scale=0.3, size=(12, 12))
    for _ in range(100):
        out = project(model, _unit(rng, 12), "image")
        assert abs(np.linalg.norm(out) - 1.0) < 1e-6


def test_projection_deterministic_and_dim_checked():
    rng = np.random.default_rng(2)
    model = init_retriever(8, seed=3)
    e = _unit(rng, 8)
    assert np.array_equal(project(model, e, "tag"), project(model, e, "tag"))
    with pytest.raises(DimMismatch):
        project(model, _unit(rng, 9), "image")


def test_similarities_identity_and_scale():
    model = init_retriever(4, seed=4)
    e = np.asarray([1.0, 0.0, 0.0, 0.0])
    s = similarities(model, e, e, project_inputs=False)
    assert s.shape == (1, 1)
    assert s[0, 0] == pytest.approx(model.alpha)
    orth = np.asarray([0.0, 1.0, 0.0, 0.0])
    assert similarities(model, e, orth, project_inputs=False)[0, 0] == \
        pytest.approx(0.0, abs=1e-12)


def test_similarities_alpha_14_cos_half():
    model = init_retriever(2, seed=5)
    model.params["log_temp"] = np.log(np.asarray(14.0))
    a = np.asarray([1.0, 0.0])
    b = np.asarray([0.5, np.sqrt(3) / 2])
    assert similarities(model, a, b, project_inputs=False)[0, 0] == \
        pytest.approx(7.0, rel=1e-12)


def test_interaction_features_forced_layout():
    phi = interaction_features([1.0, 0.0], [1.0, 0.0])
    assert np.allclose(phi, [1, 0, 1, 0, 1, 1, 0, 0, 0])
    assert phi.shape == (9,)


def test_interaction_features_width_arithmetic():
    rng = np.random.default_rng(3)
    e = _unit(rng, 768)
    t = _unit(rng, 768)
    assert interaction_features(e, t).shape == (4 * 768 + 1,)


def test_interaction_features_match_elementwise_oracle():
    rng = np.random.default_rng(4)
    for _ in range(100):
        e, t = _unit(rng, 6), _unit(rng, 6)
        assert np.allclose(interaction_features(e, t),
                           interaction_features_naive(e, t), atol=1e-12)


def test_pairwise_features_rows_match_single():
    rng = np.random.default_rng(5)
    e = _unit(rng, 5)
    T = np.stack([_unit(rng, 5) for _ in range(7)])
    batch = pairwise_features(e, T)
    for j in range(7):
        assert np.allclose(batch[j], interaction_features(e, T[j]))


def test_zero_head_scores_zero():
    rng = np.random.default_rng(6)
    model = init_retriever(6, seed=7)
    for _ in range(5):
        phi = interaction_features(_unit(rng, 6), _unit(rng, 6))
        assert ranker_score(model, phi) == 0.0


def test_constant_head_shift_preserves_topk_order():
    rng = np.random.default_rng(7)
    model = init_retriever(6, seed=8)
    model.params["head.w"] = rng.normal(size=model.params["head.w"].shape)
    X = np.stack([interaction_features(_unit(rng, 6), _unit(rng, 6))
                  for _ in range(10)])
    base = ranker_score(model, X)
    model.params["head.b"] = model.params["head.b"] + 3.7
    shifted = ranker_score(model, X)
    assert np.allclose(shifted - base, 3.7)
    assert np.array_equal(np.argsort(-base), np.argsort(-shifted))


def test_cross_layer_matches_hand_unrolled_oracle():
    rng = np.random.default_rng(8)
    config = TrainConfig(cross_layers=2, mlp_hidden=())
    x0 = rng.normal(size=3)
    W0, b0 = rng.normal(size=(3, 3)), rng.normal(size=3)
    W1, b1 = rng.normal(size=(3, 3)), rng.normal(size=3)
    params = {"cross.0.W": W0, "cross.0.b": b0,
              "cross.1.W": W1, "cross.1.b": b1,
              "head.w": np.ones(3), "head.b": np.asarray(0.0)}
    scores, _ = _dcn_forward(params, x0[None, :], config)
    expected = cross_two_layer_unrolled(x0, W0, b0, W1, b1).sum()
    assert scores[0] == pytest.approx(expected, rel=1e-12)


def test_dcn_parameter_gradients_match_finite_differences():
    """End-to-end: phi -> cross layers -> MLP -> scores -> grouped hinge."""
    rng = np.random.default_rng(9)
    config = TrainConfig(cross_layers=2, mlp_hidden=(7, 5), margin=0.3,
                         hn_ratio=0.6)
    model = init_retriever(3, config=config, seed=10)
    # non-degenerate head so gradients reach every layer
    model.params["head.w"] = rng.normal(size=model.params["head.w"].shape)
    model.params["head.b"] = np.asarray(rng.normal())
    X = np.stack([interaction_features(_unit(rng, 3), _unit(rng, 3))
                  for _ in range(9)])
    n_pos = 3

    def loss_for(params):
        scores, _ = _dcn_forward(params, X, config)
        return ranker_loss(
            [RankGroup(pos=scores[:n_pos], neg=scores[n_pos:])],
            config.margin, config.hn_ratio)

    scores, cache = _dcn_forward(model.params, X, config)
    _, group_grads = ranker_loss_grad(
        [RankGroup(pos=scores[:n_pos], neg=scores[n_pos:])],
        config.margin, config.hn_ratio)
    g_scores = np.concatenate([group_grads[0][0], group_grads[0][1]])
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    _dcn_backward(model.params, cache, g_scores, grads, config)

    keys = [k for k in model.params if k.startswith(("cross.", "mlp.", "head."))]
    checked = 0
    for key in keys:
        flat = model.params[key].ravel()
        for c in rng.choice(flat.size, size=min(3, flat.size), replace=False):
            def f(x, key=key, c=c):
                params = {k: v.copy() for k, v in model.params.items()}
                pk = params[key].ravel()
                pk[c] = x[0]
                params[key] = pk.reshape(params[key].shape)
                return loss_for(params)
            fd = central_diff(f, np.asarray([flat[c]]), 0, eps=1e-6)
            an = grads[key].ravel()[c]
            denom = max(abs(fd), abs(an), 1e-7)
            assert abs(fd - an) / denom < 1e-4, key
            checked += 1
    assert checked >= 20


def test_projection_backward_matches_finite_differences():
    rng = np.random.default_rng(10)
    model = init_retriever(5, seed=11)
    E = np.stack([_unit(rng, 5) for _ in range(4)])
    target = np.stack([_unit(rng, 5) for _ in range(4)])

    def loss_for(params):
        P, _ = _proj_forward(params, "img", E)
        return float(np.sum(P * target))

    P, cache = _proj_forward(model.params, "img", E)
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    _proj_backward(model.params, "img", cache, target, grads)
    for key in ("img.W", "img.b", "img.gamma"):
        flat = model.params[key].ravel()
        for c in rng.choice(flat.size, size=min(4, flat.size), replace=False):
            def f(x, key=key, c=c):
                params = {k: v.copy() for k, v in model.params.items()}
                pk = params[key].ravel()
                pk[c] = x[0]
                params[key] = pk.reshape(params[key].shape)
                return loss_for(params)
            fd = central_diff(f, np.asarray([flat[c]]), 0, eps=1e-6)
            an = grads[key].ravel()[c]
            assert abs(fd - an) <= 1e-6 * max(1.0, abs(an))


def test_retrieve_topk_whole_vocab_and_singleton(toy_vocab):
    model = init_retriever(3, seed=12)
    e = np.asarray([1.0, 0.0, 0.0])
    res = retrieve_topk(model, toy_vocab, e, K=toy_vocab.size, by="similarity")
    assert len(res.topk) == toy_vocab.size
    scores = [s for _, s in res.topk]
    assert scores == sorted(scores, reverse=True)

    single = TagVocabulary(tags=["only"], embeddings=EmbeddingMatrix(
        ["only"], np.asarray([[0.0, 1.0, 0.0]])))
    res = retrieve_topk(model, single, e, K=1, by="ranker")
    assert res.topk[0][0] == "only"

    with pytest.raises(KOutOfRange):
        retrieve_topk(model, toy_vocab, e, K=0)
    with pytest.raises(KOutOfRange):
        retrieve_topk(model, toy_vocab, e, K=toy_vocab.size + 1)


def test_retrieve_topk_monotone_transform_invariance(toy_vocab):
    rng = np.random.default_rng(13)
    model = init_retriever(3, seed=14)
    model.params["head.w"] = rng.normal(size=model.params["head.w"].shape)
    e = _unit(rng, 3)
    base = retrieve_topk(model, toy_vocab, e, K=3, by="ranker")
    # strictly monotone transform of all scores: 2x + 7 via head scaling/shift
    model.params["head.w"] = 2.0 * model.params["head.w"]
    model.params["head.b"] = model.params["head.b"] * 2.0 + 7.0
    shifted = retrieve_topk(model, toy_vocab, e, K=3, by="ranker")
    assert [t for t, _ in base.topk] == [t for t, _ in shifted.topk]


def test_checkpoint_roundtrip(tmp_path, toy_vocab):
    model = init_retriever(3, seed=15)
    rng = np.random.default_rng(16)
    model.params["head.w"] = rng.normal(size=model.params["head.w"].shape)
    save_retriever(model, tmp_path / "ckpt")
    loaded = load_retriever(tmp_path / "ckpt")
    assert loaded.dim == model.dim
    assert loaded.seed == model.seed
    assert set(loaded.params) == set(model.params)
    for key, value in model.params.items():
        assert np.allclose(loaded.params[key], value, atol=1e-6), key
    # retrieval from a reloaded checkpoint is identical run to run
    e = _unit(rng, 3)
    r1 = retrieve_topk(loaded, toy_vocab, e, K=3, by="ranker")
    r2 = retrieve_topk(load_retriever(tmp_path / "ckpt"), toy_vocab, e, K=3,
                       by="ranker")
    assert r1.topk == r2.topk
