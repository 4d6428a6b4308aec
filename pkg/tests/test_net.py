"""Forward-pass semantics: shapes, padding behavior, pooling, and guards."""

import numpy as np
import pytest

from emord.net import (
    PARAM_FIELDS,
    ModelConfig,
    NetError,
    backward,
    forward,
    init_params,
)


def tiny_config(**overrides):
    base = dict(
        vocab_size=11,
        output_width=5,
        head_mode="softmax",
        embed_dim=4,
        conv_channels=(3, 4),
        kernel_sizes=(6, 4),
        ffnn_hidden=(6, 5),
        dtype="float64",
    )
    base.update(overrides)
    return ModelConfig(**base)


def test_config_validation():
    with pytest.raises(NetError):
        tiny_config(head_mode="argmax")
    with pytest.raises(NetError):
        tiny_config(dtype="float16")
    with pytest.raises(NetError):
        tiny_config(output_width=0)
    with pytest.raises(NetError):
        # two stacked heads need an even total width
        tiny_config(head_mode="ordinal-2d", output_width=7)
    assert tiny_config().min_seq_length == 9


def test_presets():
    desk = ModelConfig.desk(100, 7, "softmax")
    assert desk.embed_dim == 32
    assert desk.conv_channels == (32, 64)
    assert desk.ffnn_hidden == (64, 32)
    assert desk.kernel_sizes == (6, 4)
    paper = ModelConfig.paper(100, 7, "softmax")
    assert paper.conv_channels == (1024, 2048)
    assert paper.ffnn_hidden == (2048, 768)


def test_init_params_shapes_and_rules():
    cfg = tiny_config()
    params = init_params(cfg, seed=0)
    assert params.embedding.shape == (11, 4)
    assert params.conv1_w.shape == (3, 4, 6)
    assert params.conv2_w.shape == (4, 3, 4)
    assert params.fc1_w.shape == (4, 6)
    assert params.fc2_w.shape == (6, 5)
    assert params.fc3_w.shape == (5, 5)
    # padding row zero, every bias zero, weights inside their uniform bounds
    assert np.all(params.embedding[0] == 0.0)
    assert np.abs(params.embedding[1:]).max() <= 0.05
    for name in ("conv1_b", "conv2_b", "fc1_b", "fc2_b", "fc3_b"):
        assert np.all(getattr(params, name) == 0.0)
    assert np.abs(params.conv1_w).max() <= np.sqrt(1.0 / (4 * 6))
    assert [name for name, _ in params.named()] == list(PARAM_FIELDS)


def test_init_is_seed_deterministic():
    cfg = tiny_config()
    a = init_params(cfg, seed=3)
    b = init_params(cfg, seed=3)
    c = init_params(cfg, seed=4)
    for name, arr in a.named():
        assert np.array_equal(arr, getattr(b, name))
    assert not np.array_equal(a.embedding, c.embedding)


def test_forward_shapes_and_probabilities():
    cfg = tiny_config()
    params = init_params(cfg, 0)
    rng = np.random.default_rng(0)
    ids = rng.integers(1, 11, size=(4, 12))
    out, cache = forward(params, cfg, ids)
    assert out.shape == (4, 5)
    assert cache.z1.shape == (4, 7, 3)  # 12 - 6 + 1
    assert cache.z2.shape == (4, 4, 4)  # 7 - 4 + 1
    assert np.allclose(out.sum(axis=1), 1.0)
    assert np.all(out > 0)


def test_forward_sigmoid_head():
    cfg = tiny_config(head_mode="ordinal-1d", output_width=4)
    params = init_params(cfg, 0)
    ids = np.full((2, 12), 3, dtype=np.int64)
    out, _ = forward(params, cfg, ids)
    assert out.shape == (2, 4)
    assert np.all((out > 0) & (out < 1))


def test_forward_input_guards():
    cfg = tiny_config()
    params = init_params(cfg, 0)
    with pytest.raises(NetError, match="token id outside"):
        forward(params, cfg, np.full((1, 12), 11))
    with pytest.raises(NetError, match="integers"):
        forward(params, cfg, np.ones((1, 12)))
    with pytest.raises(NetError, match=r"\(B, T\)"):
        forward(params, cfg, np.ones(12, dtype=np.int64))
    with pytest.raises(NetError, match="shorter"):
        forward(params, cfg, np.ones((1, 8), dtype=np.int64))
    with pytest.raises(NetError, match="all-padding"):
        forward(params, cfg, np.zeros((1, 12), dtype=np.int64))


def test_padding_embedding_is_inert():
    # scribbling on the stored padding row must not change any output
    cfg = tiny_config()
    params = init_params(cfg, 0)
    ids = np.array([[1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 0, 0]])
    out_before, _ = forward(params, cfg, ids)
    params.embedding[0] = 123.0
    out_after, _ = forward(params, cfg, ids)
    assert np.array_equal(out_before, out_after)


def test_trailing_padding_does_not_dilute_short_texts():
    # same real tokens, more trailing padding: pooled features identical
    # (holds whenever the real-token count caps pooling in both layouts)
    cfg = tiny_config()
    params = init_params(cfg, 0)
    real = [3, 7, 2, 9]
    short = np.array([real + [0] * 8])
    long = np.array([real + [0] * 12])
    out_short, cache_short = forward(params, cfg, short)
    out_long, cache_long = forward(params, cfg, long)
    assert np.allclose(cache_short.pooled, cache_long.pooled)
    assert np.allclose(out_short, out_long)


def test_pool_counts_and_mask():
    cfg = tiny_config()
    params = init_params(cfg, 0)
    ids = np.array(
        [
            [1] * 12,  # 12 real -> all 4 conv positions pooled
            [2] * 2 + [0] * 10,  # 2 real -> positions 0..1 pooled
        ]
    )
    _, cache = forward(params, cfg, ids)
    assert cache.pool_counts.tolist() == [4.0, 2.0]
    assert cache.pool_mask.tolist() == [[1, 1, 1, 1], [1, 1, 0, 0]]


def test_forward_batch_consistency():
    # each row of a batch is computed exactly as it would be alone
    cfg = tiny_config()
    params = init_params(cfg, 1)
    rng = np.random.default_rng(5)
    ids = rng.integers(1, 11, size=(5, 12))
    ids[2, 8:] = 0
    batch_out, _ = forward(params, cfg, ids)
    for i in range(5):
        solo_out, _ = forward(params, cfg, ids[i : i + 1])
        assert np.allclose(batch_out[i], solo_out[0], atol=1e-12)


def test_backward_shape_guard():
    cfg = tiny_config()
    params = init_params(cfg, 0)
    ids = np.full((2, 12), 3, dtype=np.int64)
    _, cache = forward(params, cfg, ids)
    with pytest.raises(NetError, match="d_logits"):
        backward(params, cfg, cache, np.zeros((2, 4)))


def test_backward_returns_all_gradients():
    cfg = tiny_config()
    params = init_params(cfg, 0)
    ids = np.array([[1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 0, 0]])
    out, cache = forward(params, cfg, ids)
    grads = backward(params, cfg, cache, np.ones_like(out))
    for name, arr in grads.named():
        assert arr.shape == getattr(params, name).shape
        assert np.all(np.isfinite(arr))
    assert np.all(grads.embedding[0] == 0.0)  # padding row never trains
    # ids never used get no embedding gradient
    assert np.all(grads.embedding[10] == 0.0)


def test_float32_pipeline_dtype():
    cfg = tiny_config(dtype="float32")
    params = init_params(cfg, 0)
    ids = np.full((2, 12), 3, dtype=np.int64)
    out, cache = forward(params, cfg, ids)
    assert out.dtype == np.float32
    assert cache.pooled.dtype == np.float32
    grads = backward(params, cfg, cache, out.copy())
    assert grads.conv1_w.dtype == np.float32
