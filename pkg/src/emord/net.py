"""Dense numeric core of the text classifier.

Architecture: embedding -> conv(k1) -> ReLU -> conv(k2) -> ReLU -> masked
mean-pool over time -> 3-layer FFNN -> head (softmax, or per-entry logistic
for the ordinal heads).  Convolutions are valid (no padding), stride 1, so
each conv shortens the time axis by kernel-1.

Everything is plain numpy; backward() returns exact reverse-mode gradients
for every parameter and is verified against central finite differences in
gradcheck.py.  float32 is the training dtype, float64 the gradient-checking
dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from numpy.lib.stride_tricks import sliding_window_view

import numpy as np

from .codec import MODE_SOFTMAX, MODE_ORDINAL_2D, HEAD_MODES

_INIT_STREAM = 101  # seed-stream tag separating init draws from other consumers

#: Parameter arrays in canonical order (checkpoints, optimizer slots, reports).
PARAM_FIELDS = (
    "embedding",
    "conv1_w",
    "conv1_b",
    "conv2_w",
    "conv2_b",
    "fc1_w",
    "fc1_b",
    "fc2_w",
    "fc2_b",
    "fc3_w",
    "fc3_b",
)


class NetError(ValueError):
    """Invalid model configuration or forward-pass input."""


@dataclass(frozen=True)
class ModelConfig:
    """Widths and head mode of the classifier.

    `output_width` must match the head mode: K for softmax, K-1 for
    ordinal-1d, 2*(G-1) for ordinal-2d (two stacked heads of width G-1).
    """

    vocab_size: int
    output_width: int
    head_mode: str = MODE_SOFTMAX
    embed_dim: int = 32
    conv_channels: tuple[int, int] = (32, 64)
    kernel_sizes: tuple[int, int] = (6, 4)
    ffnn_hidden: tuple[int, int] = (64, 32)
    dtype: str = "float32"

    def __post_init__(self):
        if self.head_mode not in HEAD_MODES:
            raise NetError(f"unknown head mode {self.head_mode!r}")
        if self.vocab_size < 3:
            raise NetError("vocab_size must cover padding, unknown and one real token")
        if self.output_width < 1:
            raise NetError("output_width must be positive")
        if self.head_mode == MODE_ORDINAL_2D and self.output_width % 2 != 0:
            raise NetError("ordinal-2d output width must be even (two equal heads)")
        for name in ("embed_dim",):
            if getattr(self, name) < 1:
                raise NetError(f"{name} must be positive")
        if min(self.conv_channels) < 1 or min(self.ffnn_hidden) < 1:
            raise NetError("layer widths must be positive")
        if min(self.kernel_sizes) < 1:
            raise NetError("kernel sizes must be positive")
        if self.dtype not in ("float32", "float64"):
            raise NetError(f"dtype must be float32 or float64, got {self.dtype!r}")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64

    @property
    def min_seq_length(self) -> int:
        """Shortest time axis the two valid convolutions can consume."""
        return sum(self.kernel_sizes) - len(self.kernel_sizes) + 1

    def with_dtype(self, dtype: str) -> "ModelConfig":
        return replace(self, dtype=dtype)

    @classmethod
    def desk(cls, vocab_size: int, output_width: int, head_mode: str, **overrides):
        """Laptop-scale widths; trains in seconds on the synthetic corpora."""
        base = dict(
            embed_dim=32,
            conv_channels=(32, 64),
            kernel_sizes=(6, 4),
            ffnn_hidden=(64, 32),
        )
        base.update(overrides)
        return cls(vocab_size, output_width, head_mode, **base)

    @classmethod
    def paper(cls, vocab_size: int, output_width: int, head_mode: str, **overrides):
        """Full-size widths: conv filters (1024, 2048), FFNN hidden (2048, 768)."""
        base = dict(
            embed_dim=768,
            conv_channels=(1024, 2048),
            kernel_sizes=(6, 4),
            ffnn_hidden=(2048, 768),
        )
        base.update(overrides)
        return cls(vocab_size, output_width, head_mode, **base)


@dataclass
class ModelParams:
    """All trainable arrays; also used as the container for gradients.

    embedding row 0 is the padding slot: initialized to zeros, masked out of
    the forward pass, and never receives gradient, so it stays zero.
    """

    embedding: np.ndarray  # (V, E)
    conv1_w: np.ndarray  # (C1, E, k1)
    conv1_b: np.ndarray  # (C1,)
    conv2_w: np.ndarray  # (C2, C1, k2)
    conv2_b: np.ndarray  # (C2,)
    fc1_w: np.ndarray  # (C2, H1)
    fc1_b: np.ndarray  # (H1,)
    fc2_w: np.ndarray  # (H1, H2)
    fc2_b: np.ndarray  # (H2,)
    fc3_w: np.ndarray  # (H2, out)
    fc3_b: np.ndarray  # (out,)

    def named(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in PARAM_FIELDS]

    def copy(self) -> "ModelParams":
        return ModelParams(**{name: arr.copy() for name, arr in self.named()})

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(**{name: arr.astype(dtype) for name, arr in self.named()})


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Seeded init: embedding U(-0.05, 0.05), weights U(+-sqrt(1/fan_in)), zero biases."""
    rng = np.random.default_rng([seed, _INIT_STREAM])
    dt = config.np_dtype
    e = config.embed_dim
    c1, c2 = config.conv_channels
    k1, k2 = config.kernel_sizes
    h1, h2 = config.ffnn_hidden
    out = config.output_width

    def uniform(bound, shape):
        return rng.uniform(-bound, bound, size=shape).astype(dt)

    embedding = uniform(0.05, (config.vocab_size, e))
    embedding[0] = 0.0
    return ModelParams(
        embedding=embedding,
        conv1_w=uniform(np.sqrt(1.0 / (e * k1)), (c1, e, k1)),
        conv1_b=np.zeros(c1, dtype=dt),
        conv2_w=uniform(np.sqrt(1.0 / (c1 * k2)), (c2, c1, k2)),
        conv2_b=np.zeros(c2, dtype=dt),
        fc1_w=uniform(np.sqrt(1.0 / c2), (c2, h1)),
        fc1_b=np.zeros(h1, dtype=dt),
        fc2_w=uniform(np.sqrt(1.0 / h1), (h1, h2)),
        fc2_b=np.zeros(h2, dtype=dt),
        fc3_w=uniform(np.sqrt(1.0 / h2), (h2, out)),
        fc3_b=np.zeros(out, dtype=dt),
    )


@dataclass
class ForwardCache:
    """Activations retained by forward() for the matching backward() call."""

    token_ids: np.ndarray  # (B, T) int
    real_mask: np.ndarray  # (B, T) dtype 0/1
    emb: np.ndarray  # (B, T, E)
    z1: np.ndarray  # (B, T1, C1) pre-ReLU
    a1: np.ndarray  # (B, T1, C1)
    z2: np.ndarray  # (B, T2, C2) pre-ReLU
    a2: np.ndarray  # (B, T2, C2)
    pool_mask: np.ndarray  # (B, T2) dtype 0/1
    pool_counts: np.ndarray  # (B,) dtype
    pooled: np.ndarray  # (B, C2)
    h1_pre: np.ndarray
    h1: np.ndarray
    h2_pre: np.ndarray
    h2: np.ndarray
    logits: np.ndarray  # (B, out)
    outputs: np.ndarray  # (B, out) post softmax/logistic


def _conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # x (B, T, Cin), w (Cout, Cin, k) -> (B, T-k+1, Cout)
    windows = sliding_window_view(x, w.shape[2], axis=1)  # (B, T', Cin, k)
    return np.einsum("btck,ock->bto", windows, w, optimize=True) + b


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def forward(
    params: ModelParams, config: ModelConfig, token_ids: np.ndarray
) -> tuple[np.ndarray, ForwardCache]:
    """Run the full pipeline on a (B, T) batch of token ids.

    Padding (id 0) embeds to an exact zero vector.  The mean-pool averages
    only conv-output positions whose window starts on a real token, dividing
    by that count rather than by the full time axis, so trailing padding
    never dilutes short texts.
    """
    token_ids = np.asarray(token_ids)
    if token_ids.ndim != 2:
        raise NetError(f"token_ids must be (B, T), got shape {token_ids.shape}")
    if not np.issubdtype(token_ids.dtype, np.integer):
        raise NetError("token_ids must be integers")
    if token_ids.min(initial=0) < 0 or token_ids.max(initial=0) >= config.vocab_size:
        raise NetError(f"token id outside [0, {config.vocab_size - 1}]")
    b, t = token_ids.shape
    k1, k2 = config.kernel_sizes
    if t < config.min_seq_length:
        raise NetError(
            f"sequence length {t} shorter than the convolutions need ({config.min_seq_length})"
        )
    n_real = (token_ids != 0).sum(axis=1)
    if (n_real == 0).any():
        rows = np.flatnonzero(n_real == 0).tolist()
        raise NetError(f"all-padding rows not allowed (rows {rows})")

    dt = config.np_dtype
    real_mask = (token_ids != 0).astype(dt)
    emb = params.embedding[token_ids] * real_mask[:, :, None]

    z1 = _conv1d(emb, params.conv1_w, params.conv1_b)
    assert z1.shape[1] == t - k1 + 1
    a1 = np.maximum(z1, 0)
    z2 = _conv1d(a1, params.conv2_w, params.conv2_b)
    t2 = t - k1 - k2 + 2
    assert z2.shape[1] == t2
    a2 = np.maximum(z2, 0)

    pool_counts = np.minimum(n_real, t2).astype(dt)
    pool_mask = (np.arange(t2)[None, :] < pool_counts[:, None]).astype(dt)
    pooled = (a2 * pool_mask[:, :, None]).sum(axis=1) / pool_counts[:, None]

    h1_pre = pooled @ params.fc1_w + params.fc1_b
    h1 = np.maximum(h1_pre, 0)
    h2_pre = h1 @ params.fc2_w + params.fc2_b
    h2 = np.maximum(h2_pre, 0)
    logits = h2 @ params.fc3_w + params.fc3_b

    if config.head_mode == MODE_SOFTMAX:
        outputs = _softmax(logits)
    else:
        outputs = _sigmoid(logits)
    if not np.all(np.isfinite(outputs)):
        raise NetError("non-finite head outputs")

    cache = ForwardCache(
        token_ids=token_ids,
        real_mask=real_mask,
        emb=emb,
        z1=z1,
        a1=a1,
        z2=z2,
        a2=a2,
        pool_mask=pool_mask,
        pool_counts=pool_counts,
        pooled=pooled,
        h1_pre=h1_pre,
        h1=h1,
        h2_pre=h2_pre,
        h2=h2,
        logits=logits,
        outputs=outputs,
    )
    return outputs, cache


def _conv1d_backward(x, w, d_out):
    # returns (d_x, d_w, d_b) for z = conv1d(x, w, b)
    k = w.shape[2]
    t_out = d_out.shape[1]
    windows = sliding_window_view(x, k, axis=1)
    d_w = np.einsum("btck,bto->ock", windows, d_out, optimize=True)
    d_b = d_out.sum(axis=(0, 1))
    d_x = np.zeros_like(x)
    spread = np.einsum("bto,ock->btck", d_out, w, optimize=True)
    for j in range(k):
        d_x[:, j : j + t_out, :] += spread[:, :, :, j]
    return d_x, d_w, d_b


def backward(
    params: ModelParams,
    config: ModelConfig,
    cache: ForwardCache,
    d_logits: np.ndarray,
) -> ModelParams:
    """Exact gradients of the scalar loss whose d(loss)/d(logits) is `d_logits`.

    The head-plus-loss derivative is computed by the loss module (fused with
    the softmax/logistic transform); everything from the logits down is
    differentiated here.  Returns a ModelParams holding the gradients.
    """
    if d_logits.shape != cache.logits.shape:
        raise NetError(
            f"d_logits shape {d_logits.shape} does not match logits {cache.logits.shape}"
        )
    d_fc3_w = cache.h2.T @ d_logits
    d_fc3_b = d_logits.sum(axis=0)
    d_h2 = d_logits @ params.fc3_w.T

    d_h2_pre = d_h2 * (cache.h2_pre > 0)
    d_fc2_w = cache.h1.T @ d_h2_pre
    d_fc2_b = d_h2_pre.sum(axis=0)
    d_h1 = d_h2_pre @ params.fc2_w.T

    d_h1_pre = d_h1 * (cache.h1_pre > 0)
    d_fc1_w = cache.pooled.T @ d_h1_pre
    d_fc1_b = d_h1_pre.sum(axis=0)
    d_pooled = d_h1_pre @ params.fc1_w.T

    d_a2 = (
        cache.pool_mask[:, :, None]
        * d_pooled[:, None, :]
        / cache.pool_counts[:, None, None]
    )
    d_z2 = d_a2 * (cache.z2 > 0)
    d_a1, d_conv2_w, d_conv2_b = _conv1d_backward(cache.a1, params.conv2_w, d_z2)

    d_z1 = d_a1 * (cache.z1 > 0)
    d_emb, d_conv1_w, d_conv1_b = _conv1d_backward(cache.emb, params.conv1_w, d_z1)

    d_embedding = np.zeros_like(params.embedding)
    np.add.at(d_embedding, cache.token_ids, d_emb * cache.real_mask[:, :, None])
    d_embedding[0] = 0.0  # padding slot is masked out of the forward pass

    return ModelParams(
        embedding=d_embedding,
        conv1_w=d_conv1_w,
        conv1_b=d_conv1_b,
        conv2_w=d_conv2_w,
        conv2_b=d_conv2_b,
        fc1_w=d_fc1_w,
        fc1_b=d_fc1_b,
        fc2_w=d_fc2_w,
        fc2_b=d_fc2_b,
        fc3_w=d_fc3_w,
        fc3_b=d_fc3_b,
    )
