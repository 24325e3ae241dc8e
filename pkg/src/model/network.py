"""Dual-encoder fusion network with a binary head and a 6-way head.

Text path:  masked mean of token embeddings -> affine -> ReLU -> t
Image path: per-patch affine -> mean over patches -> affine -> ReLU -> v
Fusion:     ReLU(W_f [t; v] + b_f) -> head A (1 logit), head B (K logits)

All tensors are float64; row-vector convention (``x @ W``).
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from src.corpus.dataset import Batch
from src.corpus.vocab import PAD_ID
from src.errors import DataFormatError, NumericError
from src.model.schemas import ModelConfig


Params = Dict[str, np.ndarray]

PARAM_ORDER: Tuple[str, ...] = (
    "E",
    "W_t", "b_t",
    "W_p", "b_p",
    "W_v", "b_v",
    "W_f", "b_f",
    "W_a", "b_a",
    "W_b", "b_b",
)

ENCODER_PARAMS = ("E", "W_t", "b_t", "W_p", "b_p", "W_v", "b_v")
HEAD_PARAMS = ("W_f", "b_f", "W_a", "b_a", "W_b", "b_b")


def param_shapes(cfg: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    """Shape of every parameter tensor, in canonical order."""
    d_t, d_v, d_s, k = cfg.text_dim, cfg.image_dim, cfg.shared_dim, cfg.num_classes
    return {
        "E": (cfg.vocab_size, d_t),
        "W_t": (d_t, d_t), "b_t": (d_t,),
        "W_p": (cfg.patch_dim, d_v), "b_p": (d_v,),
        "W_v": (d_v, d_v), "b_v": (d_v,),
        "W_f": (d_t + d_v, d_s), "b_f": (d_s,),
        "W_a": (d_s, 1), "b_a": (1,),
        "W_b": (d_s, k), "b_b": (k,),
    }


def init_params(cfg: ModelConfig, seed: int = 0) -> Params:
    """
    Xavier-uniform weights, zero biases, zero PAD embedding row.

    Args:
        cfg: Model dimensions
        seed: Generator seed

    Returns:
        Parameters keyed by name, in canonical order
    """
    rng = np.random.default_rng(seed)
    params: Params = {}
    for name, shape in param_shapes(cfg).items():
        if len(shape) == 1:
            params[name] = np.zeros(shape, dtype=np.float64)
            continue
        fan_in, fan_out = shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-bound, bound, size=shape)

    params["E"][PAD_ID] = 0.0
    return params


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Logistic function without overflow for any finite input."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logsumexp(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp, shifted by the row max."""
    m = logits.max(axis=-1, keepdims=True)
    return (m + np.log(np.exp(logits - m).sum(axis=-1, keepdims=True)))[..., 0]


def log_softmax(logits: np.ndarray) -> np.ndarray:
    return logits - logsumexp(logits)[..., None]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


@dataclass
class ForwardOut:
    """Per-sample head outputs."""

    logit_a: np.ndarray  # (B,)
    logits_b: np.ndarray  # (B, K)
    fused: np.ndarray  # (B, d_s)


@dataclass
class ForwardCache:
    """Intermediates kept for the backward pass and kink checks."""

    ids: np.ndarray
    mask: np.ndarray
    counts: np.ndarray
    pooled: np.ndarray
    h_t: np.ndarray
    pbar: np.ndarray
    u: np.ndarray
    h_v: np.ndarray
    concat: np.ndarray
    h_f: np.ndarray
    fused: np.ndarray

    def pre_activations(self) -> Tuple[np.ndarray, ...]:
        return (self.h_t, self.h_v, self.h_f)


def patch_size_of(params: Params) -> int:
    rows = params["W_p"].shape[0]
    p = int(round(np.sqrt(rows / 3)))
    if 3 * p * p != rows:
        raise DataFormatError(f"W_p has {rows} rows, not 3*P^2 for any P")
    return p


def extract_patches(images: np.ndarray, patch: int) -> np.ndarray:
    """(B, 3, H, W) -> (B, N, 3*P*P), patches in row-major grid order."""
    b, c, h, w = images.shape
    if h % patch or w % patch:
        raise DataFormatError(f"image size {h}x{w} is not divisible by patch {patch}")
    grid = images.reshape(b, c, h // patch, patch, w // patch, patch)
    return grid.transpose(0, 2, 4, 1, 3, 5).reshape(b, (h // patch) * (w // patch), c * patch * patch)


def _check_inputs(params: Params, batch: Batch) -> None:
    n = len(batch)
    if batch.mask.shape != batch.ids.shape or batch.images.shape[0] != n:
        raise DataFormatError(
            f"batch shape mismatch: ids {batch.ids.shape}, mask {batch.mask.shape}, images {batch.images.shape}"
        )
    if batch.images.ndim != 4 or batch.images.shape[1] != 3:
        raise DataFormatError(f"images must be (B, 3, H, W), got {batch.images.shape}")
    vocab_size = params["E"].shape[0]
    if batch.ids.size and (batch.ids.min() < 0 or batch.ids.max() >= vocab_size):
        raise DataFormatError(f"token ids outside [0, {vocab_size})")
    if not np.all(np.isfinite(batch.images)):
        raise NumericError("non-finite image input")
    if np.any(batch.mask.sum(axis=1) < 1):
        raise DataFormatError("every token sequence needs at least one unmasked token")


def forward_with_cache(params: Params, batch: Batch) -> Tuple[ForwardOut, ForwardCache]:
    """Run the network and keep the intermediates needed by ``backward``."""
    _check_inputs(params, batch)

    mask = batch.mask
    counts = mask.sum(axis=1)
    emb = params["E"][batch.ids]                                    # (B, L, d_t)
    pooled = (emb * mask[:, :, None]).sum(axis=1) / counts[:, None]
    h_t = pooled @ params["W_t"] + params["b_t"]
    t = relu(h_t)

    patches = extract_patches(batch.images, patch_size_of(params))  # (B, N, 3P^2)
    per_patch = patches @ params["W_p"] + params["b_p"]              # (B, N, d_v)
    u = per_patch.mean(axis=1)
    h_v = u @ params["W_v"] + params["b_v"]
    v = relu(h_v)

    concat = np.concatenate([t, v], axis=1)
    h_f = concat @ params["W_f"] + params["b_f"]
    fused = relu(h_f)

    logit_a = (fused @ params["W_a"] + params["b_a"])[:, 0]
    logits_b = fused @ params["W_b"] + params["b_b"]

    out = ForwardOut(logit_a=logit_a, logits_b=logits_b, fused=fused)
    cache = ForwardCache(
        ids=batch.ids, mask=mask, counts=counts, pooled=pooled, h_t=h_t,
        pbar=patches.mean(axis=1), u=u, h_v=h_v, concat=concat, h_f=h_f, fused=fused,
    )
    return out, cache


def forward(params: Params, batch: Batch) -> ForwardOut:
    """Per-sample Task-A logit and Task-B logits for a batch."""
    out, _ = forward_with_cache(params, batch)
    return out
