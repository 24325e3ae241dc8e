"""Analytic gradients of the total multi-task loss."""
from typing import Tuple

import numpy as np

from src.corpus.dataset import Batch
from src.errors import DataFormatError, NumericError
from src.model.network import PARAM_ORDER, Params, forward_with_cache, sigmoid, softmax
from src.objective.losses import LossBreakdown, total_loss


def loss_and_grad(params: Params, batch: Batch) -> Tuple[LossBreakdown, Params]:
    """
    Forward pass, loss, and exact gradients of ``total`` for every parameter.

    Rows with ``label_a == 0`` send no gradient through head B.

    Args:
        params: Model parameters
        batch: Labeled batch

    Returns:
        (loss breakdown, gradients keyed like ``params``)
    """
    if not batch.has_labels:
        raise DataFormatError("backward needs a labeled batch")

    out, cache = forward_with_cache(params, batch)
    losses = total_loss(out, batch.label_a, batch.label_b)
    if not np.isfinite(losses.total):
        raise NumericError(f"non-finite loss: loss_a={losses.loss_a}, loss_b={losses.loss_b}")

    n = len(batch)
    y_a = batch.label_a.astype(np.float64)

    # Head A: d/dz of mean BCE.
    dz = (sigmoid(out.logit_a) - y_a) / n                       # (B,)

    # Head B: masked softmax CE averaged over the mask.
    dl = np.zeros_like(out.logits_b)
    if losses.mask_count:
        rows = np.flatnonzero(batch.label_a == 1)
        g = softmax(out.logits_b[rows])
        g[np.arange(rows.size), batch.label_b[rows]] -= 1.0
        dl[rows] = g / losses.mask_count

    grads: Params = {}
    fused = cache.fused
    grads["W_a"] = fused.T @ dz[:, None]
    grads["b_a"] = np.array([dz.sum()])
    grads["W_b"] = fused.T @ dl
    grads["b_b"] = dl.sum(axis=0)

    g_fused = dz[:, None] * params["W_a"][:, 0][None, :] + dl @ params["W_b"].T
    g_hf = g_fused * (cache.h_f > 0)
    grads["W_f"] = cache.concat.T @ g_hf
    grads["b_f"] = g_hf.sum(axis=0)
    g_concat = g_hf @ params["W_f"].T

    d_t = params["W_t"].shape[0]
    g_t, g_v = g_concat[:, :d_t], g_concat[:, d_t:]

    # Image path. The mean over per-patch affines equals the affine of the mean patch.
    g_hv = g_v * (cache.h_v > 0)
    grads["W_v"] = cache.u.T @ g_hv
    grads["b_v"] = g_hv.sum(axis=0)
    g_u = g_hv @ params["W_v"].T
    grads["W_p"] = cache.pbar.T @ g_u
    grads["b_p"] = g_u.sum(axis=0)

    # Text path.
    g_ht = g_t * (cache.h_t > 0)
    grads["W_t"] = cache.pooled.T @ g_ht
    grads["b_t"] = g_ht.sum(axis=0)
    g_pooled = g_ht @ params["W_t"].T                             # (B, d_t)
    g_emb = g_pooled[:, None, :] * (cache.mask / cache.counts[:, None])[:, :, None]
    g_E = np.zeros_like(params["E"])
    np.add.at(g_E, cache.ids, g_emb)
    grads["E"] = g_E

    ordered = {name: grads[name] for name in PARAM_ORDER}
    for name, grad in ordered.items():
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for {name}")
    return losses, ordered


def backward(params: Params, batch: Batch) -> Params:
    """Gradients of the total loss, shaped like ``params``."""
    _, grads = loss_and_grad(params, batch)
    return grads
