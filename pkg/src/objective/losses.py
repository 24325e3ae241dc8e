"""Multi-task loss: BCE for Task A plus conditional CE for Task B."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.corpus.schemas import NUM_CLASSES
from src.errors import DataFormatError
from src.model.network import ForwardOut, log_softmax


@dataclass
class LossBreakdown:
    """Loss components; ``total`` is exactly ``loss_a + loss_b``."""

    loss_a: float
    loss_b: float
    total: float
    mask_count: int


def bce_with_logits(logit_a: np.ndarray, y_a: np.ndarray) -> float:
    """
    Mean binary cross-entropy on logits.

    Uses max(z, 0) - y*z + log1p(exp(-|z|)), which never overflows.
    """
    z = np.asarray(logit_a, dtype=np.float64)
    y = np.asarray(y_a, dtype=np.float64)
    if z.size == 0:
        raise DataFormatError("bce_with_logits: empty batch")
    if z.shape != y.shape:
        raise DataFormatError(f"bce_with_logits: shape mismatch {z.shape} vs {y.shape}")
    losses = np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))
    return float(losses.mean())


def conditional_ce(logits_b: np.ndarray, y_b: np.ndarray, y_a: np.ndarray) -> Tuple[float, int]:
    """
    Cross-entropy over the rows with ``y_a == 1`` only.

    Returns:
        (mean loss over the masked rows, number of masked rows); (0.0, 0)
        when no row has ``y_a == 1``
    """
    logits_b = np.asarray(logits_b, dtype=np.float64)
    y_b = np.asarray(y_b, dtype=np.int64)
    y_a = np.asarray(y_a, dtype=np.int64)
    if not (logits_b.shape[0] == y_b.shape[0] == y_a.shape[0]):
        raise DataFormatError(
            f"conditional_ce: length mismatch {logits_b.shape[0]}, {y_b.shape[0]}, {y_a.shape[0]}"
        )

    selected = np.flatnonzero(y_a == 1)
    if selected.size == 0:
        return 0.0, 0

    targets = y_b[selected]
    if targets.min() < 0 or targets.max() >= NUM_CLASSES:
        raise DataFormatError(f"conditional_ce: label_b outside 0..{NUM_CLASSES - 1}")

    log_probs = log_softmax(logits_b[selected])
    return float(-log_probs[np.arange(selected.size), targets].mean()), int(selected.size)


def total_loss(out: ForwardOut, y_a: np.ndarray, y_b: np.ndarray) -> LossBreakdown:
    """Sum of the Task-A and conditional Task-B losses."""
    loss_a = bce_with_logits(out.logit_a, y_a)
    loss_b, mask_count = conditional_ce(out.logits_b, y_b, y_a)
    return LossBreakdown(loss_a=loss_a, loss_b=loss_b, total=loss_a + loss_b, mask_count=mask_count)
