"""Confusion matrices and precision / recall / F1 from counts.

Degenerate ratios (0/0) are reported as 0.
"""
from typing import Sequence, Tuple

import numpy as np

from src.errors import DataFormatError


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den != 0)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], num_classes: int) -> np.ndarray:
    """
    Count matrix with rows = true class, columns = predicted class.

    Raises:
        DataFormatError: On length mismatch or a class outside [0, num_classes)
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DataFormatError(f"confusion_matrix: {y_true.size} labels vs {y_pred.size} predictions")

    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    if y_true.size == 0:
        return cm
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise DataFormatError(f"confusion_matrix: {name} has a class outside [0, {num_classes})")
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def per_class_prf(cm: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-class precision, recall and F1 vectors."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    precision = _safe_div(tp, cm.sum(axis=0))
    recall = _safe_div(tp, cm.sum(axis=1))
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    return precision, recall, f1


def binary_prf1(cm: np.ndarray, positive_class: int = 1) -> Tuple[float, float, float]:
    """Precision, recall and F1 of ``positive_class`` from a 2x2 matrix."""
    cm = np.asarray(cm)
    if cm.shape != (2, 2):
        raise DataFormatError(f"binary_prf1 needs a 2x2 matrix, got {cm.shape}")
    precision, recall, f1 = per_class_prf(cm)
    return float(precision[positive_class]), float(recall[positive_class]), float(f1[positive_class])


def weighted_prf(cm: np.ndarray) -> Tuple[float, float, float]:
    """Support-weighted precision, recall and F1 (weights = row sums / n)."""
    support = np.asarray(cm, dtype=np.float64).sum(axis=1)
    n = support.sum()
    if n == 0:
        raise DataFormatError("weighted metrics are undefined on an empty confusion matrix")
    precision, recall, f1 = per_class_prf(cm)
    return float(support @ precision / n), float(support @ recall / n), float(support @ f1 / n)


def weighted_f1(cm: np.ndarray) -> float:
    """Support-weighted mean of per-class F1; classes with no support weigh 0."""
    return weighted_prf(cm)[2]


def accuracy(cm: np.ndarray) -> float:
    cm = np.asarray(cm)
    n = cm.sum()
    return float(np.trace(cm) / n) if n else 0.0
