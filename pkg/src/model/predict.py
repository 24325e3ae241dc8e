"""Label predictions with per-task confidences."""
import csv
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.corpus.dataset import Batch
from src.errors import DataFormatError
from src.model.network import Params, forward, sigmoid, softmax
from src.model.schemas import PredictionRecord


PREDICTION_HEADER = ["id", "pred_a", "conf_a", "pred_b", "conf_b"]


def decode_hierarchical(pred_a: np.ndarray, conf_a: np.ndarray, logits_b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Task-B labels consistent with Task-A predictions.

    Rows predicted real get class 0 with the Task-A confidence. Rows
    predicted AI-generated get the lowest-index argmax over the generator
    classes 1..5, with its probability under the full 6-way softmax.

    Args:
        pred_a: (N,) Task-A predictions in {0, 1}
        conf_a: (N,) Task-A confidences
        logits_b: (N, 6) Task-B logits

    Returns:
        (pred_b, conf_b), both shape (N,)
    """
    probs_b = softmax(logits_b)
    generator = 1 + np.argmax(logits_b[:, 1:], axis=1)
    rows = np.arange(len(pred_a))
    pred_b = np.where(pred_a == 1, generator, 0)
    conf_b = np.where(pred_a == 1, probs_b[rows, generator], conf_a)
    return pred_b.astype(np.int64), conf_b


def effective_label_b(pred_a: int, pred_b: int) -> int:
    """Task-B label after forcing class 0 onto rows predicted real."""
    return 0 if pred_a == 0 else pred_b


def predict_with_confidence(params: Params, batch: Batch, hierarchical: bool = False) -> List[PredictionRecord]:
    """
    Predict both labels for every row of a batch.

    pred_a is 1 iff sigmoid(logit_a) > 0.5; conf_a is the probability of the
    predicted class. pred_b is the lowest-index argmax; conf_b its softmax
    probability. With ``hierarchical`` the Task-B label is decoded under the
    Task-A prediction (see ``decode_hierarchical``).

    Args:
        params: Model parameters
        batch: Encoded inputs
        hierarchical: Keep pred_b consistent with pred_a

    Returns:
        One record per row, in batch order
    """
    out = forward(params, batch)
    prob_a = sigmoid(out.logit_a)
    probs_b = softmax(out.logits_b)

    pred_a = (prob_a > 0.5).astype(np.int64)
    conf_a = np.maximum(prob_a, 1.0 - prob_a)
    if hierarchical:
        pred_b, conf_b = decode_hierarchical(pred_a, conf_a, out.logits_b)
    else:
        pred_b = np.argmax(out.logits_b, axis=1)
        conf_b = probs_b[np.arange(len(batch)), pred_b]

    ids = batch.sample_ids or [str(i) for i in range(len(batch))]
    return [
        PredictionRecord(
            id=ids[i],
            pred_a=int(pred_a[i]),
            conf_a=float(conf_a[i]),
            pred_b=int(pred_b[i]),
            conf_b=float(conf_b[i]),
        )
        for i in range(len(batch))
    ]


def iter_batches(batch: Batch, batch_size: int) -> Iterator[Batch]:
    """Consecutive slices of at most ``batch_size`` rows."""
    for start in range(0, len(batch), batch_size):
        yield batch.subset(np.arange(start, min(start + batch_size, len(batch))))


def predict_all(
    params: Params, batch: Batch, batch_size: int = 256, hierarchical: bool = True
) -> List[PredictionRecord]:
    """``predict_with_confidence`` over a large batch, chunk by chunk."""
    records: List[PredictionRecord] = []
    for chunk in iter_batches(batch, batch_size):
        records.extend(predict_with_confidence(params, chunk, hierarchical=hierarchical))
    return records


def write_predictions(records: Sequence[PredictionRecord], path: Union[str, Path]) -> None:
    """Write ``id,pred_a,conf_a,pred_b,conf_b`` with 6-decimal confidences."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for r in records:
            writer.writerow([r.id, r.pred_a, f"{r.conf_a:.6f}", r.pred_b, f"{r.conf_b:.6f}"])
    logger.info(f"Predictions saved to {path} ({len(records)} rows)")


def read_predictions(path: Union[str, Path]) -> List[PredictionRecord]:
    """Read a predictions CSV written by ``write_predictions``."""
    path = Path(path)
    records: List[PredictionRecord] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PREDICTION_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(PREDICTION_HEADER)}, got {header}")
        for row in reader:
            if len(row) != len(PREDICTION_HEADER):
                raise DataFormatError(f"{path} line {reader.line_num}: expected 5 fields, got {len(row)}")
            try:
                records.append(PredictionRecord(
                    id=row[0], pred_a=int(row[1]), conf_a=float(row[2]), pred_b=int(row[3]), conf_b=float(row[4]),
                ))
            except ValueError:
                raise DataFormatError(f"{path} line {reader.line_num}: malformed prediction row") from None
    return records
