"""Full metric bundle for both tasks."""
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from src.corpus.schemas import NUM_CLASSES, Sample
from src.errors import DataFormatError
from src.metrics.scores import accuracy, binary_prf1, confusion_matrix, weighted_f1, weighted_prf
from src.model.predict import effective_label_b
from src.model.schemas import PredictionRecord
from src.persist.jsonfmt import dumps_fixed


class TaskAMetrics(BaseModel):
    accuracy: float
    precision: float
    recall: float
    f1: float
    weighted_f1: float


class TaskBMetrics(BaseModel):
    accuracy: float
    precision_w: float
    recall_w: float
    f1_w: float


class MetricsReport(BaseModel):
    """Task-A and Task-B metrics plus confusion matrices (rows = true class)."""

    task_a: TaskAMetrics
    task_b: TaskBMetrics
    task_b_ai_only: Optional[TaskBMetrics] = None
    confusion_a: List[List[int]]
    confusion_b: List[List[int]]
    n: int

    def to_json(self, indent: Optional[int] = 2) -> str:
        """JSON with declared key order and 6-decimal floats."""
        return dumps_fixed(self.model_dump(), indent=indent)


def task_a_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> TaskAMetrics:
    cm = confusion_matrix(y_true, y_pred, 2)
    precision, recall, f1 = binary_prf1(cm, positive_class=1)
    return TaskAMetrics(
        accuracy=accuracy(cm),
        precision=precision,
        recall=recall,
        f1=f1,
        weighted_f1=weighted_f1(cm),
    )


def task_b_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> TaskBMetrics:
    cm = confusion_matrix(y_true, y_pred, NUM_CLASSES)
    precision, recall, f1 = weighted_prf(cm)
    return TaskBMetrics(accuracy=accuracy(cm), precision_w=precision, recall_w=recall, f1_w=f1)


def metrics_report(predictions: Sequence[PredictionRecord], gold: Sequence[Sample]) -> MetricsReport:
    """
    Score predictions against labeled samples, matched by id.

    Task B is scored over all samples (real images must be predicted as
    class 0); ``task_b_ai_only`` repeats it over gold ``label_a == 1`` rows.
    A row predicted real counts as a class-0 Task-B prediction whatever its
    stored pred_b.

    Raises:
        DataFormatError: On id mismatch or unlabeled gold rows
    """
    if len(predictions) != len(gold):
        raise DataFormatError(f"{len(predictions)} predictions for {len(gold)} gold samples")
    if not gold:
        raise DataFormatError("cannot score an empty evaluation set")

    by_id = {p.id: p for p in predictions}
    if len(by_id) != len(predictions):
        raise DataFormatError("duplicate ids in predictions")

    y_a, p_a, y_b, p_b = [], [], [], []
    for sample in gold:
        if not sample.is_labeled:
            raise DataFormatError(f"gold sample {sample.id!r} has no labels")
        pred = by_id.get(sample.id)
        if pred is None:
            raise DataFormatError(f"no prediction for gold sample {sample.id!r}")
        y_a.append(sample.label_a)
        p_a.append(pred.pred_a)
        y_b.append(sample.label_b)
        p_b.append(effective_label_b(pred.pred_a, pred.pred_b))

    y_a_arr = np.asarray(y_a)
    ai_rows = np.flatnonzero(y_a_arr == 1)
    ai_only = None
    if ai_rows.size:
        ai_only = task_b_metrics(np.asarray(y_b)[ai_rows], np.asarray(p_b)[ai_rows])

    return MetricsReport(
        task_a=task_a_metrics(y_a, p_a),
        task_b=task_b_metrics(y_b, p_b),
        task_b_ai_only=ai_only,
        confusion_a=confusion_matrix(y_a, p_a, 2).tolist(),
        confusion_b=confusion_matrix(y_b, p_b, NUM_CLASSES).tolist(),
        n=len(gold),
    )
