from .scores import accuracy, binary_prf1, confusion_matrix, weighted_f1, weighted_prf
from .report import MetricsReport, TaskAMetrics, TaskBMetrics, metrics_report

__all__ = [
    "accuracy", "binary_prf1", "confusion_matrix", "weighted_f1", "weighted_prf",
    "MetricsReport", "TaskAMetrics", "TaskBMetrics", "metrics_report",
]
