from .schemas import ModelConfig, PredictionRecord
from .network import ForwardOut, Params, forward, forward_with_cache, init_params
from .predict import (
    decode_hierarchical,
    effective_label_b,
    predict_all,
    predict_with_confidence,
    read_predictions,
    write_predictions,
)

__all__ = [
    "ModelConfig", "PredictionRecord",
    "ForwardOut", "Params", "forward", "forward_with_cache", "init_params",
    "decode_hierarchical", "effective_label_b",
    "predict_all", "predict_with_confidence", "read_predictions", "write_predictions",
]
