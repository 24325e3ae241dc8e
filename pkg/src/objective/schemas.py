"""Training configuration."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """Optimizer and loop settings. Defaults are the recorded reference run values."""

    model_config = ConfigDict(extra="forbid")

    lr: float = Field(default=2e-5, gt=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)
    batch_size: int = Field(default=256, ge=1)
    epochs: int = Field(default=8, ge=1)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    seed: int = Field(default=0, ge=0)
    eval_batch_size: int = Field(default=256, ge=1)
    selection_metric: Literal["task_a.weighted_f1"] = "task_a.weighted_f1"
