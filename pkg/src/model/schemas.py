"""Model configuration and prediction records."""
from dataclasses import dataclass
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.corpus.schemas import NUM_CLASSES


class ModelConfig(BaseModel):
    """Dimensions of the dual-encoder fusion network."""

    model_config = ConfigDict(extra="forbid")

    vocab_size: int = Field(default=2048, ge=4)
    seq_len: int = Field(default=16, ge=2)
    image_height: int = Field(default=32, ge=1)
    image_width: int = Field(default=32, ge=1)
    channels: int = 3
    patch_size: int = Field(default=4, ge=1)
    text_dim: int = Field(default=32, ge=1)
    image_dim: int = Field(default=32, ge=1)
    shared_dim: int = Field(default=64, ge=1)
    num_classes: int = NUM_CLASSES
    norm_mean: float = 0.5
    norm_std: float = 0.5

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelConfig":
        if self.channels != 3:
            raise ValueError(f"channels must be 3, got {self.channels}")
        if self.num_classes != NUM_CLASSES:
            raise ValueError(f"num_classes must be {NUM_CLASSES}, got {self.num_classes}")
        if self.image_height % self.patch_size or self.image_width % self.patch_size:
            raise ValueError(
                f"image size {self.image_height}x{self.image_width} is not divisible by patch {self.patch_size}"
            )
        if self.norm_std == 0:
            raise ValueError("norm_std must be non-zero")
        return self

    @property
    def image_size(self) -> Tuple[int, int]:
        return (self.image_height, self.image_width)

    @property
    def patch_dim(self) -> int:
        return self.channels * self.patch_size * self.patch_size

    @property
    def num_patches(self) -> int:
        return (self.image_height // self.patch_size) * (self.image_width // self.patch_size)


@dataclass
class PredictionRecord:
    """Predicted labels with the probability of each predicted class."""

    id: str
    pred_a: int
    conf_a: float
    pred_b: int
    conf_b: float
