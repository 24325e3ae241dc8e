"""Data schemas for manifest rows and corpus synthesis."""
from typing import Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator


NUM_CLASSES = 6

# Index 0 is the real (human-created) class; 1..5 are the generator classes.
CLASS_NAMES: Tuple[str, ...] = ("real", "sd3", "sdxl", "sd21", "dalle3", "midjourney6")


class Sample(BaseModel):
    """One manifest row."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    caption: str
    image_path: str = Field(min_length=1)
    label_a: Optional[int] = Field(default=None, ge=0, le=1)
    label_b: Optional[int] = Field(default=None, ge=0, le=NUM_CLASSES - 1)

    @model_validator(mode="after")
    def _check_label_pair(self) -> "Sample":
        if self.label_a is None and self.label_b is None:
            return self
        if self.label_a is None or self.label_b is None:
            raise ValueError("label_a and label_b must both be present or both be empty")
        if self.label_a == 0 and self.label_b != 0:
            raise ValueError(f"label_a=0 requires label_b=0, got label_b={self.label_b}")
        if self.label_a == 1 and self.label_b == 0:
            raise ValueError("label_a=1 requires label_b in 1..5, got label_b=0")
        return self

    @property
    def is_labeled(self) -> bool:
        return self.label_a is not None


class SynthConfig(BaseModel):
    """Parameters of the synthetic fingerprint corpus."""

    model_config = ConfigDict(extra="forbid")

    n_samples: int = Field(default=600, ge=1)
    classes: int = Field(default=NUM_CLASSES)
    height: int = Field(default=32, ge=4)
    width: int = Field(default=32, ge=4)
    amplitude: float = Field(default=0.25, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=0.05, ge=0.0)
    seed: int = Field(default=0, ge=0)
    balanced: bool = True
    id_prefix: Optional[str] = None

    @model_validator(mode="after")
    def _check_classes(self) -> "SynthConfig":
        if self.classes != NUM_CLASSES:
            raise ValueError(f"classes must be {NUM_CLASSES}, got {self.classes}")
        if self.balanced and self.n_samples % NUM_CLASSES != 0:
            raise ValueError(
                f"n_samples={self.n_samples} cannot be split into {NUM_CLASSES} equal classes"
            )
        return self

    @property
    def prefix(self) -> str:
        return self.id_prefix if self.id_prefix is not None else f"s{self.seed}-"
