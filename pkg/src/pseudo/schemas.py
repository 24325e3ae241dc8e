"""Pseudo-label records, augmented splits and the run report."""
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.corpus.schemas import Sample


Provenance = Literal["original", "pseudo"]


class PseudoConfig(BaseModel):
    """Confidence gate and split seed."""

    model_config = ConfigDict(extra="forbid")

    threshold: float = Field(default=0.8, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    val_ratio: float = Field(default=0.2, ge=0.0, le=1.0)


@dataclass
class PseudoRecord:
    """A scored unlabeled row."""

    id: str
    caption: str
    image_path: str
    pred_a: int
    conf_a: float
    pred_b: int
    conf_b: float


@dataclass
class AugmentedSplits:
    """Extended manifests with a provenance flag per row."""

    train_manifest: List[Sample]
    val_manifest: List[Sample]
    train_provenance: List[Provenance] = field(default_factory=list)
    val_provenance: List[Provenance] = field(default_factory=list)
    repairs: int = 0
    inconsistent: int = 0


class PseudoReport(BaseModel):
    """Counts describing a pseudo-label run (written as ``pseudo_report.json``)."""

    threshold: float
    scored: int
    kept: int
    dropped: int
    kept_per_class: Dict[str, int]
    mean_conf_kept: Optional[Dict[str, float]] = None
    mean_conf_dropped: Optional[Dict[str, float]] = None
    pseudo_train: Optional[int] = None
    pseudo_val: Optional[int] = None
    train_extended: Optional[int] = None
    val_extended: Optional[int] = None
    repairs: Optional[int] = None
    inconsistent: Optional[int] = None
    duplicate_paths: Optional[int] = None
