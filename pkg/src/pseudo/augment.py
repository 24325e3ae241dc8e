"""Splitting kept pseudo records 8:2 and merging them into the original splits."""
import math
import os
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.corpus.manifest import write_manifest
from src.corpus.schemas import Sample
from src.errors import DataFormatError
from src.pseudo.schemas import AugmentedSplits, PseudoRecord


PSEUDO_ID_PREFIX = "pseudo-"
TRAIN_EXTENDED = "train_extended.csv"
VAL_EXTENDED = "val_extended.csv"


def split_pseudo(
    records: Sequence[PseudoRecord],
    seed: int = 0,
    val_ratio: float = 0.2,
) -> Tuple[List[PseudoRecord], List[PseudoRecord]]:
    """
    Seeded shuffle, then the first floor(val_ratio * n) records go to validation.

    Returns:
        (train part, val part), both in shuffled order
    """
    n = len(records)
    order = np.random.default_rng(seed).permutation(n)
    n_val = math.floor(val_ratio * n)
    val_part = [records[i] for i in order[:n_val]]
    train_part = [records[i] for i in order[n_val:]]
    return train_part, val_part


def pseudo_to_sample(record: PseudoRecord) -> Tuple[Optional[Sample], bool]:
    """
    Turn a pseudo record into a labeled manifest row.

    Task-A decides the label pair. ``pred_a = 0`` forces ``label_b = 0``
    (a repair). ``pred_a = 1`` with ``pred_b = 0`` names no generator, so
    the record is unusable and ``None`` is returned; ``label_a`` is never
    overridden.

    Returns:
        (sample or None, whether a repair was applied)
    """
    label_a, label_b = record.pred_a, record.pred_b
    if label_a == 1 and label_b == 0:
        return None, False
    repaired = False
    if label_a == 0 and label_b != 0:
        label_b, repaired = 0, True

    sample = Sample(
        id=f"{PSEUDO_ID_PREFIX}{record.id}",
        caption=record.caption,
        image_path=record.image_path,
        label_a=label_a,
        label_b=label_b,
    )
    return sample, repaired


def _append(original: Sequence[Sample], pseudo: Sequence[Sample], which: str) -> List[Sample]:
    ids = {s.id for s in original}
    for s in pseudo:
        if s.id in ids:
            raise DataFormatError(f"{which}: pseudo id {s.id!r} collides with an existing row")
        ids.add(s.id)
    return list(original) + list(pseudo)


def merge_manifests(
    original_train: Sequence[Sample],
    original_val: Sequence[Sample],
    pseudo_train: Sequence[PseudoRecord],
    pseudo_val: Sequence[PseudoRecord],
) -> AugmentedSplits:
    """
    Original rows followed by pseudo rows, per split, with provenance flags.

    Args:
        original_train: Original training manifest
        original_val: Original validation manifest
        pseudo_train: Pseudo records assigned to training
        pseudo_val: Pseudo records assigned to validation

    Returns:
        AugmentedSplits
    """
    repairs = inconsistent = 0
    converted = []
    for part in (pseudo_train, pseudo_val):
        rows = []
        for record in part:
            sample, repaired = pseudo_to_sample(record)
            if sample is None:
                inconsistent += 1
                continue
            repairs += int(repaired)
            rows.append(sample)
        converted.append(rows)
    train_rows, val_rows = converted

    if repairs:
        logger.warning(f"Repaired {repairs} pseudo label pairs")
    if inconsistent:
        logger.warning(f"Dropped {inconsistent} pseudo rows predicted AI-generated with class 0")

    return AugmentedSplits(
        train_manifest=_append(original_train, train_rows, "train"),
        val_manifest=_append(original_val, val_rows, "val"),
        train_provenance=["original"] * len(original_train) + ["pseudo"] * len(train_rows),
        val_provenance=["original"] * len(original_val) + ["pseudo"] * len(val_rows),
        repairs=repairs,
        inconsistent=inconsistent,
    )


def rebase_path(image_path: str, from_dir: Union[str, Path], to_dir: Union[str, Path]) -> str:
    """Rewrite a relative path so it resolves from ``to_dir`` instead of ``from_dir``."""
    from_dir, to_dir = Path(from_dir).resolve(), Path(to_dir).resolve()
    if from_dir == to_dir or os.path.isabs(image_path):
        return image_path
    return Path(os.path.relpath(from_dir / image_path, to_dir)).as_posix()


def rebase_samples(samples: Iterable[Sample], from_dir: Union[str, Path], to_dir: Union[str, Path]) -> List[Sample]:
    """Samples with image paths rebased from ``from_dir`` to ``to_dir``; unchanged when the dirs match."""
    if Path(from_dir).resolve() == Path(to_dir).resolve():
        return list(samples)
    return [s.model_copy(update={"image_path": rebase_path(s.image_path, from_dir, to_dir)}) for s in samples]


def rebase_records(
    records: Iterable[PseudoRecord], from_dir: Union[str, Path], to_dir: Union[str, Path]
) -> List[PseudoRecord]:
    """Pseudo records with image paths rebased from ``from_dir`` to ``to_dir``."""
    return [replace(r, image_path=rebase_path(r.image_path, from_dir, to_dir)) for r in records]


def count_duplicate_paths(original_paths: Iterable[Path], pseudo_paths: Iterable[Path]) -> int:
    """Number of pseudo rows whose resolved image path also appears among the originals."""
    seen = {Path(p).resolve() for p in original_paths}
    return sum(1 for p in pseudo_paths if Path(p).resolve() in seen)


def write_augmented(splits: AugmentedSplits, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``train_extended.csv`` and ``val_extended.csv``."""
    out_dir = Path(out_dir)
    train_path, val_path = out_dir / TRAIN_EXTENDED, out_dir / VAL_EXTENDED
    write_manifest(splits.train_manifest, train_path)
    write_manifest(splits.val_manifest, val_path)
    logger.info(
        f"Extended manifests: {train_path} ({len(splits.train_manifest)} rows), "
        f"{val_path} ({len(splits.val_manifest)} rows)"
    )
    return train_path, val_path
