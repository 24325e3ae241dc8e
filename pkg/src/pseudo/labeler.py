"""Scoring an unlabeled pool and gating predictions on dual confidence."""
import csv
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
from loguru import logger

from src.corpus.dataset import encode_samples
from src.corpus.schemas import CLASS_NAMES, Sample
from src.errors import DataFormatError
from src.model.network import Params
from src.model.predict import effective_label_b, predict_all
from src.persist.checkpoint import CheckpointMeta
from src.pseudo.schemas import PseudoRecord, PseudoReport


PSEUDO_HEADER = ["id", "caption", "image_path", "pred_a", "conf_a", "pred_b", "conf_b"]


def score_manifest(
    params: Params,
    meta: CheckpointMeta,
    unlabeled: Sequence[Sample],
    root: Union[str, Path] = ".",
    batch_size: int = 256,
) -> List[PseudoRecord]:
    """
    Predict both labels, with confidences, for every row of a manifest.

    Args:
        params: Model parameters from a checkpoint
        meta: The checkpoint's configs and vocabulary
        unlabeled: Rows to score (labels, if any, are ignored)
        root: Directory the image paths are relative to
        batch_size: Rows per forward pass

    Returns:
        One record per input row, in input order
    """
    vocab = meta.load_vocab()
    cfg = meta.model
    if params["E"].shape[0] != len(vocab):
        raise DataFormatError(
            f"checkpoint embedding has {params['E'].shape[0]} rows but vocabulary has {len(vocab)} tokens"
        )
    if not unlabeled:
        return []

    batch = encode_samples(unlabeled, root, vocab, cfg.seq_len, cfg.image_size, cfg.norm_mean, cfg.norm_std)
    predictions = predict_all(params, batch, batch_size)

    records = [
        PseudoRecord(
            id=sample.id,
            caption=sample.caption,
            image_path=sample.image_path,
            pred_a=pred.pred_a,
            conf_a=pred.conf_a,
            pred_b=pred.pred_b,
            conf_b=pred.conf_b,
        )
        for sample, pred in zip(unlabeled, predictions)
    ]
    logger.info(f"Scored {len(records)} unlabeled rows")
    return records


def filter_high_confidence(records: Sequence[PseudoRecord], threshold: float = 0.8) -> List[PseudoRecord]:
    """Keep records whose Task-A and Task-B confidences both exceed ``threshold`` (strict)."""
    if not 0.0 < threshold < 1.0:
        raise DataFormatError(f"confidence threshold must lie in (0, 1), got {threshold}")
    return [r for r in records if r.conf_a > threshold and r.conf_b > threshold]


def _mean_confidences(records: Sequence[PseudoRecord]) -> Dict[str, float]:
    if not records:
        return {}
    return {
        "conf_a": float(np.mean([r.conf_a for r in records])),
        "conf_b": float(np.mean([r.conf_b for r in records])),
    }


def build_report(scored: Sequence[PseudoRecord], kept: Sequence[PseudoRecord], threshold: float) -> PseudoReport:
    """Kept/dropped counts, per-class kept counts and mean confidences."""
    kept_ids = {r.id for r in kept}
    dropped = [r for r in scored if r.id not in kept_ids]

    per_class = {name: 0 for name in CLASS_NAMES}
    for r in kept:
        per_class[CLASS_NAMES[effective_label_b(r.pred_a, r.pred_b)]] += 1

    return PseudoReport(
        threshold=threshold,
        scored=len(scored),
        kept=len(kept),
        dropped=len(dropped),
        kept_per_class=per_class,
        mean_conf_kept=_mean_confidences(kept),
        mean_conf_dropped=_mean_confidences(dropped),
    )


def write_pseudo_records(records: Sequence[PseudoRecord], path: Union[str, Path]) -> None:
    """Write records as CSV with 6-decimal confidences."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PSEUDO_HEADER)
        for r in records:
            writer.writerow([
                r.id, r.caption, r.image_path, r.pred_a, f"{r.conf_a:.6f}", r.pred_b, f"{r.conf_b:.6f}",
            ])
    logger.info(f"Pseudo records saved to {path} ({len(records)} rows)")


def read_pseudo_records(path: Union[str, Path]) -> List[PseudoRecord]:
    """Read a ``pseudo_records.csv`` file."""
    path = Path(path)
    records: List[PseudoRecord] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PSEUDO_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(PSEUDO_HEADER)}, got {header}")
        for row in reader:
            if len(row) != len(PSEUDO_HEADER):
                raise DataFormatError(f"{path} line {reader.line_num}: expected 7 fields, got {len(row)}")
            try:
                record = PseudoRecord(
                    id=row[0], caption=row[1], image_path=row[2],
                    pred_a=int(row[3]), conf_a=float(row[4]), pred_b=int(row[5]), conf_b=float(row[6]),
                )
            except ValueError:
                raise DataFormatError(f"{path} line {reader.line_num}: malformed pseudo record") from None
            if record.pred_a not in (0, 1) or not 0 <= record.pred_b < len(CLASS_NAMES):
                raise DataFormatError(f"{path} line {reader.line_num}: prediction out of range")
            records.append(record)
    return records
