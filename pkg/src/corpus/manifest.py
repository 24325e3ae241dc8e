"""Manifest CSV reading and writing."""
import csv
from pathlib import Path
from typing import Iterable, List, Optional, Union

from loguru import logger
from pydantic import ValidationError

from src.corpus.schemas import Sample
from src.errors import DataFormatError


MANIFEST_HEADER = ["id", "caption", "image_path", "label_a", "label_b"]


def _parse_label(raw: str, field: str, line: int) -> Optional[int]:
    if raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise DataFormatError(f"line {line}: {field} must be an integer, got {raw!r}") from None


def read_manifest(path: Union[str, Path]) -> List[Sample]:
    """
    Read a manifest CSV.

    Args:
        path: Manifest file (header ``id,caption,image_path,label_a,label_b``)

    Returns:
        List of samples in file order

    Raises:
        DataFormatError: On a missing header, bad label, inconsistent label
            pair, or duplicate id
    """
    path = Path(path)
    samples: List[Sample] = []
    seen = set()

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(MANIFEST_HEADER)}, got {header}")

        for row in reader:
            line = reader.line_num
            if len(row) != len(MANIFEST_HEADER):
                raise DataFormatError(f"{path} line {line}: expected 5 fields, got {len(row)}")

            sample_id, caption, image_path, raw_a, raw_b = row
            try:
                sample = Sample(
                    id=sample_id,
                    caption=caption,
                    image_path=image_path,
                    label_a=_parse_label(raw_a, "label_a", line),
                    label_b=_parse_label(raw_b, "label_b", line),
                )
            except ValidationError as e:
                raise DataFormatError(f"{path} line {line}: {e.errors()[0]['msg']}") from None

            if sample.id in seen:
                raise DataFormatError(f"{path} line {line}: duplicate id {sample.id!r}")
            seen.add(sample.id)
            samples.append(sample)

    logger.debug(f"Read {len(samples)} samples from {path}")
    return samples


def write_manifest(samples: Iterable[Sample], path: Union[str, Path]) -> None:
    """Write samples as an RFC-4180 CSV with LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for sample in samples:
            writer.writerow([
                sample.id,
                sample.caption,
                sample.image_path,
                "" if sample.label_a is None else sample.label_a,
                "" if sample.label_b is None else sample.label_b,
            ])
            count += 1

    logger.debug(f"Wrote {count} samples to {path}")


def strip_labels(samples: Iterable[Sample]) -> List[Sample]:
    """Return copies of the samples with both label fields emptied."""
    return [s.model_copy(update={"label_a": None, "label_b": None}) for s in samples]


def require_labels(samples: Iterable[Sample], what: str = "manifest") -> None:
    """Raise DataFormatError unless every sample carries both labels."""
    for sample in samples:
        if not sample.is_labeled:
            raise DataFormatError(f"{what}: sample {sample.id!r} has no labels")
