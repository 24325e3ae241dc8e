"""Stacking preprocessed samples into model-ready batches."""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.corpus.images import ImageTensor, load_image, preprocess_image
from src.corpus.schemas import Sample
from src.corpus.vocab import TokenSeq, Vocab, tokenize
from src.errors import DataFormatError


@dataclass
class Batch:
    """Stacked inputs (and optional labels) for a group of samples."""

    ids: np.ndarray             # (B, L) int64
    mask: np.ndarray            # (B, L) float64
    images: np.ndarray          # (B, 3, H, W) float64, normalized
    label_a: Optional[np.ndarray] = None  # (B,) int64
    label_b: Optional[np.ndarray] = None  # (B,) int64
    sample_ids: Optional[List[str]] = None

    def __len__(self) -> int:
        return self.ids.shape[0]

    @property
    def has_labels(self) -> bool:
        return self.label_a is not None and self.label_b is not None

    def subset(self, index: Union[np.ndarray, Sequence[int]]) -> "Batch":
        """Rows selected by ``index``, in that order."""
        index = np.asarray(index, dtype=np.int64)
        return Batch(
            ids=self.ids[index],
            mask=self.mask[index],
            images=self.images[index],
            label_a=None if self.label_a is None else self.label_a[index],
            label_b=None if self.label_b is None else self.label_b[index],
            sample_ids=None if self.sample_ids is None else [self.sample_ids[i] for i in index],
        )


def collate(
    tokens: Sequence[TokenSeq],
    images: Sequence[ImageTensor],
    label_a: Optional[Sequence[int]] = None,
    label_b: Optional[Sequence[int]] = None,
    sample_ids: Optional[List[str]] = None,
) -> Batch:
    """Stack per-sample token sequences and preprocessed images."""
    if len(tokens) != len(images):
        raise DataFormatError(f"batch size mismatch: {len(tokens)} token sequences, {len(images)} images")
    if not tokens:
        raise DataFormatError("cannot collate an empty batch")

    return Batch(
        ids=np.stack([t.ids for t in tokens]).astype(np.int64),
        mask=np.stack([t.mask for t in tokens]).astype(np.float64),
        images=np.stack([img.data for img in images]).astype(np.float64),
        label_a=None if label_a is None else np.asarray(label_a, dtype=np.int64),
        label_b=None if label_b is None else np.asarray(label_b, dtype=np.int64),
        sample_ids=sample_ids,
    )


def encode_samples(
    samples: Sequence[Sample],
    root: Union[str, Path],
    vocab: Vocab,
    seq_len: int,
    image_size: Tuple[int, int],
    mean: float = 0.5,
    std: float = 0.5,
) -> Batch:
    """
    Tokenize captions and load + preprocess images for manifest rows.

    Args:
        samples: Manifest rows
        root: Directory that relative image paths resolve against
        vocab: Caption vocabulary
        seq_len: Token sequence length
        image_size: Target (height, width)
        mean: Normalization mean
        std: Normalization std

    Returns:
        Batch with labels attached when every sample is labeled
    """
    root = Path(root)
    tokens = [tokenize(s.caption, vocab, seq_len) for s in samples]
    images = [
        preprocess_image(load_image(root / s.image_path), target=image_size, mean=mean, std=std)
        for s in samples
    ]

    labeled = all(s.is_labeled for s in samples)
    batch = collate(
        tokens,
        images,
        label_a=[s.label_a for s in samples] if labeled else None,
        label_b=[s.label_b for s in samples] if labeled else None,
        sample_ids=[s.id for s in samples],
    )
    logger.debug(f"Encoded {len(batch)} samples from {root} (labeled={labeled})")
    return batch
