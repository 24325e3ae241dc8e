"""Deterministic synthetic corpus with planted per-generator fingerprints."""
import hashlib
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from loguru import logger

from src.corpus.images import save_image
from src.corpus.manifest import write_manifest
from src.corpus.schemas import NUM_CLASSES, Sample, SynthConfig


# Spatial frequencies (cycles per pixel along x, y) of each generator's
# fingerprint. Periods divide 4 so the pattern survives patch averaging.
FINGERPRINT_FREQUENCIES: Dict[int, Tuple[float, float]] = {
    1: (0.25, 0.0),
    2: (0.0, 0.25),
    3: (0.25, 0.25),
    4: (0.5, 0.0),
    5: (0.0, 0.5),
}

FINGERPRINT_CHANNEL = 2  # blue

_SUBJECTS = ["dog", "cat", "man", "woman", "child", "horse", "bird", "train", "bus", "boat",
             "car", "bicycle", "pizza", "clock", "giraffe", "elephant"]
_ADJECTIVES = ["red", "small", "large", "old", "young", "white", "black", "wooden", "bright", "quiet"]
_VERBS = ["sitting", "standing", "walking", "parked", "resting", "waiting", "running", "lying"]
_PLACES = ["street", "kitchen", "park", "beach", "table", "field", "station", "river", "room", "bench"]
_TEMPLATES = [
    "a {adj} {subj} {verb} near the {place}",
    "the {subj} is {verb} on a {adj} {place}",
    "{adj} {subj} {verb} in the {place}",
    "a photo of a {subj} {verb} by the {place}",
    "two {subj}s {verb} next to a {adj} {place}",
]


def make_caption(rng: np.random.Generator) -> str:
    """Draw one caption from the template grammar."""
    template = _TEMPLATES[rng.integers(len(_TEMPLATES))]
    return template.format(
        adj=_ADJECTIVES[rng.integers(len(_ADJECTIVES))],
        subj=_SUBJECTS[rng.integers(len(_SUBJECTS))],
        verb=_VERBS[rng.integers(len(_VERBS))],
        place=_PLACES[rng.integers(len(_PLACES))],
    )


def caption_seed(caption: str) -> int:
    """Stable 64-bit seed derived from caption text."""
    return int.from_bytes(hashlib.sha256(caption.encode("utf-8")).digest()[:8], "little")


def procedural_texture(caption: str, height: int, width: int) -> np.ndarray:
    """Smooth caption-seeded texture as pixel fractions in roughly [0.28, 0.72]."""
    rng = np.random.default_rng(caption_seed(caption))
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)

    texture = np.empty((3, height, width), dtype=np.float64)
    for ch in range(3):
        plane = np.full((height, width), rng.uniform(0.4, 0.6))
        for _ in range(2):
            fx = rng.uniform(-1.5, 1.5) / width
            fy = rng.uniform(-1.5, 1.5) / height
            phase = rng.uniform(0.0, 2.0 * np.pi)
            plane += rng.uniform(0.0, 0.06) * np.sin(2.0 * np.pi * (fx * xx + fy * yy) + phase)
        texture[ch] = plane
    return texture


def fingerprint(cls: int, amplitude: float, height: int, width: int) -> np.ndarray:
    """Class fingerprint plane (pixel fractions); zeros for the real class."""
    if cls == 0:
        return np.zeros((height, width), dtype=np.float64)
    fx, fy = FINGERPRINT_FREQUENCIES[cls]
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return amplitude * np.cos(2.0 * np.pi * (fx * xx + fy * yy))


def synth_image(caption: str, cls: int, cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Render one raw (0-255) image for a caption and class."""
    img = procedural_texture(caption, cfg.height, cfg.width)
    img[FINGERPRINT_CHANNEL] += fingerprint(cls, cfg.amplitude, cfg.height, cfg.width)
    if cfg.noise_sigma > 0:
        img += rng.normal(0.0, cfg.noise_sigma, size=img.shape)
    return img * 255.0


def synth_corpus(cfg: SynthConfig, out_dir: Union[str, Path]) -> List[Sample]:
    """
    Write the synthetic corpus: PPM images plus ``manifest.csv``.

    Args:
        cfg: Corpus parameters
        out_dir: Destination directory (created if missing)

    Returns:
        The manifest rows, in generation order
    """
    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    image_dir.mkdir(parents=True, exist_ok=True)

    logger.info(f"Synthesizing {cfg.n_samples} samples (amplitude={cfg.amplitude}, seed={cfg.seed}) into {out_dir}")

    samples: List[Sample] = []
    for i in range(cfg.n_samples):
        cls = i % NUM_CLASSES
        rng = np.random.default_rng([cfg.seed, i])
        caption = make_caption(rng)
        sample_id = f"{cfg.prefix}{i:06d}"
        rel_path = f"images/{sample_id}.ppm"

        save_image(synth_image(caption, cls, cfg, rng), out_dir / rel_path)
        samples.append(Sample(
            id=sample_id,
            caption=caption,
            image_path=rel_path,
            label_a=int(cls >= 1),
            label_b=cls,
        ))

    write_manifest(samples, out_dir / "manifest.csv")
    logger.info(f"✅ Corpus written: {out_dir / 'manifest.csv'}")
    return samples
