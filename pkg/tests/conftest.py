"""Shared fixtures: tiny model configs and on-disk corpora."""
import sys
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pytest
from loguru import logger

from src.corpus.dataset import Batch
from src.corpus.schemas import Sample, SynthConfig
from src.corpus.synth import synth_corpus
from src.model.schemas import ModelConfig
from src.objective.gradcheck import random_batch
from src.objective.schemas import TrainConfig


@pytest.fixture(autouse=True)
def _reset_logger():
    """CLI runs point loguru at the captured stderr; restore a live sink afterwards."""
    yield
    logger.remove()
    logger.add(sys.stderr, level="INFO")


@pytest.fixture
def tiny_model_cfg() -> ModelConfig:
    """Small enough for exhaustive finite differences."""
    return ModelConfig(
        vocab_size=40,
        seq_len=6,
        image_height=8,
        image_width=8,
        patch_size=4,
        text_dim=5,
        image_dim=4,
        shared_dim=6,
    )


@pytest.fixture
def small_model_cfg() -> ModelConfig:
    """16x16 images, enough capacity to fit the synthetic fingerprints."""
    return ModelConfig(
        vocab_size=128,
        seq_len=12,
        image_height=16,
        image_width=16,
        patch_size=4,
        text_dim=8,
        image_dim=16,
        shared_dim=16,
    )


@pytest.fixture
def fast_train_cfg() -> TrainConfig:
    return TrainConfig(lr=1e-2, batch_size=16, epochs=3, seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_batch(tiny_model_cfg, rng) -> Batch:
    return random_batch(tiny_model_cfg, 8, rng)


def make_corpus(out_dir: Path, n_samples: int, seed: int, size: int = 16) -> List[Sample]:
    cfg = SynthConfig(n_samples=n_samples, height=size, width=size, seed=seed)
    return synth_corpus(cfg, out_dir)


@pytest.fixture
def corpus_splits(tmp_path) -> Tuple[Path, Path]:
    """Labeled train (60 rows) and val (24 rows) manifests with 16x16 images."""
    make_corpus(tmp_path / "train", 60, seed=0)
    make_corpus(tmp_path / "val", 24, seed=1)
    return tmp_path / "train" / "manifest.csv", tmp_path / "val" / "manifest.csv"
