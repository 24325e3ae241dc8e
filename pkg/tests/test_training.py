"""Tests for the training loop, best-epoch checkpointing and determinism."""
import json

import pytest

from src.corpus.manifest import read_manifest, strip_labels
from src.corpus.schemas import SynthConfig
from src.corpus.synth import synth_corpus
from src.errors import DataFormatError
from src.model.schemas import ModelConfig
from src.objective.schemas import TrainConfig
from src.objective.trainer import (
    BEST_CHECKPOINT,
    HISTORY_FILE,
    LAST_CHECKPOINT,
    encode_for_model,
    evaluate,
    select_best_epoch,
    train,
)
from src.persist.checkpoint import load_checkpoint


def _train(corpus_splits, out_dir, model_cfg, train_cfg):
    train_path, val_path = corpus_splits
    return train(
        read_manifest(train_path),
        read_manifest(val_path),
        model_cfg,
        train_cfg,
        out_dir,
        train_root=train_path.parent,
        val_root=val_path.parent,
    )


def test_history_and_checkpoints(tmp_path, corpus_splits, small_model_cfg, fast_train_cfg):
    result = _train(corpus_splits, tmp_path / "run", small_model_cfg, fast_train_cfg)

    assert sorted(p.name for p in (tmp_path / "run").iterdir()) == [BEST_CHECKPOINT, HISTORY_FILE, LAST_CHECKPOINT]
    history = json.loads((tmp_path / "run" / HISTORY_FILE).read_text(encoding="utf-8"))
    assert len(history) == fast_train_cfg.epochs == len(result.history)

    scores = [h["val"]["task_a"]["weighted_f1"] for h in result.history]
    assert result.best_epoch == select_best_epoch(scores)
    assert result.best_metric == max(scores)

    _, last_meta = load_checkpoint(tmp_path / "run" / LAST_CHECKPOINT)
    assert last_meta.epoch == fast_train_cfg.epochs
    assert result.model_cfg.vocab_size == len(result.vocab)


def test_best_checkpoint_reproduces_best_score(tmp_path, corpus_splits, small_model_cfg, fast_train_cfg):
    result = _train(corpus_splits, tmp_path / "run", small_model_cfg, fast_train_cfg)
    params, meta = load_checkpoint(tmp_path / "run" / BEST_CHECKPOINT)

    _, val_path = corpus_splits
    val_set = read_manifest(val_path)
    batch = encode_for_model(val_set, val_path.parent, meta.load_vocab(), meta.model)
    report = evaluate(params, batch, val_set, fast_train_cfg.eval_batch_size)

    assert meta.epoch == result.best_epoch
    assert report.task_a.weighted_f1 == max(h["val"]["task_a"]["weighted_f1"] for h in result.history)


def test_training_is_deterministic(tmp_path, corpus_splits, small_model_cfg, fast_train_cfg):
    _train(corpus_splits, tmp_path / "a", small_model_cfg, fast_train_cfg)
    _train(corpus_splits, tmp_path / "b", small_model_cfg, fast_train_cfg)
    for name in (HISTORY_FILE, BEST_CHECKPOINT, LAST_CHECKPOINT):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_training_reduces_loss(tmp_path, corpus_splits, small_model_cfg):
    cfg = TrainConfig(lr=1e-2, batch_size=16, epochs=5, seed=1)
    result = _train(corpus_splits, tmp_path / "run", small_model_cfg, cfg)
    assert result.history[-1]["train_loss"] < result.history[0]["train_loss"]


def test_train_rejects_bad_splits(tmp_path, corpus_splits, small_model_cfg, fast_train_cfg):
    train_path, val_path = corpus_splits
    train_set, val_set = read_manifest(train_path), read_manifest(val_path)
    with pytest.raises(DataFormatError):
        train([], val_set, small_model_cfg, fast_train_cfg, tmp_path / "x")
    with pytest.raises(DataFormatError):
        train(strip_labels(train_set), val_set, small_model_cfg, fast_train_cfg, tmp_path / "x",
              train_root=train_path.parent, val_root=val_path.parent)


@pytest.mark.slow
def test_desk_scale_acceptance(tmp_path):
    """Default corpus (1200 train / 300 val, 32x32) separates well within 8 epochs."""
    train_set = synth_corpus(SynthConfig(n_samples=1200, seed=0), tmp_path / "train")
    val_set = synth_corpus(SynthConfig(n_samples=300, seed=1), tmp_path / "val")

    result = train(
        train_set,
        val_set,
        ModelConfig(),
        TrainConfig(lr=1e-3, batch_size=64, epochs=8, seed=0),
        tmp_path / "run",
        train_root=tmp_path / "train",
        val_root=tmp_path / "val",
    )
    best = result.history[result.best_epoch - 1]["val"]
    assert best["task_a"]["f1"] >= 0.97
    assert best["task_b"]["f1_w"] >= 0.90


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
