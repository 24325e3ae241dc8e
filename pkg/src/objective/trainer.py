"""Epoch loop with per-epoch validation, checkpointing and best-model selection."""
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from src.corpus.dataset import Batch, encode_samples
from src.corpus.manifest import require_labels
from src.corpus.schemas import Sample
from src.corpus.vocab import Vocab, build_vocab
from src.errors import DataFormatError, NumericError
from src.metrics.report import MetricsReport, metrics_report
from src.model.network import Params, init_params
from src.model.predict import predict_all
from src.model.schemas import ModelConfig
from src.objective.gradients import loss_and_grad
from src.objective.optimizer import OptimizerState, adamw_step
from src.objective.schemas import TrainConfig
from src.persist.checkpoint import CheckpointMeta, load_checkpoint, save_checkpoint
from src.persist.jsonfmt import write_fixed


LAST_CHECKPOINT = "last.ckpt"
BEST_CHECKPOINT = "best.ckpt"
HISTORY_FILE = "history.json"


@dataclass
class TrainedModel:
    """Best model reloaded from ``best.ckpt`` plus the training history."""

    params: Params
    vocab: Vocab
    model_cfg: ModelConfig
    train_cfg: TrainConfig
    best_epoch: int
    best_metric: float
    history: List[Dict] = field(default_factory=list)


def select_best_epoch(history: Sequence[float]) -> int:
    """
    1-based index of the highest score; ties go to the earliest epoch.

    Args:
        history: Per-epoch validation Task-A weighted-F1

    Returns:
        Epoch number (1-based)
    """
    if len(history) == 0:
        raise DataFormatError("select_best_epoch: empty history")
    return int(np.argmax(np.asarray(history, dtype=np.float64))) + 1


def encode_for_model(
    samples: Sequence[Sample],
    root: Union[str, Path],
    vocab: Vocab,
    cfg: ModelConfig,
) -> Batch:
    """``encode_samples`` with the model's sequence length, image size and normalization."""
    return encode_samples(samples, root, vocab, cfg.seq_len, cfg.image_size, cfg.norm_mean, cfg.norm_std)


def evaluate(
    params: Params,
    batch: Batch,
    gold: Sequence[Sample],
    batch_size: int = 256,
) -> MetricsReport:
    """Predict on an encoded split and score it against its manifest rows."""
    return metrics_report(predict_all(params, batch, batch_size), gold)


def train(
    train_set: Sequence[Sample],
    val_set: Sequence[Sample],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: Union[str, Path],
    train_root: Union[str, Path] = ".",
    val_root: Optional[Union[str, Path]] = None,
) -> TrainedModel:
    """
    Train from scratch, evaluating on the validation split after every epoch.

    Writes ``last.ckpt`` every epoch, ``best.ckpt`` whenever validation Task-A
    weighted-F1 strictly improves, and ``history.json``. The returned model is
    the one reloaded from ``best.ckpt``.

    Args:
        train_set: Labeled training rows
        val_set: Labeled validation rows
        model_cfg: Model dimensions (vocab_size is the vocabulary cap)
        train_cfg: Optimizer and loop settings
        out_dir: Output directory
        train_root: Directory the training image paths are relative to
        val_root: Directory the validation image paths are relative to

    Returns:
        TrainedModel
    """
    if not train_set or not val_set:
        raise DataFormatError(f"empty split: {len(train_set)} train / {len(val_set)} val samples")
    require_labels(train_set, "train split")
    require_labels(val_set, "val split")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    val_root = train_root if val_root is None else val_root

    vocab = build_vocab(list(train_set), max_size=model_cfg.vocab_size)
    cfg = model_cfg.model_copy(update={"vocab_size": len(vocab)})
    logger.info(f"Vocabulary: {len(vocab)} tokens (cap {model_cfg.vocab_size})")

    train_batch = encode_for_model(train_set, train_root, vocab, cfg)
    val_batch = encode_for_model(val_set, val_root, vocab, cfg)
    logger.info(f"Training on {len(train_batch)} samples, validating on {len(val_batch)}")

    params = init_params(cfg, seed=train_cfg.seed)
    state = OptimizerState.zeros_like(params)
    rng = np.random.default_rng(train_cfg.seed)

    history: List[Dict] = []
    best_metric = -np.inf
    n = len(train_batch)

    for epoch in range(1, train_cfg.epochs + 1):
        start_time = time.time()
        order = rng.permutation(n)
        sums = np.zeros(3)

        for step, start in enumerate(range(0, n, train_cfg.batch_size), 1):
            mini = train_batch.subset(order[start:start + train_cfg.batch_size])
            try:
                losses, grads = loss_and_grad(params, mini)
            except NumericError as e:
                logger.error(f"Epoch {epoch} step {step}: {e}")
                raise NumericError(f"epoch {epoch}, step {step}: {e}") from e

            params, state = adamw_step(params, grads, state, train_cfg)
            sums += len(mini) * np.array([losses.total, losses.loss_a, losses.loss_b])
            logger.debug(f"Epoch {epoch} step {step}: loss={losses.total:.6f} (mask {losses.mask_count})")

        report = evaluate(params, val_batch, val_set, train_cfg.eval_batch_size)
        metric = report.task_a.weighted_f1
        mean_total, mean_a, mean_b = (sums / n).tolist()
        history.append({
            "epoch": epoch,
            "train_loss": mean_total,
            "train_loss_a": mean_a,
            "train_loss_b": mean_b,
            "val": report.model_dump(),
        })

        improved = metric > best_metric
        if improved:
            best_metric = metric

        meta = CheckpointMeta(
            model=cfg, train=train_cfg, vocab=vocab.to_dict(), epoch=epoch, best_metric=float(best_metric)
        )
        save_checkpoint(params, meta, out_dir / LAST_CHECKPOINT)
        if improved:
            save_checkpoint(params, meta, out_dir / BEST_CHECKPOINT)
        write_fixed(history, out_dir / HISTORY_FILE)

        logger.info(
            f"Epoch {epoch}/{train_cfg.epochs}: loss={mean_total:.4f} "
            f"val A-wF1={metric:.4f} B-wF1={report.task_b.f1_w:.4f} "
            f"({time.time() - start_time:.1f}s){' ⭐ best' if improved else ''}"
        )

    best_epoch = select_best_epoch([h["val"]["task_a"]["weighted_f1"] for h in history])
    best_params, best_meta = load_checkpoint(out_dir / BEST_CHECKPOINT)
    if best_meta.epoch != best_epoch:
        raise DataFormatError(f"best.ckpt holds epoch {best_meta.epoch}, history selects epoch {best_epoch}")
    logger.info(f"✅ Training done; best epoch {best_epoch} (val Task-A weighted-F1 {best_metric:.6f})")

    return TrainedModel(
        params=best_params,
        vocab=vocab,
        model_cfg=cfg,
        train_cfg=train_cfg,
        best_epoch=best_epoch,
        best_metric=float(best_metric),
        history=history,
    )
