"""Finite-difference verification of the analytic gradients."""
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger

from src.corpus.dataset import Batch
from src.corpus.vocab import CLS_ID, PAD_ID
from src.model.network import ENCODER_PARAMS, HEAD_PARAMS, Params, forward_with_cache
from src.model.schemas import ModelConfig
from src.objective.gradients import backward
from src.objective.losses import total_loss


KINK_EPS = 1e-7
GRADIENT_FLOOR = 1e-3


@dataclass
class GradCheckReport:
    """Outcome of a gradient check."""

    max_rel_error: float
    worst_param: Optional[str]
    worst_index: Optional[Tuple[int, ...]]
    checked: int
    excluded: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_error < self.tolerance)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["worst_index"] = list(self.worst_index) if self.worst_index is not None else None
        data["passed"] = self.passed
        return data


def step_size(theta: float) -> float:
    return 1e-6 * max(1.0, abs(theta))


def relative_error(analytic: float, numeric: float, floor: float = GRADIENT_FLOOR) -> float:
    """|a - n| / max(|a|, |n|, floor)."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def central_difference(f: Callable[[float], float], theta: float, h: Optional[float] = None) -> float:
    """(f(theta + h) - f(theta - h)) / 2h."""
    h = step_size(theta) if h is None else h
    return (f(theta + h) - f(theta - h)) / (2.0 * h)


def _near_kink(caches) -> bool:
    """True when a ReLU input sits on (or crosses) zero across the evaluations."""
    pre_sets = [c.pre_activations() for c in caches]
    for pre in pre_sets:
        if any(np.any(np.abs(x) < KINK_EPS) for x in pre):
            return True
    reference = pre_sets[0]
    for pre in pre_sets[1:]:
        if any(np.any((a > 0) != (b > 0)) for a, b in zip(reference, pre)):
            return True
    return False


def _sample_coordinates(
    params: Params,
    batch: Batch,
    n_encoder: int,
    rng: np.random.Generator,
) -> List[Tuple[str, Tuple[int, ...]]]:
    coords: List[Tuple[str, Tuple[int, ...]]] = []
    for name in HEAD_PARAMS:
        coords.extend((name, idx) for idx in np.ndindex(params[name].shape))

    # Only embedding rows of tokens present in the batch carry gradient.
    used_rows = np.unique(batch.ids[batch.mask > 0])
    pool: List[Tuple[str, Tuple[int, ...]]] = []
    for name in ENCODER_PARAMS:
        if name == "E":
            pool.extend(("E", (int(r), c)) for r in used_rows for c in range(params["E"].shape[1]))
        else:
            pool.extend((name, idx) for idx in np.ndindex(params[name].shape))

    picks = rng.choice(len(pool), size=min(n_encoder, len(pool)), replace=False)
    coords.extend(pool[i] for i in sorted(picks))
    return coords


def grad_check(
    params: Params,
    batch: Batch,
    tolerance: float = 1e-5,
    n_encoder: int = 256,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare ``backward`` against central differences.

    Every head and fusion coordinate is checked, plus ``n_encoder`` random
    encoder coordinates. Coordinates whose perturbation lands near a ReLU
    kink are skipped and counted.

    Args:
        params: Model parameters
        batch: Labeled batch
        tolerance: Pass threshold for the maximum relative error
        n_encoder: Number of encoder coordinates to sample
        seed: Sampling seed

    Returns:
        GradCheckReport
    """
    analytic = backward(params, batch)
    rng = np.random.default_rng(seed)
    coords = _sample_coordinates(params, batch, n_encoder, rng)

    working = {name: p.copy() for name, p in params.items()}

    def evaluate():
        out, cache = forward_with_cache(working, batch)
        return total_loss(out, batch.label_a, batch.label_b).total, cache

    _, base_cache = evaluate()

    worst = 0.0
    worst_param: Optional[str] = None
    worst_index: Optional[Tuple[int, ...]] = None
    checked = excluded = 0

    for name, idx in coords:
        theta = float(working[name][idx])
        h = step_size(theta)

        upper, lower = theta + h, theta - h
        working[name][idx] = upper
        f_plus, cache_plus = evaluate()
        working[name][idx] = lower
        f_minus, cache_minus = evaluate()
        working[name][idx] = theta

        if _near_kink((base_cache, cache_plus, cache_minus)):
            excluded += 1
            continue

        numeric = float((f_plus - f_minus) / (upper - lower))
        err = relative_error(float(analytic[name][idx]), numeric)
        checked += 1
        if err > worst:
            worst, worst_param, worst_index = err, name, tuple(int(i) for i in idx)

    report = GradCheckReport(
        max_rel_error=float(worst),
        worst_param=worst_param,
        worst_index=worst_index,
        checked=checked,
        excluded=excluded,
        tolerance=tolerance,
    )
    log = logger.info if report.passed else logger.warning
    log(f"Gradient check: max rel error {worst:.3e} ({worst_param}), {checked} checked, {excluded} excluded")
    return report


def random_batch(cfg: ModelConfig, batch_size: int, rng: np.random.Generator) -> Batch:
    """
    A labeled batch of random token sequences, images and consistent label pairs.

    Sequences start with [CLS] and carry 1..seq_len-1 further tokens drawn from
    the non-reserved ids; images are uniform in [-1, 1] like normalized pixels.
    """
    ids = np.full((batch_size, cfg.seq_len), PAD_ID, dtype=np.int64)
    mask = np.zeros((batch_size, cfg.seq_len), dtype=np.float64)
    for row in range(batch_size):
        length = int(rng.integers(2, cfg.seq_len + 1))
        ids[row, 0] = CLS_ID
        ids[row, 1:length] = rng.integers(CLS_ID + 1, cfg.vocab_size, size=length - 1)
        mask[row, :length] = 1.0

    images = rng.uniform(-1.0, 1.0, size=(batch_size, cfg.channels, cfg.image_height, cfg.image_width))
    label_b = rng.integers(0, cfg.num_classes, size=batch_size).astype(np.int64)
    label_a = (label_b > 0).astype(np.int64)
    return Batch(ids=ids, mask=mask, images=images, label_a=label_a, label_b=label_b)
