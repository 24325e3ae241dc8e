"""AdamW with bias correction and decoupled weight decay."""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from src.errors import DataFormatError
from src.model.network import Params
from src.objective.schemas import TrainConfig


@dataclass
class OptimizerState:
    """First/second moments per parameter and the step counter."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Params) -> "OptimizerState":
        return cls(
            m={name: np.zeros_like(p) for name, p in params.items()},
            v={name: np.zeros_like(p) for name, p in params.items()},
            t=0,
        )


def adamw_step(
    params: Params,
    grads: Params,
    state: OptimizerState,
    cfg: TrainConfig,
) -> Tuple[Params, OptimizerState]:
    """
    One AdamW update.

    theta <- theta * (1 - lr*wd) - lr * m_hat / (sqrt(v_hat) + eps)

    The decay term uses the pre-update theta, so with a zero gradient every
    parameter is scaled by exactly (1 - lr*wd).

    Args:
        params: Current parameters (not modified)
        grads: Gradients shaped like ``params``
        state: Current optimizer state (not modified)
        cfg: Learning rate, betas, eps, weight decay

    Returns:
        (new parameters, new state)
    """
    if set(grads) != set(params):
        raise DataFormatError(f"gradient names {sorted(grads)} do not match parameters {sorted(params)}")

    t = state.t + 1
    correction1 = 1.0 - cfg.beta1 ** t
    correction2 = 1.0 - cfg.beta2 ** t
    decay = 1.0 - cfg.lr * cfg.weight_decay

    new_params: Params = {}
    new_m: Dict[str, np.ndarray] = {}
    new_v: Dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise DataFormatError(f"gradient shape {g.shape} does not match {name} {p.shape}")
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))

        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2

        new_params[name] = p * decay - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
        new_m[name] = m
        new_v[name] = v

    return new_params, OptimizerState(m=new_m, v=new_v, t=t)
