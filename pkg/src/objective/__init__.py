# trainer is imported directly (src.objective.trainer); it depends on persist,
# which imports this package's schemas.
from .schemas import TrainConfig
from .losses import LossBreakdown, bce_with_logits, conditional_ce, total_loss
from .gradients import backward, loss_and_grad
from .optimizer import OptimizerState, adamw_step
from .gradcheck import GradCheckReport, grad_check, random_batch

__all__ = [
    "TrainConfig",
    "LossBreakdown", "bce_with_logits", "conditional_ce", "total_loss",
    "backward", "loss_and_grad",
    "OptimizerState", "adamw_step",
    "GradCheckReport", "grad_check", "random_batch",
]
