"""Finite-difference checks of the analytic gradients."""
import json

import numpy as np
import pytest

import src.objective.gradcheck as gradcheck_module
from src.model.network import HEAD_PARAMS, init_params
from src.model.schemas import ModelConfig
from src.objective.gradcheck import (
    GRADIENT_FLOOR,
    central_difference,
    grad_check,
    random_batch,
    relative_error,
)


def test_central_difference_on_square():
    numeric = central_difference(lambda x: x * x, 3.0)
    assert abs(numeric - 6.0) < 1e-9


def test_relative_error_floor():
    assert relative_error(2.0, 1.0) == 0.5
    assert relative_error(0.0, 1e-9) == pytest.approx(1e-9 / GRADIENT_FLOOR)


def test_random_batch_is_consistent(tiny_model_cfg):
    batch = random_batch(tiny_model_cfg, 32, np.random.default_rng(0))
    assert np.all(batch.ids[:, 0] == 2)
    assert np.all(batch.mask.sum(axis=1) >= 2)
    assert np.all(batch.ids[batch.mask == 0] == 0)
    assert np.all(batch.label_a == (batch.label_b > 0))
    assert batch.images.min() >= -1.0 and batch.images.max() <= 1.0


@pytest.mark.parametrize("batch_seed", [0, 1, 2])
def test_grad_check_passes_on_random_batches(tiny_model_cfg, batch_seed):
    params = init_params(tiny_model_cfg, seed=batch_seed)
    batch = random_batch(tiny_model_cfg, 8, np.random.default_rng([7, batch_seed]))
    report = grad_check(params, batch, tolerance=1e-5, n_encoder=10_000, seed=batch_seed)

    assert report.passed, report.to_dict()
    assert report.max_rel_error < 1e-5
    assert report.checked > 0


def test_grad_check_default_dimensions():
    cfg = ModelConfig(vocab_size=64)
    params = init_params(cfg, seed=0)
    batch = random_batch(cfg, 8, np.random.default_rng(0))
    report = grad_check(params, batch, n_encoder=64)
    head_coords = sum(params[name].size for name in HEAD_PARAMS)
    assert report.checked + report.excluded == head_coords + 64
    assert report.passed


def test_kink_coordinates_are_excluded(tiny_model_cfg, tiny_batch):
    """A fused unit with zero weights and bias sits exactly on the ReLU kink."""
    params = init_params(tiny_model_cfg, seed=0)
    params["W_f"][:, 0] = 0.0
    params["b_f"][0] = 0.0
    report = grad_check(params, tiny_batch, n_encoder=5)
    assert report.excluded > 0
    assert report.checked == 0
    assert report.to_dict()["excluded"] == report.excluded


def test_wrong_gradients_are_caught(tiny_model_cfg, tiny_batch, monkeypatch):
    real_backward = gradcheck_module.backward

    def doubled(params, batch):
        return {name: 2.0 * g for name, g in real_backward(params, batch).items()}

    monkeypatch.setattr(gradcheck_module, "backward", doubled)
    report = grad_check(init_params(tiny_model_cfg, seed=0), tiny_batch, n_encoder=20)
    assert not report.passed
    assert report.worst_param is not None
    assert report.to_dict()["passed"] is False


def test_report_is_plain_json(tiny_model_cfg, tiny_batch):
    """Report fields are builtin types so the CLI can json.dumps them."""
    report = grad_check(init_params(tiny_model_cfg, seed=0), tiny_batch, n_encoder=5)
    assert type(report.max_rel_error) is float
    assert type(report.passed) is bool
    decoded = json.loads(json.dumps(report.to_dict()))
    assert decoded["passed"] is report.passed
    assert decoded["max_rel_error"] == report.max_rel_error


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
