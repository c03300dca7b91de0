"""Unit tests for the Adam optimizer."""

import numpy as np
import pytest

from pointloc.core.exceptions import (
    CheckpointError,
    DimensionError,
    MissingGradientError,
    NonFiniteError,
)
from pointloc.model.params import ModelParams
from pointloc.schemas.model import ModelScale
from pointloc.training.optim import AdamState, adam_step


def scalar_params(value: float) -> ModelParams:
    params = ModelParams(ModelScale.preset("tiny"))
    params.register("x", np.array([value]))
    return params


class TestAdamStep:
    """Tests for single updates and convergence."""

    def test_zero_gradient_leaves_params(self) -> None:
        params = scalar_params(1.5)
        state = AdamState.for_params(params)
        adam_step(params, {"x": np.zeros(1)}, state)
        assert params["x"].data.tolist() == [1.5]
        assert state.step == 1

    @pytest.mark.parametrize("gradient", [0.01, 3.0, -250.0])
    def test_first_step_is_learning_rate(self, gradient: float) -> None:
        params = scalar_params(0.0)
        state = AdamState.for_params(params, lr=0.05)
        adam_step(params, {"x": np.array([gradient])}, state)
        assert abs(params["x"].data[0]) == pytest.approx(0.05, rel=1e-5)
        assert np.sign(params["x"].data[0]) == -np.sign(gradient)

    def test_minimizes_square(self) -> None:
        params = scalar_params(5.0)
        state = AdamState.for_params(params, lr=0.1)
        for _ in range(500):
            adam_step(params, {"x": 2.0 * params["x"].data}, state)
        assert abs(params["x"].data[0]) < 1e-2
        assert state.step == 500

    def test_uses_grad_slots(self) -> None:
        params = scalar_params(1.0)
        params["x"].grad = np.array([1.0])
        adam_step(params, None, AdamState.for_params(params, lr=0.1))
        assert params["x"].data[0] == pytest.approx(0.9)

    def test_missing_gradient(self) -> None:
        params = scalar_params(1.0)
        with pytest.raises(MissingGradientError):
            adam_step(params, {}, AdamState.for_params(params))

    def test_wrong_gradient_shape(self) -> None:
        params = scalar_params(1.0)
        with pytest.raises(DimensionError):
            adam_step(params, {"x": np.ones(2)}, AdamState.for_params(params))

    def test_non_finite_update(self) -> None:
        params = scalar_params(1e308)
        with pytest.raises(NonFiniteError):
            adam_step(params, {"x": np.array([-1.0])}, AdamState.for_params(params, lr=1e308))


class TestAdamRecords:
    """Tests for optimizer checkpoint records."""

    def test_round_trip(self, tiny_params) -> None:
        state = AdamState.for_params(tiny_params, lr=0.01)
        grads = {name: np.full(t.shape, 0.5) for name, t in tiny_params.items()}
        adam_step(tiny_params, grads, state)
        restored = AdamState.from_records(state.to_records(), tiny_params, lr=0.01)
        assert restored.step == 1
        for name in tiny_params:
            np.testing.assert_array_equal(restored.m[name], state.m[name])
            np.testing.assert_array_equal(restored.v[name], state.v[name])

    def test_without_step(self, tiny_params) -> None:
        with pytest.raises(CheckpointError):
            AdamState.from_records({}, tiny_params)

    def test_missing_moment(self, tiny_params) -> None:
        records = AdamState.for_params(tiny_params).to_records()
        del records["adam.v/attention.bias"]
        with pytest.raises(CheckpointError):
            AdamState.from_records(records, tiny_params)
