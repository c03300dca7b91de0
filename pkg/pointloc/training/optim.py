"""Bias-corrected Adam."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from pointloc.core.exceptions import (
    CheckpointError,
    DimensionError,
    MissingGradientError,
    NonFiniteError,
)
from pointloc.model.params import ModelParams

logger = logging.getLogger(__name__)

STEP_RECORD = "adam.step"


@dataclass
class AdamState:
    """Moment estimates per parameter name plus the step counter."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ModelParams, lr: float = 1e-3) -> AdamState:
        state = cls(lr=lr)
        for name, tensor in params.items():
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        return state

    def to_records(self) -> dict[str, np.ndarray]:
        """Checkpoint records: ``adam.m/<name>``, ``adam.v/<name>`` and ``adam.step``."""
        records: dict[str, np.ndarray] = {STEP_RECORD: np.array([float(self.step)])}
        for name in self.m:
            records[f"adam.m/{name}"] = self.m[name]
            records[f"adam.v/{name}"] = self.v[name]
        return records

    @classmethod
    def from_records(
        cls, records: dict[str, np.ndarray], params: ModelParams, lr: float = 1e-3
    ) -> AdamState:
        if STEP_RECORD not in records:
            raise CheckpointError("Checkpoint carries no optimizer state; cannot resume")
        state = cls(lr=lr, step=int(records[STEP_RECORD][0]))
        for name, tensor in params.items():
            for slot, store in (("m", state.m), ("v", state.v)):
                key = f"adam.{slot}/{name}"
                if key not in records or records[key].shape != tensor.shape:
                    raise CheckpointError(f"Optimizer record '{key}' is missing or misshapen")
                store[name] = records[key].copy()
        return state


def adam_step(
    params: ModelParams, grads: dict[str, np.ndarray] | None, state: AdamState
) -> AdamState:
    """
    Apply one Adam update to every registered parameter.

    Args:
        params: Parameters, updated in place (each tensor gets a fresh data array)
        grads: Gradient per parameter name; the tensors' grad slots when omitted
        state: Optimizer state, advanced in place

    Raises:
        MissingGradientError: If some registered parameter has no gradient
        NonFiniteError: If the update produces a non-finite value
    """
    resolved: dict[str, np.ndarray] = {}
    for name, tensor in params.items():
        grad = tensor.grad if grads is None else grads.get(name)
        if grad is None:
            raise MissingGradientError(name)
        if grad.shape != tensor.shape:
            raise DimensionError(
                f"Gradient for '{name}' has shape {grad.shape}, not {tensor.shape}"
            )
        resolved[name] = grad

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name, tensor in params.items():
        g = resolved[name]
        m = state.m.get(name, np.zeros_like(g))
        v = state.v.get(name, np.zeros_like(g))
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        update = state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps_hat)
        value = tensor.data - update
        if not np.isfinite(value).all():
            raise NonFiniteError(f"Adam update made parameter '{name}' non-finite")
        state.m[name] = m
        state.v[name] = v
        tensor.data = value
    return state
