"""Learnable parameters of the network and the loss balance factors."""

from __future__ import annotations

import logging
from collections.abc import Iterator

import numpy as np

from pointloc.autodiff.tensor import Tensor
from pointloc.core.exceptions import CheckpointError, InvalidArgumentError
from pointloc.schemas.model import ModelScale

logger = logging.getLogger(__name__)

BETA_INIT = 0.0
GAMMA_INIT = -3.0
BETA_NAME = "loss.beta"
GAMMA_NAME = "loss.gamma"


class ModelParams:
    """
    Named registry of every learnable tensor, in registration order.

    Names are dotted layer paths such as ``sa1.r0.mlp0.weight`` or ``regressor.t.fc3.bias``.
    """

    def __init__(self, scale: ModelScale) -> None:
        self.scale = scale
        self._tensors: dict[str, Tensor] = {}

    def register(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise InvalidArgumentError(f"Parameter '{name}' registered twice")
        tensor = Tensor(data, requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: object) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self) -> list[tuple[str, Tensor]]:
        return list(self._tensors.items())

    def tensors(self) -> list[Tensor]:
        return list(self._tensors.values())

    @property
    def beta(self) -> Tensor:
        return self._tensors[BETA_NAME]

    @property
    def gamma(self) -> Tensor:
        return self._tensors[GAMMA_NAME]

    def parameter_count(self) -> int:
        return sum(t.size for t in self._tensors.values())

    def layer_summary(self) -> dict[str, int]:
        """Parameter counts grouped by layer (first path component, two for the regressor)."""
        summary: dict[str, int] = {}
        for name, tensor in self._tensors.items():
            group = layer_group(name)
            summary[group] = summary.get(group, 0) + tensor.size
        return summary

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.grad = None

    def state(self) -> dict[str, np.ndarray]:
        """Copies of every parameter array."""
        return {name: t.data.copy() for name, t in self._tensors.items()}

    def load_state(self, arrays: dict[str, np.ndarray]) -> None:
        """Overwrite parameter values; names and shapes must match exactly."""
        missing = [name for name in self._tensors if name not in arrays]
        if missing:
            raise CheckpointError(f"Checkpoint lacks parameters: {', '.join(missing[:5])}")
        for name, tensor in self._tensors.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise CheckpointError(
                    f"Parameter '{name}' has shape {value.shape}, model expects {tensor.shape}"
                )
            tensor.data = value.copy()

    def copy(self) -> ModelParams:
        clone = ModelParams(self.scale)
        for name, tensor in self._tensors.items():
            clone.register(name, tensor.data.copy())
        return clone


def layer_group(name: str) -> str:
    parts = name.split(".")
    if parts[0] == "regressor":
        return ".".join(parts[:2])
    return parts[0]


def _linear(
    params: ModelParams, rng: np.random.Generator, prefix: str, fan_in: int, fan_out: int
) -> None:
    bound = 1.0 / np.sqrt(fan_in)
    params.register(f"{prefix}.weight", rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    params.register(f"{prefix}.bias", np.zeros(fan_out))


def init_params(seed: int, scale: ModelScale | None = None) -> ModelParams:
    """
    Initialize every weight uniformly in +-1/sqrt(fan_in) with zero biases.

    The loss factors start at beta=0.0 and gamma=-3.0.
    """
    scale = scale or ModelScale()
    rng = np.random.default_rng(seed)
    params = ModelParams(scale)

    for layer in scale.sa_layers():
        for branch in range(len(layer.radii)):
            widths = [3 + layer.in_channels, *layer.mlp_channels[1:]]
            for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
                _linear(params, rng, f"{layer.name}.r{branch}.mlp{i}", fan_in, fan_out)

    channels = scale.attention_channels
    _linear(params, rng, "attention", channels, channels)

    mlp = scale.group_all_mlp
    for i, (fan_in, fan_out) in enumerate(zip(mlp[:-1], mlp[1:], strict=True)):
        _linear(params, rng, f"group_all.mlp{i}", fan_in, fan_out)
    _linear(params, rng, "group_all.fc", mlp[-1], scale.group_all_fc)

    widths = scale.regressor_widths
    for branch in ("t", "w"):
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
            _linear(params, rng, f"regressor.{branch}.fc{i}", fan_in, fan_out)

    params.register(BETA_NAME, np.array([BETA_INIT]))
    params.register(GAMMA_NAME, np.array([GAMMA_INIT]))

    logger.debug(
        f"Initialized {len(params)} tensors ({params.parameter_count()} values) "
        f"for scale '{scale.name}' with seed {seed}"
    )
    return params
