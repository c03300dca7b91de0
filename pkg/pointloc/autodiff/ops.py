"""Differentiable primitives over float64 tensors.

Each primitive computes its forward value with numpy and records a backward
rule on the active tape. Only the shapes the network needs are supported:
there is no general broadcasting.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from pointloc.autodiff.tensor import Tensor, record
from pointloc.core.exceptions import DimensionError, EmptyGroupError, InvalidArgumentError


def _require_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def pointwise_linear(input: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    Shared per-row linear map: out[i] = input[i] @ weight + bias.

    Args:
        input: N x Cin tensor
        weight: Cin x Cout tensor
        bias: Cout tensor

    Returns:
        N x Cout tensor
    """
    if (
        len(input.shape) != 2
        or len(weight.shape) != 2
        or len(bias.shape) != 1
        or input.shape[1] != weight.shape[0]
        or weight.shape[1] != bias.shape[0]
    ):
        raise DimensionError(
            f"pointwise_linear: input {input.shape}, weight {weight.shape}, bias {bias.shape}"
        )
    x, w = input.data, weight.data
    out = x @ w + bias.data

    def _backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return g @ w.T, x.T @ g, g.sum(axis=0)

    return record("pointwise_linear", (input, weight, bias), out, _backward)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    """Elementwise x if x >= 0 else slope * x."""
    if not 0.0 < slope < 1.0:
        raise InvalidArgumentError(f"leaky_relu slope must lie in (0, 1), got {slope}")
    factor = np.where(x.data >= 0.0, 1.0, slope)
    out = x.data * factor

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * factor,)

    return record("leaky_relu", (x,), out, _backward)


_SIGMOID_HIGH = np.nextafter(1.0, 0.0)
_SIGMOID_LOW = np.nextafter(0.0, 1.0)


def sigmoid(x: Tensor) -> Tensor:
    """Logistic function in the two-branch stable form, kept strictly inside (0, 1)."""
    z = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))
    out = np.clip(out, _SIGMOID_LOW, _SIGMOID_HIGH)

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * out * (1.0 - out),)

    return record("sigmoid", (x,), out, _backward)


def grouped_max_pool(features: Tensor, valid_counts: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """
    Column-wise max over the first valid_counts[j] rows of every group.

    Args:
        features: M x K x C tensor
        valid_counts: M integer array with 1 <= valid_counts[j] <= K

    Returns:
        (M x C tensor, M x C argmax row indices). Ties resolve to the lowest row.
    """
    if len(features.shape) != 3:
        raise DimensionError(f"grouped_max_pool expects M x K x C, got {features.shape}")
    m, k, c = features.shape
    counts = np.asarray(valid_counts, dtype=np.int64)
    if counts.shape != (m,):
        raise DimensionError(f"grouped_max_pool: valid_counts {counts.shape} for {m} groups")
    if (counts < 1).any():
        raise EmptyGroupError(f"Group {int(np.argmax(counts < 1))} has no valid rows")
    if (counts > k).any():
        raise DimensionError(f"grouped_max_pool: valid count exceeds group size {k}")

    valid = np.arange(k)[None, :, None] < counts[:, None, None]
    masked = np.where(valid, features.data, -np.inf)
    argmax = np.argmax(masked, axis=1)
    out = np.take_along_axis(features.data, argmax[:, None, :], axis=1)[:, 0, :]

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros((m, k, c))
        np.put_along_axis(grad, argmax[:, None, :], g[:, None, :], axis=1)
        return (grad,)

    return record("grouped_max_pool", (features,), out, _backward), argmax


ElementwiseKind = Literal["add", "mul", "broadcast_mul_row"]


def elementwise(kind: ElementwiseKind, a: Tensor, b: Tensor) -> Tensor:
    """
    Elementwise add/mul of equal shapes, or row-broadcast multiply of N x C by 1 x C.
    """
    if kind == "add":
        _require_shape(a, b, "add")

        def _add_backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return g, g

        return record("add", (a, b), a.data + b.data, _add_backward)

    if kind == "mul":
        _require_shape(a, b, "mul")
        x, y = a.data, b.data

        def _mul_backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return g * y, g * x

        return record("mul", (a, b), x * y, _mul_backward)

    if kind == "broadcast_mul_row":
        if len(a.shape) != 2 or b.shape != (1, a.shape[1]):
            raise DimensionError(f"broadcast_mul_row: {a.shape} cannot be masked by {b.shape}")
        x, row = a.data, b.data

        def _row_backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return g * row, (g * x).sum(axis=0, keepdims=True)

        return record("broadcast_mul_row", (a, b), x * row, _row_backward)

    raise InvalidArgumentError(f"Unknown elementwise kind '{kind}'")


def add(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("add", a, b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("mul", a, b)


def broadcast_mul_row(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("broadcast_mul_row", a, b)


def l1_distance(a: Tensor, b: Tensor) -> Tensor:
    """Sum of absolute differences; the subgradient at zero is zero."""
    _require_shape(a, b, "l1_distance")
    diff = a.data - b.data
    sign = np.sign(diff)

    def _backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g * sign, -g * sign

    return record("l1_distance", (a, b), np.array([np.abs(diff).sum()]), _backward)


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * out,)

    return record("exp", (x,), out, _backward)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply by a constant."""

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * factor,)

    return record("scale", (x,), x.data * factor, _backward)


def sum_all(x: Tensor) -> Tensor:
    shape = x.data.shape

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.broadcast_to(g.reshape(()), shape).copy(),)

    return record("sum", (x,), np.array([x.data.sum()]), _backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    if int(np.prod(shape)) != x.size:
        raise DimensionError(f"reshape: cannot view {x.shape} as {shape}")
    original = x.data.shape

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.reshape(original),)

    return record("reshape", (x,), x.data.reshape(shape), _backward)


def gather_rows(x: Tensor, indices: np.ndarray) -> Tensor:
    """
    Index rows of an N x C tensor with an integer array of any shape.

    The backward pass scatter-adds, so repeated indices accumulate.
    """
    if len(x.shape) != 2:
        raise DimensionError(f"gather_rows expects N x C, got {x.shape}")
    idx = np.asarray(indices, dtype=np.int64)
    n, c = x.shape
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise DimensionError(f"gather_rows: index out of range for {n} rows")

    def _backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros((n, c))
        np.add.at(grad, idx.reshape(-1), g.reshape(-1, c))
        return (grad,)

    return record("gather_rows", (x,), x.data[idx], _backward)


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the last axis; leading shapes must match."""
    if a.shape[:-1] != b.shape[:-1]:
        raise DimensionError(f"concat: leading shapes differ {a.shape} vs {b.shape}")
    split = a.shape[-1]

    def _backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g[..., :split], g[..., split:]

    return record("concat", (a, b), np.concatenate([a.data, b.data], axis=-1), _backward)
