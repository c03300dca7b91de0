"""Dense float64 tensors and the reverse-mode tape."""

from __future__ import annotations

import contextvars
import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from pointloc.core.exceptions import DimensionError, NonFiniteError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]

_active_tape: contextvars.ContextVar[Tape | None] = contextvars.ContextVar(
    "pointloc_active_tape", default=None
)


class Tensor:
    """
    A shaped float64 array with an optional gradient slot.

    Tensors reject non-finite values on construction, so no NaN/Inf ever
    enters a recorded graph.
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        array = np.array(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1)
        if array.size == 0:
            raise DimensionError(f"Tensor needs at least one element, got shape {array.shape}")
        if not np.isfinite(array).all():
            raise NonFiniteError(f"Non-finite value in tensor {name or ''} of shape {array.shape}")
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @classmethod
    def _wrap(cls, array: np.ndarray, requires_grad: bool) -> Tensor:
        """Wrap an op output without copying it."""
        if not np.isfinite(array).all():
            raise NonFiniteError(f"Operation produced non-finite values (shape {array.shape})")
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = requires_grad
        out.grad = None
        out.name = None
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        """Return the value of a one-element tensor."""
        if self.data.size != 1:
            raise DimensionError(f"item() needs a one-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a copy of the data."""
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"


@dataclass
class Node:
    """One recorded operation: kind, inputs, output and the backward rule."""

    kind: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward_fn: BackwardFn


class Tape:
    """
    Append-only record of differentiable operations.

    Used as a context manager; operations record onto the innermost active tape
    of the current thread and record nothing when no tape is active.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._token: contextvars.Token[Tape | None] | None = None

    def __enter__(self) -> Tape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._token is not None:
            _active_tape.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self.nodes)

    def record(
        self, kind: str, inputs: tuple[Tensor, ...], output: Tensor, backward_fn: BackwardFn
    ) -> None:
        self.nodes.append(Node(kind, inputs, output, backward_fn))

    def leaves(self) -> list[Tensor]:
        """Tensors requiring grad that enter the tape without being produced by it."""
        produced = {id(node.output) for node in self.nodes}
        seen: set[int] = set()
        result: list[Tensor] = []
        for node in self.nodes:
            for tensor in node.inputs:
                key = id(tensor)
                if tensor.requires_grad and key not in produced and key not in seen:
                    seen.add(key)
                    result.append(tensor)
        return result

    def _adjoints(self, root: Tensor) -> dict[int, np.ndarray]:
        if root.size != 1:
            raise DimensionError(f"backward needs a scalar root, got shape {root.shape}")
        adjoints: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
        for node in reversed(self.nodes):
            upstream = adjoints.get(id(node.output))
            if upstream is None:
                continue
            for tensor, grad in zip(node.inputs, node.backward_fn(upstream), strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + grad
                else:
                    adjoints[key] = grad
        return adjoints

    def gradients(self, root: Tensor, wrt: Sequence[Tensor]) -> list[np.ndarray]:
        """
        Compute d(root)/d(t) for every t in wrt without touching grad slots.

        Tensors that root does not depend on get zeros.
        """
        adjoints = self._adjoints(root)
        return [
            adjoints[id(t)].copy() if id(t) in adjoints else np.zeros_like(t.data) for t in wrt
        ]


def active_tape() -> Tape | None:
    """Return the tape operations currently record onto, if any."""
    return _active_tape.get()


def record(
    kind: str, inputs: tuple[Tensor, ...], out_data: np.ndarray, backward_fn: BackwardFn
) -> Tensor:
    """Wrap an op result and record it on the active tape when gradients are needed."""
    tape = _active_tape.get()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(out_data, requires_grad=needs_grad)
    if needs_grad and tape is not None:
        tape.record(kind, inputs, out, backward_fn)
    return out


def backward(loss: Tensor, tape: Tape, wrt: Iterable[Tensor] | None = None) -> None:
    """
    Fill the grad slot of every tensor in wrt with d(loss)/d(tensor).

    When wrt is omitted, all leaf tensors requiring grad on the tape are filled.
    Tensors the loss does not reach receive zeros.
    """
    targets = list(wrt) if wrt is not None else tape.leaves()
    grads = tape.gradients(loss, targets)
    for tensor, grad in zip(targets, grads, strict=True):
        tensor.grad = grad
    logger.debug(f"Backward over {len(tape)} nodes filled {len(targets)} gradients")
