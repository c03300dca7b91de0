"""Finite-difference oracle for the reverse-mode gradients."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from pointloc.autodiff import ops
from pointloc.autodiff.tensor import Tape, Tensor
from pointloc.core.exceptions import DeterminismError, InvalidArgumentError

logger = logging.getLogger(__name__)


def _objective(out: Tensor, projection: np.ndarray | None) -> float:
    if projection is None:
        return float(out.data.reshape(-1)[0])
    return float((out.data * projection).sum())


def finite_diff_check(
    f: Callable[[], Tensor],
    theta: Tensor,
    eps: float = 1e-5,
    coords: Sequence[int] | None = None,
    seed: int = 0,
) -> float:
    """
    Compare backward-pass gradients of f against central differences in theta.

    Non-scalar outputs are reduced with a fixed random projection so every output
    entry takes part. theta.data is perturbed in place and restored afterwards.

    Args:
        f: Deterministic computation reading theta and returning a tensor
        theta: Tensor to differentiate with respect to
        eps: Central difference step
        coords: Flat coordinates of theta to check (all when omitted)
        seed: Seed of the projection used for non-scalar outputs

    Returns:
        max over coordinates of |a - b| / max(1, |a|, |b|)

    Raises:
        DeterminismError: If two forward passes at the same point disagree
    """
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")

    projection = None
    with Tape() as tape:
        out = f()
        root = out
        if out.size != 1:
            projection = np.random.default_rng(seed).uniform(-1.0, 1.0, size=out.shape)
            root = ops.sum_all(ops.mul(out, Tensor(projection)))
    (analytic,) = tape.gradients(root, [theta])

    if _objective(f(), projection) != _objective(f(), projection):
        raise DeterminismError("finite_diff_check: f returned different values on identical input")

    flat = theta.data.flat
    analytic_flat = analytic.reshape(-1)
    indices = range(theta.size) if coords is None else coords
    worst = 0.0
    for i in indices:
        original = flat[i]
        flat[i] = original + eps
        plus = _objective(f(), projection)
        flat[i] = original - eps
        minus = _objective(f(), projection)
        flat[i] = original
        numeric = (plus - minus) / (2.0 * eps)
        a = float(analytic_flat[i])
        err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
        worst = max(worst, err)

    logger.debug(f"finite_diff_check on {theta!r}: max relative error {worst:.3e}")
    return worst
