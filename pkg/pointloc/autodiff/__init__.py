"""Minimal reverse-mode automatic differentiation over float64 tensors."""

from pointloc.autodiff.gradcheck import finite_diff_check
from pointloc.autodiff.tensor import Tape, Tensor, active_tape, backward

__all__ = ["Tape", "Tensor", "active_tape", "backward", "finite_diff_check"]
