"""Pydantic schema for evaluation reports."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field

from pointloc.core.exceptions import EmptySplitError
from pointloc.schemas.config import Aggregate


class EvalReport(BaseModel):
    """Per-frame errors plus their mean and median (even counts average the middle pair)."""

    split: str
    aggregate: Aggregate = "median"
    frame_count: int = Field(..., ge=1)
    frame_ids: list[str]
    translation_errors_m: list[float]
    rotation_errors_deg: list[float]
    mean_translation_m: float
    median_translation_m: float
    mean_rotation_deg: float
    median_rotation_deg: float

    @classmethod
    def from_errors(
        cls,
        split: str,
        frame_ids: Sequence[str],
        translation_errors: Sequence[float],
        rotation_errors: Sequence[float],
        aggregate: Aggregate = "median",
    ) -> EvalReport:
        if not translation_errors:
            raise EmptySplitError(f"No frames evaluated for split '{split}'")
        t = np.asarray(translation_errors, dtype=np.float64)
        r = np.asarray(rotation_errors, dtype=np.float64)
        return cls(
            split=split,
            aggregate=aggregate,
            frame_count=len(t),
            frame_ids=list(frame_ids),
            translation_errors_m=t.tolist(),
            rotation_errors_deg=r.tolist(),
            mean_translation_m=float(np.mean(t)),
            median_translation_m=float(np.median(t)),
            mean_rotation_deg=float(np.mean(r)),
            median_rotation_deg=float(np.median(r)),
        )

    def highlighted(self) -> tuple[float, float]:
        """(translation, rotation) under the requested aggregate."""
        if self.aggregate == "mean":
            return self.mean_translation_m, self.mean_rotation_deg
        return self.median_translation_m, self.median_rotation_deg

    def to_text(self) -> str:
        """Machine-readable ``key: value`` lines."""
        t, r = self.highlighted()
        lines = [
            f"split: {self.split}",
            f"frames: {self.frame_count}",
            f"aggregate: {self.aggregate}",
            f"mean_translation_m: {self.mean_translation_m!r}",
            f"median_translation_m: {self.median_translation_m!r}",
            f"mean_rotation_deg: {self.mean_rotation_deg!r}",
            f"median_rotation_deg: {self.median_rotation_deg!r}",
            f"translation_m: {t!r}",
            f"rotation_deg: {r!r}",
        ]
        return "\n".join(lines) + "\n"
