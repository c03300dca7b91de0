"""Prometheus metrics for training and evaluation runs."""

from __future__ import annotations

from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile


class TrainingMetrics:
    """
    Metrics collector for one training or evaluation run.

    Each instance owns its registry, so several runs in one process never collide.
    """

    def __init__(self) -> None:
        """Initialize metrics collector."""
        self.registry = CollectorRegistry()

        self.steps_total = Counter(
            "pointloc_train_steps_total", "Optimizer steps taken", registry=self.registry
        )
        self.samples_total = Counter(
            "pointloc_train_samples_total", "Training samples processed", registry=self.registry
        )
        self.epoch_loss = Gauge(
            "pointloc_train_epoch_loss",
            "Mean training loss of the last epoch",
            registry=self.registry,
        )
        self.loss_factor = Gauge(
            "pointloc_loss_factor",
            "Learnable loss balance factor",
            ["factor"],
            registry=self.registry,
        )
        self.step_duration_seconds = Histogram(
            "pointloc_train_step_duration_seconds",
            "Wall-clock duration of one optimizer step",
            buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0],
            registry=self.registry,
        )
        self.eval_error = Gauge(
            "pointloc_eval_error",
            "Aggregate evaluation error",
            ["metric", "aggregate"],
            registry=self.registry,
        )

    def record_step(self, batch_size: int, duration: float) -> None:
        """
        Record one optimizer step.

        Args:
            batch_size: Samples in the batch
            duration: Step duration in seconds
        """
        self.steps_total.inc()
        self.samples_total.inc(batch_size)
        self.step_duration_seconds.observe(duration)

    def record_epoch(self, loss: float, beta: float, gamma: float) -> None:
        """Record the end-of-epoch loss and loss factors."""
        self.epoch_loss.set(loss)
        self.loss_factor.labels(factor="beta").set(beta)
        self.loss_factor.labels(factor="gamma").set(gamma)

    def record_evaluation(
        self, mean_t: float, median_t: float, mean_r: float, median_r: float
    ) -> None:
        """Record aggregate evaluation errors."""
        self.eval_error.labels(metric="translation_m", aggregate="mean").set(mean_t)
        self.eval_error.labels(metric="translation_m", aggregate="median").set(median_t)
        self.eval_error.labels(metric="rotation_deg", aggregate="mean").set(mean_r)
        self.eval_error.labels(metric="rotation_deg", aggregate="median").set(median_r)

    def write(self, path: str | Path) -> None:
        """Write the registry in the Prometheus text format."""
        write_to_textfile(str(path), self.registry)
