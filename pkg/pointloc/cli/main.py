"""CLI interface for PointLoc using Typer."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import typer
from rich.console import Console
from rich.table import Table

from pointloc import __version__
from pointloc.cli.common import (
    ConfigOption,
    OutOption,
    SeedOption,
    new_metrics,
    prepare_out_dir,
    reported_errors,
    require,
    resolve_config,
    settings,
    write_metrics,
    write_resolved_config,
)
from pointloc.core.error_handling import EXIT_OK, EXIT_USAGE
from pointloc.core.exceptions import GradientCheckError
from pointloc.core.fileio import atomic_write_text
from pointloc.core.logging import configure_logging
from pointloc.data.cloud_io import load_cloud
from pointloc.data.dataset import FrameDataset, frame_seed
from pointloc.data.manifest import load_manifest
from pointloc.data.synthetic import build_synthetic_dataset
from pointloc.evaluation.evaluator import report_table, run_evaluation
from pointloc.evaluation.trajectory import export_trajectory
from pointloc.geometry.quaternion import quat_canonicalize
from pointloc.model.checkpoint import load_checkpoint
from pointloc.model.network import predict
from pointloc.model.params import init_params
from pointloc.sampling.kernels import random_downsample
from pointloc.training.gradcheck import check_model_gradients, gradcheck_sample
from pointloc.training.trainer import train as run_training

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="pointloc",
    help="PointLoc: 6-DoF pose regression from single LiDAR point clouds.",
    add_completion=False,
)
console = Console()

REPORT_NAME = "eval_report.txt"
TRAJECTORY_NAME = "trajectory.txt"


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"PointLoc version: {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool | None = typer.Option(
        None,
        "--version",
        "-v",
        help="Show version and exit",
        callback=version_callback,
        is_eager=True,
    ),
    debug: bool = typer.Option(
        False,
        "--debug",
        help="Enable debug logging with full stack traces",
    ),
) -> None:
    """PointLoc: 6-DoF pose regression from single LiDAR point clouds."""
    settings.debug = debug
    configure_logging("DEBUG" if debug else settings.log_level, settings.log_format)
    if debug:
        logger.debug("Debug mode enabled - full stack traces will be shown")


@app.command()
def synth(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    n_poses: int | None = typer.Option(None, "--n-poses", help="Frames to generate"),
    beams: int | None = typer.Option(None, "--beams", help="Laser beams per scan"),
    azimuth_steps: int | None = typer.Option(None, "--azimuth-steps", help="Rays per beam"),
    noise_sigma: float | None = typer.Option(None, "--noise-sigma", help="Range noise (m)"),
) -> None:
    """
    Generate a synthetic scene, scan it along a trajectory and write a manifest.
    """
    with reported_errors():
        cfg = resolve_config(
            config,
            seed=seed,
            out_dir=out,
            n_poses=n_poses,
            beams=beams,
            azimuth_steps=azimuth_steps,
            noise_sigma=noise_sigma,
        )
        manifest = build_synthetic_dataset(
            n_poses=cfg.n_poses,
            seed=cfg.seed,
            out_dir=cfg.out_dir,
            beams=cfg.beams,
            azimuth_steps=cfg.azimuth_steps,
            noise_sigma=cfg.noise_sigma,
            vertical_fov_deg=cfg.vertical_fov_deg,
            max_range=cfg.max_range,
        )
        write_resolved_config(cfg, cfg.out_dir)

        table = Table(title=f"Synthetic dataset in {cfg.out_dir}")
        table.add_column("Split", style="cyan")
        table.add_column("Frames", justify="right", style="green")
        for split, count in manifest.frame_counts.items():
            table.add_row(split, str(count))
        console.print(table)
        console.print(f"[green]✓ {len(manifest)} frames written to {manifest.source}[/green]")


@app.command()
def train(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    manifest: Path | None = typer.Option(None, "--manifest", "-m", help="Dataset manifest"),
    epochs: int | None = typer.Option(None, "--epochs", help="Passes over the train split"),
    lr: float | None = typer.Option(None, "--lr", help="Adam learning rate"),
    batch_size: int | None = typer.Option(None, "--batch-size", help="Samples per step"),
    model_scale: str | None = typer.Option(None, "--model-scale", help="full, small or tiny"),
    attention: str | None = typer.Option(None, "--attention", help="learned, ones or off"),
    max_steps: int | None = typer.Option(None, "--max-steps", help="Optimizer step cap"),
    checkpoint_every: int | None = typer.Option(
        None, "--checkpoint-every", help="Epochs between checkpoints"
    ),
    workers: int | None = typer.Option(None, "--workers", help="Gradient worker threads"),
    resume: Path | None = typer.Option(None, "--resume", help="Checkpoint to continue from"),
) -> None:
    """
    Train a model on the train split; writes checkpoint.ploc and loss_log.tsv.
    """
    with reported_errors():
        cfg = resolve_config(
            config,
            seed=seed,
            out_dir=out,
            manifest=manifest,
            epochs=epochs,
            lr=lr,
            batch_size=batch_size,
            model_scale=model_scale,
            attention=attention,
            max_steps=max_steps,
            checkpoint_every=checkpoint_every,
            workers=workers,
            resume=resume,
        )
        data = load_manifest(require(cfg.manifest, "manifest"))
        train_config = cfg.train_config()
        n_input = train_config.scale().n_input
        dataset = FrameDataset(data, "train", n_input, seed=cfg.seed)
        val_dataset = None
        if data.split("val"):
            val_dataset = FrameDataset(data, "val", n_input, seed=cfg.seed)

        out_dir = prepare_out_dir(cfg)
        write_resolved_config(cfg, out_dir)
        metrics = new_metrics()
        result = run_training(
            train_config,
            dataset,
            out_dir=out_dir,
            val_dataset=val_dataset,
            resume=cfg.resume,
            metrics=metrics,
        )
        write_metrics(metrics, out_dir)

        if result.history:
            last = result.history[-1]
            console.print(
                f"[green]✓ epoch {last.epoch}: loss {last.train_loss:.6f} "
                f"(beta {last.beta:.4f}, gamma {last.gamma:.4f}) after {result.state.step} "
                f"steps[/green]"
            )
        console.print(f"Checkpoint: {result.checkpoint}")


@app.command("eval")
def eval_command(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    manifest: Path | None = typer.Option(None, "--manifest", "-m", help="Dataset manifest"),
    checkpoint: Path | None = typer.Option(None, "--checkpoint", help="Trained checkpoint"),
    split: str | None = typer.Option(None, "--split", help="train, val or test"),
    aggregate: str | None = typer.Option(None, "--aggregate", help="mean or median"),
    attention: str | None = typer.Option(None, "--attention", help="learned, ones or off"),
    eval_seed: int | None = typer.Option(None, "--eval-seed", help="Resampling seed"),
    workers: int | None = typer.Option(None, "--workers", help="Frames evaluated in parallel"),
) -> None:
    """
    Evaluate a checkpoint on a split; writes the report and the trajectory.
    """
    with reported_errors():
        cfg = resolve_config(
            config,
            seed=seed,
            out_dir=out,
            manifest=manifest,
            checkpoint=checkpoint,
            split=split,
            aggregate=aggregate,
            attention=attention,
            eval_seed=eval_seed,
            workers=workers,
        )
        params = load_checkpoint(require(cfg.checkpoint, "checkpoint"))
        data = load_manifest(require(cfg.manifest, "manifest"))
        metrics = new_metrics()
        evaluation = run_evaluation(
            params,
            data,
            split=cfg.split,
            aggregate=cfg.aggregate,
            seed=cfg.eval_seed,
            attention=cfg.attention,
            workers=cfg.workers,
            metrics=metrics,
        )
        report = evaluation.report

        out_dir = prepare_out_dir(cfg)
        write_resolved_config(cfg, out_dir)
        atomic_write_text(out_dir / REPORT_NAME, report.to_text())
        export_trajectory(
            report, evaluation.predictions, evaluation.ground_truth, out_dir / TRAJECTORY_NAME
        )
        write_metrics(metrics, out_dir)

        console.print(report_table(report))
        t, r = report.highlighted()
        console.print(f"[bold]{report.aggregate}: {t:.4f} m, {r:.3f} deg[/bold]")


@app.command()
def infer(
    cloud_path: Path = typer.Argument(..., help="Cloud file (.pcld)"),
    config: Path | None = ConfigOption,
    checkpoint: Path | None = typer.Option(None, "--checkpoint", help="Trained checkpoint"),
    attention: str | None = typer.Option(None, "--attention", help="learned, ones or off"),
    eval_seed: int | None = typer.Option(None, "--eval-seed", help="Resampling seed"),
) -> None:
    """
    Predict the pose of one cloud: prints tx ty tz qw qx qy qz.
    """
    with reported_errors():
        cfg = resolve_config(
            config, checkpoint=checkpoint, attention=attention, eval_seed=eval_seed
        )
        params = load_checkpoint(require(cfg.checkpoint, "checkpoint"))
        cloud = random_downsample(
            load_cloud(cloud_path), params.scale.n_input, frame_seed(cfg.eval_seed, 0)
        )
        pose = predict(params, cloud, attention=cfg.attention).to_pose(strict=False)
        values = [*pose.t, *quat_canonicalize(pose.q)]
        typer.echo(" ".join(repr(float(v)) for v in values))


@app.command()
def gradcheck(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    model_scale: str | None = typer.Option(
        None, "--model-scale", help="full, small or tiny (tiny unless configured)"
    ),
    attention: str | None = typer.Option(None, "--attention", help="learned, ones or off"),
    coords: int | None = typer.Option(None, "--coords", help="Coordinates per tensor"),
    eps: float | None = typer.Option(None, "--eps", help="Central difference step"),
    tolerance: float | None = typer.Option(None, "--tolerance", help="Max relative error"),
) -> None:
    """
    Check backward-pass gradients of every layer against finite differences.
    """
    with reported_errors():
        cfg = resolve_config(
            config,
            seed=seed,
            model_scale=model_scale,
            attention=attention,
            gradcheck_coords=coords,
            gradcheck_eps=eps,
            gradcheck_tolerance=tolerance,
        )
        if "model_scale" not in cfg.model_fields_set:
            cfg = cfg.model_copy(update={"model_scale": "tiny"})
        scale = cfg.scale()
        params = init_params(cfg.seed, scale)
        cloud, target = gradcheck_sample(cfg.seed, scale.n_input)
        console.print(
            f"[blue]Checking {params.parameter_count()} parameters of scale '{scale.name}' "
            f"({cfg.gradcheck_coords} coords per tensor)[/blue]"
        )
        results = check_model_gradients(
            params,
            cloud,
            target,
            coords=cfg.gradcheck_coords,
            eps=cfg.gradcheck_eps,
            seed=cfg.seed,
            attention=cfg.attention,
        )

        table = Table(title="Gradient check")
        table.add_column("Layer", style="cyan")
        table.add_column("Tensors", justify="right")
        table.add_column("Coords", justify="right")
        table.add_column("Max rel. error", justify="right")
        table.add_column("Result")
        for check in results:
            ok = check.passed(cfg.gradcheck_tolerance)
            table.add_row(
                check.layer,
                str(check.tensors),
                str(check.coords),
                f"{check.max_rel_error:.2e}",
                "[green]pass[/green]" if ok else "[red]FAIL[/red]",
            )
        console.print(table)

        failed = [c.layer for c in results if not c.passed(cfg.gradcheck_tolerance)]
        if failed:
            raise GradientCheckError(
                f"Gradients exceed tolerance {cfg.gradcheck_tolerance:g} in: {', '.join(failed)}"
            )
        console.print(f"[green]✓ all {len(results)} layers within tolerance[/green]")


from pointloc.cli.inspection import inspect_app  # noqa: E402

app.add_typer(inspect_app)


def run() -> None:
    """Console entry point: exit code 1 usage, 2 data, 3 numeric."""
    try:
        code = app(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        code = EXIT_USAGE
    except click.exceptions.Abort:
        code = EXIT_USAGE
    sys.exit(code if isinstance(code, int) else EXIT_OK)


if __name__ == "__main__":
    run()
