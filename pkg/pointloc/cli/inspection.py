"""CLI commands for inspecting models and manifests."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from pointloc.cli.common import ConfigOption, SeedOption, reported_errors, resolve_config
from pointloc.data.manifest import load_manifest
from pointloc.model.checkpoint import checkpoint_records, encode_records, load_checkpoint
from pointloc.model.network import predict
from pointloc.model.params import init_params
from pointloc.sampling.kernels import PointCloud

console = Console()
inspect_app = typer.Typer(name="inspect", help="Inspect models and dataset manifests")

# Room-sized box for the latency benchmark cloud
_BENCH_EXTENT = np.array([4.0, 5.0, 3.0])


@inspect_app.command("model")
def inspect_model(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    checkpoint: Path | None = typer.Option(None, "--checkpoint", help="Checkpoint to inspect"),
    model_scale: str | None = typer.Option(None, "--model-scale", help="full, small or tiny"),
    latency: bool = typer.Option(True, "--latency/--no-latency", help="Time one forward pass"),
) -> None:
    """Parameter counts per layer, checkpoint size and forward latency."""
    with reported_errors():
        cfg = resolve_config(config, seed=seed, checkpoint=checkpoint, model_scale=model_scale)
        if cfg.checkpoint is not None:
            params = load_checkpoint(cfg.checkpoint)
            size = cfg.checkpoint.stat().st_size
        else:
            params = init_params(cfg.seed, cfg.scale())
            size = len(encode_records(checkpoint_records(params)))

        table = Table(title=f"Model scale '{params.scale.name}' ({params.scale.n_input} points)")
        table.add_column("Layer", style="cyan")
        table.add_column("Parameters", justify="right", style="green")
        for layer, count in params.layer_summary().items():
            table.add_row(layer, f"{count:,}")
        table.add_row("[bold]total[/bold]", f"[bold]{params.parameter_count():,}[/bold]")
        console.print(table)
        console.print(f"Checkpoint size: {size:,} bytes")

        if latency:
            rng = np.random.default_rng(cfg.seed)
            cloud = PointCloud(rng.uniform(0.0, 1.0, (params.scale.n_input, 3)) * _BENCH_EXTENT)
            started = time.perf_counter()
            predict(params, cloud, attention=cfg.attention)
            console.print(f"Forward latency: {time.perf_counter() - started:.3f} s")


@inspect_app.command("manifest")
def inspect_manifest(
    manifest_path: Path = typer.Argument(..., help="Dataset manifest"),
) -> None:
    """Frames per split and sequence, plus warnings raised while loading."""
    with reported_errors():
        manifest = load_manifest(manifest_path)

        table = Table(title=f"Manifest {manifest.source}")
        table.add_column("Split", style="cyan")
        table.add_column("Sequence", style="magenta")
        table.add_column("Frames", justify="right", style="green")
        for split in manifest.frame_counts:
            for sequence in manifest.sequences(split):
                count = sum(1 for r in manifest.split(split) if r.sequence_tag == sequence)
                table.add_row(split, sequence, str(count))
        console.print(table)

        report = manifest.report
        console.print(
            f"{len(manifest)} frames; {report.normalized} quaternions normalized, "
            f"{report.canonicalized} canonicalized, {len(report.duplicate_paths)} duplicate paths"
        )
        for warning in report.warnings:
            console.print(f"[yellow]! {warning}[/yellow]")
