"""
Main CLI entry point for aerial-lidar-reg.
"""

import logging
import sys
import time
from pathlib import Path
from typing import Optional, Tuple

import click

from .descriptor.cfog import CfogParams, build_cfog
from .detector.fast import InterestPoint
from .exceptions import ConfigError, RegistrationError, StageError
from .matcher.template_matcher import METRICS, MatchParams, match_point
from .pipeline.config import load_config
from .pipeline.registration import RegistrationPipeline
from .pipeline.visualize import checkerboard as build_checkerboard
from .pipeline.visualize import similarity_surfaces, surface_raster
from .raster.rasterizer import FILL_STRATEGIES, rasterize_points
from .synthetic import make_scene
from .utils.file_handler import WORLD_FILE_SUFFIXES, FileHandler

EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.option(
    "--verbose", "-v",
    is_flag=True,
    help="Enable verbose output"
)
@click.version_option(package_name="aerial-lidar-reg")
@click.pass_context
def main(ctx: click.Context, verbose: bool) -> None:
    """
    Register aerial images to LiDAR intensity rasters.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose


@main.command()
@click.argument("pointcloud", type=click.Path(path_type=Path))
@click.option("--cell-size", required=True, type=click.FloatRange(min=0, min_open=True),
              help="Output cell size in meters")
@click.option("--intensity-out", "-i", required=True, type=click.Path(path_type=Path),
              help="Intensity raster (.flt)")
@click.option("--elevation-out", "-e", required=True, type=click.Path(path_type=Path),
              help="Elevation raster (.flt)")
@click.option("--fill", type=click.Choice(FILL_STRATEGIES), default="nearest", show_default=True,
              help="Hole filling strategy")
@click.option("--search-radius", type=click.IntRange(min=0), default=3, show_default=True,
              help="Hole filling radius in cells")
@click.option("--crs-tag", default="", help="CRS label stored with the rasters")
@click.pass_context
def rasterize(ctx: click.Context, pointcloud: Path, cell_size: float, intensity_out: Path,
              elevation_out: Path, fill: str, search_radius: int, crs_tag: str) -> None:
    """Rasterize an ASCII point cloud into intensity and elevation rasters."""
    verbose = ctx.obj["verbose"]
    file_handler = FileHandler()
    try:
        if verbose:
            click.echo(f"Reading point cloud: {pointcloud}")
        points = file_handler.load_point_cloud(pointcloud)
        for attribute, path in (("intensity", intensity_out), ("elevation", elevation_out)):
            raster = rasterize_points(points, cell_size, attribute=attribute, fill=fill,
                                      search_radius=search_radius, crs_tag=crs_tag)
            file_handler.save_raster(raster, path)
            if verbose:
                click.echo(f"Wrote {attribute} raster {raster.width}x{raster.height}: {path}")
    except (OSError, RegistrationError) as e:
        _fail(str(e), EXIT_INPUT_ERROR)


@main.command()
@click.option("--config", "-c", "config_path", type=click.Path(path_type=Path),
              help="INI configuration file")
@click.option("--aerial", type=click.Path(path_type=Path), help="Aerial image raster")
@click.option("--camera", type=click.Path(path_type=Path), help="Pose and intrinsics file")
@click.option("--lidar", type=click.Path(path_type=Path), help="LiDAR intensity raster")
@click.option("--dsm", type=click.Path(path_type=Path), help="DSM raster or point cloud")
@click.option("--output", "-o", type=click.Path(path_type=Path), help="Output directory")
@click.option("--metric", type=click.Choice(METRICS), help="Similarity metric")
@click.option("--template-size", type=int, help="Template side in pixels")
@click.option("--search-radius", type=int, help="Admissible offset in pixels")
@click.option("--grid-n", type=int, help="Detector grid size")
@click.option("--workers", type=int, help="Matching threads")
@click.option("--rmse-target", type=float, help="Mismatch removal RMSE target in pixels")
@click.option("--debug/--no-debug", default=None, help="Dump rectified patches")
@click.pass_context
def register(ctx: click.Context, config_path: Optional[Path], aerial: Optional[Path],
             camera: Optional[Path], lidar: Optional[Path], dsm: Optional[Path],
             output: Optional[Path], metric: Optional[str], template_size: Optional[int],
             search_radius: Optional[int], grid_n: Optional[int], workers: Optional[int],
             rmse_target: Optional[float], debug: Optional[bool]) -> None:
    """
    Register an aerial image to LiDAR rasters and refine its pose.

    Exits 0 when the resection converged with at least four inliers under
    the RMSE target, 1 on registration failure and 2 on input errors.
    """
    verbose = ctx.obj["verbose"]
    overrides = {
        "inputs": {"aerial": aerial, "camera": camera, "lidar_intensity": lidar, "dsm": dsm},
        "detector": {"grid_n": grid_n},
        "matcher": {"metric": metric, "template_size": template_size,
                    "search_radius": search_radius, "workers": workers},
        "orientation": {"rmse_target": rmse_target},
        "output": {"directory": output, "debug": debug},
    }
    try:
        config = load_config(config_path, overrides)
        if verbose:
            click.echo(f"Registering with metric {config.metric}, output in {config.output_dir}")
        report = RegistrationPipeline(config).run()
    except ConfigError as e:
        _fail(str(e), EXIT_INPUT_ERROR)
    except StageError as e:
        _fail(f"{e.stage} stage failed: {e.cause}", EXIT_FAILURE)

    click.echo(f"Interest points: {report.interest_points}")
    click.echo(f"Accepted matches: {report.accepted}")
    click.echo(f"CMN: {report.cmn}")
    click.echo(f"RMSE: {report.rmse:.3f} px")
    click.echo(f"Running time: {report.running_time:.2f} s")
    if not report.succeeded:
        _fail(
            f"registration did not reach the target (converged={report.converged}, "
            f"cmn={report.cmn}, rmse={report.rmse:.3f} px)",
            EXIT_FAILURE,
        )
    if verbose:
        click.echo("Registration completed successfully!")


@main.command()
@click.argument("raster_a", type=click.Path(exists=True, path_type=Path))
@click.argument("raster_b", type=click.Path(exists=True, path_type=Path))
@click.option("--tile", type=click.IntRange(min=1), default=64, show_default=True,
              help="Tile side in pixels")
@click.option("--output", "-o", required=True, type=click.Path(path_type=Path),
              help="Output image (e.g. .png)")
def checkerboard(raster_a: Path, raster_b: Path, tile: int, output: Path) -> None:
    """Checkerboard mosaic of two co-registered rasters."""
    file_handler = FileHandler()
    try:
        a = file_handler.load_raster(raster_a)
        b = file_handler.load_raster(raster_b)
        mosaic, transform = build_checkerboard(a, b, tile)
        file_handler.save_image_u8(mosaic, output)
        file_handler.write_world_file(transform, output.with_suffix(WORLD_FILE_SUFFIXES[0]))
    except (OSError, RegistrationError) as e:
        _fail(str(e), EXIT_INPUT_ERROR)
    click.echo(f"Wrote {mosaic.shape[1]}x{mosaic.shape[0]} checkerboard: {output}")


@main.command()
@click.argument("aerial_patch", type=click.Path(exists=True, path_type=Path))
@click.argument("lidar_patch", type=click.Path(exists=True, path_type=Path))
@click.option("--metric", "metrics", type=click.Choice(METRICS), multiple=True,
              help="Metric to evaluate; repeatable, all by default")
@click.option("--search-radius", type=click.IntRange(min=0), default=16, show_default=True,
              help="Border removed from the aerial patch for ncc and mi")
@click.option("--mi-bins", type=click.IntRange(min=2), default=32, show_default=True)
@click.option("--output-dir", "-o", required=True, type=click.Path(path_type=Path),
              help="Directory for the surface rasters")
def simsurface(aerial_patch: Path, lidar_patch: Path, metrics: Tuple[str, ...],
               search_radius: int, mi_bins: int, output_dir: Path) -> None:
    """Similarity surfaces of a patch pair under each metric."""
    file_handler = FileHandler()
    try:
        aerial = file_handler.load_raster(aerial_patch).grid
        lidar = file_handler.load_raster(lidar_patch).grid
    except (OSError, RegistrationError) as e:
        _fail(str(e), EXIT_INPUT_ERROR)

    results = similarity_surfaces(aerial, lidar, metrics or METRICS, search_radius, mi_bins=mi_bins)
    for metric, result in results.items():
        if result.error:
            click.echo(f"{metric}: error: {result.error}")
            continue
        path = output_dir / f"{metric}_surface.flt"
        file_handler.save_raster(surface_raster(result.surface), path)
        dx, dy = result.offset
        click.echo(f"{metric}: argmax ({dx}, {dy}) confidence {result.confidence:.3f} -> {path}")


@main.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--cfog", "cfog_out", type=click.Path(path_type=Path),
              help="Build the CFOG volume of the raster and dump it here")
@click.option("--channels", type=click.IntRange(min=2), default=9, show_default=True)
@click.option("--sigma", type=click.FloatRange(min=0, min_open=True), default=0.8, show_default=True)
def inspect(path: Path, cfog_out: Optional[Path], channels: int, sigma: float) -> None:
    """Describe a raster, descriptor volume, control point table or camera file."""
    file_handler = FileHandler()
    extension = file_handler.get_file_extension(path)
    try:
        if extension == "vol":
            volume = file_handler.load_volume(path)
            click.echo(f"volume = {volume.width}x{volume.height}x{volume.m}")
            click.echo(f"min = {volume.values.min()!r}")
            click.echo(f"max = {volume.values.max()!r}")
        elif extension in ("flt", "hdr", "pgm"):
            raster = file_handler.load_raster(path)
            valid = raster.grid.valid_mask()
            click.echo(f"size = {raster.width}x{raster.height}")
            click.echo(f"transform = {raster.transform.as_tuple()}")
            click.echo(f"bounds = {raster.bounds()}")
            click.echo(f"nodata = {raster.nodata}")
            click.echo(f"crs_tag = {raster.crs_tag}")
            click.echo(f"valid = {int(valid.sum())}")
            if valid.any():
                click.echo(f"min = {raster.data[valid].min()!r}")
                click.echo(f"max = {raster.data[valid].max()!r}")
            if cfog_out is not None:
                volume = build_cfog(raster.grid, CfogParams(m=channels, sigma=sigma))
                file_handler.save_volume(volume, cfog_out)
                click.echo(f"cfog = {cfog_out}")
        elif extension == "csv":
            rows = file_handler.read_control_points(path)
            click.echo(f"control_points = {len(rows)}")
            if rows:
                confidence = [row["confidence"] for row in rows]
                click.echo(f"confidence = {min(confidence)!r} .. {max(confidence)!r}")
        else:
            pose, intr = file_handler.load_camera(path)
            for line in file_handler.format_camera(pose, intr):
                click.echo(line)
    except (OSError, RegistrationError) as e:
        _fail(str(e), EXIT_INPUT_ERROR)


@main.command()
@click.option("--template-size", type=click.IntRange(min=16), default=200, show_default=True)
@click.option("--search-radius", type=click.IntRange(min=0), default=50, show_default=True)
@click.option("--size", type=click.IntRange(min=64), default=512, show_default=True,
              help="Synthetic scene side in cells")
@click.option("--mi-bins", type=click.IntRange(min=2), default=32, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def benchmark(template_size: int, search_radius: int, size: int, mi_bins: int, seed: int) -> None:
    """Time one match per metric on a synthetic multimodal scene."""
    try:
        scene = make_scene(size=size, seed=seed, bias=(0.0,) * 6)
        center = InterestPoint((size - 1) // 2, (size - 1) // 2, 0.0)
        timings = {}
        for metric in METRICS:
            params = MatchParams(template_size=template_size, search_radius=search_radius,
                                 min_confidence=0.0, metric=metric, mi_bins=mi_bins)
            start = time.perf_counter()
            candidate = match_point(scene.aerial, scene.initial_pose, scene.intrinsics,
                                    scene.lidar_intensity, scene.dsm, center, params)
            timings[metric] = time.perf_counter() - start
            status = "accepted" if candidate.accepted else f"rejected ({candidate.reason})"
            click.echo(f"{metric}: {timings[metric]:.3f} s, offset "
                       f"({candidate.offset_dx:.2f}, {candidate.offset_dy:.2f}), {status}")
    except RegistrationError as e:
        _fail(str(e), EXIT_INPUT_ERROR)

    base = max(timings["cfog-pc"], 1e-9)
    click.echo(f"ncc / cfog-pc = {timings['ncc'] / base:.1f}")
    click.echo(f"mi / cfog-pc = {timings['mi'] / base:.1f}")


if __name__ == "__main__":
    main()
