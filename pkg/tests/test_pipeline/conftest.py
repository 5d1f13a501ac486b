"""
Shared fixtures for pipeline tests.
"""

import math

import pytest
from src.aerial_lidar_reg.raster.grid import GeoRaster
from src.aerial_lidar_reg.synthetic import make_scene
from src.aerial_lidar_reg.utils.file_handler import FileHandler

SCENE_BIAS = (6.0, -4.0, 3.0, 0.0, 0.0, math.radians(0.2))

CONFIG_TEMPLATE = """\
[inputs]
aerial = {scene}/aerial.flt
camera = {scene}/camera.txt
lidar_intensity = {scene}/lidar_intensity.flt
dsm = {scene}/dsm.flt

[detector]
grid_n = 6

[matcher]
template_size = 64
search_radius = 24

[output]
directory = {output}
checkerboard_tile = 32
"""


@pytest.fixture(scope="session")
def scene_dir(tmp_path_factory):
    """A synthetic scene written as it would arrive from disk."""
    directory = tmp_path_factory.mktemp("scene")
    scene = make_scene(size=256, relief=10.0, bias=SCENE_BIAS, seed=3)
    _write_scene(directory, scene)
    return directory, scene


@pytest.fixture
def run_config(scene_dir, tmp_path):
    """A run configuration with its output directory under tmp_path."""
    directory, _ = scene_dir
    path = tmp_path / "run.ini"
    path.write_text(CONFIG_TEMPLATE.format(scene=directory, output=tmp_path / "out"))
    return path


def _write_scene(directory, scene):
    file_handler = FileHandler()
    aerial = GeoRaster(scene.aerial, scene.lidar_intensity.transform)
    file_handler.save_raster(aerial, directory / "aerial.flt")
    file_handler.save_raster(scene.lidar_intensity, directory / "lidar_intensity.flt")
    file_handler.save_raster(scene.dsm, directory / "dsm.flt")
    file_handler.write_pose(directory / "camera.txt", scene.initial_pose, scene.intrinsics)


@pytest.fixture(scope="session")
def full_scene_dir(tmp_path_factory):
    """A 1024 x 1024 scene with the default pose bias and radiometric remap."""
    directory = tmp_path_factory.mktemp("full_scene")
    scene = make_scene(size=1024)
    _write_scene(directory, scene)
    return directory, scene
