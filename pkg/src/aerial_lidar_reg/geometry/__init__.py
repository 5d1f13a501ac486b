"""
Camera model, collinearity projection and local geometric correction.
"""

from .camera import (
    CameraIntrinsics,
    CameraPose,
    ImageProjection,
    RotationMatrix,
    angles_from_rotation,
    image_to_ground,
    image_to_ground_at_height,
    intersect_dsm_many,
    project_ground_to_image,
    project_points,
    ray_direction,
    rotation_from_angles,
)
from .rectify import rectify_patch, rectify_to_grid

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "ImageProjection",
    "RotationMatrix",
    "angles_from_rotation",
    "image_to_ground",
    "image_to_ground_at_height",
    "intersect_dsm_many",
    "project_ground_to_image",
    "project_points",
    "ray_direction",
    "rectify_patch",
    "rectify_to_grid",
]
