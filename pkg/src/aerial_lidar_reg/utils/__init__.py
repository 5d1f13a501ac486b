"""
Utility modules for aerial-lidar-reg.
"""

from .file_handler import FileHandler
from .validators import InputValidator

__all__ = ["FileHandler", "InputValidator"]
