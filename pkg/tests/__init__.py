"""
Test package for aerial-lidar-reg.
"""
