"""
Raster tests package.
"""
