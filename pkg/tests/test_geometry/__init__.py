"""
Geometry tests package.
"""
