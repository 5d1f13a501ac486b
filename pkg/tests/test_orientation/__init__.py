"""
Orientation tests package.
"""
