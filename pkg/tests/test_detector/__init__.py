"""
Detector tests package.
"""
