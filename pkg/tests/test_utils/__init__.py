"""
Utility tests package.
"""
