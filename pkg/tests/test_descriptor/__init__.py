"""
Descriptor tests package.
"""
