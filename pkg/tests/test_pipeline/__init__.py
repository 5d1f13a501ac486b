"""
Pipeline and CLI tests package.
"""
