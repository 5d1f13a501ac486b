"""
Matcher tests package.
"""
