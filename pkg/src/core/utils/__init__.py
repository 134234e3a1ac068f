"""
Utility modules for the core package.
"""
