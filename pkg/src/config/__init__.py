"""
Configuration loading for the application: paths, environment knobs and numeric constants.
"""
