"""
Core library: parameter models, physics services, numerics, errors and logging.
"""
