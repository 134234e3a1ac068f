"""
Parameter model and result value types.
"""
