"""
Steady state, sideband response, stability and sweep services.
"""
