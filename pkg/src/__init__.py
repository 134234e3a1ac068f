"""
molopt: linearized model of a molecular optomechanical up-conversion amplifier.
"""
