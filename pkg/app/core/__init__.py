"""
Core numerics for RingSplit: operators, splitting, ring simulation and problems.
"""
