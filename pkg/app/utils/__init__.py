"""
Utility modules for RingSplit.
"""
