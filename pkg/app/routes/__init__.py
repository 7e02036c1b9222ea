"""
Route handlers for the RingSplit service.
"""
