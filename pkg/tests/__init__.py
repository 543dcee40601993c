"""
Test suite for cantor-index.
"""
