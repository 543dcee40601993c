"""
cantor-index - index pairings for C*-algebras of Cantor minimal systems.
"""
__version__ = "0.1.0"
