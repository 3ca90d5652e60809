"""Bad science matrices: exact and floating evaluation, constructions and search."""

__version__ = "0.1.0"
