"""Monodromy of rational maps and constant-pullback (CTP) decisions."""

__version__ = "0.1.0"
