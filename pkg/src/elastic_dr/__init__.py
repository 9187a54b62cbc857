"""Price-elastic demand response simulation."""

__version__ = "0.1.0"
