"""Group-level analysis of confidence-based selective classification."""

__version__ = "0.1.0"
