"""Square complex orthogonal designs with reduced zero entries."""

__version__ = "0.1.0"
