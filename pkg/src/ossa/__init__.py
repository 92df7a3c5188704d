"""Object state-sensitive tabletop planning bench."""

__version__ = "0.1.0"
