"""Version information for :mod:`lumenplan`."""

__all__ = [
    "VERSION",
]

VERSION = "0.1.0-dev"
