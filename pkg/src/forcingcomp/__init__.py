"""Forcing as an oracle-relative computation, tested over the hereditarily finite sets."""

from . import catalog  # noqa: F401  (registers the basic Lévy atoms)

__version__ = "0.1.0"
