"""Step digraphons: structure, spectra, cut metrics and regularity."""

from .core import (
    Digraph,
    Kernel,
    StepDigraphon,
    from_digraph,
    new_kernel,
    new_step_digraphon,
    parse,
    parse_edges,
    serialize,
    serialize_edges,
)
from .errors import DigraphonError, ValidationError

__all__ = [
    "Digraph",
    "Kernel",
    "StepDigraphon",
    "from_digraph",
    "new_kernel",
    "new_step_digraphon",
    "parse",
    "parse_edges",
    "serialize",
    "serialize_edges",
    "DigraphonError",
    "ValidationError",
]

__version__ = "0.1.0"
