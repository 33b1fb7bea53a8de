"""Exact invariants and nonorientable 4-ball genus bounds for torus knots."""

from gamma4.errors import Gamma4Error
from gamma4.torusknot import TorusKnot, new_torus_knot

__version__ = "0.1.0"

__all__ = ["Gamma4Error", "TorusKnot", "new_torus_knot", "__version__"]
