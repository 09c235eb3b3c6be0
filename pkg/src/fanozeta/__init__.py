"""Zeta functions of smooth cubic threefolds and their Fano surfaces.

Pipeline: find a rational line on the cubic, normalize coordinates,
extract the conic-bundle discriminant quintic and its minors, count
points over extension fields, reconstruct the Weil polynomials, and
derive Picard numbers and the Artin-Tate limit exactly.
"""

from .errors import (
    FanozetaError,
    InputError,
    InvariantError,
    NoRationalLineError,
    PartialDataError,
    ResourceError,
)
from .field import Field, SquareClass, make_embedding, make_field

__all__ = [
    "Field",
    "SquareClass",
    "make_field",
    "make_embedding",
    "FanozetaError",
    "InputError",
    "InvariantError",
    "NoRationalLineError",
    "PartialDataError",
    "ResourceError",
]

__version__ = "0.1.0"
