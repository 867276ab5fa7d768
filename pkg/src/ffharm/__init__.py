"""Finite-field harmonic analysis: fields, varieties, Fourier transforms, incidences,
additive energy, extension ratios and distance-set statistics over F_q^d."""

from .errors import *  # noqa: F401,F403
from .ffcore import Field, char_eval, field_of_order, gauss_sum, kloosterman_sum, make_field, radius_class
from .fourier import FunctionTable, extension_inverse, forward, inverse, lp_norm
from .lattice import (
    Cone, Hyperplane, ParaboloidTranslate, PointSet, Space, Sphere, enumerate_variety, space, variety_mask,
)

__version__ = "0.1.0"

__all__ = [
    "Field", "make_field", "field_of_order", "char_eval", "gauss_sum", "kloosterman_sum", "radius_class",
    "Space", "space", "PointSet", "Sphere", "ParaboloidTranslate", "Cone", "Hyperplane",
    "variety_mask", "enumerate_variety", "FunctionTable", "forward", "inverse", "extension_inverse", "lp_norm",
]
