"""Rational polyhedral cone complexes, their subdivisions and contact orders."""

from .complex import ComplexPoint, ConeComplex, FaceMap, from_fan, point
from .cone import Cone, Face, cone_intersection
from .contact import (
    ContactComponent,
    DiscreteData,
    band,
    contact_components,
    contact_order_against_ray,
    degree_L,
    degree_total,
    lift_contact,
    lift_discrete_data,
    vanishing_locus,
)
from .errors import *  # noqa: F401,F403
from .lattice import IntegerMatrix, LatticeVector, hermite_normal_form, primitive
from .subdivision import (
    PLDivisor,
    SubdivisionMap,
    ample_coefficients,
    barycentric,
    compose,
    identity_subdivision,
    is_relatively_ample,
    is_subdivision,
    pullback,
    resolve,
    star_subdivide,
    support_value,
)

__version__ = "0.1.0"
