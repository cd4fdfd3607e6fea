"""Contact orders, their bands, and the degree bookkeeping built on them.

A contact order is a point of a cone complex, taken up to the complex's
automorphisms.  Its band is the lattice content of the point, measured
against the dual Hilbert basis of the cone it lies in.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .complex import ComplexPoint, ConeComplex
from .cone import Cone, Face
from .errors import NotSmooth, UnsupportedCoefficient
from .lattice import LatticeVector
from .subdivision import PLDivisor, SubdivisionMap, ample_coefficients


@dataclass(frozen=True, order=True)
class ContactComponent:
    representative: ComplexPoint
    band: int

    def to_json(self) -> dict:
        return {"representative": self.representative.to_json(), "band": self.band}


@dataclass(frozen=True)
class DiscreteData:
    genus: int
    markings: tuple[ContactComponent, ...] = ()
    base_degree: int = 0


@dataclass(frozen=True)
class LiftedDiscreteData:
    genus: int
    markings: tuple[ContactComponent, ...]
    base_degree: int
    degree_L: int
    degree_total: int

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "markings": [m.to_json() for m in self.markings],
            "base_degree": self.base_degree,
            "degree_L": self.degree_L,
            "degree_total": self.degree_total,
        }


def band(X: ConeComplex, x: ComplexPoint | tuple) -> int:
    """gcd of the pairings of ``x`` with the dual Hilbert basis of its minimal chart.

    Zero for the origin.
    """
    m, q = X.minimal_chart(x)
    if q.is_zero():
        return 0
    d = 0
    for xi in X.cones[m].dual_hilbert_basis():
        d = gcd(d, xi.dot(q))
    return d


def component(X: ConeComplex, x: ComplexPoint | tuple) -> ContactComponent:
    rep = X.canonical(x)
    return ContactComponent(rep, band(X, rep))


def contact_components(X: ConeComplex, bound: int) -> list[ContactComponent]:
    """One component per orbit of points with max-norm at most ``bound``."""
    return [ContactComponent(rep, band(X, rep)) for rep in X.points_up_to(bound)]


def vanishing_locus(sigma: Cone, phi) -> Face:
    # the stratum cut out by phi depends only on the face carrying it
    return sigma.minimal_face(LatticeVector(phi))


def lift_contact(f: SubdivisionMap, c: ContactComponent) -> ContactComponent:
    return component(f.source, f.lift(c.representative))


def contact_order_against_ray(Y: ConeComplex, phi: ComplexPoint | tuple, rho: ComplexPoint) -> int:
    """Coefficient of the ray orbit ``rho`` in the ray expansion of ``phi``.

    Only the minimal chart of ``phi`` has to be smooth.
    """
    m, q = Y.minimal_chart(phi)
    c = Y.cones[m]
    if not c.is_smooth():
        raise NotSmooth(f"minimal chart {m} of {phi} is not smooth")
    coeffs = c.ray_coefficients(q)
    total = sum(a for a, r in zip(coeffs, c.rays) if Y.ray_label(m, r) == rho)
    return int(total)


def _check_support(f: SubdivisionMap, m: PLDivisor) -> None:
    exceptional = set(f.exceptional_rays)
    off = [r for r in m.support if r not in exceptional]
    if off:
        raise UnsupportedCoefficient(f"coefficient on non-exceptional ray {off[0]}")


def degree_L(f: SubdivisionMap, m: PLDivisor, contacts) -> int:
    """``sum_i m_i sum_j c_j(E_i)`` for contact points on the source of ``f``."""
    _check_support(f, m)
    Y = f.source
    total = 0
    for phi in contacts:
        for rho in m.support:
            total += m[rho] * contact_order_against_ray(Y, phi, rho)
    return total


def degree_total(base_degree: int, f: SubdivisionMap, m: PLDivisor, contacts) -> int:
    return base_degree + degree_L(f, m, contacts)


def lift_discrete_data(
    f: SubdivisionMap, gamma: DiscreteData, m: PLDivisor | None = None
) -> LiftedDiscreteData:
    if m is None:
        m = ample_coefficients(f)
    lifted = tuple(lift_contact(f, c) for c in gamma.markings)
    points = [c.representative for c in lifted]
    dl = degree_L(f, m, points)
    return LiftedDiscreteData(gamma.genus, lifted, gamma.base_degree, dl, gamma.base_degree + dl)
