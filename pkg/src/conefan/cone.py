"""Strongly convex rational polyhedral cones.

A :class:`Cone` is the lattice-point monoid ``σ ∩ Z^n`` of a pointed
rational cone.  The cone need not be full dimensional; every duality or
Hilbert-basis computation happens in the saturated lattice of its span,
reached through a unimodular change of basis computed once at
construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from .errors import DualRankCap, NotContained, NotSimplicial, NotStronglyConvex, RankMismatch
from .lattice import (
    IntegerMatrix,
    LatticeVector,
    abs_determinant,
    express,
    hermite_normal_form,
    integer_kernel,
    primitive,
    rank,
    span_frame,
)

MAX_DUAL_RANK = 6


def _facets_local(gens: list[LatticeVector], k: int) -> list[LatticeVector]:
    """Inward facet normals of a full-dimensional cone in Z^k (brute force)."""
    if k == 0:
        return []
    if k > MAX_DUAL_RANK:
        raise DualRankCap(f"cone of dimension {k} exceeds the rank cap {MAX_DUAL_RANK}")
    if k == 1:
        signs = {1 if g[0] > 0 else -1 for g in gens}
        if len(signs) != 1:
            raise NotStronglyConvex("generators contain a line")
        return [LatticeVector((signs.pop(),))]
    normals = set()
    for subset in itertools.combinations(gens, k - 1):
        ker = integer_kernel(IntegerMatrix(subset))
        if len(ker) != 1:
            continue
        n = primitive(ker[0])
        vals = [n.dot(g) for g in gens]
        if all(v >= 0 for v in vals):
            normals.add(n)
        elif all(v <= 0 for v in vals):
            normals.add(-n)
    normals = sorted(normals)
    if rank(normals) < k:
        raise NotStronglyConvex("generators do not span a pointed cone")
    return normals


class Cone:
    """Pointed rational cone generated by integer vectors.

    Generators may be redundant or non-primitive; ``rays`` holds the
    primitive extreme ray generators in lexicographic order.
    """

    def __init__(self, generators: Iterable[Sequence[int]], ambient_rank: int | None = None):
        gens = [LatticeVector(g) for g in generators]
        if ambient_rank is None:
            if not gens:
                raise ValueError("ambient_rank is required for the zero cone")
            ambient_rank = len(gens[0])
        if ambient_rank < 1:
            raise ValueError("ambient_rank must be positive")
        for g in gens:
            if len(g) != ambient_rank:
                raise RankMismatch(f"generator {tuple(g)} is not in Z^{ambient_rank}")
        gens = sorted({primitive(g) for g in gens if not g.is_zero()})
        self.ambient_rank = ambient_rank
        k, V, W = span_frame(gens, ambient_rank)
        self.dim = k
        self._V = V
        self._W = W
        local = [self._local(g) for g in gens]
        normals = _facets_local(local, k)
        if k == 1:
            rays = [g for g, c in zip(gens, local) if abs(c[0]) == min(abs(x[0]) for x in local)]
        else:
            rays = [
                g
                for g, c in zip(gens, local)
                if rank([n for n in normals if n.dot(c) == 0]) == k - 1
            ]
        self.rays: tuple[LatticeVector, ...] = tuple(sorted(rays))
        self._local_normals = normals
        self.facet_normals: tuple[LatticeVector, ...] = tuple(
            sorted(self._lift_dual(n) for n in normals)
        )
        # v lies in the span iff it pairs to zero with every equation
        self.equations: tuple[LatticeVector, ...] = tuple(
            V.column(j) for j in range(k, ambient_rank)
        )

    # -- coordinates -----------------------------------------------------

    def _local(self, v: Sequence[int]) -> LatticeVector:
        V = self._V
        return LatticeVector(
            sum(v[i] * V[i][j] for i in range(self.ambient_rank)) for j in range(self.dim)
        )

    def local_coords(self, v: Sequence[int]) -> LatticeVector:
        """Coordinates of ``v`` in the span-lattice basis (v must be in the span)."""
        if not self.in_span(v):
            raise NotContained(f"{tuple(v)} is not in the span of the cone")
        return self._local(v)

    def from_local(self, c: Sequence[int]) -> LatticeVector:
        W = self._W
        return LatticeVector(
            sum(c[i] * W[i][j] for i in range(self.dim)) for j in range(self.ambient_rank)
        )

    def span_basis(self) -> list[LatticeVector]:
        return [LatticeVector(self._W[i]) for i in range(self.dim)]

    def _lift_dual(self, xi: Sequence[int]) -> LatticeVector:
        V = self._V
        return LatticeVector(
            sum(V[i][j] * xi[j] for j in range(self.dim)) for i in range(self.ambient_rank)
        )

    # -- membership ------------------------------------------------------

    def _check_rank(self, v):
        if len(v) != self.ambient_rank:
            raise RankMismatch(f"vector of rank {len(v)} against a cone in Z^{self.ambient_rank}")

    def in_span(self, v: Sequence[int]) -> bool:
        self._check_rank(v)
        return all(e.dot(v) == 0 for e in self.equations)

    def contains(self, v: Sequence[int]) -> bool:
        self._check_rank(v)
        return self.in_span(v) and all(n.dot(v) >= 0 for n in self.facet_normals)

    def relint_contains(self, v: Sequence[int]) -> bool:
        self._check_rank(v)
        if self.dim == 0:
            return not any(v)
        return self.in_span(v) and all(n.dot(v) > 0 for n in self.facet_normals)

    # -- faces -----------------------------------------------------------

    def face_by_rays(self, rays: Iterable[Sequence[int]]) -> "Cone":
        return Cone(list(rays), self.ambient_rank)

    def minimal_face(self, v: Sequence[int]) -> "Face":
        """The face containing ``v`` in its relative interior."""
        if not self.contains(v):
            raise NotContained(f"{tuple(v)} is not in the cone")
        sel = tuple(n for n in self.facet_normals if n.dot(v) == 0)
        return self._face(sel)

    def _face(self, selector: tuple[LatticeVector, ...]) -> "Face":
        rays = [r for r in self.rays if all(n.dot(r) == 0 for n in selector)]
        return Face(self, selector, self._face_cones.get(tuple(rays)) or Cone(rays, self.ambient_rank))

    @cached_property
    def _face_cones(self) -> dict[tuple, "Cone"]:
        # every face is cut out by facet normals; close the ray sets under them
        seen = {self.rays: self}
        todo = [self.rays]
        while todo:
            rays = todo.pop()
            for n in self.facet_normals:
                sub = tuple(r for r in rays if n.dot(r) == 0)
                if sub != rays and sub not in seen:
                    seen[sub] = Cone(sub, self.ambient_rank)
                    todo.append(sub)
        return seen

    def faces(self) -> list["Face"]:
        out = []
        for rays, c in self._face_cones.items():
            sel = tuple(n for n in self.facet_normals if all(n.dot(r) == 0 for r in rays))
            out.append(Face(self, sel, c))
        out.sort(key=lambda f: (f.cone.dim, f.cone.rays))
        return out

    def face_ray_sets(self) -> list[tuple[LatticeVector, ...]]:
        return sorted(self._face_cones, key=lambda r: (self._face_cones[r].dim, r))

    def is_face(self, rays: Iterable[Sequence[int]]) -> bool:
        return tuple(sorted(LatticeVector(r) for r in rays)) in self._face_cones

    # -- invariants ------------------------------------------------------

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def multiplicity(self) -> int:
        if not self.is_simplicial():
            raise NotSimplicial(f"cone with {len(self.rays)} rays in dimension {self.dim}")
        if self.dim == 0:
            return 1
        return abs_determinant(IntegerMatrix([self._local(r) for r in self.rays]))

    def is_smooth(self) -> bool:
        return self.is_simplicial() and self.multiplicity() == 1

    def ray_coefficients(self, v: Sequence[int]) -> list[Fraction]:
        """Coefficients of ``v`` in the ray generators of a simplicial cone."""
        if not self.is_simplicial():
            raise NotSimplicial("ray expansion needs a simplicial cone")
        c = express(v, self.rays)
        if c is None:
            raise NotContained(f"{tuple(v)} is not in the span of the cone")
        return c

    # -- Hilbert bases ---------------------------------------------------

    def triangulation(self) -> list[tuple[LatticeVector, ...]]:
        """Pulling triangulation using the lexicographic ray order."""
        if self.is_simplicial():
            return [self.rays]
        r0 = self.rays[0]
        out = []
        for f in self.faces():
            if f.cone.dim == self.dim - 1 and r0 not in f.cone.rays:
                for simplex in f.cone.triangulation():
                    out.append(tuple(sorted(simplex + (r0,))))
        return sorted(out)

    def hilbert_basis(self) -> list[LatticeVector]:
        """Minimal generating set of the monoid ``σ ∩ Z^n``."""
        if self.dim == 0:
            return []
        local_cone = Cone([self._local(r) for r in self.rays], self.dim)
        return sorted(self.from_local(v) for v in local_cone._hilbert_basis_full())

    def _hilbert_basis_full(self) -> list[LatticeVector]:
        cands = set(self.rays)
        for simplex in self.triangulation():
            cands.update(_parallelepiped_points(simplex))
        cands = sorted(cands)
        basis = []
        for v in cands:
            if not any(w != v and self.contains(v - w) for w in cands):
                basis.append(v)
        return basis

    def dual_hilbert_basis(self) -> list[LatticeVector]:
        """Hilbert basis of the dual cone, taken in the dual of the span lattice.

        Elements are returned as ambient covectors that pair correctly with
        every vector in the span of the cone.
        """
        if self.dim == 0:
            return []
        dual = Cone(self._local_normals, self.dim)
        return sorted(self._lift_dual(xi) for xi in dual._hilbert_basis_full())

    def barycenter(self) -> LatticeVector:
        total = LatticeVector((0,) * self.ambient_rank)
        for r in self.rays:
            total = total + r
        return total

    # -- dunder ----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Cone)
            and self.ambient_rank == other.ambient_rank
            and self.rays == other.rays
        )

    def __hash__(self):
        return hash((self.ambient_rank, self.rays))

    def __repr__(self):
        return f"Cone({[tuple(r) for r in self.rays]}, ambient_rank={self.ambient_rank})"


@dataclass(frozen=True)
class Face:
    parent: Cone
    selector: tuple[LatticeVector, ...]
    cone: Cone

    @property
    def rays(self) -> tuple[LatticeVector, ...]:
        return self.cone.rays

    @property
    def dim(self) -> int:
        return self.cone.dim


def _parallelepiped_points(simplex: Sequence[LatticeVector]) -> list[LatticeVector]:
    """Nonzero lattice points of the half-open parallelepiped of a full-dim simplex."""
    k = len(simplex)
    H, _ = hermite_normal_form(IntegerMatrix(simplex))
    diag = [H[i][i] for i in range(k)]
    out = []
    for a in itertools.product(*(range(d) for d in diag)):
        if not any(a):
            continue
        lam = express(a, simplex)
        frac = [x - (x.numerator // x.denominator) for x in lam]
        v = [sum(frac[i] * simplex[i][j] for i in range(k)) for j in range(k)]
        out.append(LatticeVector(v))
    return out


def cone_intersection(a: Cone, b: Cone) -> Cone:
    """The cone ``a ∩ b`` (both in the same ambient lattice), by brute force."""
    if a.ambient_rank != b.ambient_rank:
        raise RankMismatch("cones live in different lattices")
    n = a.ambient_rank
    rows = list(a.facet_normals) + list(b.facet_normals)
    for e in a.equations + b.equations:
        rows += [e, -e]
    rows = sorted(set(rows))
    rays = set()
    for subset in itertools.combinations(rows, n - 1):
        ker = integer_kernel(IntegerMatrix(subset, cols=n))
        if len(ker) != 1:
            continue
        d = primitive(ker[0])
        for s in (d, -d):
            if all(r.dot(s) >= 0 for r in rows):
                rays.add(s)
    return Cone(sorted(rays), n)


def gcd_pairings(v: Sequence[int], covectors: Iterable[Sequence[int]]) -> int:
    g = 0
    for xi in covectors:
        g = gcd(g, abs(LatticeVector(xi).dot(v)))
    return g
