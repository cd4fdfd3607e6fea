"""Generalized cone complexes.

A :class:`ConeComplex` is a diagram of cones and face maps.  Embedded fans
are the common case (every face map is an inclusion in one lattice), but
a diagram may glue a cone to itself, which is how monodromy shows up.

All point-level questions (orbits, stability, contact components) are
answered through the :class:`Groupoid`, the closure of the face maps
under composition and under factorization ``g2^-1 ∘ g`` whenever the
image of ``g`` sits inside the image of ``g2``.
"""

from __future__ import annotations

import itertools
import os
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .cone import Cone, cone_intersection
from .errors import (
    GroupoidBlowup,
    InvalidComplex,
    NotAFan,
    NotContained,
    NotSmooth,
    UnknownCone,
    UnstableRay,
    ZeroVector,
)
from .lattice import IntegerMatrix, LatticeVector, abs_determinant, express, rank

DEFAULT_MORPHISM_CAP = 10**6
CAP_ENV = "CONEFAN_MORPHISM_CAP"


def morphism_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    return int(raw) if raw else DEFAULT_MORPHISM_CAP


class ComplexPoint(NamedTuple):
    """A lattice point ``point`` of the cone ``cone`` of a complex."""

    cone: str
    point: LatticeVector

    def __str__(self):
        return ",".join(str(c) for c in self.point) + "@" + self.cone

    def to_json(self) -> dict:
        return {"cone": self.cone, "point": list(self.point)}

    @classmethod
    def from_json(cls, data: Mapping) -> "ComplexPoint":
        return cls(str(data["cone"]), LatticeVector(data["point"]))


def point(cone: str, coords: Sequence[int]) -> ComplexPoint:
    return ComplexPoint(cone, LatticeVector(coords))


@dataclass(frozen=True)
class FaceMap:
    source: str
    target: str
    map: IntegerMatrix


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str = ""

    def __str__(self):
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}{loc}: {self.message}"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def __bool__(self):
        return self.ok


def matrix_from_basis_images(src: Cone, images: Sequence[Sequence[int]], target_rank: int) -> IntegerMatrix:
    """The map sending ``src.span_basis()[i]`` to ``images[i]``, zero off the span."""
    V = src._V
    k = src.dim
    return IntegerMatrix(
        [
            [sum(images[i][r] * V[col][i] for i in range(k)) for col in range(src.ambient_rank)]
            for r in range(target_rank)
        ],
        cols=src.ambient_rank,
    )


class Morphism:
    """A face map of the closure, identified by where it sends the source rays."""

    __slots__ = ("source", "target", "matrix", "images", "image", "key", "_src")

    def __init__(self, source: str, target: str, matrix: IntegerMatrix, src_cone: Cone):
        self.source = source
        self.target = target
        self.matrix = matrix
        self._src = src_cone
        self.images = tuple(matrix.apply(r) for r in src_cone.rays)
        self.image = tuple(sorted(self.images))
        self.key = (source, target, self.images)

    def apply(self, v: Sequence[int]) -> LatticeVector:
        return self.matrix.apply(v)

    def preimage(self, v: Sequence[int]) -> LatticeVector | None:
        basis = self._src.span_basis()
        c = express(v, [self.matrix.apply(b) for b in basis])
        if c is None or any(x.denominator != 1 for x in c):
            return None
        out = [0] * self._src.ambient_rank
        for ci, b in zip(c, basis):
            for j in range(len(out)):
                out[j] += int(ci) * b[j]
        return LatticeVector(out)

    def is_identity(self) -> bool:
        return self.source == self.target and self.images == self._src.rays

    def __repr__(self):
        return f"Morphism({self.source}->{self.target}, {[tuple(v) for v in self.images]})"


class Groupoid:
    """Closure of a diagram's face maps, with orbit computations on top."""

    def __init__(self, cones: Mapping[str, Cone], generators: Iterable[Morphism], cap: int):
        self.cones = cones
        self.morphisms: dict[tuple, Morphism] = {}
        into: dict[str, list[Morphism]] = defaultdict(list)
        out: dict[str, list[Morphism]] = defaultdict(list)
        queue: deque[Morphism] = deque()

        def add(m: Morphism):
            if m.key in self.morphisms:
                return
            if len(self.morphisms) >= cap:
                raise GroupoidBlowup(f"groupoid closure exceeded {cap} morphisms")
            self.morphisms[m.key] = m
            into[m.target].append(m)
            out[m.source].append(m)
            queue.append(m)

        for g in generators:
            add(g)
        while queue:
            g = queue.popleft()
            for h in list(out[g.target]):
                add(self._compose(h, g))
            for k in list(into[g.source]):
                add(self._compose(g, k))
            gimg = set(g.image)
            for g2 in list(into[g.target]):
                g2img = set(g2.image)
                if gimg <= g2img:
                    add(self._factor(g2, g))
                if g2img <= gimg:
                    add(self._factor(g, g2))

        order = lambda m: (m.source, m.target, m.images)
        self.out = {c: sorted(out[c], key=order) for c in cones}
        self.into = {c: sorted(into[c], key=order) for c in cones}
        self.onto: dict[tuple, list[Morphism]] = defaultdict(list)
        for m in sorted(self.morphisms.values(), key=order):
            self.onto[(m.target, m.image)].append(m)
        self._canon: dict[tuple, ComplexPoint] = {}

    def _compose(self, h: Morphism, g: Morphism) -> Morphism:
        return Morphism(g.source, h.target, h.matrix @ g.matrix, self.cones[g.source])

    def _factor(self, g2: Morphism, g: Morphism) -> Morphism:
        """``g2^-1 ∘ g`` for ``g: a -> c`` with image inside that of ``g2: b -> c``."""
        src = self.cones[g.source]
        imgs = [g2.preimage(g.apply(b)) for b in src.span_basis()]
        M = matrix_from_basis_images(src, imgs, self.cones[g2.source].ambient_rank)
        return Morphism(g.source, g2.source, M, src)

    # -- hom sets --------------------------------------------------------

    def hom(self, a: str, b: str) -> list[Morphism]:
        return [m for m in self.out[a] if m.target == b]

    def auts(self, c: str) -> list[Morphism]:
        return self.hom(c, c)

    # -- orbits ----------------------------------------------------------

    def _forms_onto(self, t: str, image: tuple, v: LatticeVector):
        for g in self.onto[(t, image)]:
            q = g.preimage(v)
            if q is not None:
                yield (g.source, q)

    def relint_forms(self, c: str, p: Sequence[int]) -> set[tuple[str, LatticeVector]]:
        """All (cone, point) pairs presenting ``p`` in the relative interior of a cone."""
        p = LatticeVector(p)
        face = self.cones[c].minimal_face(p).rays
        return set(self._forms_onto(c, face, p))

    def orbit(self, c: str, p: Sequence[int]) -> set[ComplexPoint]:
        forms = self.relint_forms(c, p)
        todo = list(forms)
        while todo:
            m, q = todo.pop()
            for h in self.out[m]:
                for f in self._forms_onto(h.target, h.image, h.apply(q)):
                    if f not in forms:
                        forms.add(f)
                        todo.append(f)
        return {ComplexPoint(h.target, h.apply(q)) for m, q in forms for h in self.out[m]}

    def canonical(self, c: str, p: Sequence[int]) -> ComplexPoint:
        p = LatticeVector(p)
        key = (c, p)
        hit = self._canon.get(key)
        if hit is None:
            members = self.orbit(c, p)
            hit = min(members)
            for mem in members:
                self._canon[tuple(mem)] = hit
        return hit

    def minimal_chart(self, c: str, p: Sequence[int]) -> tuple[str, LatticeVector]:
        """Least (cone, point) presenting ``p`` in a relative interior."""
        return min(self.relint_forms(c, p))


@lru_cache(maxsize=32)
def _box(n: int, bound: int) -> np.ndarray:
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    return np.array(list(itertools.product(axis, repeat=n)), dtype=np.int64).reshape(-1, n)


def box_points(cone: Cone, bound: int, relint: bool = False) -> list[LatticeVector]:
    """Lattice points of ``cone`` with max-norm at most ``bound``, sorted."""
    pts = _box(cone.ambient_rank, bound)
    mask = np.ones(len(pts), dtype=bool)
    if cone.equations:
        mask &= (pts @ np.array(cone.equations, dtype=np.int64).T == 0).all(axis=1)
    if cone.facet_normals:
        vals = pts @ np.array(cone.facet_normals, dtype=np.int64).T
        mask &= (vals > 0).all(axis=1) if relint else (vals >= 0).all(axis=1)
    elif relint:
        mask &= (pts == 0).all(axis=1)
    return [LatticeVector(int(x) for x in row) for row in pts[mask]]


class ConeComplex:
    """A diagram of cones glued along face maps.

    ``mode`` is ``"fan"`` when every cone lives in one lattice and every
    face map is an inclusion; such complexes are written back to disk as
    their list of maximal cones.
    """

    def __init__(
        self,
        cones: Mapping[str, Cone],
        face_maps: Iterable[FaceMap] = (),
        *,
        mode: str = "diagram",
        aliases: Mapping[str, str] | None = None,
        metadata: Mapping | None = None,
        cap: int | None = None,
    ):
        self.cones: dict[str, Cone] = dict(sorted(cones.items()))
        self.face_maps: tuple[FaceMap, ...] = tuple(face_maps)
        self.mode = mode
        self.aliases = dict(aliases or {})
        self.metadata = dict(metadata or {})
        self._cap = cap if cap is not None else morphism_cap()

    # -- identification --------------------------------------------------

    def resolve_id(self, name: str) -> str:
        if name in self.cones:
            return name
        if name in self.aliases:
            return self.aliases[name]
        raise UnknownCone(f"unknown cone id {name!r}")

    def cone(self, name: str) -> Cone:
        return self.cones[self.resolve_id(name)]

    def __repr__(self):
        return f"ConeComplex({len(self.cones)} cones, mode={self.mode!r})"

    # -- validation ------------------------------------------------------

    @cached_property
    def _map_diagnostics(self) -> list[Diagnostic]:
        diags = []
        for i, fm in enumerate(self.face_maps):
            where = f"face_map[{i}] {fm.source}->{fm.target}"
            if fm.source not in self.cones or fm.target not in self.cones:
                diags.append(Diagnostic("UnknownCone", "face map names a missing cone", where))
                continue
            s, t = self.cones[fm.source], self.cones[fm.target]
            M = fm.map
            if (M.rows, M.cols) != (t.ambient_rank, s.ambient_rank):
                diags.append(
                    Diagnostic(
                        "ShapeMismatch",
                        f"matrix is {M.rows}x{M.cols}, expected {t.ambient_rank}x{s.ambient_rank}",
                        where,
                    )
                )
                continue
            basis_imgs = [M.apply(b) for b in s.span_basis()]
            if rank(basis_imgs) != s.dim:
                diags.append(Diagnostic("NotInjective", "map is not injective on the source span", where))
                continue
            imgs = tuple(sorted(M.apply(r) for r in s.rays))
            if not t.is_face(imgs):
                diags.append(Diagnostic("ImageNotFace", f"image rays {[tuple(v) for v in imgs]} are not a face", where))
                continue
            face = t._face_cones[imgs]
            if s.dim and abs_determinant(IntegerMatrix([face.local_coords(v) for v in basis_imgs])) != 1:
                diags.append(Diagnostic("NotLatticeIso", "map is not a lattice isomorphism onto the face", where))
        return diags

    def validate(self) -> ValidationReport:
        """Check face maps and face-completeness; never raises on bad input."""
        report = ValidationReport(list(self._map_diagnostics))
        if not report.ok:
            return report
        g = self.groupoid
        for cid, c in self.cones.items():
            for rays in c.face_ray_sets():
                if not g.onto.get((cid, rays)):
                    report.diagnostics.append(
                        Diagnostic(
                            "FaceIncomplete",
                            f"face {[tuple(r) for r in rays]} is not the image of any face map",
                            cid,
                        )
                    )
        return report

    @cached_property
    def groupoid(self) -> Groupoid:
        if self._map_diagnostics:
            raise InvalidComplex("; ".join(str(d) for d in self._map_diagnostics))
        gens = [
            Morphism(cid, cid, IntegerMatrix.identity(c.ambient_rank), c)
            for cid, c in self.cones.items()
        ]
        gens += [
            Morphism(fm.source, fm.target, fm.map, self.cones[fm.source]) for fm in self.face_maps
        ]
        return Groupoid(self.cones, gens, self._cap)

    def is_faithful(self) -> bool:
        g = self.groupoid
        return all(m.is_identity() for c in self.cones for m in g.auts(c))

    def all_vectors_stable(self) -> bool:
        """True iff no two distinct face maps share source and target."""
        g = self.groupoid
        for c in self.cones:
            targets = [m.target for m in g.out[c]]
            if len(targets) != len(set(targets)):
                return False
        return True

    def is_simplicial(self) -> bool:
        return all(c.is_simplicial() for c in self.cones.values())

    def is_smooth(self) -> bool:
        return all(c.is_smooth() for c in self.cones.values())

    def maximal_cones(self) -> list[str]:
        g = self.groupoid
        return [
            cid
            for cid, c in self.cones.items()
            if all(self.cones[m.target].dim == c.dim for m in g.out[cid])
        ]

    # -- points ----------------------------------------------------------

    def _checked_point(self, x: ComplexPoint | tuple) -> ComplexPoint:
        cid = self.resolve_id(x[0])
        p = LatticeVector(x[1])
        if not self.cones[cid].contains(p):
            raise NotContained(f"{tuple(p)} is not in cone {cid}")
        return ComplexPoint(cid, p)

    def canonical(self, x: ComplexPoint | tuple) -> ComplexPoint:
        x = self._checked_point(x)
        return self.groupoid.canonical(x.cone, x.point)

    def orbit(self, x: ComplexPoint | tuple) -> set[ComplexPoint]:
        x = self._checked_point(x)
        return self.groupoid.orbit(x.cone, x.point)

    def minimal_chart(self, x: ComplexPoint | tuple) -> ComplexPoint:
        x = self._checked_point(x)
        return ComplexPoint(*self.groupoid.minimal_chart(x.cone, x.point))

    def points_up_to(self, bound: int) -> list[ComplexPoint]:
        """One canonical representative per orbit meeting the max-norm box."""
        if bound < 1:
            raise ValueError("bound must be at least 1")
        g = self.groupoid
        seen: set[tuple] = set()
        reps = set()
        for cid, c in self.cones.items():
            for p in box_points(c, bound):
                if (cid, p) in seen:
                    continue
                members = g.orbit(cid, p)
                seen.update(members)
                rep = min(members)
                for mem in members:
                    g._canon[tuple(mem)] = rep
                reps.add(rep)
        return sorted(reps)

    def is_stable_vector(self, x: ComplexPoint | tuple) -> bool:
        x = self._checked_point(x)
        if x.point.is_zero():
            raise ZeroVector("stability is only defined for nonzero vectors")
        per_cone: dict[str, int] = defaultdict(int)
        for mem in self.groupoid.orbit(x.cone, x.point):
            per_cone[mem.cone] += 1
            if per_cone[mem.cone] > 1:
                return False
        return True

    # -- rays and the boundary labeling ----------------------------------

    def ray_label(self, cid: str, ray: Sequence[int]) -> ComplexPoint:
        return self.groupoid.canonical(cid, LatticeVector(ray))

    def rays(self) -> list[ComplexPoint]:
        """Orbits of one-dimensional cones, each named by its canonical generator."""
        out = set()
        for cid, c in self.cones.items():
            if c.dim == 1:
                out.add(self.ray_label(cid, c.rays[0]))
        return sorted(out)

    def boundary_map(self) -> "BoundaryLabeling":
        for cid, c in self.cones.items():
            if not c.is_smooth():
                raise NotSmooth(f"cone {cid} is not smooth")
        for cid, c in self.cones.items():
            if c.dim == 1 and not self.is_stable_vector((cid, c.rays[0])):
                raise UnstableRay(
                    f"ray generator {tuple(c.rays[0])} of {cid} is not stable",
                    witness=ComplexPoint(cid, c.rays[0]),
                )
        labels = {}
        for cid, c in self.cones.items():
            lab = [self.ray_label(cid, r) for r in c.rays]
            if len(set(lab)) != len(lab):
                dup = next(l for l in lab if lab.count(l) > 1)
                raise UnstableRay(
                    f"two rays of {cid} carry the same label {dup}", witness=ComplexPoint(cid, dup.point)
                )
            labels[cid] = tuple(sorted(lab))
        return BoundaryLabeling(tuple(self.rays()), labels)

    # -- canonical form --------------------------------------------------

    def canonical_form(self) -> tuple:
        if self.mode == "fan":
            return ("fan", tuple(sorted((c.ambient_rank, c.rays) for c in self.cones.values())))
        maps = sorted(
            (m.source, m.target, m.images)
            for m in self.groupoid.morphisms.values()
            if not m.is_identity()
        )
        return (
            "diagram",
            tuple((cid, c.ambient_rank, c.rays) for cid, c in self.cones.items()),
            tuple(maps),
        )


@dataclass(frozen=True)
class BoundaryLabeling:
    """The strict map to ``A^S``: each cone's set of ray labels in ``S``."""

    S: tuple[ComplexPoint, ...]
    labels: dict[str, tuple[ComplexPoint, ...]]

    def to_json(self) -> dict:
        index = {s: i for i, s in enumerate(self.S)}
        return {
            "S": [s.to_json() for s in self.S],
            "cones": {cid: [index[l] for l in lab] for cid, lab in self.labels.items()},
        }


def fan_ids(keys: list) -> list[str]:
    width = max(4, len(str(max(len(keys) - 1, 0))))
    return [f"c{i:0{width}d}" for i in range(len(keys))]


def from_fan(
    ambient_rank: int,
    maximal_cones: Sequence[Sequence[Sequence[int]]],
    ids: Sequence[str] | None = None,
    *,
    check: bool = True,
    metadata: Mapping | None = None,
) -> ConeComplex:
    """Complex of all faces of the given cones, glued by inclusion.

    Internal ids ``c0000, c0001, ...`` follow (dimension, rays); ``ids``
    become aliases for the listed cones.
    """
    listed = [Cone(rs, ambient_rank) for rs in maximal_cones]
    if check:
        for a, b in itertools.combinations(listed, 2):
            inter = cone_intersection(a, b)
            if not (a.is_face(inter.rays) and b.is_face(inter.rays)):
                raise NotAFan(f"{a} and {b} meet in {inter}, which is not a face of both")
    all_faces: dict[tuple, Cone] = {}
    for c in listed:
        for rays, f in c._face_cones.items():
            all_faces.setdefault(rays, f)
    order = sorted(all_faces, key=lambda r: (all_faces[r].dim, r))
    names = dict(zip(order, fan_ids(order)))
    cones = {names[r]: all_faces[r] for r in order}
    ident = IntegerMatrix.identity(ambient_rank)
    maps = []
    for r in order:
        for fr in all_faces[r]._face_cones:
            if fr != r:
                maps.append(FaceMap(names[fr], names[r], ident))
    aliases = {}
    if ids is not None:
        for name, c in zip(ids, listed):
            aliases[str(name)] = names[c.rays]
    return ConeComplex(cones, maps, mode="fan", aliases=aliases, metadata=metadata)
