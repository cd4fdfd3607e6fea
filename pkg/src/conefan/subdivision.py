"""Star and barycentric subdivision, resolution, and PL ampleness certificates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Mapping, Sequence

import numpy as np

from .cone import Cone
from .complex import (
    ComplexPoint,
    ConeComplex,
    FaceMap,
    box_points,
    fan_ids,
)
from .errors import (
    IllPosed,
    LatticeOverflow,
    NoCertificate,
    NotContained,
    NotSmooth,
    UnstableCenter,
    ZeroVector,
)
from .lattice import IntegerMatrix, LatticeVector, checked, express, primitive, solve_rational

log = logging.getLogger(__name__)

Piece = tuple[str, IntegerMatrix]


@dataclass
class SubdivisionMap:
    """A map ``source -> target`` given chart by chart.

    ``charts[t]`` lists every source cone lying over the target cone ``t``
    together with the lattice map carrying it into ``t``'s lattice; the
    images form a fan refining ``t``.
    """

    source: ConeComplex
    target: ConeComplex
    charts: dict[str, list[Piece]]
    history: list[dict] = field(default_factory=list)
    steps: list["SubdivisionMap"] = field(default_factory=list)

    @property
    def elementary_steps(self) -> list["SubdivisionMap"]:
        if self.steps:
            return self.steps
        return [self] if self.history else []

    @cached_property
    def cone_assignment(self) -> dict[str, tuple[str, IntegerMatrix]]:
        out = {}
        for t in sorted(self.charts):
            for s, M in self.charts[t]:
                out.setdefault(s, (t, M))
        return out

    def pieces(self, t: str) -> list[tuple[str, IntegerMatrix, Cone]]:
        cache = self.__dict__.setdefault("_piece_cache", {})
        if t not in cache:
            rank_t = self.target.cones[t].ambient_rank
            cache[t] = [
                (s, M, Cone([M.apply(r) for r in self.source.cones[s].rays], rank_t))
                for s, M in self.charts.get(t, [])
            ]
        return cache[t]

    def push(self, y: ComplexPoint | tuple) -> ComplexPoint:
        """Image of a source point, as a canonical target point."""
        y = self.source._checked_point(y)
        t, M = self.cone_assignment[y.cone]
        return self.target.canonical((t, M.apply(y.point)))

    def lift(self, x: ComplexPoint | tuple) -> ComplexPoint:
        """The source point over a target point, as a canonical source point."""
        x = self.target._checked_point(x)
        for s, M, img in self.pieces(x.cone):
            if img.relint_contains(x.point):
                q = _preimage(self.source.cones[s], M, x.point)
                return self.source.canonical((s, q))
        raise NotContained(f"{x} is not covered by the subdivision")

    @cached_property
    def exceptional_rays(self) -> list[ComplexPoint]:
        out = []
        for label in self.source.rays():
            img = self.push(label)
            chart = self.target.minimal_chart(img)
            c = self.target.cones[chart.cone]
            if c.dim != 1 or chart.point != c.rays[0]:
                out.append(label)
        return out


def _preimage(src: Cone, M: IntegerMatrix, p: Sequence[int]) -> LatticeVector:
    basis = src.span_basis()
    c = express(p, [M.apply(b) for b in basis])
    if c is None or any(x.denominator != 1 for x in c):
        raise NotContained(f"{tuple(p)} has no lattice preimage")
    out = [0] * src.ambient_rank
    for ci, b in zip(c, basis):
        for j in range(len(out)):
            out[j] += int(ci) * b[j]
    return LatticeVector(out)


def identity_subdivision(X: ConeComplex) -> SubdivisionMap:
    g = X.groupoid
    charts = {}
    for t, c in X.cones.items():
        entries = []
        for rays in c.face_ray_sets():
            m = g.onto[(t, rays)][0]
            entries.append((m.source, m.matrix))
        charts[t] = entries
    return SubdivisionMap(X, X, charts)


def compose(f: SubdivisionMap, g: SubdivisionMap) -> SubdivisionMap:
    """``f ∘ g`` for ``g: Z -> Y`` and ``f: Y -> X``."""
    charts = {}
    for t, entries in f.charts.items():
        seen = set()
        out = []
        for y, M1 in entries:
            for z, M2 in g.charts.get(y, []):
                M = M1 @ M2
                key = (z, tuple(sorted(M.apply(r) for r in g.source.cones[z].rays)))
                if key not in seen:
                    seen.add(key)
                    out.append((z, M))
        charts[t] = out
    return SubdivisionMap(
        g.source,
        f.target,
        charts,
        history=f.history + g.history,
        steps=f.elementary_steps + g.elementary_steps,
    )


# -- star subdivision ----------------------------------------------------


def star_pieces(cone: Cone, p: Sequence[int]) -> list[tuple[LatticeVector, ...]]:
    """Ray sets of the star subdivision of ``cone`` at the point ``p``."""
    xr = primitive(p)
    pieces = set()
    for rays in cone.face_ray_sets():
        if not cone._face_cones[rays].contains(p):
            pieces.add(rays)
            pieces.add(tuple(sorted(rays + (xr,))))
    return sorted(pieces, key=lambda r: (len(r), r))


def _carrier(cone: Cone, rays: Sequence[LatticeVector]) -> tuple:
    total = LatticeVector((0,) * cone.ambient_rank)
    for r in rays:
        total = total + r
    return cone.minimal_face(total).rays


def _subdivide_charts(X: ConeComplex, sigma: Mapping[str, list[tuple]], mode: str):
    """Build the complex whose chart ``t`` is replaced by the fan ``sigma[t]``."""
    g = X.groupoid

    def canon(m: str, kappa: Sequence[LatticeVector]) -> tuple:
        return min(tuple(sorted(a.apply(r) for r in kappa)) for a in g.auts(m))

    reps = set()
    for m, c in X.cones.items():
        for kappa in sigma[m]:
            if _carrier(c, kappa) == c.rays:
                reps.add((m, canon(m, kappa)))
    cones = {key: Cone(key[1], X.cones[key[0]].ambient_rank) for key in reps}
    order = sorted(reps, key=lambda k: (cones[k].dim, cones[k].ambient_rank, k[1], k[0]))
    names = dict(zip(order, fan_ids(order)))

    def presentations(t: str, kappa: tuple):
        # every (rep -> (t, kappa)) isomorphism, as (rep name, matrix)
        F = _carrier(X.cones[t], kappa)
        out = []
        for gm in g.onto[(t, F)]:
            m = gm.source
            kp = tuple(sorted(gm.preimage(r) for r in kappa))
            k0 = canon(m, kp)
            for beta in g.auts(m):
                if tuple(sorted(beta.apply(r) for r in k0)) == kp:
                    out.append((names[(m, k0)], gm.matrix @ beta.matrix))
        return out

    face_maps = []
    for key in order:
        b = key[0]
        for face in cones[key].face_ray_sets():
            for src, M in presentations(b, face):
                if not (src == names[key] and M.is_identity()):
                    face_maps.append(FaceMap(src, names[key], M))
    charts = {}
    for t in X.cones:
        charts[t] = [presentations(t, kappa)[0] for kappa in sigma[t]]
    Y = ConeComplex({names[k]: cones[k] for k in order}, face_maps, mode=mode)
    return Y, charts


def star_subdivide(X: ConeComplex, x: ComplexPoint | tuple) -> SubdivisionMap:
    """Star subdivision of ``X`` at the stable vector ``x``."""
    x = X._checked_point(x)
    if x.point.is_zero():
        raise ZeroVector("cannot star subdivide at the zero vector")
    if not X.is_stable_vector(x):
        raise UnstableCenter(f"{x} is not a stable vector")
    lifts = {m.cone: m.point for m in X.orbit(x)}
    sigma = {}
    for cid, c in X.cones.items():
        sigma[cid] = star_pieces(c, lifts[cid]) if cid in lifts else c.face_ray_sets()
    Y, charts = _subdivide_charts(X, sigma, X.mode)
    f = SubdivisionMap(Y, X, charts)
    chart = X.minimal_chart(x)
    new_ray = X.cones[chart.cone].dim != 1
    exc = None
    if new_ray:
        lifted = f.lift(x)
        exc = Y.ray_label(lifted.cone, primitive(lifted.point))
    f.history = [
        {
            "kind": "star",
            "center": X.canonical(x),
            "affected_charts": sorted(lifts),
            "exceptional_ray": exc,
        }
    ]
    return f


def barycentric(X: ConeComplex) -> SubdivisionMap:
    """Iterated star subdivision at barycenters, highest dimension first."""
    centers = set()
    for cid, c in X.cones.items():
        if c.dim >= 2:
            centers.add(X.canonical((cid, c.barycenter())))
    order = sorted(centers, key=lambda p: (-X.cones[X.minimal_chart(p).cone].dim, p))
    f = identity_subdivision(X)
    for b in order:
        step = star_subdivide(f.source, f.lift(b))
        for h in step.history:
            h["phase"] = "barycentric"
        f = compose(f, step)
    return f


# -- resolution ----------------------------------------------------------


def _multiplicity_profile(Y: ConeComplex) -> list[int]:
    return sorted((Y.cones[c].multiplicity() for c in Y.maximal_cones()), reverse=True)


def _choose_center(Y: ConeComplex) -> tuple[str, LatticeVector] | None:
    mults = {cid: c.multiplicity() for cid, c in Y.cones.items()}
    top = max(mults.values())
    if top == 1:
        return None
    chart = min(cid for cid, m in mults.items() if m == top)
    c = Y.cones[chart]
    best = None
    for v in c.hilbert_basis():
        if v in c.rays:
            continue
        worst = 0
        for rays in star_pieces(c, v):
            if len(rays) == c.dim:
                worst = max(worst, Cone(rays, c.ambient_rank).multiplicity())
        cand = (worst, v)
        if best is None or cand < best:
            best = cand
    return chart, best[1]


def resolve(X: ConeComplex, barycentric_pass: str = "auto", max_steps: int = 10_000) -> SubdivisionMap:
    """Smooth subdivision of ``X`` on which every vector is stable.

    ``barycentric_pass`` is ``"always"``, ``"never"`` or ``"auto"``; auto
    skips the pass when ``X`` is already simplicial with every vector
    stable.
    """
    if barycentric_pass not in {"auto", "always", "never"}:
        raise ValueError(f"unknown barycentric_pass {barycentric_pass!r}")
    run_bary = barycentric_pass == "always" or (
        barycentric_pass == "auto" and not (X.is_simplicial() and X.all_vectors_stable())
    )
    f = barycentric(X) if run_bary else identity_subdivision(X)
    Y = f.source
    if not Y.is_simplicial():
        raise NotSmooth("resolution needs a simplicial complex; run the barycentric pass")
    profile = _multiplicity_profile(Y)
    for _ in range(max_steps):
        choice = _choose_center(Y)
        if choice is None:
            return f
        step = star_subdivide(Y, choice)
        Y = step.source
        old, profile = profile, _multiplicity_profile(Y)
        assert profile < old, "multiplicity profile failed to decrease"
        step.history[0]["phase"] = "resolution"
        step.history[0]["multiplicities_before"] = old
        step.history[0]["multiplicities"] = profile
        log.debug("star at %s -> %s", choice, profile)
        f = compose(f, step)
    raise RuntimeError(f"resolution did not terminate in {max_steps} steps")


# -- subdivision test ----------------------------------------------------


@dataclass
class SubdivisionCertificate:
    ok: bool
    reason: str = ""
    chart: str | None = None
    witness: LatticeVector | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "reason": self.reason,
            "chart": self.chart,
            "witness": None if self.witness is None else list(self.witness),
        }


def _relint_mask(pts: np.ndarray, cone: Cone) -> np.ndarray:
    mask = np.ones(len(pts), dtype=bool)
    if cone.equations:
        mask &= (pts @ np.array(cone.equations, dtype=np.int64).T == 0).all(axis=1)
    if cone.facet_normals:
        mask &= (pts @ np.array(cone.facet_normals, dtype=np.int64).T > 0).all(axis=1)
    else:
        mask &= (pts == 0).all(axis=1)
    return mask


def support_counts(f: SubdivisionMap, t: str, bound: int) -> tuple[list[LatticeVector], np.ndarray]:
    """Lattice points of chart ``t`` in the box and how many piece interiors hold each."""
    pts = box_points(f.target.cones[t], bound)
    if not pts:
        return pts, np.zeros(0, dtype=int)
    arr = np.array(pts, dtype=np.int64)
    counts = np.zeros(len(pts), dtype=int)
    for _, _, img in f.pieces(t):
        counts += _relint_mask(arr, img)
    return pts, counts


def is_subdivision(f: SubdivisionMap, bound: int = 8) -> SubdivisionCertificate:
    """Check containment, coverage and disjoint interiors chart by chart."""
    covered = set()
    for t, tc in f.target.cones.items():
        pieces = f.pieces(t)
        images = set()
        for s, M, img in pieces:
            covered.add(s)
            for r in img.rays:
                if not tc.contains(r):
                    return SubdivisionCertificate(False, "piece leaves its chart", t, r)
            images.add(img.rays)
        for _, _, img in pieces:
            for rays in img.face_ray_sets():
                if rays not in images:
                    return SubdivisionCertificate(False, "face of a piece is missing", t, img.barycenter())
        pts, counts = support_counts(f, t, bound)
        for p, n in zip(pts, counts):
            if n != 1:
                reason = "point not covered" if n == 0 else "relative interiors overlap"
                return SubdivisionCertificate(False, reason, t, p)
        top = [img for _, _, img in pieces if img.dim == tc.dim]
        if tc.dim and not top:
            return SubdivisionCertificate(False, "no maximal piece", t, tc.barycenter())
        for _, _, w in pieces:
            if w.dim != tc.dim - 1 or tc.dim == 0:
                continue
            n = sum(1 for c in top if set(w.rays) <= set(c.rays))
            interior = tc.relint_contains(w.barycenter())
            if n != (2 if interior else 1):
                return SubdivisionCertificate(False, f"wall bounds {n} maximal pieces", t, w.barycenter())
    missing = set(f.source.cones) - covered
    if missing:
        return SubdivisionCertificate(False, f"source cone {min(missing)} lies over no chart")
    return SubdivisionCertificate(True)


# -- PL divisors ---------------------------------------------------------


@dataclass(frozen=True)
class PLDivisor:
    """Integer coefficients on ray orbits; missing rays have coefficient 0.

    The support function takes the value ``-m`` at the primitive generator
    of a ray with coefficient ``m`` and is linear on every cone.
    """

    coefficients: Mapping[ComplexPoint, int] = field(default_factory=dict)

    def __getitem__(self, ray: ComplexPoint) -> int:
        return self.coefficients.get(ray, 0)

    @property
    def support(self) -> list[ComplexPoint]:
        return sorted(r for r, m in self.coefficients.items() if m)

    def __add__(self, other: "PLDivisor") -> "PLDivisor":
        keys = set(self.coefficients) | set(other.coefficients)
        return PLDivisor({k: self[k] + other[k] for k in keys if self[k] + other[k]})

    def scaled(self, k: int) -> "PLDivisor":
        return PLDivisor({r: k * m for r, m in self.coefficients.items() if k * m})

    def to_json(self) -> list[dict]:
        return [{"ray": r.to_json(), "m": self[r]} for r in self.support]


def _functional(rays: Sequence[Sequence[int]], values: Sequence[Fraction]) -> list[Fraction]:
    ell = solve_rational(rays, values) if rays else []
    if ell is None:
        raise IllPosed("ray values do not extend to a linear function on the cone")
    return ell


def support_value(X: ConeComplex, D: PLDivisor | Mapping, x: ComplexPoint | tuple) -> Fraction:
    """Value of the support function of ``D`` at a point of ``X``."""
    coeffs = D.coefficients if isinstance(D, PLDivisor) else D
    m, q = X.minimal_chart(x)
    c = X.cones[m]
    if not c.rays:
        return Fraction(0)
    vals = [Fraction(-coeffs.get(X.ray_label(m, r), 0)) for r in c.rays]
    ell = _functional(c.rays, vals)
    return sum((a * b for a, b in zip(ell, q)), Fraction(0))


def _pullback_values(f: SubdivisionMap, D) -> dict[ComplexPoint, Fraction]:
    out = {}
    for label in f.source.rays():
        val = -support_value(f.target, D, f.push(label))
        if val:
            out[label] = val
    return out


def pullback(f: SubdivisionMap, D: PLDivisor) -> PLDivisor:
    vals = _pullback_values(f, D)
    if any(v.denominator != 1 for v in vals.values()):
        raise IllPosed("pullback has non-integral coefficients")
    return PLDivisor({k: int(v) for k, v in vals.items()})


def is_relatively_ample(f: SubdivisionMap, D: PLDivisor) -> bool:
    """Strict convexity of the support function of ``D`` across every interior wall."""
    Y = f.source
    for t, tc in f.target.cones.items():
        top = []
        for s, M, img in f.pieces(t):
            if img.dim != tc.dim:
                continue
            sc = Y.cones[s]
            if not sc.is_simplicial():
                raise NotSmooth(f"source cone {s} is not simplicial")
            vals = {M.apply(r): Fraction(-D[Y.ray_label(s, r)]) for r in sc.rays}
            top.append((set(img.rays), vals, _functional(list(vals), list(vals.values()))))
        for i, (r1, v1, l1) in enumerate(top):
            for r2, v2, l2 in top[i + 1 :]:
                if len(r1 & r2) != tc.dim - 1:
                    continue
                (a,) = r2 - r1
                (b,) = r1 - r2
                if not (_dot(l1, a) > v2[a] and _dot(l2, b) > v1[b]):
                    return False
    return True


def _dot(ell, v) -> Fraction:
    return sum((x * y for x, y in zip(ell, v)), Fraction(0))


def ample_coefficients(f: SubdivisionMap, base: int = 2, max_base: int = 2**16) -> PLDivisor:
    """Negative coefficients on the exceptional rays giving a relatively ample divisor."""
    steps = f.elementary_steps
    tails: list[SubdivisionMap | None] = [None] * len(steps)
    tail = identity_subdivision(f.source)
    for k in range(len(steps) - 1, -1, -1):
        tails[k] = tail
        tail = compose(steps[k], tail)
    parts = []
    for step, tail in zip(steps, tails):
        E = step.history[0].get("exceptional_ray")
        if E is None:
            continue
        vals = _pullback_values(tail, {E: -1})
        scale = lcm(*(v.denominator for v in vals.values())) if vals else 1
        parts.append({k: int(v * scale) for k, v in vals.items()})
    if not parts:
        return PLDivisor({})
    exceptional = set(f.exceptional_rays)
    b = base
    while b <= max_base:
        try:
            total: dict[ComplexPoint, int] = {}
            for k, part in enumerate(parts):
                w = b ** (len(parts) - 1 - k)
                for ray, m in part.items():
                    total[ray] = total.get(ray, 0) + w * m
            D = PLDivisor({r: checked(m) for r, m in total.items() if m})
        except LatticeOverflow:
            break
        if (
            set(D.support) <= exceptional
            and all(m < 0 for m in D.coefficients.values())
            and is_relatively_ample(f, D)
        ):
            return D
        b *= 2
    raise NoCertificate("no power-of-base weighting produced a relatively ample divisor")
