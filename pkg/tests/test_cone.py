import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conefan import Cone, cone_intersection
from conefan.errors import DualRankCap, NotContained, NotSimplicial, NotStronglyConvex, RankMismatch

import oracles


def test_contains_and_minimal_face():
    q = Cone([(1, 0), (0, 1)])
    assert q.contains((2, 3))
    assert q.minimal_face((2, 3)).cone == q
    assert q.minimal_face((4, 0)).rays == ((1, 0),)
    a2 = Cone([(1, 0), (1, 2)])
    assert a2.contains((1, 1))
    assert a2.minimal_face((1, 1)).cone == a2
    assert not a2.contains((0, 1))
    with pytest.raises(NotContained):
        a2.minimal_face((0, 1))
    with pytest.raises(RankMismatch):
        q.contains((1, 2, 3))


@pytest.mark.parametrize(
    "rays, n, count",
    [([(1, 0), (0, 1)], 2, 4), ([(1, 0)], 2, 2), ([(1, 0, 0), (0, 1, 0), (0, 0, 1)], 3, 8),
     ([(1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)], 3, 10)],
)
def test_face_counts(rays, n, count):
    assert len(Cone(rays, n).faces()) == count


def test_hilbert_basis_examples():
    assert Cone([(1, 0), (0, 1)]).hilbert_basis() == [(0, 1), (1, 0)]
    assert Cone([(1, 0), (1, 2)]).hilbert_basis() == [(1, 0), (1, 1), (1, 2)]
    assert Cone([(1, 0), (1, 5)]).hilbert_basis() == [(1, j) for j in range(6)]


def test_dual_hilbert_basis_examples():
    assert Cone([(1, 0), (0, 1)]).dual_hilbert_basis() == [(0, 1), (1, 0)]
    assert sorted(Cone([(1, 0), (1, 2)]).dual_hilbert_basis()) == [(0, 1), (1, 0), (2, -1)]
    ray = Cone([(1, 0)], 2).dual_hilbert_basis()
    assert len(ray) == 1 and ray[0].dot((1, 0)) == 1


def test_multiplicity_and_smoothness():
    q, a2 = Cone([(1, 0), (0, 1)]), Cone([(1, 0), (1, 2)])
    assert (q.multiplicity(), q.is_smooth()) == (1, True)
    assert (a2.multiplicity(), a2.is_smooth()) == (2, False)
    sq = Cone([(1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)])
    assert not sq.is_simplicial()
    with pytest.raises(NotSimplicial):
        sq.multiplicity()


def test_cone_normalizes_generators():
    c = Cone([(2, 0), (1, 1), (3, 3), (0, 0)], 2)
    assert c.rays == ((1, 0), (1, 1))
    assert Cone([(1, 0), (1, 1), (1, 2)]).rays == ((1, 0), (1, 2))


def test_not_strongly_convex():
    with pytest.raises(NotStronglyConvex):
        Cone([(1, 0), (-1, 0)])
    with pytest.raises(NotStronglyConvex):
        Cone([(1, 0), (0, 1), (-1, -1)])


def test_dual_rank_cap():
    n = 7
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    with pytest.raises(DualRankCap):
        Cone(rays).hilbert_basis()


def test_lower_dimensional_cone():
    c = Cone([(1, 0, 1), (0, 1, 1)])
    assert c.dim == 2
    assert c.contains((1, 1, 2))
    assert not c.contains((1, 1, 1))
    assert c.hilbert_basis() == [(0, 1, 1), (1, 0, 1)]


def test_cone_intersection():
    a = Cone([(1, 0), (1, 2)])
    b = Cone([(1, 1), (0, 1)])
    assert cone_intersection(a, b).rays == ((1, 1), (1, 2))


def test_barycenter():
    assert Cone([(1, 0), (1, 2)]).barycenter() == (2, 2)


# -- properties -------------------------------------------------------------

cones_2d = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=3)


def _maybe_cone(gens, n):
    gens = [g for g in gens if any(g)]
    if not gens:
        return None
    try:
        return Cone(gens, n)
    except NotStronglyConvex:
        return None


@given(cones_2d)
def test_hilbert_basis_oracle_rank_two(gens):
    c = _maybe_cone(gens, 2)
    if c is None:
        return
    rays = list(c.rays) if c.dim == 2 else [c.rays[0]]
    assert c.hilbert_basis() == oracles.brute_hilbert_basis(rays, 2)


def test_hilbert_basis_oracle_rank_three():
    rng = random.Random(11)
    for _ in range(25):
        rays = oracles.random_full_cone(rng, 3, 4, 4)
        assert Cone(rays).hilbert_basis() == oracles.brute_hilbert_basis(rays, 3)


@settings(max_examples=60)
@given(st.lists(st.tuples(*[st.integers(-3, 3)] * 3), min_size=1, max_size=4))
def test_duality_and_faces(gens):
    c = _maybe_cone(gens, 3)
    if c is None:
        return
    dual = c.dual_hilbert_basis()
    hb = c.hilbert_basis()
    for xi in dual:
        for v in hb:
            assert xi.dot(v) >= 0
    # within the span the dual basis cuts out the cone
    for p in itertools.product(range(-3, 4), repeat=3):
        if c.in_span(p):
            assert c.contains(p) == all(xi.dot(p) >= 0 for xi in dual)
    faces = [f.cone for f in c.faces()]
    keys = {f.rays for f in faces}
    for f, g in itertools.combinations(faces, 2):
        assert cone_intersection(f, g).rays in keys
    for p in hb:
        m = c.minimal_face(p).cone
        containing = [f for f in faces if f.contains(p)]
        assert set(m.rays) == set.intersection(*(set(f.rays) for f in containing))
    if c.is_smooth():
        assert hb == sorted(c.rays)
