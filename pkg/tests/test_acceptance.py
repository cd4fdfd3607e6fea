"""Acceptance suite: one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible with
``-s``); the conftest hook repeats them in the terminal summary.
"""

from __future__ import annotations

import itertools
import os
import random
import subprocess
import sys
import time
from functools import lru_cache
from math import gcd
from pathlib import Path

import numpy as np

from conefan import (
    Cone,
    PLDivisor,
    ample_coefficients,
    band,
    barycentric,
    compose,
    contact_components,
    degree_L,
    degree_total,
    from_fan,
    is_relatively_ample,
    is_subdivision,
    pullback,
    resolve,
    star_subdivide,
)
from conefan.complex import box_points

import oracles

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


def report(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


# -- 1 ------------------------------------------------------------------


def test_criterion_1_resolution_of_two_dimensional_cones():
    failures = []
    times = {}
    for k in range(2, 7):
        X = from_fan(2, [[(1, 0), (1, k)]])
        t0 = time.perf_counter()
        f = resolve(X)
        times[k] = time.perf_counter() - t0
        Y = f.source
        rays = {tuple(c.rays[0]) for c in Y.cones.values() if c.dim == 1}
        if times[k] >= 5:
            failures.append(f"k={k}: {times[k]:.2f}s")
        if not is_subdivision(f).ok:
            failures.append(f"k={k}: not a subdivision")
        if not Y.is_smooth():
            failures.append(f"k={k}: not smooth")
        if rays != {(1, j) for j in range(k + 1)}:
            failures.append(f"k={k}: rays {sorted(rays)}")
        if len(Y.maximal_cones()) != k:
            failures.append(f"k={k}: {len(Y.maximal_cones())} maximal cones")
        Y.boundary_map()
    report(1, not failures, f"max time {max(times.values()):.2f}s {failures}")
    assert not failures


# -- 2 ------------------------------------------------------------------


def test_criterion_2_barycentric_output_is_stable():
    rng = random.Random(2)
    complexes = [("swap", oracles.swap_complex()), ("rotation", oracles.rotation_complex())]
    while len(complexes) < 50:
        n = rng.choice([1, 2, 2, 3, 3])
        complexes.append((f"fan{len(complexes)}", oracles.random_fan(rng, n)))
    failures = []
    checked = 0
    for name, X in complexes:
        Y = barycentric(X).source
        for p in Y.points_up_to(4):
            if p.point.is_zero():
                continue
            checked += 1
            if not Y.is_stable_vector(p):
                failures.append((name, str(p)))
    report(2, not failures, f"{checked} representatives over {len(complexes)} complexes, {len(failures)} unstable")
    assert not failures


# -- 3 ------------------------------------------------------------------


def _random_center(rng: random.Random, X):
    cid = rng.choice(sorted(c for c in X.cones if X.cones[c].dim >= 1))
    c = X.cones[cid]
    while True:
        coef = [rng.randint(0, 2) for _ in c.rays]
        if any(coef):
            break
    p = [0] * c.ambient_rank
    for a, r in zip(coef, c.rays):
        p = [x + a * y for x, y in zip(p, r)]
    return cid, tuple(p)


@lru_cache(maxsize=1)
def criterion3_subdivisions():
    rng = random.Random(3)
    out = []
    # centers must be stable: off the glued rays and fixed by the automorphisms
    for i in range(10):
        k = rng.randint(1, 3)
        if i % 3 == 0:
            X, x = oracles.swap_complex(), (k, k)
        elif i % 3 == 1:
            X, x = oracles.rotation_complex(), (k, k, k)
        else:
            X, x = oracles.nodal_complex(), (rng.randint(1, 3), k)
        out.append(star_subdivide(X, ("s", x)))
    while len(out) < 100:
        X = oracles.random_fan(rng, rng.choice([2, 2, 3]))
        out.append(star_subdivide(X, _random_center(rng, X)))
    return out


def support_failures(f, bound: int = 8) -> list:
    """Target lattice points not in exactly one piece's relative interior."""
    bad = []
    for t, tc in f.target.cones.items():
        n = tc.ambient_rank
        pts = oracles.box(n, [-bound] * n, [bound] * n)
        pts = pts[oracles.in_cone_mask(pts, list(tc.rays), n)]
        counts = np.zeros(len(pts), dtype=int)
        for s, M in f.charts.get(t, []):
            src = f.source.cones[s]
            img = [tuple(M.apply(r)) for r in src.rays]
            counts += oracles.in_cone_mask(pts, img, n, relint=True)
        for p, c in zip(pts, counts):
            if c != 1:
                bad.append((t, tuple(int(x) for x in p), int(c)))
    return bad


def test_criterion_3_star_subdivision_preserves_support():
    t0 = time.perf_counter()
    subs = criterion3_subdivisions()
    failures = []
    for i, f in enumerate(subs):
        bad = support_failures(f)
        if bad:
            failures.append((i, bad[:3]))
        if not is_subdivision(f).ok:
            failures.append((i, "is_subdivision"))
    elapsed = time.perf_counter() - t0
    report(3, not failures and elapsed < 60, f"{len(subs)} subdivisions in {elapsed:.1f}s, {len(failures)} failures")
    assert not failures
    assert elapsed < 60


# -- 4 ------------------------------------------------------------------


def test_criterion_4_ampleness_signs():
    X = oracles.quadrant()
    f = star_subdivide(X, ("q", (1, 1)))
    (E,) = f.exceptional_rays
    minus = is_relatively_ample(f, PLDivisor({E: -1}))
    plus = is_relatively_ample(f, PLDivisor({E: 1}))
    failures = []
    if not minus or plus:
        failures.append(f"blowup: -E {minus}, +E {plus}")
    for k in range(2, 7):
        g = resolve(from_fan(2, [[(1, 0), (1, k)]]))
        D = ample_coefficients(g)
        if not D.support or any(m >= 0 for m in D.coefficients.values()):
            failures.append(f"k={k}: {D}")
        if set(D.support) != set(g.exceptional_rays) or not is_relatively_ample(g, D):
            failures.append(f"k={k}: verifier rejects {D}")
    report(4, not failures, f"{len(failures)} failures {failures}")
    assert not failures


# -- 5 ------------------------------------------------------------------


def test_criterion_5_contact_lifting_is_bijective():
    failures = []
    total = 0
    for i, f in enumerate(criterion3_subdivisions()):
        X, Y = f.target, f.source
        T = X.points_up_to(8)
        lifts = {}
        for x in T:
            y = f.lift(x)
            lifts[x] = y
            if f.push(y) != x:
                failures.append((i, "push", str(x)))
        if len(set(lifts.values())) != len(T):
            failures.append((i, "not injective"))
        image = set(lifts.values())
        Tset = set(T)
        for y in Y.points_up_to(8):
            if f.push(y) in Tset and y not in image:
                failures.append((i, "not surjective", str(y)))
        total += len(T)
    report(5, not failures, f"{total} components matched, {len(failures)} failures")
    assert not failures


# -- 6 ------------------------------------------------------------------


def test_criterion_6_bands_match_brute_force():
    rng = random.Random(6)
    failures = []
    zeros = 0
    for _ in range(40):
        n = rng.choice([1, 2, 3])
        rays = oracles.random_full_cone(rng, n, 2 if n == 3 else 3)
        X = from_fan(n, [rays])
        (cid,) = X.maximal_cones()
        dual = oracles.brute_dual_hilbert_basis(rays, n)
        for _ in range(5):
            if rng.random() < 0.1:
                phi = (0,) * n
            else:
                coef = [rng.randint(0, 4) for _ in rays]
                phi = tuple(sum(a * r[j] for a, r in zip(coef, rays)) for j in range(n))
            expected = 0
            for xi in dual:
                expected = gcd(expected, sum(a * b for a, b in zip(xi, phi)))
            got = band(X, (cid, phi))
            zeros += not any(phi)
            if got != expected or (not any(phi) and got != 0):
                failures.append((rays, phi, got, expected))
    report(6, not failures, f"200 points ({zeros} zero), {len(failures)} mismatches")
    assert not failures


# -- 7 ------------------------------------------------------------------


def _degree_instance(rng: random.Random):
    if rng.random() < 0.7:
        a = rng.randint(1, 4)
        k = rng.randint(1, 6)
        X = from_fan(2, [[(1, 0), (a, k)]])
        f = resolve(X)
    else:
        X = from_fan(3, [oracles.random_smooth_cone(rng, 3)])
        f = None
        Z = X
        for _ in range(rng.randint(1, 2)):
            cid = rng.choice(sorted(c for c in Z.cones if Z.cones[c].dim >= 2))
            c = Z.cones[cid]
            step = star_subdivide(Z, (cid, tuple(sum(col) for col in zip(*c.rays))))
            f = step if f is None else compose(f, step)
            Z = step.source
    return X, f


def _random_target_points(rng, X, k):
    out = []
    for _ in range(k):
        cid = rng.choice(sorted(X.cones))
        pts = box_points(X.cones[cid], 3)
        out.append(X.canonical((cid, rng.choice(pts))))
    return out


def test_criterion_7_degree_formulas():
    X = oracles.quadrant()
    f = star_subdivide(X, ("q", (1, 1)))
    (E,) = f.exceptional_rays
    m = PLDivisor({E: -1})
    contacts = [f.lift(("q", (1, 1))), f.lift(("q", (2, 3)))]
    dl = degree_L(f, m, contacts)
    dt = degree_total(5, f, m, contacts)
    failures = []
    if (dl, dt) != (-3, 2):
        failures.append(f"fixture gave degree_L={dl}, degree_total={dt}")
    rng = random.Random(7)
    for i in range(100):
        X, f = _degree_instance(rng)
        Y = f.source
        exc = f.exceptional_rays
        m1 = ample_coefficients(f)
        m2 = PLDivisor({r: rng.randint(-3, 3) for r in exc})
        C1 = [f.lift(x) for x in _random_target_points(rng, X, rng.randint(0, 3))]
        C2 = [f.lift(x) for x in _random_target_points(rng, X, rng.randint(0, 3))]
        b = rng.randint(-5, 5)
        if degree_L(f, m1 + m2, C1) != degree_L(f, m1, C1) + degree_L(f, m2, C1):
            failures.append((i, "additive in m"))
        if degree_L(f, m1, C1 + C2) != degree_L(f, m1, C1) + degree_L(f, m1, C2):
            failures.append((i, "additive in contacts"))
        if degree_total(b, f, m1, C1) - degree_total(0, f, m1, C1) != b:
            failures.append((i, "base degree"))
        cid = rng.choice(sorted(c for c in Y.cones if Y.cones[c].dim >= 2))
        c = Y.cones[cid]
        g = star_subdivide(Y, (cid, tuple(sum(col) for col in zip(*c.rays))))
        h = compose(f, g)
        pulled = pullback(g, m1 + m2)
        lifted = [g.lift(y) for y in C1]
        if degree_L(h, pulled, lifted) != degree_L(f, m1 + m2, C1):
            failures.append((i, "subdivision invariance"))
    report(7, not failures, f"degree_L={dl}, degree_total={dt}, 100 random instances, {len(failures)} failures")
    assert not failures


# -- 8 ------------------------------------------------------------------


def test_criterion_8_hilbert_basis_oracle():
    failures = []
    vecs = [v for v in itertools.product(range(5), repeat=2) if any(v)]
    count = 0
    for a, b in itertools.combinations_with_replacement(vecs, 2):
        gens = [a, b] if a != b else [a]
        c = Cone(gens, 2)
        # collinear pairs span a ray, which the oracle wants as one generator
        expected = oracles.brute_hilbert_basis(gens if c.dim == 2 else [a], 2)
        got = [tuple(v) for v in c.hilbert_basis()]
        count += 1
        if got != expected:
            failures.append((gens, got, expected))
    rng = random.Random(8)
    for _ in range(20):
        rays = oracles.random_full_cone(rng, 3, 3, 5)
        got = [tuple(v) for v in Cone(rays, 3).hilbert_basis()]
        expected = oracles.brute_hilbert_basis(rays, 3)
        count += 1
        if got != expected:
            failures.append((rays, got, expected))
    report(8, not failures, f"{count} cones, {len(failures)} mismatches")
    assert not failures


# -- 9 ------------------------------------------------------------------


def _run(args, seed, cwd):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    proc = subprocess.run(
        [sys.executable, "-m", "conefan", *args], capture_output=True, env=env, cwd=cwd
    )
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_criterion_9_determinism(tmp_path):
    fixtures = sorted(p for p in FIXTURES.glob("*.json") if p.stem not in {"overlap", "contacts"})
    failures = []
    for fx in fixtures:
        outputs = []
        for seed in (0, 4242):
            rep = tmp_path / f"{fx.stem}-{seed}.json"
            out = tmp_path / f"{fx.stem}-{seed}-fan.json"
            _run(["resolve", str(fx), "--out", str(out), "--report", str(rep)], seed, tmp_path)
            contacts = _run(["contacts", str(fx), "--bound", "3"], seed, tmp_path)
            outputs.append((rep.read_bytes(), out.read_bytes(), contacts))
        if outputs[0] != outputs[1]:
            failures.append(fx.name)
    report(9, not failures, f"{len(fixtures)} fixtures, differing: {failures}")
    assert not failures
