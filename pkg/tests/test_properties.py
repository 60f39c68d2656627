"""
Randomized checks against brute-force oracles.

Core claims:
    - Inclusion agrees with testing every vertex of the inner region
    - Inclusion verdicts, Conley-Zehnder indices and orbit labels are
      unchanged by a common rescaling; volume scales by lambda^n
    - Orbit enumeration returns exactly the orbits a direct scan finds
    - Cap-curve enumeration returns exactly the classes a direct scan finds
    - Adding a negative end lowers both area and virtual index
    - Inclusion is reflexive on every self-comparable shape and transitive along
      chains of strict inclusions
    - Volume, inclusion verdicts and floor-boundary counts do not depend on
      the order of the ellipsoid coordinates
    - Action and Conley-Zehnder index grow strictly with the cover multiplicity
    - Nested pairs, and every pair the rule search certifies, pass all
      capacity and volume obstructions

Draws come from random.Random seeded with the configured seed, so every run
sees the same instances.
"""

import itertools
import random
from fractions import Fraction

import pytest

from sympemb.capacities import eh_capacity_ellipsoid, is_obstructed, obstruct_embedding
from sympemb.config import get_settings
from sympemb.constructions import derive_embedding, verify_certificate
from sympemb.curves import Cap, CurveClass, EnumerationQuery, curve_area, enumerate_cap_curves, virtual_index
from sympemb.domains import (
    BallProduct,
    Ellipsoid,
    Polydisk,
    Polylike,
    Verdict,
    ball,
    contains,
    genericity_check,
    includes,
    scale,
    volume,
)
from sympemb.reeb import (
    Elliptic,
    EllipsoidClosed,
    Hyperbolic,
    PolydiskToric,
    action,
    cz_index,
    enumerate_orbits,
    orbit_label,
)


F = Fraction

DRAWS = 40
MONTE_CARLO_POINTS = 10_000
CAPACITY_DRAWS = 1000
PAIR_DRAWS = 1000
SCALING_DRAWS = 250


# -- Helpers -----------------------------------------------------------------

@pytest.fixture
def rng():
    return random.Random(get_settings().seed)


def _rat(rng, lo=1, hi=30):
    return F(rng.randint(lo, hi), rng.randint(1, 6))


def _quarter(rng, lo, hi):
    return F(rng.randint(lo, hi), 4)


def _domain(rng, n):
    kind = rng.choice(("E", "P", "Q"))
    if kind == "E":
        return Ellipsoid(tuple(_rat(rng) for _ in range(n)))
    if kind == "P":
        return Polydisk(tuple(_rat(rng) for _ in range(n)))
    return Polylike(_rat(rng), tuple(_rat(rng) for _ in range(n - 1)))


def _vertices(d):
    n = d.n
    if isinstance(d, Ellipsoid):
        out = [tuple(F(0) for _ in range(n))]
        for j, c in enumerate(d.coeffs):
            out.append(tuple(c if i == j else F(0) for i in range(n)))
        return out
    if isinstance(d, Polydisk):
        return list(itertools.product(*((F(0), w) for w in d.widths)))
    tails = [tuple(F(0) for _ in d.tail)]
    for j, a in enumerate(d.tail):
        tails.append(tuple(a if i == j else F(0) for i in range(len(d.tail))))
    return [(disk,) + t for disk in (F(0), d.b) for t in tails]


def _box(d):
    if isinstance(d, Ellipsoid):
        return d.coeffs
    if isinstance(d, Polydisk):
        return d.widths
    return (d.b,) + d.tail


def _sample(rng, d):
    while True:
        point = tuple(F(rng.randint(0, 64), 64) * side for side in _box(d))
        if contains(d, point):
            return point


def _increasing(values):
    return all(a < b for a, b in zip(values, values[1:]))


class TestInclusionOracle:
    @pytest.mark.parametrize("n", [2, 3])
    def test_vertex_oracle(self, rng, n):
        for _ in range(DRAWS):
            inner = _domain(rng, n)
            outer = rng.choice((Ellipsoid, Polydisk))(tuple(_rat(rng, 5, 60) for _ in range(n)))
            if isinstance(outer, Polydisk) and isinstance(inner, Ellipsoid):
                continue
            expected = all(contains(outer, v) for v in _vertices(inner))
            assert includes(outer, inner).holds == expected, (outer, inner)

    def test_sampled_points_stay_inside(self, rng):
        for _ in range(MONTE_CARLO_POINTS // 200):
            inner = _domain(rng, 3)
            outer = Ellipsoid(tuple(_rat(rng, 10, 90) for _ in range(3)))
            if not includes(outer, inner).holds:
                outer = scale(inner, 2) if isinstance(inner, Ellipsoid) else Ellipsoid(tuple(3 * s for s in _box(inner)))
            assert includes(outer, inner).holds
            for _ in range(200):
                assert contains(outer, _sample(rng, inner))


class TestScaling:
    @pytest.mark.parametrize("n", [2, 3])
    def test_inclusion_verdict(self, rng, n):
        for _ in range(SCALING_DRAWS):
            inner = _domain(rng, n)
            outer = Ellipsoid(tuple(_rat(rng, 5, 60) for _ in range(n)))
            lam = _rat(rng, 1, 12)
            before = includes(outer, inner)
            after = includes(scale(outer, lam), scale(inner, lam))
            assert (after.verdict, after.margin) == (before.verdict, before.margin)

    def test_volume(self, rng):
        for _ in range(SCALING_DRAWS):
            d = _domain(rng, rng.choice((2, 3, 4)))
            lam = _rat(rng, 1, 12)
            assert volume(scale(d, lam)) == lam ** d.n * volume(d)

    def test_conley_zehnder(self, rng):
        for _ in range(SCALING_DRAWS):
            q = Polylike(_rat(rng), (_rat(rng), _rat(rng)))
            lam = _rat(rng, 1, 12)
            for o in (Elliptic(1, 2), Elliptic(2, 3), Elliptic(3, 1), Hyperbolic(2, 1, 2), Hyperbolic(3, 2, 1)):
                assert cz_index(o, scale(q, lam)) == cz_index(o, q)
                assert action(o, scale(q, lam)) == lam * action(o, q)

    def test_orbit_labels(self, rng):
        q = Polylike(_quarter(rng, 4, 20), (_quarter(rng, 4, 20), _quarter(rng, 4, 20)))
        lam = _rat(rng, 1, 12)
        bound = 3 * q.b
        plain = [r.label for r in enumerate_orbits(q, bound)]
        scaled = [r.label for r in enumerate_orbits(scale(q, lam), lam * bound)]
        assert plain == scaled


class TestOrbitOracle:
    # coefficients >= 1 and bounds <= 30 keep every multiplicity below 40

    def test_ellipsoid(self, rng):
        for _ in range(DRAWS):
            E = Ellipsoid(tuple(_quarter(rng, 4, 40) for _ in range(rng.choice((2, 3)))))
            bound = _quarter(rng, 10, 120)
            expected = {
                EllipsoidClosed(k, r)
                for k, c in enumerate(E.coeffs, start=1)
                for r in range(1, 40)
                if r * c <= bound
            }
            records = enumerate_orbits(E, bound)
            assert {r.orbit for r in records} == expected
            assert [r.action for r in records] == sorted(r.action for r in records)
            c = E.coeffs
            for rec in records:
                k, r = rec.orbit.axis, rec.orbit.mult
                floors = sum(r * c[k - 1] // c[j] for j in range(E.n) if j != k - 1)
                assert rec.cz == 2 * r + E.n - 1 + 2 * floors

    def test_polylike(self, rng):
        for _ in range(DRAWS):
            q = Polylike(_quarter(rng, 4, 40), tuple(_quarter(rng, 4, 40) for _ in range(rng.choice((1, 2)))))
            bound = _quarter(rng, 10, 120)
            expected = {
                Elliptic(k, r)
                for k in range(1, q.n + 1)
                for r in range(1, 40)
                if r * q.coefficient(k) <= bound
            }
            expected |= {
                Hyperbolic(k, m, s)
                for k in range(2, q.n + 1)
                for m in range(1, 40)
                for s in range(1, 40)
                if m * q.b + s * q.coefficient(k) <= bound
            }
            records = enumerate_orbits(q, bound)
            assert {r.orbit for r in records} == expected
            assert all(r.at_bound == (r.action == bound) for r in records)

    def test_polydisk(self, rng):
        for _ in range(DRAWS // 2):
            P = Polydisk(tuple(_quarter(rng, 4, 40) for _ in range(rng.choice((2, 3)))))
            bound = _quarter(rng, 10, 60)
            expected = set()
            for mults in itertools.product(range(0, 16), repeat=P.n):
                if not any(mults):
                    continue
                if sum(m * w for m, w in zip(mults, P.widths)) > bound:
                    continue
                axes = tuple(j + 1 for j, m in enumerate(mults) if m)
                expected.add(PolydiskToric(axes, tuple(m for m in mults if m)))
            assert {r.orbit for r in enumerate_orbits(P, bound)} == expected


class TestCurveOracle:
    def _key(self, c):
        return c.degree, tuple(sorted(orbit_label(o) for o in c.negative_ends))

    def test_cap_curves(self, rng):
        # smallest action >= 2 and R <= 9 leave at most four ends
        for _ in range(DRAWS // 4):
            q = Polylike(_quarter(rng, 8, 16), (_quarter(rng, 8, 16), _quarter(rng, 16, 32)))
            R = q.b + q.a2 + _quarter(rng, 1, 4)
            orbits = [r.orbit for r in enumerate_orbits(q, R)]
            cap = Cap(q, R)
            expected = set()
            for size in range(0, 5):
                for ends in itertools.combinations_with_replacement(orbits, size):
                    c = CurveClass(1, ends, cap)
                    if curve_area(c) > 0:
                        expected.add(self._key(c))
            found = enumerate_cap_curves(q, R, EnumerationQuery(degree=1))
            assert {self._key(c) for c in found} == expected
            assert len(found) == len(expected)


class TestMonotonicity:
    def test_extra_end(self, rng):
        for _ in range(DRAWS):
            q = Polylike(_rat(rng, 6, 20), (_rat(rng, 4, 20), _rat(rng, 10, 40)))
            R = 4 * (q.b + q.coefficient(3))
            base_ends = rng.choice(((), (Elliptic(1, 1),), (Hyperbolic(2, 1, 1),)))
            extra = rng.choice((Elliptic(1, 1), Elliptic(2, 1), Elliptic(3, 1), Hyperbolic(2, 1, 1), Hyperbolic(3, 1, 1)))
            before = CurveClass(1, base_ends, Cap(q, R))
            after = CurveClass(1, base_ends + (extra,), Cap(q, R))
            assert curve_area(after) < curve_area(before)
            assert virtual_index(after) < virtual_index(before)


class TestCapacityOracle:
    def test_second_capacity_is_min(self, rng):
        for _ in range(CAPACITY_DRAWS):
            E = Ellipsoid(tuple(_rat(rng) for _ in range(rng.choice((2, 3, 4)))))
            c = sorted(E.coeffs)
            assert eh_capacity_ellipsoid(E, 2) == min(2 * c[0], c[1])

    def test_e24_below_four_is_obstructed(self, rng):
        E24 = Ellipsoid((F(2), F(4)))
        for _ in range(DRAWS):
            R = F(rng.randint(1, 399), 100)
            assert is_obstructed(obstruct_embedding(E24, ball(R)))

    def test_inclusions_are_never_obstructed(self, rng):
        for _ in range(PAIR_DRAWS):
            n = rng.choice((2, 3))
            source = Ellipsoid(tuple(_rat(rng) for _ in range(n)))
            grow = _rat(rng, 0, 20)
            kind = rng.choice(("E", "B", "ball") if n == 2 else ("E", "B"))
            if kind == "E":
                target = Ellipsoid(tuple(c + _rat(rng, 0, 20) for c in source.coeffs))
            elif kind == "B":
                target = BallProduct(max(source.coeffs[:2]) + grow, n)
            else:
                target = ball(max(source.coeffs) + grow)
            assert includes(target, source).holds, (target, source)
            assert not is_obstructed(obstruct_embedding(source, target)), (source, target)


class TestInclusionAlgebra:
    def test_reflexive(self, rng):
        for _ in range(DRAWS):
            n = rng.choice((2, 3, 4))
            for d in (
                Ellipsoid(tuple(_rat(rng) for _ in range(n))),
                Polydisk(tuple(_rat(rng) for _ in range(n))),
                BallProduct(_rat(rng), n),
            ):
                v = includes(d, d)
                assert (v.verdict, v.margin) == (Verdict.BOUNDARY, 0)

    def test_transitive(self, rng):
        chains = 0
        for _ in range(PAIR_DRAWS // 4):
            n = rng.choice((2, 3))
            inner = _domain(rng, n)
            if rng.random() < 0.5:
                middle = Ellipsoid(tuple((n + 1) * s for s in _box(inner)))
            else:
                middle = Ellipsoid(tuple(_rat(rng, 5, 90) for _ in range(n)))
            if rng.random() < 0.5:
                outer = Ellipsoid(tuple(c + _rat(rng, 0, 20) for c in middle.coeffs))
            else:
                outer = BallProduct(max(middle.coeffs[:2]) + _rat(rng, 0, 20), n)
            first, second = includes(middle, inner), includes(outer, middle)
            if first.verdict is Verdict.INSIDE and second.verdict is Verdict.INSIDE:
                chains += 1
                assert includes(outer, inner).verdict is Verdict.INSIDE, (outer, middle, inner)
        assert chains > 0


class TestRelabeling:
    def _relabel(self, d, perm):
        if isinstance(d, Ellipsoid):
            return Ellipsoid(tuple(d.coeffs[p] for p in perm))
        if isinstance(d, Polydisk):
            return Polydisk(tuple(d.widths[p] for p in perm))
        # the disk stays first; perm moves tail coordinates only
        return Polylike(d.b, tuple(d.tail[p - 1] for p in perm[1:]))

    def _perm(self, rng, d):
        fixed = 1 if isinstance(d, Polylike) else 0
        rest = list(range(fixed, d.n))
        rng.shuffle(rest)
        return tuple(range(fixed)) + tuple(rest)

    def _floor_hits(self, d):
        return sum(1 for text, _ in genericity_check(d, 6).violations if text.startswith("floor boundary"))

    def test_volume(self, rng):
        for _ in range(SCALING_DRAWS):
            d = _domain(rng, rng.choice((2, 3, 4)))
            assert volume(self._relabel(d, self._perm(rng, d))) == volume(d)

    @pytest.mark.parametrize("n", [2, 3])
    def test_inclusion_verdict(self, rng, n):
        for _ in range(SCALING_DRAWS):
            inner = _domain(rng, n)
            outer = Ellipsoid(tuple(_rat(rng, 5, 60) for _ in range(n)))
            perm = self._perm(rng, inner)
            before = includes(outer, inner)
            after = includes(self._relabel(outer, perm), self._relabel(inner, perm))
            assert (after.verdict, after.margin) == (before.verdict, before.margin)

    def test_genericity_count(self, rng):
        for _ in range(SCALING_DRAWS):
            d = _domain(rng, rng.choice((2, 3, 4)))
            assert self._floor_hits(self._relabel(d, self._perm(rng, d))) == self._floor_hits(d)


class TestCoverMonotonicity:
    def test_elliptic(self, rng):
        for _ in range(DRAWS):
            q = Polylike(_rat(rng), (_rat(rng), _rat(rng)))
            for k in range(1, q.n + 1):
                covers = [Elliptic(k, r) for r in range(1, 6)]
                assert _increasing([action(o, q) for o in covers])
                assert _increasing([cz_index(o, q) for o in covers])

    def test_ellipsoid(self, rng):
        for _ in range(DRAWS):
            E = Ellipsoid(tuple(_rat(rng) for _ in range(rng.choice((2, 3)))))
            for k in range(1, E.n + 1):
                covers = [EllipsoidClosed(k, r) for r in range(1, 6)]
                assert _increasing([action(o, E) for o in covers])
                assert _increasing([cz_index(o, E) for o in covers])

    def test_hyperbolic(self, rng):
        for _ in range(DRAWS):
            q = Polylike(_rat(rng), (_rat(rng), _rat(rng)))
            k = rng.choice((2, 3))
            for fixed in range(1, 4):
                along_m = [Hyperbolic(k, m, fixed) for m in range(1, 6)]
                along_q = [Hyperbolic(k, fixed, s) for s in range(1, 6)]
                for family in (along_m, along_q):
                    assert _increasing([action(o, q) for o in family])
                    assert _increasing([cz_index(o, q) for o in family])

    def test_toric_action(self, rng):
        for _ in range(DRAWS):
            P = Polydisk(tuple(_rat(rng) for _ in range(3)))
            axes = tuple(sorted(rng.sample((1, 2, 3), rng.choice((1, 2, 3)))))
            base = [rng.randint(1, 4) for _ in axes]
            covers = [PolydiskToric(axes, tuple(r * m for m in base)) for r in range(1, 6)]
            assert _increasing([action(o, P) for o in covers])


class TestCrossEngineSoundness:
    def test_derived_embeddings_are_never_obstructed(self, rng):
        derived = 0
        for _ in range(PAIR_DRAWS):
            source = Ellipsoid((_rat(rng, 1, 12), _rat(rng, 1, 40)))
            if rng.random() < 0.5:
                target = ball(_rat(rng, 1, 60))
            else:
                target = BallProduct(_rat(rng, 1, 60))
            cert = derive_embedding(source, target, depth=1, workers=1)
            if cert is None:
                continue
            derived += 1
            assert verify_certificate(cert), (source, target)
            assert not is_obstructed(obstruct_embedding(source, target)), (source, target)
        assert derived > 0
