"""
Tests for Reeb orbit species, actions and Conley-Zehnder indices.

Core claims:
    - Actions are the linear combinations of capacities the species prescribe
    - Index formulas match the closed forms, with half-integers for hyperbolic families
    - Integral floor arguments are reported, and raise in strict mode
    - Enumeration is complete and sorted by action
    - Labels parse back to the orbit they name
"""

from fractions import Fraction

import pytest

from sympemb.domains import BallProduct, Ellipsoid, Polydisk
from sympemb.errors import FloorBoundary, OrbitLabelError, SpeciesMismatch, UnspecifiedIndex
from sympemb.reeb import (
    INFINITESIMAL,
    Elliptic,
    EllipsoidClosed,
    Hyperbolic,
    PolydiskToric,
    SmoothingPolicy,
    action,
    action_bounds,
    conley_zehnder,
    cz_index,
    enumerate_orbits,
    exists,
    family_dimension,
    orbit_label,
    parse_orbit,
)


F = Fraction

E24 = Ellipsoid((F(2), F(4)))
E2513 = Ellipsoid((F(2), F(5), F(13)))


class TestAction:
    def test_hyperbolic(self, q_generic):
        assert action(Hyperbolic(2, 1, 1), q_generic) == F(5, 2)

    def test_elliptic(self, q_generic):
        assert action(Elliptic(1, 2), q_generic) == 3
        assert action(Elliptic(3, 1), q_generic) == F(11, 5)

    def test_ellipsoid(self):
        assert action(EllipsoidClosed(2, 1), E24) == 4

    def test_toric(self):
        P = Polydisk((F(1), F(2), F(5)))
        assert action(PolydiskToric((1, 3), (1, 2)), P) == 11

    def test_species_mismatch(self, q_generic):
        with pytest.raises(SpeciesMismatch):
            action(EllipsoidClosed(1, 1), q_generic)
        with pytest.raises(SpeciesMismatch):
            action(Elliptic(4, 1), q_generic)
        with pytest.raises(SpeciesMismatch):
            action(Elliptic(1, 1), BallProduct(F(3), 3))

    def test_explicit_interval_encloses_nominal(self, q_generic):
        policy = SmoothingPolicy(F(1, 10), F(1, 100))
        lo, hi = action_bounds(Hyperbolic(2, 1, 1), q_generic, policy)
        assert lo < hi == F(5, 2)
        assert action_bounds(Elliptic(1, 1), q_generic, policy) == (F(3, 2), F(3, 2))


class TestConleyZehnder:
    def test_elliptic_first_axis(self, q_generic):
        assert cz_index(Elliptic(1, 2), q_generic) == 6

    def test_hyperbolic_half_integer(self, q_generic):
        assert cz_index(Hyperbolic(2, 1, 1), q_generic) == F(11, 2)

    def test_elliptic_tail_axis(self, q_generic):
        assert cz_index(Elliptic(2, 3), q_generic) == 10
        assert cz_index(Elliptic(3, 1), q_generic) == 8

    def test_ellipsoid(self):
        assert cz_index(EllipsoidClosed(1, 2), E2513) == 6
        assert cz_index(EllipsoidClosed(2, 1), E2513) == 8

    def test_explicit_epsilon_floor(self, q_generic):
        # epsilon * r * a_2 = 1/2 * 2 * 1 = 1 sits on an integer
        policy = SmoothingPolicy(F(1, 2), F(1, 4))
        result = conley_zehnder(Elliptic(2, 2), q_generic, policy)
        assert result.value == 2 * 2 + 2 + 2 * 1
        assert result.on_boundary

    def test_boundary_reported(self, q_boundary):
        result = conley_zehnder(Elliptic(2, 2), q_boundary)
        assert result.value == 4 + 2 + 2
        assert result.boundary_terms == ("floor(2*a2/a3) = 1",)

    def test_strict_raises(self, q_boundary):
        with pytest.raises(FloorBoundary) as info:
            cz_index(Elliptic(2, 2), q_boundary, strict=True)
        assert info.value.value == 8

    def test_lenient_warns(self, q_boundary, caplog):
        assert cz_index(Elliptic(2, 2), q_boundary) == 8
        assert "floor arguments at integers" in caplog.text

    def test_toric_unspecified(self):
        with pytest.raises(UnspecifiedIndex):
            cz_index(PolydiskToric((1, 3), (1, 1)), Polydisk((F(1), F(2), F(5))))


class TestSmoothingPolicy:
    @pytest.mark.parametrize("eps, delta", [(F(1, 10), None), (F(1, 10), F(1, 5)), (F(1), F(1, 2))])
    def test_invalid(self, eps, delta):
        with pytest.raises(ValueError):
            SmoothingPolicy(eps, delta)

    def test_infinitesimal_floors_vanish(self):
        assert INFINITESIMAL.eps_floor(F(10**6)) == (0, False)

    def test_slope_window(self, q_generic):
        policy = SmoothingPolicy(F(1, 2), F(1, 4))
        # slope m / (q a_2) = 1 is inside (1/2, 2); 3 is not
        assert exists(Hyperbolic(2, 1, 1), q_generic, policy)
        assert not exists(Hyperbolic(2, 3, 1), q_generic, policy)


class TestEnumerate:
    def test_generic_polylike(self, q_generic):
        records = enumerate_orbits(q_generic, F(5, 2))
        assert [(r.label, r.action) for r in records] == [
            ("g^2*1", F(1)),
            ("g^1*1", F(3, 2)),
            ("g^2*2", F(2)),
            ("g^3*1", F(11, 5)),
            ("g^2_{1,1}", F(5, 2)),
        ]
        assert [r.at_bound for r in records] == [False] * 4 + [True]

    def test_ellipsoid(self):
        records = enumerate_orbits(E24, 4)
        assert [(r.label, r.action, r.cz) for r in records] == [
            ("d^1*1", F(2), F(3)),
            ("d^1*2", F(4), F(7)),
            ("d^2*1", F(4), F(7)),
        ]

    def test_below_minimal_action(self, q_generic):
        assert enumerate_orbits(q_generic, F(1, 2)) == []

    def test_polydisk_toric_without_index(self):
        records = enumerate_orbits(Polydisk((F(1), F(5, 2))), F(7, 2))
        labels = [r.label for r in records]
        assert labels == ["g{1}_{1}", "g{1}_{2}", "g{2}_{1}", "g{1}_{3}", "g{1,2}_{1,1}"]
        assert all(r.cz is None for r in records)

    def test_workers_do_not_change_order(self, q_generic):
        assert enumerate_orbits(q_generic, 5, workers=3) == enumerate_orbits(q_generic, 5, workers=1)

    def test_rejects(self, q_generic):
        with pytest.raises(ValueError):
            enumerate_orbits(q_generic, 0)
        with pytest.raises(SpeciesMismatch):
            enumerate_orbits(BallProduct(F(3), 3), 3)


class TestLabels:
    @pytest.mark.parametrize("o", [
        Elliptic(1, 2),
        Hyperbolic(2, 1, 1),
        Hyperbolic(3, 2, 4),
        PolydiskToric((1, 3), (1, 1)),
        EllipsoidClosed(2, 1),
    ])
    def test_round_trip(self, o):
        assert parse_orbit(orbit_label(o)) == o

    def test_default_multiplicity(self):
        assert parse_orbit("g^2") == Elliptic(2, 1)
        assert parse_orbit("d^1") == EllipsoidClosed(1, 1)

    @pytest.mark.parametrize("bad", ["g^0*1", "h^1", "g^1_{0,1}", "g{2,1}_{1,1}"])
    def test_invalid(self, bad):
        with pytest.raises(OrbitLabelError):
            parse_orbit(bad)

    def test_family_dimension(self):
        assert family_dimension(Elliptic(1, 1)) == 0
        assert family_dimension(Hyperbolic(2, 1, 1)) == 1
        assert family_dimension(PolydiskToric((1, 2, 3), (1, 1, 1))) == 2
        assert Hyperbolic(2, 2, 4).cover_degree == 2
