"""
Tests for the toric domain layer.

Core claims:
    - Domains reject malformed data at construction
    - Volumes follow the product formulas; ball products are unbounded
    - Every inclusion criterion is exact, with ties reported as BOUNDARY
    - Genericity reports flag integral floor arguments and hypothesis edges
    - The JSON codec round-trips and reports where parsing failed
"""

from fractions import Fraction

import pytest

from sympemb.domains import (
    BallProduct,
    Ellipsoid,
    Polydisk,
    Polylike,
    TruncatedEllipsoid,
    Verdict,
    ball,
    contains,
    describe,
    domain_from_json,
    domain_to_json,
    dumps_domain,
    genericity_check,
    includes,
    loads_domain,
    scale,
    sup_linear,
    volume,
)
from sympemb.errors import DomainError, UnsupportedPair
from sympemb.rational import INFINITE


F = Fraction


# -- Helpers -----------------------------------------------------------------

def _E(*c):
    return Ellipsoid(tuple(F(x) for x in c))


def _trunc():
    """E(2,4) cut to R_2 >= 2."""
    return TruncatedEllipsoid(_E(2, 4), 2, F(2))


class TestConstruction:
    def test_string_coefficients_parse(self):
        assert Ellipsoid(("3/2", "2")).coeffs == (F(3, 2), F(2))

    @pytest.mark.parametrize("build", [
        lambda: Ellipsoid((F(1),)),
        lambda: Ellipsoid((F(1), F(-1))),
        lambda: Polydisk((F(0), F(1))),
        lambda: Polylike(F(1), ()),
        lambda: Polylike(F(1), (F(1), F(2)), disk_axis=4),
        lambda: TruncatedEllipsoid(_E(2, 4), 2, F(4)),
        lambda: TruncatedEllipsoid(_E(2, 4, 5), 1, F(1)),
        lambda: BallProduct(F(3), 1),
        lambda: BallProduct(F(0), 3),
    ])
    def test_invalid(self, build):
        with pytest.raises(DomainError):
            build()

    def test_truncated_vertices(self):
        assert set(_trunc().vertices()) == {(F(0), F(2)), (F(1), F(2)), (F(0), F(4))}

    def test_polylike_coefficients_follow_disk(self):
        q = Polylike(F(3, 2), (F(1), F(2)), disk_axis=3)
        assert [q.coefficient(k) for k in (1, 2, 3)] == [F(1), F(2), F(3, 2)]

    def test_describe(self, q_generic):
        assert describe(_E(2, 4)) == "E(2,4)"
        assert describe(q_generic) == "Q(3/2;1,11/5)"
        assert describe(BallProduct(F(7, 2), 3)) == "B4(7/2)xR2"
        assert describe(_trunc()) == "E(2,4)&R2>=2"


class TestVolume:
    def test_ellipsoid(self):
        assert volume(_E(2, 4)) == 4

    def test_polydisk(self):
        assert volume(Polydisk((F(1), F(2)))) == 2

    def test_ball_product_is_unbounded(self):
        assert volume(BallProduct(F(3), 3)) == INFINITE

    def test_polylike(self, q_boundary):
        assert volume(q_boundary) == F(3, 2)

    def test_truncated(self):
        assert volume(_trunc()) == 1


class TestScale:
    def test_examples(self):
        assert scale(_E(1, 2), 2) == _E(2, 4)
        assert scale(Polydisk((F(1), F(2))), 1) == Polydisk((F(1), F(2)))
        assert scale(Polylike(F(3, 2), (F(1), F(2))), F(2, 3)) == Polylike(F(1), (F(2, 3), F(4, 3)))

    def test_nonpositive_factor(self):
        with pytest.raises(DomainError):
            scale(_E(1, 2), 0)


class TestIncludes:
    def test_polylike_in_ellipsoid_tie(self, q_boundary):
        v = includes(_E(3, 2, 4), q_boundary)
        assert v.verdict is Verdict.BOUNDARY
        assert v.margin == 0
        assert v.holds

    def test_ellipsoid_tie_on_second_axis(self):
        v = includes(_E(4, 4), _E(2, 4))
        assert v.verdict is Verdict.BOUNDARY
        assert dict(v.slacks) == {1: F(2), 2: F(0)}

    def test_truncated_in_ellipsoid(self):
        v = includes(_E(F(8, 5), F(32, 5)), _trunc())
        assert v.verdict is Verdict.INSIDE
        assert v.margin == F(1, 16)

    def test_polylike_in_ball_product(self, q_boundary):
        v = includes(BallProduct(F(7, 2), 3), q_boundary)
        assert v.verdict is Verdict.INSIDE
        assert v.margin == 1

    def test_polylike_in_ball_product_sharp(self, q_generic):
        assert includes(BallProduct(F(5, 2), 3), q_generic).verdict is Verdict.BOUNDARY
        assert includes(BallProduct(F(249, 100), 3), q_generic).verdict is Verdict.OUTSIDE

    def test_polydisk_in_ball_product(self):
        assert includes(BallProduct(F(7, 2)), Polydisk((F(1), F(5, 2)))).verdict is Verdict.BOUNDARY

    def test_ball_product_in_ball_product(self):
        v = includes(BallProduct(F(4), 3), BallProduct(F(3), 3))
        assert (v.verdict, v.margin) == (Verdict.INSIDE, F(1))

    def test_polylike_in_polydisk(self, q_boundary):
        v = includes(Polydisk((F(2), F(1), F(3))), q_boundary)
        assert v.verdict is Verdict.BOUNDARY
        assert "coordinate 2" in v.binding

    def test_outside_has_negative_margin(self):
        v = includes(_E(2, 4), _E(3, 3))
        assert v.verdict is Verdict.OUTSIDE
        assert v.margin < 0
        assert not v.holds

    def test_unsupported(self):
        with pytest.raises(UnsupportedPair):
            includes(Polydisk((F(1), F(2))), _E(1, 2))
        with pytest.raises(UnsupportedPair):
            includes(_E(1, 2, 3), _E(1, 2))


class TestSupport:
    def test_sup_linear(self, q_generic):
        assert sup_linear(q_generic, (F(1), F(1), F(0))) == F(5, 2)
        assert sup_linear(_E(2, 4), (F(1), F(1, 4))) == 2

    def test_ball_product_unbounded_direction(self):
        assert sup_linear(BallProduct(F(3), 3), (F(0), F(0), F(1))) == INFINITE

    def test_negative_weights(self):
        with pytest.raises(ValueError):
            sup_linear(_E(2, 4), (F(-1), F(1)))

    def test_contains(self, q_generic):
        assert contains(q_generic, (F(3, 2), F(1, 2), F(11, 10)))
        assert not contains(q_generic, (F(2), F(0), F(0)))
        assert contains(_trunc(), (F(1), F(2)))
        assert not contains(_trunc(), (F(1), F(1)))


class TestGenericity:
    def test_polylike_hypothesis_edge(self, q_boundary):
        report = genericity_check(q_boundary)
        assert not report.clean
        assert any("a3 = 2*a2" in text for text, _ in report.violations)

    def test_generic_polylike(self, q_generic):
        assert genericity_check(q_generic, bound=5).clean

    def test_ellipsoid_integral_ratio(self):
        report = genericity_check(_E(2, 4))
        assert ((2, 1) in [pair for _, pair in report.violations])


class TestJson:
    @pytest.mark.parametrize("d", [
        Ellipsoid((F(2), F(4))),
        Polydisk((F(1), F(5, 2))),
        Polylike(F(3, 2), (F(1), F(11, 5)), disk_axis=3),
        TruncatedEllipsoid(Ellipsoid((F(2), F(4))), 2, F(2)),
        BallProduct(F(7, 2), 3),
    ])
    def test_round_trip(self, d):
        assert loads_domain(dumps_domain(d)) == d
        assert domain_from_json(domain_to_json(d)) == d

    def test_canonical_text(self):
        assert dumps_domain(ball(F(7, 2))) == '{"coeffs":["7/2","7/2"],"type":"ellipsoid"}'

    def test_truncated_accepts_list_base(self):
        d = domain_from_json({"type": "truncated_ellipsoid", "base": ["2", "4"], "axis": 2, "cut": "2"})
        assert d == _trunc()

    def test_errors_name_location(self):
        with pytest.raises(DomainError, match="missing field 'tail'"):
            domain_from_json({"type": "polylike", "b": "1"})
        with pytest.raises(DomainError, match=r"\$\.coeffs\[1\]"):
            domain_from_json({"type": "ellipsoid", "coeffs": ["1", "x"]})
        with pytest.raises(DomainError, match="unknown domain type"):
            domain_from_json({"type": "torus"})

    def test_malformed_text(self):
        with pytest.raises(DomainError, match="line 1 column"):
            loads_domain('{"type": ')
