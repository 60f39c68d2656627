"""Toric domains in C^n, their volumes, rescaling and exact inclusion tests.

All domains here are described in action coordinates R_j = pi |z_j|^2, so a
domain is a region of the nonnegative orthant and every inclusion criterion
reduces to the supremum of a nonnegative linear form over that region
(``sup_linear``). Coordinates are numbered from 1 in labels and descriptions.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

from .errors import DomainError, RationalParseError, UnsupportedPair
from .rational import INFINITE, Extended, fmt_rat, is_integral, parse_rat, parse_rats

logger = logging.getLogger(__name__)


def _positive_tuple(values: Sequence[Any], name: str, min_len: int) -> tuple[Fraction, ...]:
    try:
        out = parse_rats(values, name)
    except RationalParseError as e:
        raise DomainError(str(e)) from None
    if len(out) < min_len:
        raise DomainError(f"{name} needs at least {min_len} entries, got {len(out)}")
    if any(v <= 0 for v in out):
        raise DomainError(f"{name} entries must be positive: {[fmt_rat(v) for v in out]}")
    return out


def _positive(value: Any, name: str) -> Fraction:
    try:
        v = parse_rat(value, name)
    except RationalParseError as e:
        raise DomainError(str(e)) from None
    if v <= 0:
        raise DomainError(f"{name} must be positive, got {fmt_rat(v)}")
    return v


@dataclass(frozen=True)
class Ellipsoid:
    """E(a_1..a_n) = { sum_j R_j / a_j <= 1 }."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _positive_tuple(self.coeffs, "coeffs", 2))

    @property
    def n(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class Polydisk:
    """P(a_1..a_n) = { R_j <= a_j for all j }."""

    widths: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", _positive_tuple(self.widths, "widths", 2))

    @property
    def n(self) -> int:
        return len(self.widths)


@dataclass(frozen=True)
class Polylike:
    """Q(b, a_2..a_n): a disk of capacity b times an ellipsoid E(a_2..a_n).

    ``disk_axis`` is the coordinate carrying the disk; the tail coefficients
    fill the remaining coordinates in increasing order.
    """

    b: Fraction
    tail: tuple[Fraction, ...]
    disk_axis: int = 1

    def __post_init__(self):
        object.__setattr__(self, "b", _positive(self.b, "b"))
        object.__setattr__(self, "tail", _positive_tuple(self.tail, "tail", 1))
        if not 1 <= self.disk_axis <= self.n:
            raise DomainError(f"disk_axis {self.disk_axis} outside 1..{self.n}")

    @property
    def n(self) -> int:
        return len(self.tail) + 1

    @property
    def ellipsoid_axes(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.n + 1) if k != self.disk_axis)

    def coefficient(self, k: int) -> Fraction:
        """Capacity attached to coordinate k (the disk b, or an ellipsoid coefficient)."""
        if k == self.disk_axis:
            return self.b
        return self.tail[self.ellipsoid_axes.index(k)]

    @property
    def a2(self) -> Fraction:
        return self.tail[0]


@dataclass(frozen=True)
class TruncatedEllipsoid:
    """E(c_1, c_2) cut down to { R_axis >= cut }."""

    base: Ellipsoid
    axis: int
    cut: Fraction

    def __post_init__(self):
        if not isinstance(self.base, Ellipsoid):
            object.__setattr__(self, "base", Ellipsoid(tuple(self.base)))
        if self.base.n != 2:
            raise DomainError("truncated ellipsoids need a 4-dimensional base")
        if self.axis not in (1, 2):
            raise DomainError(f"cut axis must be 1 or 2, got {self.axis}")
        try:
            cut = parse_rat(self.cut, "cut")
        except RationalParseError as e:
            raise DomainError(str(e)) from None
        object.__setattr__(self, "cut", cut)
        if cut < 0 or cut >= self.base.coeffs[self.axis - 1]:
            raise DomainError(f"cut {fmt_rat(cut)} leaves an empty region")

    @property
    def n(self) -> int:
        return 2

    def vertices(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Corners of the (triangular) region in action coordinates."""
        c = self.base.coeffs
        k = self.axis - 1
        o = 1 - k
        t = self.cut
        spare = c[o] * (1 - t / c[k])
        corners = []
        for rk, ro in ((t, Fraction(0)), (t, spare), (c[k], Fraction(0))):
            point = [Fraction(0), Fraction(0)]
            point[k], point[o] = rk, ro
            corners.append(tuple(point))
        return tuple(corners)


@dataclass(frozen=True)
class BallProduct:
    """B^4(R) x R^{2(n-2)}: the first two coordinates satisfy R_1 + R_2 <= R."""

    R: Fraction
    n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "R", _positive(self.R, "R"))
        if self.n < 2:
            raise DomainError(f"ball product dimension n must be >= 2, got {self.n}")


Domain = Union[Ellipsoid, Polydisk, Polylike, TruncatedEllipsoid, BallProduct]

KIND = {
    Ellipsoid: "ellipsoid",
    Polydisk: "polydisk",
    Polylike: "polylike",
    TruncatedEllipsoid: "truncated_ellipsoid",
    BallProduct: "ball_product",
}


def ball(R: Any) -> Ellipsoid:
    """The round 4-ball B^4(R) as an ellipsoid."""
    return Ellipsoid((R, R))


def dimension(d: Domain) -> int:
    return d.n


def describe(d: Domain) -> str:
    """Short human label, e.g. ``E(2,4)`` or ``Q(3/2;1,11/5)``."""
    if isinstance(d, Ellipsoid):
        return "E(" + ",".join(map(fmt_rat, d.coeffs)) + ")"
    if isinstance(d, Polydisk):
        return "P(" + ",".join(map(fmt_rat, d.widths)) + ")"
    if isinstance(d, Polylike):
        body = f"Q({fmt_rat(d.b)};" + ",".join(map(fmt_rat, d.tail)) + ")"
        return body if d.disk_axis == 1 else f"{body}@disk{d.disk_axis}"
    if isinstance(d, TruncatedEllipsoid):
        return f"{describe(d.base)}&R{d.axis}>={fmt_rat(d.cut)}"
    if isinstance(d, BallProduct):
        return f"B4({fmt_rat(d.R)})" + (f"xR{2 * (d.n - 2)}" if d.n > 2 else "")
    raise TypeError(f"not a domain: {d!r}")


# -- Volumes ------------------------------------------------------------------

def volume(d: Domain) -> Extended:
    """Euclidean volume in the normalization where vol P(a_1..a_n) = prod a_j."""
    if isinstance(d, Ellipsoid):
        return math.prod(d.coeffs, start=Fraction(1)) / math.factorial(d.n)
    if isinstance(d, Polydisk):
        return math.prod(d.widths, start=Fraction(1))
    if isinstance(d, Polylike):
        return d.b * math.prod(d.tail, start=Fraction(1)) / math.factorial(d.n - 1)
    if isinstance(d, TruncatedEllipsoid):
        c1, c2 = d.base.coeffs
        keep = 1 - d.cut / d.base.coeffs[d.axis - 1]
        return c1 * c2 / 2 * keep * keep
    if isinstance(d, BallProduct):
        return INFINITE
    raise TypeError(f"not a domain: {d!r}")


# -- Rescaling ----------------------------------------------------------------

def scale(d: Domain, lam: Any) -> Domain:
    """Multiply every defining capacity of ``d`` by ``lam`` > 0."""
    lam = _positive(lam, "scale factor")
    if isinstance(d, Ellipsoid):
        return Ellipsoid(tuple(lam * c for c in d.coeffs))
    if isinstance(d, Polydisk):
        return Polydisk(tuple(lam * w for w in d.widths))
    if isinstance(d, Polylike):
        return Polylike(lam * d.b, tuple(lam * a for a in d.tail), d.disk_axis)
    if isinstance(d, TruncatedEllipsoid):
        return TruncatedEllipsoid(scale(d.base, lam), d.axis, lam * d.cut)
    if isinstance(d, BallProduct):
        return BallProduct(lam * d.R, d.n)
    raise TypeError(f"not a domain: {d!r}")


# -- Membership and support ---------------------------------------------------

def contains(d: Domain, point: Sequence[Fraction]) -> bool:
    """Whether the action-coordinate point (R_1..R_n) satisfies d's inequalities."""
    if len(point) != d.n or any(r < 0 for r in point):
        return False
    if isinstance(d, Ellipsoid):
        return sum(r / c for r, c in zip(point, d.coeffs)) <= 1
    if isinstance(d, Polydisk):
        return all(r <= w for r, w in zip(point, d.widths))
    if isinstance(d, Polylike):
        if point[d.disk_axis - 1] > d.b:
            return False
        return sum(point[k - 1] / d.coefficient(k) for k in d.ellipsoid_axes) <= 1
    if isinstance(d, TruncatedEllipsoid):
        return point[d.axis - 1] >= d.cut and contains(d.base, point)
    if isinstance(d, BallProduct):
        return point[0] + point[1] <= d.R
    raise TypeError(f"not a domain: {d!r}")


def sup_linear(d: Domain, weights: Sequence[Fraction]) -> Extended:
    """Supremum over ``d`` of sum_j w_j R_j for nonnegative weights."""
    w = tuple(Fraction(x) for x in weights)
    if len(w) != d.n or any(x < 0 for x in w):
        raise ValueError(f"need {d.n} nonnegative weights, got {w}")
    if isinstance(d, Ellipsoid):
        return max(x * c for x, c in zip(w, d.coeffs))
    if isinstance(d, Polydisk):
        return sum((x * a for x, a in zip(w, d.widths)), Fraction(0))
    if isinstance(d, Polylike):
        disk = w[d.disk_axis - 1] * d.b
        return disk + max(w[k - 1] * d.coefficient(k) for k in d.ellipsoid_axes)
    if isinstance(d, TruncatedEllipsoid):
        return max(w[0] * r1 + w[1] * r2 for r1, r2 in d.vertices())
    if isinstance(d, BallProduct):
        if any(x > 0 for x in w[2:]):
            return INFINITE
        return max(w[0], w[1]) * d.R
    raise TypeError(f"not a domain: {d!r}")


def ellipsoid_gauge(inner: Domain, coeffs: Sequence[Fraction]) -> Extended:
    """sup over ``inner`` of sum_j R_j / c_j; ``inner`` lies in E(c) iff this is <= 1."""
    return sup_linear(inner, [1 / Fraction(c) for c in coeffs])


# -- Inclusion ----------------------------------------------------------------

class Verdict(str, Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class InclusionVerdict:
    """Outcome of an exact inclusion test.

    ``margin`` is the slack of the binding inequality (negative when outside);
    ``slacks`` lists per-coordinate slacks for coordinatewise criteria.
    """

    verdict: Verdict
    margin: Fraction
    binding: str
    slacks: tuple[tuple[int, Fraction], ...] = field(default=())

    @property
    def holds(self) -> bool:
        return self.verdict is not Verdict.OUTSIDE


def _verdict(margin: Fraction, binding: str, slacks=()) -> InclusionVerdict:
    if margin > 0:
        v = Verdict.INSIDE
    elif margin == 0:
        v = Verdict.BOUNDARY
    else:
        v = Verdict.OUTSIDE
    return InclusionVerdict(v, margin, binding, tuple(slacks))


def includes(outer: Domain, inner: Domain) -> InclusionVerdict:
    """Decide ``inner`` subset ``outer`` exactly, for the supported pairs.

    Supported: {E, P, Q, truncated E} in E; {E, P, Q, ball product} (and
    truncated E when n = 2) in a ball product; {Q, P} in P. Anything else
    raises UnsupportedPair.
    """
    if outer.n != inner.n:
        raise UnsupportedPair(f"dimension mismatch: {describe(outer)} vs {describe(inner)}")
    if isinstance(outer, Ellipsoid) and not isinstance(inner, BallProduct):
        gauge = ellipsoid_gauge(inner, outer.coeffs)
        slacks = ()
        if isinstance(inner, Ellipsoid):
            slacks = tuple((j + 1, o - i) for j, (o, i) in enumerate(zip(outer.coeffs, inner.coeffs)))
        return _verdict(1 - gauge, f"sup sum R_j/c_j = {fmt_rat(gauge)} <= 1", slacks)
    if isinstance(outer, BallProduct) and isinstance(inner, BallProduct):
        return _verdict(outer.R - inner.R, f"R = {fmt_rat(inner.R)} <= {fmt_rat(outer.R)}")
    if isinstance(outer, BallProduct) and isinstance(inner, (Ellipsoid, Polydisk, Polylike, TruncatedEllipsoid)):
        weights = [Fraction(1), Fraction(1)] + [Fraction(0)] * (inner.n - 2)
        reach = sup_linear(inner, weights)
        return _verdict(outer.R - reach, f"sup R_1+R_2 = {fmt_rat(reach)} <= {fmt_rat(outer.R)}")
    if isinstance(outer, Polydisk) and isinstance(inner, (Polylike, Polydisk)):
        slacks = []
        for j in range(inner.n):
            unit = [Fraction(0)] * inner.n
            unit[j] = Fraction(1)
            slacks.append((j + 1, outer.widths[j] - sup_linear(inner, unit)))
        axis, margin = min(slacks, key=lambda s: (s[1], s[0]))
        return _verdict(margin, f"coordinate {axis}: sup R_{axis} <= {fmt_rat(outer.widths[axis - 1])}", slacks)
    raise UnsupportedPair(f"no inclusion criterion for {describe(inner)} in {describe(outer)}")


# -- Genericity ---------------------------------------------------------------

@dataclass(frozen=True)
class GenericityReport:
    violations: tuple[tuple[str, tuple[int, int]], ...] = ()

    @property
    def clean(self) -> bool:
        return not self.violations


def _ratio_hits(coeffs: dict[int, Fraction], bound: int, symbol: str) -> list[tuple[str, tuple[int, int]]]:
    hits = []
    for k, ck in coeffs.items():
        for j, cj in coeffs.items():
            if j == k:
                continue
            for r in range(1, bound):
                value = r * ck / cj
                if is_integral(value):
                    hits.append((f"floor boundary: {r}*{symbol}{k}/{symbol}{j} = {fmt_rat(value)}", (k, j)))
    return hits


def genericity_check(d: Domain, bound: Optional[int] = None) -> GenericityReport:
    """Flag exact rational coincidences that put index floors on integers.

    Multiplicities r with 1 <= r < bound are scanned; hypothesis boundaries of
    the nonisotopy windows (a_2 = b, a_j = 2 a_2 for polylike domains,
    a_3 = 2 a_1 or a_3 = a_2 for polydisks) are reported as well.
    """
    if bound is None:
        from .config import get_settings

        bound = get_settings().genericity_bound
    violations: list[tuple[str, tuple[int, int]]] = []
    if isinstance(d, Polylike) and d.disk_axis == 1:
        tail = {k: d.coefficient(k) for k in range(2, d.n + 1)}
        violations += _ratio_hits(tail, bound, "a")
        if d.a2 == d.b:
            violations.append(("hypothesis boundary: a2 = b", (2, 1)))
        for k in range(3, d.n + 1):
            if tail[k] == 2 * d.a2:
                violations.append((f"hypothesis boundary: a{k} = 2*a2", (k, 2)))
    elif isinstance(d, Polydisk):
        widths = {k + 1: w for k, w in enumerate(d.widths)}
        violations += _ratio_hits(widths, bound, "a")
        if d.n >= 3:
            if widths[3] == 2 * widths[1]:
                violations.append(("hypothesis boundary: a3 = 2*a1", (3, 1)))
            if widths[3] == widths[2]:
                violations.append(("hypothesis boundary: a3 = a2", (3, 2)))
    elif isinstance(d, Ellipsoid):
        violations += _ratio_hits({k + 1: c for k, c in enumerate(d.coeffs)}, bound, "c")
    for description, _ in violations:
        logger.debug("genericity: %s on %s", description, describe(d))
    return GenericityReport(tuple(violations))


# -- JSON codec ---------------------------------------------------------------

def domain_to_json(d: Domain) -> dict[str, Any]:
    if isinstance(d, Ellipsoid):
        return {"type": "ellipsoid", "coeffs": [fmt_rat(c) for c in d.coeffs]}
    if isinstance(d, Polydisk):
        return {"type": "polydisk", "widths": [fmt_rat(w) for w in d.widths]}
    if isinstance(d, Polylike):
        out = {"type": "polylike", "b": fmt_rat(d.b), "tail": [fmt_rat(a) for a in d.tail]}
        if d.disk_axis != 1:
            out["disk_axis"] = d.disk_axis
        return out
    if isinstance(d, TruncatedEllipsoid):
        return {
            "type": "truncated_ellipsoid",
            "base": domain_to_json(d.base),
            "axis": d.axis,
            "cut": fmt_rat(d.cut),
        }
    if isinstance(d, BallProduct):
        return {"type": "ball_product", "R": fmt_rat(d.R), "n": d.n}
    raise TypeError(f"not a domain: {d!r}")


def _field(obj: dict, name: str, location: str) -> Any:
    if name not in obj:
        raise DomainError(f"missing field {name!r} at {location}")
    return obj[name]


def _as_int(value: Any, location: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DomainError(f"expected an integer at {location}, got {value!r}")
    try:
        return int(value)
    except ValueError:
        raise DomainError(f"expected an integer at {location}, got {value!r}") from None


def domain_from_json(obj: Any, location: str = "$") -> Domain:
    """Parse the tagged JSON form; rationals are strings "p/q" or "p"."""
    if not isinstance(obj, dict):
        raise DomainError(f"expected an object at {location}")
    kind = _field(obj, "type", location)
    if kind == "ellipsoid":
        return Ellipsoid(_rat_list(_field(obj, "coeffs", location), f"{location}.coeffs"))
    if kind == "polydisk":
        return Polydisk(_rat_list(_field(obj, "widths", location), f"{location}.widths"))
    if kind == "polylike":
        return Polylike(
            _rat(_field(obj, "b", location), f"{location}.b"),
            _rat_list(_field(obj, "tail", location), f"{location}.tail"),
            _as_int(obj.get("disk_axis", 1), f"{location}.disk_axis"),
        )
    if kind == "truncated_ellipsoid":
        base = _field(obj, "base", location)
        if isinstance(base, list):
            base = Ellipsoid(_rat_list(base, f"{location}.base"))
        else:
            base = domain_from_json(base, f"{location}.base")
            if not isinstance(base, Ellipsoid):
                raise DomainError(f"base at {location}.base must be an ellipsoid")
        return TruncatedEllipsoid(
            base,
            _as_int(_field(obj, "axis", location), f"{location}.axis"),
            _rat(_field(obj, "cut", location), f"{location}.cut"),
        )
    if kind == "ball_product":
        return BallProduct(
            _rat(_field(obj, "R", location), f"{location}.R"),
            _as_int(obj.get("n", 2), f"{location}.n"),
        )
    raise DomainError(f"unknown domain type {kind!r} at {location}")


def _rat(value: Any, location: str) -> Fraction:
    try:
        return parse_rat(value, location)
    except RationalParseError as e:
        raise DomainError(str(e)) from None


def _rat_list(values: Any, location: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise DomainError(f"expected a list at {location}")
    return tuple(_rat(v, f"{location}[{i}]") for i, v in enumerate(values))


def dumps_domain(d: Domain) -> str:
    """Canonical serialization (sorted keys, compact separators)."""
    return json.dumps(domain_to_json(d), sort_keys=True, separators=(",", ":"))


def loads_domain(text: str) -> Domain:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return domain_from_json(obj)
