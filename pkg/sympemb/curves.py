"""Curve classes given by asymptotic data, with their area and virtual index.

A curve in the cap (CP^2(R) x R^{2(n-2)} minus a smoothed domain) is recorded by
its degree and the multiset of Reeb orbits at its negative ends; a curve in the
symplectization also has positive ends and degree 0. Nothing here constructs
holomorphic curves, only the bookkeeping their dimension counts need.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .config import get_settings
from .domains import Domain, Ellipsoid, Polylike, describe
from .errors import EndNotPresent, EnumerationLimit, SpeciesMismatch, SymplectizationAmbient, SympembError
from .rational import fmt_rat, is_integral, parse_rat
from .reeb import (
    INFINITESIMAL,
    OrbitRecord,
    ReebOrbit,
    SmoothingPolicy,
    action,
    cz_index,
    enumerate_orbits,
    family_dimension,
    orbit_key,
    orbit_label,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cap:
    domain: Domain
    R: Fraction

    def __post_init__(self):
        object.__setattr__(self, "R", parse_rat(self.R, "R"))


@dataclass(frozen=True)
class Symplectization:
    domain: Domain


Ambient = Union[Cap, Symplectization]


def _canonical(ends: Iterable[ReebOrbit]) -> tuple[ReebOrbit, ...]:
    return tuple(sorted(ends, key=orbit_key))


@dataclass(frozen=True)
class CurveClass:
    """Degree plus end multisets (stored sorted, so equal multisets compare equal)."""

    degree: int
    negative_ends: tuple[ReebOrbit, ...]
    ambient: Ambient
    positive_ends: tuple[ReebOrbit, ...] = ()
    policy: SmoothingPolicy = field(default=INFINITESIMAL, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "negative_ends", _canonical(self.negative_ends))
        object.__setattr__(self, "positive_ends", _canonical(self.positive_ends))
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if isinstance(self.ambient, Cap) and self.positive_ends:
            raise ValueError("cap curves have no positive ends")
        if isinstance(self.ambient, Symplectization):
            if self.degree != 0:
                raise ValueError("symplectization curves have degree 0")
            if self.end_count < 1:
                raise ValueError("symplectization curves need at least one end")

    @property
    def domain(self) -> Domain:
        return self.ambient.domain

    @property
    def end_count(self) -> int:
        return len(self.negative_ends) + len(self.positive_ends)

    @property
    def is_plane(self) -> bool:
        return isinstance(self.ambient, Cap) and len(self.negative_ends) == 1

    def describe(self) -> str:
        neg = ",".join(orbit_label(o) for o in self.negative_ends) or "-"
        if isinstance(self.ambient, Cap):
            return f"d={self.degree} [{neg}]"
        pos = ",".join(orbit_label(o) for o in self.positive_ends) or "-"
        return f"[{pos}] -> [{neg}]"


def plane(domain: Domain, R, end: ReebOrbit, degree: int = 1) -> CurveClass:
    return CurveClass(degree, (end,), Cap(domain, R))


def cylinder(domain: Domain, top: ReebOrbit, bottom: ReebOrbit) -> CurveClass:
    return CurveClass(0, (bottom,), Symplectization(domain), positive_ends=(top,))


def curve_area(c: CurveClass) -> Fraction:
    """d R minus the actions of the negative ends; nonpositive means no such curve."""
    if not isinstance(c.ambient, Cap):
        raise SymplectizationAmbient("area needs the cap ambient")
    area = c.degree * c.ambient.R - sum((action(o, c.domain, c.policy) for o in c.negative_ends), Fraction(0))
    if area <= 0:
        logger.debug("%s has nonpositive area %s", c.describe(), fmt_rat(area))
    return area


def _dimension(c: CurveClass, n: Optional[int]) -> int:
    if n is None:
        return c.domain.n
    if n != c.domain.n:
        raise ValueError(f"n = {n} does not match {describe(c.domain)}")
    return n


def virtual_index(c: CurveClass, n: Optional[int] = None) -> Fraction:
    """(n-3)(2-s) + 6d + sum_pos (mu + dim V/2) - sum_neg (mu - dim V/2).

    dim V is the dimension of the orbit family at each end; the half-integer
    indices of 1-dimensional families cancel against it, so the result is an
    integer.
    """
    n = _dimension(c, n)
    value = Fraction((n - 3) * (2 - c.end_count) + 6 * c.degree)
    for o in c.positive_ends:
        value += cz_index(o, c.domain, c.policy) + Fraction(family_dimension(o), 2)
    for o in c.negative_ends:
        value -= cz_index(o, c.domain, c.policy) - Fraction(family_dimension(o), 2)
    if not is_integral(value):
        raise SympembError(f"non-integral virtual index {fmt_rat(value)} for {c.describe()}")
    return value


def constrained_index(c: CurveClass, fixed: ReebOrbit, n: Optional[int] = None) -> Fraction:
    """Virtual index with the end at ``fixed`` pinned to one orbit of its family."""
    if fixed not in c.negative_ends:
        raise EndNotPresent(f"{orbit_label(fixed)} is not a negative end of {c.describe()}")
    return virtual_index(c, n) - family_dimension(fixed)


# -- Enumeration --------------------------------------------------------------

@dataclass(frozen=True)
class EnumerationQuery:
    degree: int = 1
    area_min: Fraction = Fraction(0)
    area_max: Optional[Fraction] = None
    index_min: Optional[Fraction] = None
    constrained_end: Optional[ReebOrbit] = None

    def __post_init__(self):
        object.__setattr__(self, "area_min", parse_rat(self.area_min, "area_min"))
        if self.area_max is not None:
            object.__setattr__(self, "area_max", parse_rat(self.area_max, "area_max"))
            if self.area_min > self.area_max:
                raise ValueError("area_min exceeds area_max")
        if self.index_min is not None:
            object.__setattr__(self, "index_min", parse_rat(self.index_min, "index_min"))


def _multisets(records: Sequence[OrbitRecord], budget: Fraction) -> Iterable[tuple[OrbitRecord, ...]]:
    """Multisets of records with total action strictly below ``budget`` (actions are sorted)."""

    def rec(start: int, spent: Fraction, acc: tuple[OrbitRecord, ...]):
        yield acc
        for i in range(start, len(records)):
            cost = spent + records[i].action
            if cost >= budget:
                break
            yield from rec(i, cost, acc + (records[i],))

    yield from rec(0, Fraction(0), ())


def enumerate_cap_curves(
    d: Domain,
    R,
    query: EnumerationQuery,
    n: Optional[int] = None,
    policy: SmoothingPolicy = INFINITESIMAL,
) -> list[CurveClass]:
    """All cap curves of the queried degree passing the area and index filters.

    Positive area bounds the total end action by d R, which makes the list
    finite. Order: number of ends, then the ends' canonical keys.
    """
    R = parse_rat(R, "R")
    if not isinstance(d, (Polylike, Ellipsoid)):
        raise SpeciesMismatch(f"cap curve enumeration needs a polylike or ellipsoid domain, not {describe(d)}")
    if query.degree < 1:
        raise ValueError("nonconstant cap curves have degree >= 1")
    cap = get_settings().max_degree
    if query.degree > cap:
        raise EnumerationLimit(f"degree {query.degree} exceeds SYMPEMB_MAX_DEGREE={cap}")
    if n is not None and n != d.n:
        raise ValueError(f"n = {n} does not match {describe(d)}")
    budget = query.degree * R
    records = enumerate_orbits(d, budget, policy)
    ambient = Cap(d, R)
    found = []
    examined = 0
    for ends in _multisets(records, budget):
        examined += 1
        area = budget - sum((r.action for r in ends), Fraction(0))
        if area < query.area_min or (query.area_max is not None and area > query.area_max):
            continue
        curve = CurveClass(query.degree, tuple(r.orbit for r in ends), ambient, policy=policy)
        if query.constrained_end is not None:
            if query.constrained_end not in curve.negative_ends:
                continue
            index = constrained_index(curve, query.constrained_end)
        else:
            index = virtual_index(curve)
        if query.index_min is not None and index < query.index_min:
            continue
        found.append(curve)
    found.sort(key=lambda c: (len(c.negative_ends), [orbit_key(o) for o in c.negative_ends]))
    logger.debug("examined %d end multisets on %s (R=%s), kept %d", examined, describe(d), fmt_rat(R), len(found))
    return found
