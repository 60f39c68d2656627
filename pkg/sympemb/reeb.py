"""Closed Reeb orbits on smoothed boundaries: species, actions and Conley-Zehnder indices.

Polylike domains Q(b, a_2..a_n) are smoothed by a convex profile f(R_1) whose
slope runs from epsilon to 1/epsilon. Their boundary carries elliptic orbits
r*g^k on the coordinate circles and 1-parameter hyperbolic families g^k_{m,q}
in the (z_1, z_k) planes. Polydisks carry toric families g^I, and ellipsoids
the closed orbits r*d^k.
"""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Optional, Union

from .domains import Domain, Ellipsoid, Polydisk, Polylike, describe
from .errors import FloorBoundary, OrbitLabelError, SpeciesMismatch, UnspecifiedIndex
from .rational import fmt_rat, is_integral, parse_rat

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoothingPolicy:
    """How the smoothing parameters enter floors and actions.

    With ``epsilon`` unset, epsilon is a formal positive infinitesimal: every
    floor of epsilon times a finite positive quantity is 0 and the order-epsilon
    action corrections vanish. Otherwise 0 < delta < epsilon < 1 are explicit.
    """

    epsilon: Optional[Fraction] = None
    delta: Optional[Fraction] = None

    def __post_init__(self):
        if self.epsilon is None and self.delta is None:
            return
        if self.epsilon is None or self.delta is None:
            raise ValueError("explicit smoothing needs both epsilon and delta")
        eps = parse_rat(self.epsilon, "epsilon")
        delta = parse_rat(self.delta, "delta")
        if not 0 < delta < eps < 1:
            raise ValueError(f"need 0 < delta < epsilon < 1, got delta={fmt_rat(delta)} epsilon={fmt_rat(eps)}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)

    @property
    def explicit(self) -> bool:
        return self.epsilon is not None

    def eps_floor(self, x: Fraction) -> tuple[int, bool]:
        """floor(epsilon * x) for x > 0, plus whether the argument is an integer."""
        if not self.explicit:
            return 0, False
        arg = self.epsilon * x
        return math.floor(arg), is_integral(arg)


INFINITESIMAL = SmoothingPolicy()


# -- Orbit species ------------------------------------------------------------

@dataclass(frozen=True)
class Elliptic:
    """r-fold cover of the elliptic orbit on the k-th coordinate circle of a polylike boundary."""

    axis: int
    mult: int = 1

    def __post_init__(self):
        if self.axis < 1 or self.mult < 1:
            raise ValueError(f"elliptic orbit needs axis >= 1 and mult >= 1, got {self.axis}, {self.mult}")


@dataclass(frozen=True)
class Hyperbolic:
    """Family g^k_{m,q} in the (z_1, z_k) plane, homology class m e_1 + q e_k."""

    axis: int
    m: int
    q: int

    def __post_init__(self):
        if self.axis < 2 or self.m < 1 or self.q < 1:
            raise ValueError(f"hyperbolic orbit needs axis >= 2 and m, q >= 1, got {self.axis}, {self.m}, {self.q}")

    @property
    def cover_degree(self) -> int:
        return math.gcd(self.m, self.q)


@dataclass(frozen=True)
class PolydiskToric:
    """(|I|-1)-dimensional family of orbits winding m_i times around each circle i in I."""

    axes: tuple[int, ...]
    mults: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "mults", tuple(self.mults))
        if not self.axes or len(self.axes) != len(self.mults):
            raise ValueError("toric orbit needs one multiplicity per axis")
        if list(self.axes) != sorted(set(self.axes)) or self.axes[0] < 1:
            raise ValueError(f"toric axes must be distinct, increasing and >= 1: {self.axes}")
        if any(m < 1 for m in self.mults):
            raise ValueError(f"toric multiplicities must be positive: {self.mults}")


@dataclass(frozen=True)
class EllipsoidClosed:
    """r-fold cover of d^k, the boundary circle of the k-th coordinate axis of an ellipsoid."""

    axis: int
    mult: int = 1

    def __post_init__(self):
        if self.axis < 1 or self.mult < 1:
            raise ValueError(f"ellipsoid orbit needs axis >= 1 and mult >= 1, got {self.axis}, {self.mult}")


ReebOrbit = Union[Elliptic, Hyperbolic, PolydiskToric, EllipsoidClosed]

_SPECIES_ORDER = {Elliptic: 0, Hyperbolic: 1, PolydiskToric: 2, EllipsoidClosed: 3}


def family_dimension(o: ReebOrbit) -> int:
    if isinstance(o, Hyperbolic):
        return 1
    if isinstance(o, PolydiskToric):
        return len(o.axes) - 1
    return 0


def orbit_key(o: ReebOrbit) -> tuple:
    """Canonical sort key: species first, then the orbit's integer data."""
    if isinstance(o, Hyperbolic):
        data = (o.axis, o.m, o.q)
    elif isinstance(o, PolydiskToric):
        data = (len(o.axes),) + o.axes + o.mults
    else:
        data = (o.axis, o.mult)
    return (_SPECIES_ORDER[type(o)],) + data


# -- Labels -------------------------------------------------------------------

def orbit_label(o: ReebOrbit) -> str:
    if isinstance(o, Elliptic):
        return f"g^{o.axis}*{o.mult}"
    if isinstance(o, Hyperbolic):
        return f"g^{o.axis}_{{{o.m},{o.q}}}"
    if isinstance(o, PolydiskToric):
        return "g{" + ",".join(map(str, o.axes)) + "}_{" + ",".join(map(str, o.mults)) + "}"
    if isinstance(o, EllipsoidClosed):
        return f"d^{o.axis}*{o.mult}"
    raise TypeError(f"not an orbit: {o!r}")


_ELLIPTIC = re.compile(r"^g\^(\d+)(?:\*(\d+))?$")
_HYPERBOLIC = re.compile(r"^g\^(\d+)_\{(\d+),(\d+)\}$")
_TORIC = re.compile(r"^g\{(\d+(?:,\d+)*)\}_\{(\d+(?:,\d+)*)\}$")
_ELLIPSOID = re.compile(r"^d\^(\d+)(?:\*(\d+))?$")


def parse_orbit(label: str) -> ReebOrbit:
    """Inverse of ``orbit_label``; a missing ``*r`` means r = 1."""
    text = label.strip().replace(" ", "")
    try:
        if m := _ELLIPTIC.match(text):
            return Elliptic(int(m[1]), int(m[2] or 1))
        if m := _HYPERBOLIC.match(text):
            return Hyperbolic(int(m[1]), int(m[2]), int(m[3]))
        if m := _TORIC.match(text):
            axes = tuple(int(x) for x in m[1].split(","))
            mults = tuple(int(x) for x in m[2].split(","))
            return PolydiskToric(axes, mults)
        if m := _ELLIPSOID.match(text):
            return EllipsoidClosed(int(m[1]), int(m[2] or 1))
    except ValueError as e:
        raise OrbitLabelError(f"{label!r}: {e}") from None
    raise OrbitLabelError(f"unrecognized orbit label {label!r}")


# -- Species checks -----------------------------------------------------------

def _check_species(o: ReebOrbit, d: Domain) -> None:
    if isinstance(o, (Elliptic, Hyperbolic)):
        if not isinstance(d, Polylike) or d.disk_axis != 1:
            raise SpeciesMismatch(f"{orbit_label(o)} lives on polylike boundaries with the disk first, not {describe(d)}")
    elif isinstance(o, PolydiskToric):
        if not isinstance(d, Polydisk):
            raise SpeciesMismatch(f"{orbit_label(o)} lives on polydisk boundaries, not {describe(d)}")
        if o.axes[-1] > d.n:
            raise SpeciesMismatch(f"{orbit_label(o)} uses axis {o.axes[-1]} > n = {d.n}")
        return
    elif isinstance(o, EllipsoidClosed):
        if not isinstance(d, Ellipsoid):
            raise SpeciesMismatch(f"{orbit_label(o)} lives on ellipsoid boundaries, not {describe(d)}")
    else:
        raise TypeError(f"not an orbit: {o!r}")
    if o.axis > d.n:
        raise SpeciesMismatch(f"{orbit_label(o)} uses axis {o.axis} > n = {d.n}")


def _coefficients(d: Domain) -> dict[int, Fraction]:
    if isinstance(d, Polylike):
        return {k: d.coefficient(k) for k in range(1, d.n + 1)}
    if isinstance(d, Polydisk):
        return {k + 1: w for k, w in enumerate(d.widths)}
    return {k + 1: c for k, c in enumerate(d.coeffs)}


# -- Action -------------------------------------------------------------------

def action(o: ReebOrbit, d: Domain, policy: SmoothingPolicy = INFINITESIMAL) -> Fraction:
    """Symplectic action of ``o`` on the smoothed boundary of ``d``.

    In explicit mode this is the nominal value; see ``action_bounds``.
    """
    _check_species(o, d)
    c = _coefficients(d)
    if isinstance(o, Elliptic):
        return o.mult * c[o.axis]
    if isinstance(o, Hyperbolic):
        return o.m * c[1] + o.q * c[o.axis]
    if isinstance(o, PolydiskToric):
        return sum((m * c[i] for i, m in zip(o.axes, o.mults)), Fraction(0))
    return o.mult * c[o.axis]


def action_bounds(o: ReebOrbit, d: Domain, policy: SmoothingPolicy = INFINITESIMAL) -> tuple[Fraction, Fraction]:
    """Exact interval enclosing the action.

    Orbits on coordinate circles have exact actions. A hyperbolic family sits
    over the bend of the profile, within delta of x_0; convexity of the profile
    bounds its action below by the nominal value minus
    m(epsilon + 2 delta) + q a_k (epsilon b + 2 delta / epsilon).
    """
    value = action(o, d, policy)
    if not policy.explicit or not isinstance(o, Hyperbolic):
        return value, value
    eps, delta = policy.epsilon, policy.delta
    ak = d.coefficient(o.axis)
    spread = o.m * (eps + 2 * delta) + o.q * ak * (eps * d.b + 2 * delta / eps)
    return value - spread, value


def exists(o: ReebOrbit, d: Domain, policy: SmoothingPolicy = INFINITESIMAL) -> bool:
    """Whether the orbit occurs on the smoothed boundary.

    Hyperbolic families need the profile slope m / (q a_k) to lie strictly
    between epsilon and 1/epsilon; for an infinitesimal epsilon every slope does.
    """
    _check_species(o, d)
    if not policy.explicit or not isinstance(o, Hyperbolic):
        return True
    slope = Fraction(o.m) / (o.q * d.coefficient(o.axis))
    return policy.epsilon < slope < 1 / policy.epsilon


# -- Conley-Zehnder index -----------------------------------------------------

@dataclass(frozen=True)
class CZResult:
    """Index value plus the floor terms whose argument was an exact integer."""

    value: Fraction
    boundary_terms: tuple[str, ...] = ()

    @property
    def on_boundary(self) -> bool:
        return bool(self.boundary_terms)


def _ratio_floors(r: int, k: int, axes, c: dict[int, Fraction], symbol: str, boundary: list[str]) -> int:
    total = 0
    for j in axes:
        if j == k:
            continue
        arg = r * c[k] / c[j]
        total += math.floor(arg)
        if is_integral(arg):
            boundary.append(f"floor({r}*{symbol}{k}/{symbol}{j}) = {fmt_rat(arg)}")
    return total


def conley_zehnder(o: ReebOrbit, d: Domain, policy: SmoothingPolicy = INFINITESIMAL) -> CZResult:
    """Conley-Zehnder index in the standard trivialization of C^n.

    Elliptic r*g^1:   2r + n - 1 + 2 sum_{j=2..n} floor(epsilon r / a_j)
    Elliptic r*g^k:   2r + n - 1 + 2 floor(epsilon r a_k) + 2 sum_{j in 2..n, j != k} floor(r a_k / a_j)
    Hyperbolic:       2(m+q) + 1/2 + (n-2) + 2 sum_{j in 2..n, j != k} floor(q a_k / a_j)
    Ellipsoid r*d^k:  2r + n - 1 + 2 sum_{j != k} floor(r c_k / c_j)
    """
    _check_species(o, d)
    if isinstance(o, PolydiskToric):
        raise UnspecifiedIndex(f"no Conley-Zehnder formula for toric family {orbit_label(o)}")
    n = d.n
    c = _coefficients(d)
    boundary: list[str] = []
    if isinstance(o, EllipsoidClosed):
        r, k = o.mult, o.axis
        value = 2 * r + n - 1 + 2 * _ratio_floors(r, k, range(1, n + 1), c, "c", boundary)
        return CZResult(Fraction(value), tuple(boundary))
    tail_axes = range(2, n + 1)
    if isinstance(o, Elliptic) and o.axis == 1:
        r = o.mult
        floors = 0
        for j in tail_axes:
            f, hit = policy.eps_floor(Fraction(r) / c[j])
            floors += f
            if hit:
                boundary.append(f"floor(epsilon*{r}/a{j})")
        return CZResult(Fraction(2 * r + n - 1 + 2 * floors), tuple(boundary))
    if isinstance(o, Elliptic):
        r, k = o.mult, o.axis
        f, hit = policy.eps_floor(r * c[k])
        if hit:
            boundary.append(f"floor(epsilon*{r}*a{k})")
        value = 2 * r + n - 1 + 2 * f + 2 * _ratio_floors(r, k, tail_axes, c, "a", boundary)
        return CZResult(Fraction(value), tuple(boundary))
    m, q, k = o.m, o.q, o.axis
    value = 2 * (m + q) + Fraction(1, 2) + (n - 2) + 2 * _ratio_floors(q, k, tail_axes, c, "a", boundary)
    return CZResult(Fraction(value), tuple(boundary))


def cz_index(o: ReebOrbit, d: Domain, policy: SmoothingPolicy = INFINITESIMAL, strict: bool = False) -> Fraction:
    """Conley-Zehnder index; floor-boundary hits warn, or raise when ``strict``."""
    result = conley_zehnder(o, d, policy)
    if result.on_boundary:
        if strict:
            raise FloorBoundary(result.value, result.boundary_terms)
        logger.warning("%s on %s: floor arguments at integers: %s",
                       orbit_label(o), describe(d), ", ".join(result.boundary_terms))
    return result.value


# -- Enumeration --------------------------------------------------------------

@dataclass(frozen=True)
class OrbitRecord:
    orbit: ReebOrbit
    action: Fraction
    cz: Optional[Fraction]
    boundary_terms: tuple[str, ...] = ()
    at_bound: bool = False

    @property
    def label(self) -> str:
        return orbit_label(self.orbit)


def _axis_orbits(d: Domain, k: int, bound: Fraction) -> Iterator[ReebOrbit]:
    """All orbits attached to coordinate k (for polydisks: whose smallest axis is k)."""
    c = _coefficients(d)
    if isinstance(d, Ellipsoid):
        for r in range(1, math.floor(bound / c[k]) + 1):
            yield EllipsoidClosed(k, r)
        return
    if isinstance(d, Polylike):
        for r in range(1, math.floor(bound / c[k]) + 1):
            yield Elliptic(k, r)
        if k >= 2:
            for m in range(1, math.floor(bound / c[1]) + 1):
                rest = bound - m * c[1]
                for q in range(1, math.floor(rest / c[k]) + 1):
                    yield Hyperbolic(k, m, q)
        return
    # polydisk: subsets I with min(I) = k, all multiplicities >= 1
    later = list(range(k + 1, d.n + 1))
    for mask in product((False, True), repeat=len(later)):
        axes = (k,) + tuple(j for j, keep in zip(later, mask) if keep)
        if sum(c[i] for i in axes) <= bound:
            yield from _toric_mults(axes, c, bound)


def _toric_mults(axes: tuple[int, ...], c: dict[int, Fraction], bound: Fraction) -> Iterator[PolydiskToric]:
    def rec(i: int, spent: Fraction, acc: tuple[int, ...]):
        if i == len(axes):
            yield PolydiskToric(axes, acc)
            return
        rest_min = sum((c[j] for j in axes[i + 1:]), Fraction(0))
        m = 1
        while spent + m * c[axes[i]] + rest_min <= bound:
            yield from rec(i + 1, spent + m * c[axes[i]], acc + (m,))
            m += 1

    yield from rec(0, Fraction(0), ())


def _record(o: ReebOrbit, d: Domain, bound: Fraction, policy: SmoothingPolicy) -> OrbitRecord:
    value = action(o, d, policy)
    try:
        result = conley_zehnder(o, d, policy)
        cz, terms = result.value, result.boundary_terms
    except UnspecifiedIndex:
        cz, terms = None, ()
    return OrbitRecord(o, value, cz, terms, value == bound)


def enumerate_orbits(
    d: Domain,
    action_bound,
    policy: SmoothingPolicy = INFINITESIMAL,
    workers: Optional[int] = None,
) -> list[OrbitRecord]:
    """Every orbit of the domain's species with action <= action_bound.

    Sorted by action, then species and integer data. Orbits whose action
    equals the bound are included with ``at_bound`` set.
    """
    bound = parse_rat(action_bound, "action_bound")
    if bound <= 0:
        raise ValueError(f"action bound must be positive, got {fmt_rat(bound)}")
    if not isinstance(d, (Ellipsoid, Polylike, Polydisk)):
        raise SpeciesMismatch(f"no smoothing model for {describe(d)}")
    if isinstance(d, Polylike) and d.disk_axis != 1:
        raise SpeciesMismatch(f"orbit model needs the disk in the first coordinate: {describe(d)}")
    if workers is None:
        from .config import get_settings

        workers = get_settings().workers

    def scan(k: int) -> list[OrbitRecord]:
        return [
            _record(o, d, bound, policy)
            for o in _axis_orbits(d, k, bound)
            if exists(o, d, policy)
        ]

    axes = range(1, d.n + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(scan, axes))
    else:
        chunks = [scan(k) for k in axes]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.action, orbit_key(r.orbit)))
    logger.debug("enumerated %d orbits on %s up to action %s", len(records), describe(d), fmt_rat(bound))
    return records
