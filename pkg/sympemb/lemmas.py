"""Exhaustive checks of the finite case analyses behind the nonisotopy arguments.

Each checker enumerates every curve class (or orbit, or multiplicity vector)
allowed by the area and index formulas and compares the result against the
stated classification, returning a CaseReport. Parameters that satisfy the
hypotheses only with equality give BOUNDARY_AMBIGUOUS; parameters that fail
them outright raise HypothesisViolated.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Optional, Sequence

from .config import get_settings
from .curves import CurveClass, EnumerationQuery, cylinder, enumerate_cap_curves, virtual_index
from .domains import Ellipsoid, Polylike
from .errors import HypothesisViolated
from .rational import fmt_rat, parse_rat, parse_rats
from .reeb import (
    Elliptic,
    EllipsoidClosed,
    Hyperbolic,
    ReebOrbit,
    action,
    conley_zehnder,
    enumerate_orbits,
    orbit_label,
)

logger = logging.getLogger(__name__)


class CaseVerdict(str, Enum):
    CONFIRMED = "confirmed"
    REFUTED = "refuted"
    BOUNDARY_AMBIGUOUS = "boundary_ambiguous"


@dataclass(frozen=True)
class CaseReport:
    claim: str
    anchor: str
    params: tuple[tuple[str, str], ...]
    enumerated: tuple[str, ...]
    verdict: CaseVerdict
    witnesses: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "claim": self.claim,
            "anchor": self.anchor,
            "params": dict(self.params),
            "enumerated": list(self.enumerated),
            "verdict": self.verdict.value,
            "witnesses": list(self.witnesses),
            "notes": list(self.notes),
        }


def _params(**kw) -> tuple[tuple[str, str], ...]:
    out = []
    for key, value in kw.items():
        if isinstance(value, (tuple, list)):
            out.append((key, "[" + ",".join(fmt_rat(v) for v in value) + "]"))
        elif isinstance(value, Fraction):
            out.append((key, fmt_rat(value)))
        else:
            out.append((key, str(value)))
    return tuple(out)


def _verdict(witnesses: Sequence[str], ties: Sequence[str]) -> CaseVerdict:
    # a tie in the hypotheses is never decided either way; witnesses stay listed
    if ties:
        return CaseVerdict.BOUNDARY_AMBIGUOUS
    if witnesses:
        return CaseVerdict.REFUTED
    return CaseVerdict.CONFIRMED


# -- Polylike hypotheses ------------------------------------------------------

def _polylike(b, tail, n: Optional[int]) -> Polylike:
    q = Polylike(b, tuple(tail))
    if n is not None and n != q.n:
        raise ValueError(f"n = {n} does not match {len(q.tail)} tail coefficients")
    if q.n < 3:
        raise HypothesisViolated([f"n >= 3 (got n = {q.n})"])
    return q


def polylike_hypotheses(q: Polylike, R: Fraction) -> list[str]:
    """Check a_2 < b, a_j > 2 a_2 (j >= 3) and a_2 + b < R < 2 a_2 + b.

    Returns the inequalities that hold only with equality; raises
    HypothesisViolated when any fails strictly.
    """
    a2, b = q.a2, q.b
    checks = [("a2 < b", a2, b)]
    checks += [(f"a{k} > 2*a2", 2 * a2, q.coefficient(k)) for k in range(3, q.n + 1)]
    checks += [("a2+b < R", a2 + b, R), ("R < 2*a2+b", R, 2 * a2 + b)]
    failed = [name for name, lo, hi in checks if lo > hi]
    if failed:
        raise HypothesisViolated(failed)
    ties = [f"{name} holds with equality" for name, lo, hi in checks if lo == hi]
    for tie in ties:
        logger.warning("hypothesis boundary on %s, R=%s: %s", q, fmt_rat(R), tie)
    return ties


def _area_window_curves(q: Polylike, R: Fraction, index_min) -> list[CurveClass]:
    query = EnumerationQuery(degree=1, area_max=q.a2, index_min=index_min)
    return enumerate_cap_curves(q, R, query)


def _ends(c: CurveClass) -> str:
    return c.describe()


def check_lemma_con1(b, tail, R, n: Optional[int] = None) -> CaseReport:
    """Degree-1 curves of area <= a_2 end on g^2_{1,1} alone, or only on elliptic
    orbits with total action strictly between b and 2 a_2 + b."""
    q = _polylike(b, tail, n)
    R = parse_rat(R, "R")
    ties = polylike_hypotheses(q, R)
    curves = _area_window_curves(q, R, None)
    lo, hi = q.b, 2 * q.a2 + q.b
    witnesses = []
    notes = list(ties)
    for c in curves:
        if c.negative_ends == (Hyperbolic(2, 1, 1),):
            continue
        if any(not isinstance(o, Elliptic) for o in c.negative_ends):
            witnesses.append(f"{_ends(c)}: hyperbolic end other than a lone g^2_{{1,1}}")
            continue
        total = sum((action(o, q) for o in c.negative_ends), Fraction(0))
        if not lo < total < hi:
            if total in (lo, hi):
                notes.append(f"{_ends(c)}: elliptic action {fmt_rat(total)} on the window edge")
            else:
                witnesses.append(f"{_ends(c)}: elliptic action {fmt_rat(total)} outside ({fmt_rat(lo)}, {fmt_rat(hi)})")
    edge = [note for note in notes if "window edge" in note]
    return CaseReport(
        claim="con1",
        anchor="single-hyperbolic-or-elliptic-limits",
        params=_params(b=q.b, tail=q.tail, R=R, n=q.n),
        enumerated=tuple(_ends(c) for c in curves),
        verdict=_verdict(witnesses, ties + edge),
        witnesses=tuple(witnesses),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class Con3Result:
    bound: Fraction
    allowed: bool


def check_lemma_con3(n: int, elliptic_ends: int) -> Con3Result:
    """Upper bound 2(n - (n-1)E) on the index of a degree-1 curve with E elliptic ends.

    Every elliptic end contributes at least n+1 to the index sum, so
    index <= (n-3)(2-E) + 6 - (n+1)E; ``allowed`` says whether the bound still
    admits index >= -1.
    """
    if n < 3:
        raise HypothesisViolated([f"n >= 3 (got n = {n})"])
    if elliptic_ends < 0:
        raise ValueError("end count must be nonnegative")
    bound = Fraction(2 * (n - (n - 1) * elliptic_ends))
    return Con3Result(bound, bound >= -1)


def check_con3_report(n: int, elliptic_ends: int) -> CaseReport:
    """CaseReport form of the bound: index >= -1 must leave at most one elliptic end."""
    result = check_lemma_con3(n, elliptic_ends)
    witnesses = []
    if result.allowed != (elliptic_ends <= 1):
        witnesses.append(f"E={elliptic_ends}: bound {fmt_rat(result.bound)} disagrees with E <= 1")
    return CaseReport(
        claim="con3",
        anchor="elliptic-end-count",
        params=_params(n=n, elliptic_ends=elliptic_ends),
        enumerated=(f"bound {fmt_rat(result.bound)}: {'allowed' if result.allowed else 'excluded'}",),
        verdict=_verdict(witnesses, ()),
        witnesses=tuple(witnesses),
    )


_CON2_ENDS = (Hyperbolic(2, 1, 1), Elliptic(1, 2), Elliptic(2, 2))


def check_lemma_con2(b, tail, R, n: Optional[int] = None) -> CaseReport:
    """Degree-1 curves with area <= a_2 and index >= -1 are planes on g^2_{1,1}, 2g^1 or 2g^2."""
    q = _polylike(b, tail, n)
    R = parse_rat(R, "R")
    ties = polylike_hypotheses(q, R)
    curves = _area_window_curves(q, R, -1)
    witnesses = [
        f"{_ends(c)}: index {fmt_rat(virtual_index(c))}"
        for c in curves
        if not (c.is_plane and c.negative_ends[0] in _CON2_ENDS)
    ]
    realized = tuple(orbit_label(c.negative_ends[0]) for c in curves if c.is_plane)
    return CaseReport(
        claim="con2",
        anchor="three-plane-classification",
        params=_params(b=q.b, tail=q.tail, R=R, n=q.n),
        enumerated=tuple(_ends(c) for c in curves),
        verdict=_verdict(witnesses, ties),
        witnesses=tuple(witnesses),
        notes=tuple(ties) + (("realized: " + ",".join(realized)),),
    )


# -- Compactness ---------------------------------------------------------------

def compactness_exclusions(b, tail, R, n: Optional[int] = None) -> CaseReport:
    """Finite sub-analyses of the compactness argument for the degree-1 moduli space.

    (a) planes on 2g^2 have area R - 2a_2 > R - (a_2+b);
    (b) when 2b < R, cylinders from 2g^1 end on orbits with action in
        [a_2+b, 2b): only g^2_{1,1}, 3g^2 and g^j (j >= 3), all with coprime
        covering degrees, index 1 for g^2_{1,1} and <= -2 otherwise;
    (c) when 2b < R, no orbit has action below b - a_2.
    The open window's endpoints are reported as boundary hits.
    """
    q = _polylike(b, tail, n)
    R = parse_rat(R, "R")
    ties = polylike_hypotheses(q, R)
    a2, b = q.a2, q.b
    witnesses: list[str] = []
    notes: list[str] = list(ties)
    enumerated: list[str] = []

    double_a2 = action(Elliptic(2, 2), q)
    area, bound = R - double_a2, R - (a2 + b)
    if area == bound:
        ties.append(f"(a) plane on g^2*2 has area {fmt_rat(area)} equal to the bound")
        notes.append(ties[-1])
    elif area < bound:
        witnesses.append(f"(a) plane on g^2*2 has area {fmt_rat(area)} within bound {fmt_rat(bound)}")

    top = Elliptic(1, 2)
    if 2 * b == R:
        ties.append("2b = R: planes on g^1*2 have zero area")
        notes.append(ties[-1])
    if 2 * b < R:
        spectrum = enumerate_orbits(q, 2 * b)
        for r in (r for r in spectrum if a2 + b <= r.action < 2 * b):
            o = r.orbit
            enumerated.append(f"{r.label}@{fmt_rat(r.action)}")
            if r.action == a2 + b:
                notes.append(f"(b) boundary hit: {r.label} at action a2+b")
            allowed = o == Hyperbolic(2, 1, 1) or o == Elliptic(2, 3) or (
                isinstance(o, Elliptic) and o.axis >= 3 and o.mult == 1
            )
            if not allowed:
                witnesses.append(f"(b) unexpected orbit {r.label} with action {fmt_rat(r.action)}")
                continue
            degree = o.cover_degree if isinstance(o, Hyperbolic) else o.mult
            if math.gcd(top.mult, degree) != 1:
                witnesses.append(f"(b) cylinder to {r.label} is multiply covered")
            index = virtual_index(cylinder(q, top, o))
            expected_ok = index == 1 if isinstance(o, Hyperbolic) else index <= -2
            notes.append(f"(b) cylinder g^1*2 -> {r.label}: index {fmt_rat(index)}")
            if not expected_ok:
                witnesses.append(f"(b) cylinder g^1*2 -> {r.label} has index {fmt_rat(index)}")
        for r in spectrum:
            if r.at_bound and r.orbit != top:
                notes.append(f"(b) boundary hit: {r.label} at action 2b")

        gap = b - a2
        if gap <= 0:
            notes.append("(c) vacuous: b-a2 = 0")
        for r in enumerate_orbits(q, gap) if gap > 0 else ():
            if r.action < gap:
                witnesses.append(f"(c) orbit {r.label} has action {fmt_rat(r.action)} < b-a2")
            else:
                notes.append(f"(c) boundary hit: {r.label} at action b-a2")
    else:
        notes.append("(b), (c) vacuous: 2b >= R")

    return CaseReport(
        claim="compactness",
        anchor="limit-building-exclusions",
        params=_params(b=q.b, tail=q.tail, R=R, n=q.n),
        enumerated=tuple(enumerated),
        verdict=_verdict(witnesses, ties),
        witnesses=tuple(witnesses),
        notes=tuple(notes),
    )


# -- Polydisk ends -------------------------------------------------------------

def _polydisk_hypotheses(a: Fraction, b: Fraction, eps: Fraction, R: Fraction, n: int) -> list[str]:
    """Raise HypothesisViolated on a strict failure; return the inequalities that are ties."""
    checks = [
        ("b > 2a", 2 * a, b),
        ("epsilon' < a", eps, a),
        ("2 epsilon' < 2a+b-R", 2 * eps, 2 * a + b - R),
        ("a+b < R", a + b, R),
        ("R < 2a+b", R, 2 * a + b),
    ]
    failed = [name for name, lo, hi in checks if lo > hi]
    if n < 3:
        failed.insert(0, "n >= 3")
    if eps <= 0:
        failed.insert(0, "epsilon' > 0")
    if failed:
        raise HypothesisViolated(failed)
    ties = [f"{name} holds with equality" for name, lo, hi in checks if lo == hi]
    for tie in ties:
        logger.warning("polydisk hypothesis boundary (a=%s, b=%s, R=%s): %s", fmt_rat(a), fmt_rat(b), fmt_rat(R), tie)
    return ties


def polydisk_end_solver(a, b, eps, R, n: int, mult_cap: Optional[int] = None) -> list[tuple[int, ...]]:
    """Multiplicity vectors (m_1..m_n), sum m_i <= mult_cap, with
    a+b <= m_1 a + m_3 b + (a - eps) sum_{i != 1,3} m_i <= R.

    The widths are a' = (a, a-eps, b, a-eps, ..., a-eps).
    """
    a, b, eps, R = parse_rats((a, b, eps, R), "polydisk")
    _polydisk_hypotheses(a, b, eps, R, n)
    cap = get_settings().mult_cap if mult_cap is None else mult_cap
    widths = [a, a - eps, b] + [a - eps] * (n - 3)
    solutions = []
    for m in product(range(cap + 1), repeat=n):
        if not 0 < sum(m) <= cap:
            continue
        total = sum((mi * w for mi, w in zip(m, widths)), Fraction(0))
        if a + b <= total <= R:
            solutions.append(m)
    logger.debug("polydisk solver (a=%s, b=%s, R=%s, n=%d): %d solutions",
                 fmt_rat(a), fmt_rat(b), fmt_rat(R), n, len(solutions))
    return solutions


def check_polydisk_ends(a, b, eps, R, n: int, mult_cap: Optional[int] = None) -> CaseReport:
    """The degree-1 limit must end on g{1,3}_{1,1}: the solver's only solution is e_1 + e_3."""
    a, b, eps, R = parse_rats((a, b, eps, R), "polydisk")
    ties = _polydisk_hypotheses(a, b, eps, R, n)
    solutions = polydisk_end_solver(a, b, eps, R, n, mult_cap)
    expected = tuple(1 if i in (0, 2) else 0 for i in range(n))
    witnesses = [str(m) for m in solutions if m != expected]
    if expected not in solutions:
        witnesses.append(f"missing {expected}")
    return CaseReport(
        claim="polydisk-ends",
        anchor="polydisk-multiplicities",
        params=_params(a=a, b=b, epsilon=eps, R=R, n=n),
        enumerated=tuple(str(m) for m in solutions),
        verdict=_verdict(witnesses, ties),
        witnesses=tuple(witnesses),
        notes=tuple(ties),
    )


# -- Ellipsoid ends -------------------------------------------------------------

@dataclass(frozen=True)
class EndCase:
    orbit: EllipsoidClosed
    index: Fraction
    allowed: bool
    condition: str


@dataclass(frozen=True)
class EllipsoidEndAnalysis:
    ellipsoid: Ellipsoid
    cases: tuple[EndCase, ...]
    multi_end_bound: Fraction
    eh2: Fraction
    boundary: tuple[str, ...] = ()
    capacity_action: Optional[Fraction] = None

    @property
    def allowed(self) -> tuple[EndCase, ...]:
        return tuple(c for c in self.cases if c.allowed)


def ellipsoid_end_analysis(E: Ellipsoid, n: Optional[int] = None) -> EllipsoidEndAnalysis:
    """Degree-1 planes in the cap over an ellipsoid with index >= -1.

    Single ends r d^k have index (n-3) + 6 - mu(r d^k) <= 4 - 2r, so only r <= 2
    is scanned. With s >= 2 ends the index is at most (n-3)(2-s) + 6 - s(n+1),
    which is below -1 for n >= 3; ``multi_end_bound`` records the s = 2 value.
    """
    if n is not None and n != E.n:
        raise ValueError(f"n = {n} does not match {E.n} coefficients")
    n = E.n
    if n < 3:
        raise HypothesisViolated([f"n >= 3 (got n = {n})"])
    E = Ellipsoid(tuple(sorted(E.coeffs)))
    c1, c2 = E.coeffs[0], E.coeffs[1]
    cases = []
    boundary: list[str] = []
    for k in range(1, n + 1):
        for r in (1, 2):
            o = EllipsoidClosed(k, r)
            cz = conley_zehnder(o, E)
            index = Fraction(n - 3 + 6) - cz.value
            # a floor sitting on an integer can only drop under perturbation
            if index < -1 <= index + 2 * len(cz.boundary_terms):
                boundary.extend(f"{orbit_label(o)}: {t}" for t in cz.boundary_terms)
            cases.append(EndCase(o, index, index >= -1, f"index {fmt_rat(index)} >= -1"))
    multi = Fraction((n - 3) * (2 - 2) + 6 - 2 * (n + 1))
    others = [case.orbit.mult * E.coeffs[case.orbit.axis - 1]
              for case in cases if case.allowed and case.orbit != EllipsoidClosed(1, 1)]
    return EllipsoidEndAnalysis(
        ellipsoid=E,
        cases=tuple(cases),
        multi_end_bound=multi,
        boundary=tuple(boundary),
        capacity_action=min(others) if others else None,
        eh2=min(2 * c1, c2),
    )


def check_ellipsoid_ends(coeffs, n: Optional[int] = None) -> CaseReport:
    """Allowed single ends are d^1, plus 2d^1 when 2c_1 < c_2 or d^2 when c_2 < 2c_1."""
    E = Ellipsoid(tuple(coeffs))
    analysis = ellipsoid_end_analysis(E, n)
    c1, c2 = analysis.ellipsoid.coeffs[:2]
    expected = {EllipsoidClosed(1, 1)}
    if 2 * c1 < c2:
        expected.add(EllipsoidClosed(1, 2))
    if c2 < 2 * c1:
        expected.add(EllipsoidClosed(2, 1))
    got = {c.orbit for c in analysis.allowed}
    witnesses = [f"{orbit_label(o)} allowed but not predicted" for o in sorted(got - expected, key=orbit_label)]
    witnesses += [f"{orbit_label(o)} predicted but excluded" for o in sorted(expected - got, key=orbit_label)]
    if analysis.multi_end_bound >= -1:
        witnesses.append(f"multi-end bound {fmt_rat(analysis.multi_end_bound)} admits index >= -1")
    if not analysis.boundary and analysis.capacity_action != analysis.eh2:
        witnesses.append(f"minimal allowed action {analysis.capacity_action} differs from min(2c1,c2)")
    return CaseReport(
        claim="ellipsoid-ends",
        anchor="ellipsoid-single-end",
        params=_params(coeffs=analysis.ellipsoid.coeffs, n=analysis.ellipsoid.n),
        enumerated=tuple(f"{orbit_label(c.orbit)}:{fmt_rat(c.index)}" for c in analysis.allowed),
        verdict=_verdict(witnesses, analysis.boundary),
        witnesses=tuple(witnesses),
        notes=tuple(analysis.boundary),
    )


# -- Sweeps --------------------------------------------------------------------

def sweep(check: Callable[..., CaseReport], rows: Sequence[dict[str, Any]], workers: Optional[int] = None) -> list[CaseReport]:
    """Run ``check(**row)`` over every row, keeping row order in the result."""
    workers = get_settings().workers if workers is None else workers
    if workers <= 1:
        return [check(**row) for row in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda row: check(**row), rows))

