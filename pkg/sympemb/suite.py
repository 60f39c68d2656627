"""The claim suite: constructive and obstructive halves of the embedding statements.

Each claim is reduced to exact inclusion tests, capacity comparisons and
replayable certificates. Statements whose proofs are analytic (moduli space
cobordisms) appear as NOT_VERIFIED rows carrying only their hypothesis windows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Optional

from .capacities import Obstruction, ObstructionVerdict, is_obstructed, obstruct_embedding
from .constructions import (
    Certificate,
    CoordSwap,
    Fold,
    Inclusion,
    ProductExtend,
    build_certificate,
    certificate_to_json,
    derive_embedding,
    fold_infimum,
    load_axioms,
    rescale_certificate,
    verify_certificate,
)
from .domains import (
    BallProduct,
    Ellipsoid,
    Polydisk,
    Polylike,
    TruncatedEllipsoid,
    Verdict,
    ball,
    describe,
    includes,
)
from .errors import CertificateError, HypothesisViolated, UnsupportedPair
from .lemmas import CaseVerdict, check_polydisk_ends, polylike_hypotheses
from .rational import fmt_rat

logger = logging.getLogger(__name__)


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    BOUNDARY = "BOUNDARY"
    AXIOM = "AXIOM"
    NOT_VERIFIED = "NOT_VERIFIED"


@dataclass(frozen=True)
class ClaimResult:
    claim: str
    anchor: str
    status: Status
    detail: tuple[str, ...] = ()
    certificates: tuple[Certificate, ...] = ()
    obstructions: tuple[Obstruction, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "claim": self.claim,
            "anchor": self.anchor,
            "status": self.status.value,
            "detail": list(self.detail),
            "certificates": [certificate_to_json(c) for c in self.certificates],
            "obstructions": [o.to_json() for o in self.obstructions],
        }


@dataclass(frozen=True)
class SuiteReport:
    results: tuple[ClaimResult, ...]

    def __getitem__(self, claim: str) -> ClaimResult:
        for r in self.results:
            if r.claim == claim:
                return r
        raise KeyError(claim)

    @property
    def exit_code(self) -> int:
        statuses = {r.status for r in self.results}
        if Status.FAIL in statuses:
            return 1
        if Status.BOUNDARY in statuses:
            return 2
        return 0

    def to_json(self) -> dict[str, Any]:
        return {"claims": [r.to_json() for r in self.results], "exit_code": self.exit_code}

    def rows(self) -> list[tuple[str, str, str, str]]:
        return [(r.claim, r.anchor, r.status.value, "; ".join(r.detail)) for r in self.results]


def _r(p: int, q: int = 1) -> Fraction:
    return Fraction(p, q)


@dataclass(frozen=True)
class SuiteParams:
    """Instances the claims are evaluated on."""

    fold_domain: Polylike = Polylike(_r(5, 2), (_r(1), _r(21, 10)))
    swap_domain: Polylike = Polylike(_r(3, 2), (_r(1), _r(11, 5)))
    b: Fraction = _r(3, 2)
    outer_grid: tuple[Fraction, ...] = (_r(5, 4), _r(3, 2), _r(7, 4), _r(2), _r(5, 2), _r(3), _r(7, 2), _r(4), _r(5))
    chain_grid: tuple[Fraction, ...] = (_r(5, 4), _r(3, 2), _r(7, 4), _r(2), _r(17, 8), _r(11, 5))
    obstructed_radii: tuple[Fraction, ...] = (_r(7, 2), _r(39, 10))
    derived_radii: tuple[Fraction, ...] = (_r(41, 10), _r(5))
    polydisk_ball: tuple[Fraction, Fraction, Fraction] = (_r(1), _r(5, 2), _r(33, 10))
    polydisk: tuple[Fraction, Fraction, Fraction, Fraction] = (_r(1), _r(11, 5), _r(1, 20), _r(33, 10))
    eh_window_grid: tuple[Fraction, ...] = (_r(5, 4), _r(3, 2), _r(13, 8), _r(15, 8), _r(2), _r(5, 2))
    sharpness_gap: Fraction = _r(1, 1000)


@dataclass
class _Run:
    params: SuiteParams
    disabled_axioms: tuple[str, ...]
    workers: Optional[int]
    certificates: list[Certificate] = field(default_factory=list)

    def derive(self, source, target) -> Optional[Certificate]:
        cert = derive_embedding(source, target, disabled_axioms=self.disabled_axioms, workers=self.workers)
        if cert is not None:
            self.certificates.append(cert)
        return cert

    def build(self, source, target, rules) -> Certificate:
        cert = build_certificate(source, target, rules, load_axioms(self.disabled_axioms))
        self.certificates.append(cert)
        return cert


def _window(lo: Fraction, value: Fraction, hi: Fraction) -> Status:
    if lo < value < hi:
        return Status.PASS
    if value in (lo, hi):
        return Status.BOUNDARY
    return Status.FAIL


_RANK = (Status.FAIL, Status.BOUNDARY, Status.AXIOM, Status.PASS)


def _less(lo: Fraction, hi: Fraction) -> Status:
    return Status.PASS if lo < hi else Status.BOUNDARY if lo == hi else Status.FAIL


def _worst(statuses: Iterable[Status]) -> Status:
    found = set(statuses)
    return next((s for s in _RANK if s in found), Status.PASS)


_CASE_STATUS = {
    CaseVerdict.CONFIRMED: Status.PASS,
    CaseVerdict.BOUNDARY_AMBIGUOUS: Status.BOUNDARY,
    CaseVerdict.REFUTED: Status.FAIL,
}


def _cert_status(cert: Certificate) -> Status:
    if not verify_certificate(cert):
        return Status.FAIL
    if not cert.has_boundary_step:
        return Status.PASS
    return Status.AXIOM if cert.axioms_used else Status.BOUNDARY


# -- Claims -------------------------------------------------------------------

def _inclusion_claim(run: _Run) -> ClaimResult:
    detail, statuses = [], []
    for q in (run.params.fold_domain, run.params.swap_domain):
        R = q.a2 + q.b
        at = includes(BallProduct(R, q.n), q)
        below = includes(BallProduct(R - run.params.sharpness_gap, q.n), q)
        ok = at.holds and below.verdict is Verdict.OUTSIDE
        statuses.append(Status.PASS if ok else Status.FAIL)
        detail.append(f"{describe(q)} in B4({fmt_rat(R)}): {at.verdict.value}, "
                      f"at {fmt_rat(R - run.params.sharpness_gap)}: {below.verdict.value}")
    return ClaimResult("inclusion", "polylike-inclusion", _worst(statuses), tuple(detail))


def _fold_claim(run: _Run) -> ClaimResult:
    q = run.params.fold_domain
    a2, b = q.a2, q.b
    closure = 2 * a2 + b / 2
    detail = [f"fold infimum {fmt_rat(fold_infimum(q))}, expected {fmt_rat(closure)}"]
    if fold_infimum(q) != closure:
        return ClaimResult("fold", "fold-into-ball", Status.FAIL, tuple(detail))
    room = (a2 + b) - closure
    detail.append(f"room a2+b - (2a2+b/2) = {fmt_rat(room)}")
    if room <= 0:
        return ClaimResult("fold", "fold-into-ball", Status.BOUNDARY if room == 0 else Status.FAIL, tuple(detail))
    eps = room / 2
    cert = run.build(q, BallProduct(a2 + b, q.n), [ProductExtend(Fold(eps)), Inclusion(BallProduct(a2 + b, q.n))])
    detail.append(f"epsilon {fmt_rat(eps)}, slack {fmt_rat(cert.slack)}")
    return ClaimResult("fold", "fold-into-ball", _cert_status(cert), tuple(detail), (cert,))


def _swap_claim(run: _Run) -> ClaimResult:
    q = run.params.swap_domain
    R = q.a2 + q.b
    a3 = q.coefficient(3)
    perm = tuple([3, 2, 1] + list(range(4, q.n + 1)))
    detail = [f"a3 = {fmt_rat(a3)} vs a2+b = {fmt_rat(R)}"]
    if a3 >= R:
        return ClaimResult("swap", "coordinate-swap", Status.BOUNDARY if a3 == R else Status.FAIL, tuple(detail))
    cert = run.build(q, BallProduct(R, q.n), [CoordSwap(perm), Inclusion(BallProduct(R, q.n))])
    detail.append(f"margin {fmt_rat(cert.slack)}")
    return ClaimResult("swap", "coordinate-swap", _cert_status(cert), tuple(detail), (cert,))


def _outer_claim(run: _Run) -> ClaimResult:
    b = run.params.b
    q = Polylike(b, (_r(1), _r(2)))
    lo, hi = (b + 2) / 2, b + 2
    detail, statuses = [], []
    for A in run.params.outer_grid:
        if A <= 1:
            raise HypothesisViolated([f"A > 1 (got A = {fmt_rat(A)})"])
        E = Ellipsoid((b * A / (A - 1), A, 2 * A))
        inner = includes(E, q)
        outer = includes(BallProduct(b + 2, 3), E)
        predicted = {Status.PASS: Verdict.INSIDE, Status.BOUNDARY: Verdict.BOUNDARY}.get(_window(lo, A, hi), Verdict.OUTSIDE)
        ok = inner.holds and outer.verdict is predicted
        statuses.append(Status.PASS if ok else Status.FAIL)
        detail.append(f"A={fmt_rat(A)}: Q in {describe(E)} {inner.verdict.value}, "
                      f"E in B4({fmt_rat(b + 2)}) {outer.verdict.value}")
    return ClaimResult("outer-lemma", "outer-ellipsoid-lemma", _worst(statuses), tuple(detail))


def _chain(run: _Run, A: Fraction) -> tuple[Status, str, Optional[Certificate]]:
    b = run.params.b
    source = TruncatedEllipsoid(Ellipsoid((A, 2 * A)), 2, _r(2))
    target = ball(b + 2)
    if not A < (b + 3) / 2:
        return Status.FAIL, f"A={fmt_rat(A)} outside A < (b+3)/2", None
    cert = run.derive(source, target)
    if cert is None:
        return Status.FAIL, f"A={fmt_rat(A)}: no certificate", None
    return _cert_status(cert), f"A={fmt_rat(A)}: {' > '.join(cert.skeleton)} slack {fmt_rat(cert.slack)}", cert


def _chain_claim(run: _Run) -> ClaimResult:
    rows = [_chain(run, A) for A in run.params.chain_grid]
    return ClaimResult(
        "truncated-chain",
        "truncated-ellipsoid-chain",
        _worst(s for s, _, _ in rows),
        tuple(d for _, d, _ in rows),
        tuple(c for _, _, c in rows if c is not None),
    )


def _instance_claim(run: _Run) -> ClaimResult:
    status, detail, cert = _chain(run, _r(2))
    return ClaimResult("truncated-instance", "truncated-ellipsoid-instance", status, (detail,),
                       () if cert is None else (cert,))


_E24 = Ellipsoid((_r(2), _r(4)))


def _eh_ball_claim(run: _Run) -> ClaimResult:
    detail, statuses, certs, obstructions = [], [], [], []
    for R in run.params.obstructed_radii:
        obs = obstruct_embedding(_E24, ball(R))
        obstructions.extend(o for o in obs if o.verdict is ObstructionVerdict.OBSTRUCTED)
        cert = run.derive(_E24, ball(R))
        ok = is_obstructed(obs) and cert is None
        statuses.append(Status.PASS if ok else Status.FAIL)
        detail.append(f"R={fmt_rat(R)}: obstructed={is_obstructed(obs)}, derived={cert is not None}")
    for R in run.params.derived_radii:
        obs = obstruct_embedding(_E24, ball(R))
        cert = run.derive(_E24, ball(R))
        ok = not is_obstructed(obs) and cert is not None
        statuses.append(_cert_status(cert) if ok else Status.FAIL)
        if cert is not None:
            certs.append(cert)
        detail.append(f"R={fmt_rat(R)}: obstructed={is_obstructed(obs)}, derived={cert is not None}")
    return ClaimResult("eh-ball", "ellipsoid-into-ball-iff", _worst(statuses), tuple(detail),
                       tuple(certs), tuple(obstructions))


def _eh_ball_boundary_claim(run: _Run) -> ClaimResult:
    target = ball(_r(4))
    obs = obstruct_embedding(_E24, target)
    cert = run.derive(_E24, target)
    if cert is None or is_obstructed(obs):
        return ClaimResult("eh-ball-boundary", "ellipsoid-into-ball-iff-boundary", Status.FAIL,
                           ("R=4: no certificate" if cert is None else "R=4: obstructed",), (), tuple(obs))
    used = ",".join(cert.axioms_used) or "none"
    return ClaimResult("eh-ball-boundary", "ellipsoid-into-ball-iff-boundary", _cert_status(cert),
                       (f"R=4 via axioms {used}",), (cert,), tuple(obs))


def _polydisk_ball_claim(run: _Run) -> ClaimResult:
    a, b, R = run.params.polydisk_ball
    status = _window(max(a, b), R, a + b)
    detail = [f"max(a,b) = {fmt_rat(max(a, b))} < R = {fmt_rat(R)} < a+b = {fmt_rat(a + b)}"]
    P = Polydisk((a, b))
    eps = R - fold_infimum(P)
    certs = ()
    if eps > 0:
        cert = run.build(P, ball(R), [Fold(eps)])
        certs = (cert,)
        detail.append(f"fold into B4({fmt_rat(R)}) with epsilon {fmt_rat(eps)}")
        status = _worst([status, _cert_status(cert)])
    return ClaimResult("polydisk-ball-window", "polydisk-swap-window", status, tuple(detail), certs)


# -- Supplementary windows ----------------------------------------------------

def _polylike_window_claim(run: _Run) -> ClaimResult:
    detail, statuses = [], []
    for q in (run.params.fold_domain, run.params.swap_domain):
        R = q.a2 + q.b + q.a2 / 2
        try:
            ties = polylike_hypotheses(q, R)
        except HypothesisViolated as e:
            statuses.append(Status.FAIL)
            detail.append(f"{describe(q)}, R={fmt_rat(R)}: {e}")
            continue
        branches = {
            "fold": _less(2 * q.a2, q.b),
            "swap": _less(q.coefficient(3), q.a2 + q.b),
        }
        either = max(branches.values(), key=_RANK.index)
        status = _worst([either, Status.BOUNDARY if ties else Status.PASS])
        statuses.append(status)
        if either is Status.FAIL:
            line = "neither fold (2*a2 < b) nor swap (a3 < a2+b) applies"
        else:
            via = " and ".join(name for name, s in branches.items() if s is either)
            line = f"window {'holds' if either is Status.PASS else 'at equality'} via {via}"
        if ties:
            line += f" ({'; '.join(ties)})"
        detail.append(f"{describe(q)}, R={fmt_rat(R)}: {line}")
    return ClaimResult("polylike-window", "polylike-corollary-window", _worst(statuses), tuple(detail))


def _polydisk_window_claim(run: _Run) -> ClaimResult:
    a, b, eps, R = run.params.polydisk
    widths = (a, a - eps, b)
    a1, a2, a3 = widths
    checks = [_less(max(2 * a1, a2), a3), _window(a1 + a3, R, 2 * a1 + a3)]
    detail = [f"P({','.join(map(fmt_rat, widths))}), R={fmt_rat(R)}"]
    try:
        report = check_polydisk_ends(a, b, eps, R, len(widths))
    except HypothesisViolated as e:
        return ClaimResult("polydisk-window", "polydisk-theorem-window", Status.FAIL, tuple(detail + [str(e)]))
    detail.append(f"end solver: {', '.join(report.enumerated)}")
    checks.append(_CASE_STATUS[report.verdict])
    return ClaimResult("polydisk-window", "polydisk-theorem-window", _worst(checks), tuple(detail))


def _eh_window_claim(run: _Run) -> ClaimResult:
    b = run.params.b
    target = ball(b + 2)
    detail, statuses, certs, obstructions = [], [], [], []
    for A in run.params.eh_window_grid:
        source = Ellipsoid((A, 2 * A))
        obs = obstruct_embedding(source, target)
        cert = run.derive(source, target)
        if A < (b + 2) / 2:
            ok = cert is not None and not is_obstructed(obs)
        else:
            ok = cert is None and (is_obstructed(obs) or A == (b + 2) / 2)
        if cert is not None:
            certs.append(cert)
        obstructions.extend(o for o in obs if o.verdict is ObstructionVerdict.OBSTRUCTED)
        statuses.append(Status.FAIL if not ok else _cert_status(cert) if cert else Status.PASS)
        detail.append(f"A={fmt_rat(A)}: derived={cert is not None}, obstructed={is_obstructed(obs)}")
    return ClaimResult("eh-window", "ellipsoid-ball-capacity-window", _worst(statuses), tuple(detail),
                       tuple(certs), tuple(obstructions))


def _cyclic_swap_claim(run: _Run) -> ClaimResult:
    b = run.params.b
    q = Polylike(b, (_r(1), _r(2)))
    R = b + _r(3, 2)
    detail = [f"b+1 < R = {fmt_rat(R)} < b+2"]
    cert = run.build(q, BallProduct(R, 3), [CoordSwap((2, 3, 1)), Inclusion(BallProduct(R, 3))])
    detail.append(f"image {describe(cert.steps[0].image)} in B4({fmt_rat(R)}) with margin {fmt_rat(cert.slack)}")
    return ClaimResult("cyclic-swap", "cyclic-swap-embedding", _worst([_window(b + 1, R, b + 2), _cert_status(cert)]),
                       tuple(detail), (cert,))


def _soundness_claim(run: _Run) -> ClaimResult:
    detail, statuses = [], []
    axioms = load_axioms(run.disabled_axioms)
    for cert in run.certificates:
        label = f"{describe(cert.source)} -> {describe(cert.target)}"
        if not verify_certificate(cert, axioms):
            statuses.append(Status.FAIL)
            detail.append(f"{label}: replay failed")
            continue
        try:
            if is_obstructed(obstruct_embedding(cert.source, cert.target)):
                statuses.append(Status.FAIL)
                detail.append(f"{label}: certified but obstructed")
                continue
        except UnsupportedPair:
            pass
        try:
            scaled = rescale_certificate(cert, 2)
        except CertificateError as e:
            statuses.append(Status.FAIL)
            detail.append(f"{label}: rescaling failed at {e}")
            continue
        statuses.append(Status.PASS if scaled.skeleton == cert.skeleton else Status.FAIL)
    detail.append(f"{len(run.certificates)} certificates replayed, rescaled and cross-checked")
    return ClaimResult("soundness", "certificate-replay", _worst(statuses), tuple(detail))


_ANALYTIC = (
    ("analytic:polylike-squeezing", "polylike-hamiltonian-squeezing",
     "no compactly supported Hamiltonian squeezes Q into the open B4(a2+b) product"),
    ("analytic:polylike-nonisotopy", "polylike-corollary-window",
     "fold and swap embeddings are not isotopic to the inclusion"),
    ("analytic:polydisk-nonisotopy", "polydisk-theorem-window",
     "the space of polydisk embeddings into the ball product is not path connected"),
    ("analytic:ellipsoid-nonextension", "ellipsoid-nonextension",
     "the two embeddings do not both extend over an ellipsoid containing Q or P"),
    ("analytic:cyclic-nonisotopy", "cyclic-swap-embedding",
     "identity and cyclic swap of Q(b,1,2) are not isotopic for b+1 < R < b+2"),
    ("analytic:swap-nonextension", "outer-ellipsoid-lemma",
     "the cyclic swap does not extend over E(B,A,2A)"),
    ("analytic:slice-nonextension", "truncated-ellipsoid-instance",
     "the slice inclusion does not extend over the truncated ellipsoid"),
)


def paper_suite(
    params: Optional[SuiteParams] = None,
    disabled_axioms: Iterable[str] = (),
    workers: Optional[int] = None,
) -> SuiteReport:
    """Evaluate every claim and return the report in a fixed claim order."""
    run = _Run(params or SuiteParams(), tuple(disabled_axioms), workers)
    results = [
        _inclusion_claim(run),
        _fold_claim(run),
        _swap_claim(run),
        _outer_claim(run),
        _chain_claim(run),
        _eh_ball_claim(run),
        _eh_ball_boundary_claim(run),
        _instance_claim(run),
        _polydisk_ball_claim(run),
        _polylike_window_claim(run),
        _polydisk_window_claim(run),
        _eh_window_claim(run),
        _cyclic_swap_claim(run),
    ]
    results.append(_soundness_claim(run))
    results.extend(
        ClaimResult(claim, anchor, Status.NOT_VERIFIED, (f"analytic conclusion: {text}; hypothesis window only",))
        for claim, anchor, text in _ANALYTIC
    )
    for r in results:
        log = logger.warning if r.status in (Status.FAIL, Status.BOUNDARY) else logger.info
        log("claim %s [%s]: %s", r.claim, r.anchor, r.status.value)
    return SuiteReport(tuple(results))
