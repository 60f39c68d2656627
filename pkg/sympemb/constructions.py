"""Embedding rules, replayable certificates and a bounded certificate search.

A certificate is a chain source -> image_1 -> ... -> target of rule
applications. Every step records the exact image and the slack of the
inequality it rests on, so the chain can be replayed and checked with exact
arithmetic. External results (ellipsoid-into-ball embeddings) enter as axioms
loaded from ``data/axioms.json`` and are listed on every certificate using them.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, ClassVar, Iterable, Optional, Sequence, Union

from .capacities import is_obstructed, obstruct_embedding
from .config import get_settings
from .domains import (
    BallProduct,
    Domain,
    Ellipsoid,
    Polydisk,
    Polylike,
    TruncatedEllipsoid,
    Verdict,
    describe,
    domain_from_json,
    domain_to_json,
    includes,
    scale,
    sup_linear,
    volume,
)
from .errors import CertificateError, ConfigError, DomainError, EnumerationLimit, NotApplicable, UnsupportedPair
from .rational import INFINITE, fmt_rat, parse_rat

logger = logging.getLogger(__name__)


# -- Axioms -------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomSpec:
    """E(x, ratio*x) embeds into the 4-ball of capacity factor*x (open or closed)."""

    name: str
    statement: str
    source_ratio: Fraction
    image_factor: Fraction
    open_image: bool
    citation: str


@lru_cache(maxsize=4)
def _read_axioms(path: Optional[str]) -> tuple[AxiomSpec, ...]:
    try:
        if path is None:
            text = resources.files("sympemb").joinpath("data").joinpath("axioms.json").read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        entries = json.loads(text)["axioms"]
        return tuple(
            AxiomSpec(
                name=e["name"],
                statement=e["statement"],
                source_ratio=parse_rat(e["source_ratio"], f"{e['name']}.source_ratio"),
                image_factor=parse_rat(e["image_factor"], f"{e['name']}.image_factor"),
                open_image=e["image"] == "open",
                citation=e["citation"],
            )
            for e in entries
        )
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"cannot load axiom database {path or 'data/axioms.json'}: {e}") from None


def load_axioms(disabled: Iterable[str] = ()) -> dict[str, AxiomSpec]:
    """Axiom database keyed by name, minus the disabled names."""
    off = set(disabled)
    return {a.name: a for a in _read_axioms(get_settings().axioms_path) if a.name not in off}


# -- Rules --------------------------------------------------------------------

@dataclass(frozen=True)
class Inclusion:
    into: Domain
    kind: ClassVar[str] = "inclusion"


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    kind: ClassVar[str] = "scale"

    def __post_init__(self):
        object.__setattr__(self, "factor", parse_rat(self.factor, "factor"))


@dataclass(frozen=True)
class CoordSwap:
    """Relabel coordinates: the new i-th coordinate is the old perm[i]-th (1-based)."""

    perm: tuple[int, ...]
    kind: ClassVar[str] = "coord_swap"

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))
        if sorted(self.perm) != list(range(1, len(self.perm) + 1)):
            raise ValueError(f"not a permutation of 1..{len(self.perm)}: {self.perm}")


@dataclass(frozen=True)
class Fold:
    """Symplectic folding P(a, b) -> B^4(2 min + max/2 + epsilon)."""

    epsilon: Fraction
    kind: ClassVar[str] = "fold"

    def __post_init__(self):
        object.__setattr__(self, "epsilon", parse_rat(self.epsilon, "epsilon"))
        if self.epsilon <= 0:
            raise ValueError("fold epsilon must be positive")


@dataclass(frozen=True)
class ProductExtend:
    """Fold the first two coordinates, identity on the rest, landing in a ball product."""

    rule: Fold
    kind: ClassVar[str] = "product_extend"


@dataclass(frozen=True)
class Axiom:
    name: str
    kind: ClassVar[str] = "axiom"


Rule = Union[Inclusion, Scale, CoordSwap, Fold, ProductExtend, Axiom]


def _box(d: Domain) -> tuple[Fraction, Fraction]:
    if not isinstance(d, (Polydisk, Polylike)):
        raise NotApplicable(f"folding needs a polydisk factor, not {describe(d)}")
    unit = [Fraction(0)] * d.n
    sides = []
    for j in (0, 1):
        w = list(unit)
        w[j] = Fraction(1)
        sides.append(sup_linear(d, w))
    return sides[0], sides[1]


def fold_infimum(d: Domain) -> Fraction:
    """2 min(a, b) + max(a, b)/2 for the polydisk factor P(a, b) on the first two coordinates."""
    a, b = _box(d)
    return 2 * min(a, b) + max(a, b) / 2


def _permute(d: Domain, perm: tuple[int, ...]) -> Domain:
    if len(perm) != d.n:
        raise NotApplicable(f"permutation of {len(perm)} coordinates on {describe(d)}")
    if isinstance(d, Ellipsoid):
        return Ellipsoid(tuple(d.coeffs[p - 1] for p in perm))
    if isinstance(d, Polydisk):
        return Polydisk(tuple(d.widths[p - 1] for p in perm))
    if isinstance(d, Polylike):
        disk = perm.index(d.disk_axis) + 1
        tail = tuple(d.coefficient(p) for i, p in enumerate(perm, start=1) if i != disk)
        return Polylike(d.b, tail, disk)
    if isinstance(d, TruncatedEllipsoid):
        return TruncatedEllipsoid(_permute(d.base, perm), perm.index(d.axis) + 1, d.cut)
    if isinstance(d, BallProduct):
        if set(perm[:2]) != {1, 2}:
            raise NotApplicable(f"{perm} mixes the ball factor of {describe(d)} with the Euclidean factor")
        return d
    raise TypeError(f"not a domain: {d!r}")


def apply_rule(rule: Rule, d: Domain, axioms: Optional[dict[str, AxiomSpec]] = None) -> Domain:
    """Image of ``d`` under ``rule``; raises NotApplicable on a shape mismatch."""
    if isinstance(rule, Inclusion):
        try:
            verdict = includes(rule.into, d)
        except UnsupportedPair as e:
            raise NotApplicable(str(e)) from None
        if not verdict.holds:
            raise NotApplicable(f"{describe(d)} is not inside {describe(rule.into)}: {verdict.binding}")
        return rule.into
    if isinstance(rule, Scale):
        return scale(d, rule.factor)
    if isinstance(rule, CoordSwap):
        return _permute(d, rule.perm)
    if isinstance(rule, Fold):
        if d.n != 2:
            raise NotApplicable(f"fold acts on 4-dimensional domains; use a product extension on {describe(d)}")
        R = fold_infimum(d) + rule.epsilon
        return Ellipsoid((R, R))
    if isinstance(rule, ProductExtend):
        return BallProduct(fold_infimum(d) + rule.rule.epsilon, d.n)
    if isinstance(rule, Axiom):
        table = load_axioms() if axioms is None else axioms
        spec = table.get(rule.name)
        if spec is None:
            raise NotApplicable(f"axiom {rule.name} is unknown or disabled")
        if not isinstance(d, Ellipsoid) or d.n != 2 or d.coeffs[1] != spec.source_ratio * d.coeffs[0]:
            raise NotApplicable(f"axiom {rule.name} ({spec.statement}) does not apply to {describe(d)}")
        R = spec.image_factor * d.coeffs[0]
        return Ellipsoid((R, R))
    raise TypeError(f"not a rule: {rule!r}")


def rule_label(rule: Rule) -> str:
    if isinstance(rule, Inclusion):
        return f"inclusion into {describe(rule.into)}"
    if isinstance(rule, Scale):
        return f"scale by {fmt_rat(rule.factor)}"
    if isinstance(rule, CoordSwap):
        return "coord_swap " + "".join(map(str, rule.perm))
    if isinstance(rule, Fold):
        return f"fold eps={fmt_rat(rule.epsilon)}"
    if isinstance(rule, ProductExtend):
        return f"product_extend({rule_label(rule.rule)})"
    return f"axiom {rule.name}"


# -- Certificates -------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    rule: Rule
    image: Domain
    margin: Optional[Fraction] = None
    boundary: bool = False


@dataclass(frozen=True)
class Certificate:
    source: Domain
    target: Domain
    steps: tuple[Step, ...]
    slack: Optional[Fraction]
    axioms_used: tuple[str, ...] = ()

    @property
    def skeleton(self) -> tuple[str, ...]:
        return tuple(s.rule.kind for s in self.steps)

    @property
    def has_boundary_step(self) -> bool:
        return any(s.boundary for s in self.steps)


def _replay_step(index: int, rule: Rule, before: Domain, axioms: dict[str, AxiomSpec]) -> Step:
    if isinstance(rule, Scale):
        raise CertificateError(index, "conformal rescaling is not a symplectic embedding")
    try:
        image = apply_rule(rule, before, axioms)
    except NotApplicable as e:
        raise CertificateError(index, str(e)) from None
    if isinstance(rule, Inclusion):
        verdict = includes(rule.into, before)
        return Step(rule, image, verdict.margin, verdict.verdict is Verdict.BOUNDARY)
    if isinstance(rule, Fold):
        return Step(rule, image, rule.epsilon)
    if isinstance(rule, ProductExtend):
        return Step(rule, image, rule.rule.epsilon)
    if isinstance(rule, Axiom) and axioms[rule.name].open_image:
        return Step(rule, image, Fraction(0), True)
    return Step(rule, image)


def _summarize(steps: Sequence[Step]) -> tuple[Optional[Fraction], tuple[str, ...]]:
    margins = [s.margin for s in steps if s.margin is not None]
    used: list[str] = []
    for s in steps:
        if isinstance(s.rule, Axiom) and s.rule.name not in used:
            used.append(s.rule.name)
    return (min(margins) if margins else None), tuple(used)


def build_certificate(
    source: Domain,
    target: Domain,
    rules: Sequence[Rule],
    axioms: Optional[dict[str, AxiomSpec]] = None,
) -> Certificate:
    """Replay ``rules`` from ``source`` and package the chain; it must end at ``target``."""
    axioms = load_axioms() if axioms is None else axioms
    current = source
    steps = []
    for i, rule in enumerate(rules, start=1):
        step = _replay_step(i, rule, current, axioms)
        steps.append(step)
        current = step.image
    if current != target:
        raise CertificateError(len(rules), f"chain ends at {describe(current)}, not {describe(target)}")
    slack, used = _summarize(steps)
    return Certificate(source, target, tuple(steps), slack, used)


def check_certificate(cert: Certificate, axioms: Optional[dict[str, AxiomSpec]] = None) -> None:
    """Replay every step independently; raise CertificateError at the first disagreement."""
    axioms = load_axioms() if axioms is None else axioms
    current = cert.source
    for i, recorded in enumerate(cert.steps, start=1):
        step = _replay_step(i, recorded.rule, current, axioms)
        if step.image != recorded.image:
            raise CertificateError(i, f"recorded image {describe(recorded.image)}, replay gives {describe(step.image)}")
        if step.margin != recorded.margin or step.boundary != recorded.boundary:
            raise CertificateError(i, f"recorded margin {recorded.margin} does not match replay {step.margin}")
        logger.debug("step %d: %s -> %s", i, rule_label(step.rule), describe(step.image))
        current = step.image
    if current != cert.target:
        raise CertificateError(len(cert.steps), f"chain ends at {describe(current)}, not {describe(cert.target)}")
    slack, used = _summarize(cert.steps)
    if slack != cert.slack:
        raise CertificateError(len(cert.steps), f"recorded slack {cert.slack} does not match {slack}")
    if used != cert.axioms_used:
        raise CertificateError(len(cert.steps), f"recorded axioms {cert.axioms_used} do not match {used}")
    if slack is not None and slack <= 0 and not cert.has_boundary_step:
        raise CertificateError(len(cert.steps), "nonpositive slack without a flagged boundary step")


def verify_certificate(cert: Certificate, axioms: Optional[dict[str, AxiomSpec]] = None) -> bool:
    try:
        check_certificate(cert, axioms)
    except CertificateError as e:
        logger.info("certificate rejected at step %d: %s", e.step, e.reason)
        return False
    return True


def _rescale_rule(rule: Rule, lam: Fraction) -> Rule:
    if isinstance(rule, Inclusion):
        return Inclusion(scale(rule.into, lam))
    if isinstance(rule, Fold):
        return Fold(lam * rule.epsilon)
    if isinstance(rule, ProductExtend):
        return ProductExtend(Fold(lam * rule.rule.epsilon))
    return rule


def rescale_certificate(cert: Certificate, lam) -> Certificate:
    """The same rule skeleton for (scale(source, lam), scale(target, lam))."""
    lam = parse_rat(lam, "lambda")
    rules = [_rescale_rule(s.rule, lam) for s in cert.steps]
    return build_certificate(scale(cert.source, lam), scale(cert.target, lam), rules)


# -- JSON ---------------------------------------------------------------------

def rule_to_json(rule: Rule) -> dict[str, Any]:
    if isinstance(rule, Inclusion):
        return {"rule": rule.kind, "into": domain_to_json(rule.into)}
    if isinstance(rule, Scale):
        return {"rule": rule.kind, "factor": fmt_rat(rule.factor)}
    if isinstance(rule, CoordSwap):
        return {"rule": rule.kind, "perm": list(rule.perm)}
    if isinstance(rule, Fold):
        return {"rule": rule.kind, "epsilon": fmt_rat(rule.epsilon)}
    if isinstance(rule, ProductExtend):
        return {"rule": rule.kind, "inner": rule_to_json(rule.rule)}
    return {"rule": rule.kind, "name": rule.name}


def rule_from_json(obj: Any, location: str = "$") -> Rule:
    if not isinstance(obj, dict) or "rule" not in obj:
        raise DomainError(f"expected a rule object at {location}")
    kind = obj["rule"]
    try:
        if kind == Inclusion.kind:
            return Inclusion(domain_from_json(obj["into"], f"{location}.into"))
        if kind == Scale.kind:
            return Scale(parse_rat(obj["factor"], f"{location}.factor"))
        if kind == CoordSwap.kind:
            return CoordSwap(tuple(int(p) for p in obj["perm"]))
        if kind == Fold.kind:
            return Fold(parse_rat(obj["epsilon"], f"{location}.epsilon"))
        if kind == ProductExtend.kind:
            inner = rule_from_json(obj["inner"], f"{location}.inner")
            if not isinstance(inner, Fold):
                raise DomainError(f"product extension wraps a fold at {location}.inner")
            return ProductExtend(inner)
        if kind == Axiom.kind:
            return Axiom(str(obj["name"]))
    except KeyError as e:
        raise DomainError(f"missing field {e} at {location}") from None
    except ValueError as e:
        raise DomainError(f"{e} at {location}") from None
    raise DomainError(f"unknown rule {kind!r} at {location}")


def certificate_to_json(cert: Certificate) -> dict[str, Any]:
    return {
        "source": domain_to_json(cert.source),
        "target": domain_to_json(cert.target),
        "steps": [
            {
                **rule_to_json(s.rule),
                "image": domain_to_json(s.image),
                "margin": None if s.margin is None else fmt_rat(s.margin),
                "boundary": s.boundary,
            }
            for s in cert.steps
        ],
        "slack": None if cert.slack is None else fmt_rat(cert.slack),
        "axioms_used": list(cert.axioms_used),
    }


def certificate_from_json(obj: Any) -> Certificate:
    if not isinstance(obj, dict):
        raise DomainError("expected a certificate object at $")
    try:
        steps = []
        for i, raw in enumerate(obj["steps"]):
            where = f"$.steps[{i}]"
            margin = raw.get("margin")
            steps.append(Step(
                rule=rule_from_json(raw, where),
                image=domain_from_json(raw["image"], f"{where}.image"),
                margin=None if margin is None else parse_rat(margin, f"{where}.margin"),
                boundary=bool(raw.get("boundary", False)),
            ))
        slack = obj.get("slack")
        return Certificate(
            source=domain_from_json(obj["source"], "$.source"),
            target=domain_from_json(obj["target"], "$.target"),
            steps=tuple(steps),
            slack=None if slack is None else parse_rat(slack, "$.slack"),
            axioms_used=tuple(obj.get("axioms_used", ())),
        )
    except KeyError as e:
        raise DomainError(f"missing field {e} in certificate") from None


# -- Search -------------------------------------------------------------------

class _Search:
    """Depth-bounded search over rule moves, memoizing failed (node, depth) pairs."""

    def __init__(self, target: Domain, axioms: dict[str, AxiomSpec], nudges: Sequence[Fraction], workers: int):
        self.target = target
        self.axioms = axioms
        self.nudges = tuple(nudges)
        self.workers = workers
        self.target_volume = volume(target)
        self._failed: set = set()
        self._lock = threading.Lock()
        self.expanded = 0

    def goal(self, node: Domain) -> Optional[list[Rule]]:
        if node == self.target:
            return []
        try:
            verdict = includes(self.target, node)
        except UnsupportedPair:
            return None
        return [Inclusion(self.target)] if verdict.verdict is Verdict.INSIDE else None

    def pruned(self, node: Domain) -> bool:
        if self.target_volume != INFINITE and volume(node) > self.target_volume:
            return True
        if isinstance(node, Ellipsoid):
            try:
                return is_obstructed(obstruct_embedding(node, self.target))
            except UnsupportedPair:
                return False
        return False

    def moves(self, node: Domain, last: Optional[str]) -> list[list[Rule]]:
        out: list[list[Rule]] = []
        if isinstance(node, (Polydisk, Polylike)):
            base = fold_infimum(node)
            for delta in self.nudges:
                fold = Fold(delta * base)
                out.append([fold] if node.n == 2 else [ProductExtend(fold)])
        for name in sorted(self.axioms):
            out.append([Axiom(name)])
        if node.n == 2 and not isinstance(node, BallProduct):
            for name in sorted(self.axioms):
                ratio = self.axioms[name].source_ratio
                if isinstance(node, Ellipsoid) and node.coeffs[1] == ratio * node.coeffs[0]:
                    continue
                reach = sup_linear(node, (Fraction(1), 1 / ratio))
                for delta in self.nudges:
                    x = reach * (1 + delta)
                    out.append([Inclusion(Ellipsoid((x, ratio * x))), Axiom(name)])
        if last != CoordSwap.kind:
            for i in range(1, node.n + 1):
                for j in range(i + 1, node.n + 1):
                    perm = list(range(1, node.n + 1))
                    perm[i - 1], perm[j - 1] = j, i
                    out.append([CoordSwap(tuple(perm))])
        return out

    def _advance(self, node: Domain, move: list[Rule]) -> Optional[Domain]:
        try:
            for rule in move:
                node = apply_rule(rule, node, self.axioms)
        except NotApplicable:
            return None
        return node

    def dfs(self, node: Domain, remaining: int, last: Optional[str]) -> Optional[list[Rule]]:
        found = self.goal(node)
        if found is not None:
            return found
        if remaining == 0 or self.pruned(node):
            return None
        key = (node, remaining, last == CoordSwap.kind)
        with self._lock:
            if key in self._failed:
                return None
            self.expanded += 1
        for move in self.moves(node, last):
            child = self._advance(node, move)
            if child is None or child == node:
                continue
            rest = self.dfs(child, remaining - 1, move[-1].kind)
            if rest is not None:
                return move + rest
        with self._lock:
            self._failed.add(key)
        return None

    def run(self, source: Domain, limit: int) -> Optional[list[Rule]]:
        found = self.goal(source)
        if found is not None:
            return found
        if limit == 0 or self.pruned(source):
            return None

        def branch(move: list[Rule]) -> Optional[list[Rule]]:
            child = self._advance(source, move)
            if child is None or child == source:
                return None
            rest = self.dfs(child, limit - 1, move[-1].kind)
            return None if rest is None else move + rest

        moves = self.moves(source, None)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(branch, moves))
        else:
            results = []
            for move in moves:
                results.append(branch(move))
                if results[-1] is not None:
                    break
        return next((r for r in results if r is not None), None)


def derive_embedding(
    source: Domain,
    target: Domain,
    depth: Optional[int] = None,
    disabled_axioms: Iterable[str] = (),
    workers: Optional[int] = None,
) -> Optional[Certificate]:
    """Search rule compositions of increasing length for a certificate.

    Returns None when nothing is found within ``depth`` moves; that is never a
    proof that no embedding exists.
    """
    settings = get_settings()
    depth = settings.max_depth if depth is None else depth
    if depth < 0 or depth > settings.max_depth:
        raise EnumerationLimit(f"depth {depth} outside 0..SYMPEMB_MAX_DEPTH={settings.max_depth}")
    axioms = load_axioms(disabled_axioms)
    search = _Search(target, axioms, settings.nudges, settings.workers if workers is None else workers)
    for limit in range(depth + 1):
        rules = search.run(source, limit)
        if rules is not None:
            cert = build_certificate(source, target, rules, axioms)
            logger.info("derived %s -> %s in %d steps (%d nodes expanded)",
                        describe(source), describe(target), len(rules), search.expanded)
            return cert
    logger.info("no certificate for %s -> %s within depth %d (%d nodes expanded)",
                describe(source), describe(target), depth, search.expanded)
    return None
