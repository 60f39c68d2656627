"""Ekeland-Hofer capacities and volume as embedding obstructions."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import count, islice
from typing import Any, Optional

from .domains import BallProduct, Domain, Ellipsoid, describe, volume
from .errors import UnsupportedPair
from .rational import Extended, fmt_rat

logger = logging.getLogger(__name__)


def _multiples(c: Fraction):
    return (r * c for r in count(1))


def eh_spectrum(E: Ellipsoid, k: int) -> list[Fraction]:
    """The first k entries of the sorted multiset {r c_i : r >= 1, 1 <= i <= n}."""
    if k < 1:
        raise ValueError(f"capacity index must be >= 1, got {k}")
    return list(islice(heapq.merge(*(_multiples(c) for c in E.coeffs)), k))


def eh_capacity_ellipsoid(E: Ellipsoid, k: int) -> Fraction:
    """k-th Ekeland-Hofer capacity of an ellipsoid (ties counted with multiplicity)."""
    return eh_spectrum(E, k)[-1]


def eh_ball_product(t: BallProduct, k: int) -> Fraction:
    """c_1 and c_2 of B^4(R) x R^{2(n-2)}; both equal R."""
    if k not in (1, 2):
        raise UnsupportedPair(f"only c_1 and c_2 are known for {describe(t)}")
    return t.R


def eh2_ball_product(t: BallProduct) -> Fraction:
    return eh_ball_product(t, 2)


class ObstructionVerdict(str, Enum):
    OBSTRUCTED = "obstructed"
    NO_OBSTRUCTION = "no_obstruction"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class Obstruction:
    kind: str
    k: Optional[int]
    source_value: Fraction
    target_value: Extended
    verdict: ObstructionVerdict

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "k": self.k,
            "source": fmt_rat(self.source_value),
            "target": fmt_rat(self.target_value),
            "verdict": self.verdict.value,
        }


def _compare(kind: str, k: Optional[int], source: Fraction, target: Extended) -> Obstruction:
    if source > target:
        verdict = ObstructionVerdict.OBSTRUCTED
    elif source == target:
        verdict = ObstructionVerdict.BOUNDARY
    else:
        verdict = ObstructionVerdict.NO_OBSTRUCTION
    return Obstruction(kind, k, source, target, verdict)


def obstruct_embedding(source: Domain, target: Domain, k_bound: Optional[int] = None) -> list[Obstruction]:
    """Compare monotone invariants of an ellipsoid source and a supported target.

    Ellipsoid targets of the same dimension: EH_1..EH_{k_bound} and volume.
    Ball product targets: EH_1 and EH_2; a lower-dimensional source is
    stabilized by a Euclidean factor, which leaves its capacities unchanged.
    """
    if not isinstance(source, Ellipsoid):
        raise UnsupportedPair(f"capacities are computed for ellipsoid sources only, not {describe(source)}")
    if isinstance(target, Ellipsoid):
        if target.n != source.n:
            raise UnsupportedPair(f"dimension mismatch: {describe(source)} vs {describe(target)}")
        if k_bound is None:
            from .config import get_settings

            k_bound = get_settings().eh_k_bound
        src, tgt = eh_spectrum(source, k_bound), eh_spectrum(target, k_bound)
        out = [_compare("EH", k + 1, s, t) for k, (s, t) in enumerate(zip(src, tgt))]
        out.append(_compare("Volume", None, volume(source), volume(target)))
    elif isinstance(target, BallProduct):
        if source.n > target.n:
            raise UnsupportedPair(f"{describe(source)} has larger dimension than {describe(target)}")
        out = [_compare("EH", k, eh_capacity_ellipsoid(source, k), eh_ball_product(target, k)) for k in (1, 2)]
    else:
        raise UnsupportedPair(f"no capacities for target {describe(target)}")
    for o in out:
        if o.verdict is ObstructionVerdict.OBSTRUCTED:
            logger.debug("%s -> %s obstructed by %s%s: %s > %s", describe(source), describe(target),
                         o.kind, o.k or "", fmt_rat(o.source_value), fmt_rat(o.target_value))
    return out


def is_obstructed(obstructions: list[Obstruction]) -> bool:
    return any(o.verdict is ObstructionVerdict.OBSTRUCTED for o in obstructions)
