"""Exception hierarchy shared by every module."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SympembError(Exception):
    """Base class for all library errors."""


class RationalParseError(SympembError, ValueError):
    """Raised when a rational literal cannot be parsed exactly."""

    def __init__(self, text: object, location: str = ""):
        self.text = text
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"invalid rational {text!r}{where}")


class DomainError(SympembError, ValueError):
    """Raised when a domain violates its defining invariants."""


class UnsupportedPair(SympembError):
    """Raised when no exact criterion is implemented for a pair of domains."""


class OrbitLabelError(SympembError, ValueError):
    """Raised when an orbit label does not match the label grammar."""


class SpeciesMismatch(SympembError):
    """Raised when an orbit species does not live on the given domain."""


class UnspecifiedIndex(SympembError):
    """Raised for orbits whose Conley-Zehnder index has no formula here."""


class FloorBoundary(SympembError):
    """Raised in strict mode when a floor argument is an exact integer."""

    def __init__(self, value: Fraction, terms: Sequence[str]):
        self.value = value
        self.terms = tuple(terms)
        super().__init__(f"floor arguments at integers: {', '.join(self.terms)} (value {value})")


class SymplectizationAmbient(SympembError):
    """Raised when a cap-only quantity is requested for a symplectization curve."""


class EndNotPresent(SympembError):
    """Raised when a constrained end is not among the curve's negative ends."""


class HypothesisViolated(SympembError):
    """Raised when parameters fail the strict hypotheses of a case analysis."""

    def __init__(self, failed: Sequence[str]):
        self.failed = tuple(failed)
        super().__init__("hypotheses violated: " + "; ".join(self.failed))


class NotApplicable(SympembError):
    """Raised when a rule cannot act on a domain of the given shape."""


class CertificateError(SympembError):
    """Raised when replaying a certificate fails at a given step."""

    def __init__(self, step: int, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"step {step}: {reason}")


class ConfigError(SympembError):
    """Raised when an environment setting cannot be interpreted."""


class EnumerationLimit(SympembError):
    """Raised when an enumeration request exceeds a configured cap."""
