"""Exact rational calculators for Reeb orbits, curve indices, capacities and embedding certificates."""

from .capacities import eh_capacity_ellipsoid, eh_spectrum, obstruct_embedding
from .constructions import build_certificate, derive_embedding, verify_certificate
from .curves import CurveClass, enumerate_cap_curves, virtual_index
from .domains import BallProduct, Ellipsoid, Polydisk, Polylike, TruncatedEllipsoid, includes
from .errors import SympembError
from .reeb import cz_index, enumerate_orbits
from .suite import paper_suite

__version__ = "0.1.0"

__all__ = [
    "BallProduct",
    "CurveClass",
    "Ellipsoid",
    "Polydisk",
    "Polylike",
    "SympembError",
    "TruncatedEllipsoid",
    "build_certificate",
    "cz_index",
    "derive_embedding",
    "eh_capacity_ellipsoid",
    "eh_spectrum",
    "enumerate_cap_curves",
    "enumerate_orbits",
    "includes",
    "obstruct_embedding",
    "paper_suite",
    "verify_certificate",
]
