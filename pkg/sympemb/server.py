# server.py
"""stdio MCP server exposing the calculators as tools.

Every tool takes and returns JSON-compatible values; rationals travel as
strings such as "3/2" so nothing is rounded on the way.
"""

from typing import Any, Optional

from mcp.server.fastmcp import FastMCP

from .capacities import eh_ball_product, eh_spectrum, obstruct_embedding
from .constructions import certificate_from_json, certificate_to_json, check_certificate, derive_embedding
from .domains import BallProduct, Ellipsoid, describe, domain_from_json
from .errors import CertificateError, SympembError, UnsupportedPair
from .rational import fmt_rat, parse_rat
from .reeb import conley_zehnder as _conley_zehnder
from .reeb import enumerate_orbits, parse_orbit
from .suite import paper_suite

mcp = FastMCP("sympemb")


def _error(e: Exception) -> dict[str, Any]:
    return {"error": type(e).__name__, "message": str(e)}


@mcp.tool()
def conley_zehnder(orbit: str, domain: dict) -> dict:
    """Conley-Zehnder index of one orbit.

    Args:
        orbit: Orbit label such as "g^2_{1,1}", "g^1*2" or "d^1*2"
        domain: Domain JSON, e.g. {"type": "polylike", "b": "3/2", "tail": ["1", "11/5"]}
    """
    try:
        result = _conley_zehnder(parse_orbit(orbit), domain_from_json(domain))
    except SympembError as e:
        return _error(e)
    return {"orbit": orbit, "cz": fmt_rat(result.value), "boundary_terms": list(result.boundary_terms)}


@mcp.tool()
def orbit_spectrum(domain: dict, action_bound: str) -> dict:
    """Reeb orbits with action up to action_bound, sorted by action."""
    try:
        records = enumerate_orbits(domain_from_json(domain), parse_rat(action_bound, "action_bound"))
    except (SympembError, ValueError) as e:
        return _error(e)
    return {"orbits": [
        {"orbit": r.label, "action": fmt_rat(r.action), "cz": None if r.cz is None else fmt_rat(r.cz)}
        for r in records
    ]}


@mcp.tool()
def ekeland_hofer(domain: dict, k: int) -> dict:
    """The first k Ekeland-Hofer capacities of an ellipsoid or ball product."""
    try:
        d = domain_from_json(domain)
        if isinstance(d, Ellipsoid):
            return {"capacities": [fmt_rat(v) for v in eh_spectrum(d, k)]}
        if isinstance(d, BallProduct):
            return {"capacities": [fmt_rat(eh_ball_product(d, j)) for j in range(1, k + 1)]}
        raise UnsupportedPair(f"no Ekeland-Hofer capacities for {describe(d)}")
    except (SympembError, ValueError) as e:
        return _error(e)


@mcp.tool()
def obstruct(source: dict, target: dict) -> dict:
    """Capacity and volume comparisons between an ellipsoid source and a target."""
    try:
        found = obstruct_embedding(domain_from_json(source), domain_from_json(target))
        return {"obstructions": [o.to_json() for o in found]}
    except SympembError as e:
        return _error(e)


@mcp.tool()
def derive(source: dict, target: dict, depth: Optional[int] = None, disabled_axioms: Optional[list[str]] = None) -> dict:
    """Search for an embedding certificate; {"certificate": null} when none is found."""
    try:
        cert = derive_embedding(domain_from_json(source), domain_from_json(target), depth, disabled_axioms or ())
    except SympembError as e:
        return _error(e)
    return {"certificate": None if cert is None else certificate_to_json(cert)}


@mcp.tool()
def verify(certificate: dict) -> dict:
    """Replay a certificate step by step."""
    try:
        check_certificate(certificate_from_json(certificate))
    except CertificateError as e:
        return {"valid": False, "step": e.step, "reason": e.reason}
    except SympembError as e:
        return _error(e)
    return {"valid": True}


@mcp.tool()
def claims(disabled_axioms: Optional[list[str]] = None) -> dict:
    """Run the claim suite and return its report."""
    try:
        return paper_suite(disabled_axioms=disabled_axioms or ()).to_json()
    except SympembError as e:
        return _error(e)


def main():
    mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
