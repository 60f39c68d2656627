"""Command-line front end.

Results go to stdout as TSV (default) or JSON; diagnostics go to stderr.
Exit codes: 0 every verdict confirmed, 1 a refutation or failed claim,
2 a boundary case or violated hypothesis, 3 a usage or input error.
"""

from __future__ import annotations

import functools
import itertools
import json
import logging
import os
import random
import sys
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import click

from .capacities import ObstructionVerdict, eh_ball_product, eh_spectrum, obstruct_embedding
from .config import get_settings
from .constructions import (
    certificate_from_json,
    certificate_to_json,
    check_certificate,
    derive_embedding,
)
from .curves import EnumerationQuery, constrained_index, curve_area, enumerate_cap_curves, virtual_index
from .domains import BallProduct, Ellipsoid, Verdict, describe, domain_from_json, includes
from .errors import (
    CertificateError,
    ConfigError,
    DomainError,
    EndNotPresent,
    EnumerationLimit,
    FloorBoundary,
    HypothesisViolated,
    NotApplicable,
    OrbitLabelError,
    RationalParseError,
    SpeciesMismatch,
    UnspecifiedIndex,
    UnsupportedPair,
)
from .lemmas import (
    CaseReport,
    CaseVerdict,
    check_con3_report,
    check_ellipsoid_ends,
    check_lemma_con1,
    check_lemma_con2,
    check_polydisk_ends,
    compactness_exclusions,
    sweep,
)
from .rational import fmt_rat, parse_rat
from .reeb import SmoothingPolicy, conley_zehnder, enumerate_orbits, parse_orbit
from .suite import paper_suite

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_REFUTED, EXIT_BOUNDARY, EXIT_USAGE = 0, 1, 2, 3

_INPUT_ERRORS = (
    RationalParseError,
    DomainError,
    OrbitLabelError,
    ConfigError,
    UnsupportedPair,
    SpeciesMismatch,
    NotApplicable,
    EnumerationLimit,
    EndNotPresent,
)
_DEGENERATE = (HypothesisViolated, UnspecifiedIndex, FloorBoundary)

LEMMAS = {
    "con1": check_lemma_con1,
    "con2": check_lemma_con2,
    "con3": check_con3_report,
    "compactness": compactness_exclusions,
    "polydisk-ends": check_polydisk_ends,
    "ellipsoid-ends": check_ellipsoid_ends,
}


@dataclass(frozen=True)
class RunConfig:
    """Flags shared by every subcommand, layered over the environment settings."""

    command: Optional[str]
    output_format: str
    seed: int
    workers: int
    log_level: str


def _handles_errors(func):
    """Map library exceptions to exit codes with a one-line message on stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except _DEGENERATE as e:
            click.echo(f"degenerate input: {e}", err=True)
            ctx.exit(EXIT_BOUNDARY)
        except _INPUT_ERRORS as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_USAGE)
        except ValueError as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_USAGE)

    return wrapper


# -- Input / output -----------------------------------------------------------

def _load_json(source: str, what: str) -> Any:
    """Read JSON from a file path, or take ``source`` as inline JSON."""
    if os.path.exists(source):
        with open(source, encoding="utf-8") as f:
            text = f.read()
        where = source
    elif source.lstrip().startswith(("{", "[")):
        text, where = source, f"inline {what}"
    else:
        raise DomainError(f"{what} file not found: {source}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"malformed JSON in {where} at line {e.lineno} column {e.colno}: {e.msg}") from None


def _load_domain(source: str):
    return domain_from_json(_load_json(source, "domain"))


def _policy(epsilon: Optional[str], delta: Optional[str]) -> SmoothingPolicy:
    if epsilon is None and delta is None:
        return SmoothingPolicy()
    return SmoothingPolicy(
        None if epsilon is None else parse_rat(epsilon, "--epsilon"),
        None if delta is None else parse_rat(delta, "--delta"),
    )


def _emit(cfg: RunConfig, rows: Sequence[Sequence[Any]], payload: Any) -> None:
    if cfg.output_format == "json":
        click.echo(json.dumps(payload, indent=2))
        return
    for row in rows:
        click.echo("\t".join(str(cell) for cell in row))


# -- Root group ---------------------------------------------------------------

@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level on stderr.")
@click.option("--seed", type=int, default=None, help="Seed for sampled parameter grids.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Thread workers for sweeps and search.")
@click.option("--format", "output_format", type=click.Choice(["tsv", "json"]), default="tsv")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, seed: Optional[int], workers: Optional[int], output_format: str):
    """Exact Reeb orbit, index, capacity and embedding-certificate calculator."""
    settings = get_settings()
    cfg = RunConfig(
        command=ctx.invoked_subcommand,
        output_format=output_format,
        seed=settings.seed if seed is None else seed,
        workers=settings.workers if workers is None else workers,
        log_level="DEBUG" if verbose else settings.log_level,
    )
    logging.basicConfig(level=cfg.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = cfg


@cli.command()
@click.argument("domain")
@click.option("--action-bound", "-A", required=True, help="Largest action to list, e.g. 5/2.")
@click.option("--epsilon", default=None, help="Explicit smoothing epsilon.")
@click.option("--delta", default=None, help="Explicit smoothing delta.")
@click.pass_obj
@_handles_errors
def orbits(cfg: RunConfig, domain: str, action_bound: str, epsilon: Optional[str], delta: Optional[str]):
    """List Reeb orbits up to an action bound: label, action, index."""
    d = _load_domain(domain)
    records = enumerate_orbits(d, parse_rat(action_bound, "--action-bound"), _policy(epsilon, delta), cfg.workers)
    rows = [(r.label, fmt_rat(r.action), "-" if r.cz is None else fmt_rat(r.cz)) for r in records]
    payload = [
        {"orbit": r.label, "action": fmt_rat(r.action), "cz": None if r.cz is None else fmt_rat(r.cz),
         "boundary_terms": list(r.boundary_terms), "at_bound": r.at_bound}
        for r in records
    ]
    _emit(cfg, rows, payload)


@cli.command()
@click.argument("label")
@click.argument("domain")
@click.option("--strict", is_flag=True, help="Fail when a floor argument is an integer.")
@click.option("--epsilon", default=None)
@click.option("--delta", default=None)
@click.pass_obj
@_handles_errors
def cz(cfg: RunConfig, label: str, domain: str, strict: bool, epsilon: Optional[str], delta: Optional[str]):
    """Conley-Zehnder index of one orbit; exit 2 when a floor sits on an integer."""
    o = parse_orbit(label)
    result = conley_zehnder(o, _load_domain(domain), _policy(epsilon, delta))
    if result.on_boundary and strict:
        raise FloorBoundary(result.value, result.boundary_terms)
    _emit(cfg, [(label, fmt_rat(result.value))],
          {"orbit": label, "cz": fmt_rat(result.value), "boundary_terms": list(result.boundary_terms)})
    if result.on_boundary:
        click.echo(f"warning: floor boundary: {', '.join(result.boundary_terms)}", err=True)
        click.get_current_context().exit(EXIT_BOUNDARY)


@cli.group()
def curves():
    """Curve classes in the cap."""


@curves.command("enumerate")
@click.argument("domain")
@click.option("-R", "R", required=True, help="Cap size R.")
@click.option("--degree", type=int, default=1, show_default=True)
@click.option("--area-min", default="0")
@click.option("--area-max", default=None)
@click.option("--index-min", default=None)
@click.option("--constrained-end", default=None, help="Orbit label whose end is pinned.")
@click.pass_obj
@_handles_errors
def curves_enumerate(cfg: RunConfig, domain: str, R: str, degree: int, area_min: str,
                     area_max: Optional[str], index_min: Optional[str], constrained_end: Optional[str]):
    """Enumerate curve classes passing the area and index filters."""
    d = _load_domain(domain)
    fixed = None if constrained_end is None else parse_orbit(constrained_end)
    query = EnumerationQuery(
        degree=degree,
        area_min=parse_rat(area_min, "--area-min"),
        area_max=None if area_max is None else parse_rat(area_max, "--area-max"),
        index_min=None if index_min is None else parse_rat(index_min, "--index-min"),
        constrained_end=fixed,
    )
    found = enumerate_cap_curves(d, parse_rat(R, "-R"), query)
    rows = []
    for c in found:
        index = virtual_index(c) if fixed is None else constrained_index(c, fixed)
        rows.append((c.describe(), fmt_rat(curve_area(c)), fmt_rat(index)))
    _emit(cfg, rows, [{"curve": r[0], "area": r[1], "index": r[2]} for r in rows])


@cli.command()
@click.argument("domain")
@click.option("-k", "k", type=click.IntRange(min=1), required=True, help="Number of capacities.")
@click.pass_obj
@_handles_errors
def capacity(cfg: RunConfig, domain: str, k: int):
    """Ekeland-Hofer capacities c_1..c_k."""
    d = _load_domain(domain)
    if isinstance(d, Ellipsoid):
        values = eh_spectrum(d, k)
    elif isinstance(d, BallProduct):
        values = [eh_ball_product(d, j) for j in range(1, k + 1)]
    else:
        raise UnsupportedPair(f"no Ekeland-Hofer capacities for {describe(d)}")
    rows = [(j, fmt_rat(v)) for j, v in enumerate(values, start=1)]
    _emit(cfg, rows, [{"k": j, "capacity": v} for j, v in rows])


# -- Embeddings ---------------------------------------------------------------

@cli.group()
def embed():
    """Derive, verify and check embeddings."""


@embed.command("derive")
@click.argument("source")
@click.argument("target")
@click.option("--depth", type=int, default=None, help="Search depth (default SYMPEMB_MAX_DEPTH).")
@click.option("--no-axiom", "no_axiom", default="", help="Comma list of axioms to disable, e.g. E14,MS.")
@click.pass_obj
@_handles_errors
def embed_derive(cfg: RunConfig, source: str, target: str, depth: Optional[int], no_axiom: str):
    """Search for a certificate; exit 1 when none is found within the depth."""
    disabled = tuple(name.strip() for name in no_axiom.split(",") if name.strip())
    s, t = _load_domain(source), _load_domain(target)
    cert = derive_embedding(s, t, depth, disabled, cfg.workers)
    if cert is None:
        click.echo(f"no certificate for {describe(s)} -> {describe(t)} within the depth bound", err=True)
        click.get_current_context().exit(EXIT_REFUTED)
    click.echo(json.dumps(certificate_to_json(cert), indent=2))


@embed.command("verify")
@click.argument("certificate")
@click.pass_obj
@_handles_errors
def embed_verify(cfg: RunConfig, certificate: str):
    """Replay a certificate; exit 1 at the first failing step."""
    cert = certificate_from_json(_load_json(certificate, "certificate"))
    try:
        check_certificate(cert)
    except CertificateError as e:
        _emit(cfg, [("invalid", e.step, e.reason)], {"valid": False, "step": e.step, "reason": e.reason})
        click.get_current_context().exit(EXIT_REFUTED)
    _emit(cfg, [("valid", len(cert.steps), fmt_rat(cert.slack) if cert.slack is not None else "-")],
          {"valid": True, "steps": len(cert.steps), "slack": None if cert.slack is None else fmt_rat(cert.slack)})


@embed.command("check")
@click.argument("source")
@click.argument("target")
@click.option("--obstruct", is_flag=True, help="Compare capacities instead of testing inclusion.")
@click.pass_obj
@_handles_errors
def embed_check(cfg: RunConfig, source: str, target: str, obstruct: bool):
    """Exact inclusion test, or capacity obstructions with --obstruct."""
    s, t = _load_domain(source), _load_domain(target)
    ctx = click.get_current_context()
    if obstruct:
        found = obstruct_embedding(s, t)
        rows = [(o.kind, o.k or "-", fmt_rat(o.source_value), fmt_rat(o.target_value), o.verdict.value) for o in found]
        _emit(cfg, rows, [o.to_json() for o in found])
        verdicts = {o.verdict for o in found}
        if ObstructionVerdict.OBSTRUCTED in verdicts:
            ctx.exit(EXIT_REFUTED)
        if ObstructionVerdict.BOUNDARY in verdicts:
            ctx.exit(EXIT_BOUNDARY)
        return
    verdict = includes(t, s)
    _emit(cfg, [(verdict.verdict.value, fmt_rat(verdict.margin), verdict.binding)],
          {"verdict": verdict.verdict.value, "margin": fmt_rat(verdict.margin), "binding": verdict.binding,
           "slacks": {str(j): fmt_rat(v) for j, v in verdict.slacks}})
    if verdict.verdict is Verdict.OUTSIDE:
        ctx.exit(EXIT_REFUTED)
    if verdict.verdict is Verdict.BOUNDARY:
        ctx.exit(EXIT_BOUNDARY)


# -- Lemma sweeps -------------------------------------------------------------

def _param_rows(spec: Any, seed: int) -> list[dict[str, Any]]:
    """An object, a list of objects, or {"grid": {name: [values]}, "sample": N}."""
    if isinstance(spec, list):
        rows = spec
    elif isinstance(spec, dict) and "grid" in spec:
        grid = spec["grid"]
        if not isinstance(grid, dict):
            raise DomainError("grid must map parameter names to value lists")
        names = list(grid)
        choices = [v if isinstance(v, list) and not _is_scalar_list(name, v) else [v] for name, v in grid.items()]
        rows = [dict(zip(names, combo)) for combo in itertools.product(*choices)]
        if "sample" in spec:
            rows = random.Random(seed).sample(rows, min(int(spec["sample"]), len(rows)))
    elif isinstance(spec, dict):
        rows = [spec]
    else:
        raise DomainError("parameters must be an object, a list of objects or a grid")
    if not all(isinstance(r, dict) for r in rows):
        raise DomainError("every parameter row must be an object")
    return rows


def _is_scalar_list(name: str, values: list) -> bool:
    # tail and coeffs are themselves lists; a grid over them is a list of lists
    return name in ("tail", "coeffs") and not any(isinstance(v, list) for v in values)


def _guarded(name: str, check):
    def run(**row) -> CaseReport:
        try:
            return check(**row)
        except HypothesisViolated as e:
            return CaseReport(
                claim=name,
                anchor="hypotheses",
                params=tuple((k, json.dumps(v)) for k, v in row.items()),
                enumerated=(),
                verdict=CaseVerdict.BOUNDARY_AMBIGUOUS,
                notes=(str(e),),
            )
        except TypeError as e:
            raise DomainError(f"bad parameter row {row}: {e}") from None

    return run


@cli.group()
def verify():
    """Exhaustive lemma checks."""


@verify.command("lemma")
@click.argument("name", type=click.Choice(sorted(LEMMAS)))
@click.option("--params", "params", required=True, help="JSON file or inline JSON with parameter rows.")
@click.pass_obj
@_handles_errors
def verify_lemma(cfg: RunConfig, name: str, params: str):
    """Run a case analysis over parameter rows; exit 1 on a refutation, 2 on a boundary."""
    rows = _param_rows(_load_json(params, "parameters"), cfg.seed)
    reports = sweep(_guarded(name, LEMMAS[name]), rows, cfg.workers)
    table = []
    for report in reports:
        args = ",".join(f"{k}={v}" for k, v in report.params)
        table.append((report.claim, report.verdict.value, args, "; ".join(report.witnesses or report.notes)))
    _emit(cfg, table, [r.to_json() for r in reports])
    verdicts = {r.verdict for r in reports}
    ctx = click.get_current_context()
    if CaseVerdict.REFUTED in verdicts:
        for r in reports:
            for w in r.witnesses:
                click.echo(f"witness: {w}", err=True)
        ctx.exit(EXIT_REFUTED)
    if CaseVerdict.BOUNDARY_AMBIGUOUS in verdicts:
        ctx.exit(EXIT_BOUNDARY)


# -- Suite --------------------------------------------------------------------

@cli.group()
def suite():
    """Claim suites."""


@suite.command("paper")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the full JSON report here.")
@click.option("--no-axiom", "no_axiom", default="", help="Comma list of axioms to disable.")
@click.pass_obj
@_handles_errors
def suite_paper(cfg: RunConfig, report_path: Optional[str], no_axiom: str):
    """Evaluate every claim; exit 1 if any fails, 2 if any sits on a boundary."""
    disabled = tuple(name.strip() for name in no_axiom.split(",") if name.strip())
    report = paper_suite(disabled_axioms=disabled, workers=cfg.workers)
    _emit(cfg, report.rows(), report.to_json())
    if report_path:
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(report.to_json(), f, indent=2)
    if report.exit_code:
        click.get_current_context().exit(report.exit_code)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="sympemb", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
