"""
Command line front-end: kernel spec files in, Gram files and verification
reports out.

Machine-readable JSON goes to stdout (and to --output when given); the
human summary and logs go to stderr.

Exit codes: 0 success, 1 INDEFINITE Gram or failed certificate/oracle,
2 schema or input error, 3 kernel evaluation error.
"""
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
import structlog
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from .builders import CONSTRUCTIONS
from .config import get_settings
from .domain.reports import SuiteReport, jsonable
from .errors import (
    AitkenKernelError,
    CatalogMiss,
    DomainError,
    DuplicatePoints,
    FamilyInvalid,
    InvalidMatrix,
    ParamError,
    SchemaError,
    ShapeError,
)
from .formats.gram_file import atomic_write, write_gram_file
from .formats.points import read_points
from .formats.specs import (
    G_RECIPES,
    H_RECIPES,
    MIXTURE_RECIPES,
    SCALAR_RECIPES,
    load_spec,
    resolve_spec,
    spec_hash,
    validity_suite,
)
from .scalar_cm import BERNSTEIN_CATALOG, CATALOG
from .verify import SUITES, assemble_gram, classify_gram, run_suites

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_EVAL = 3

INPUT_ERRORS = (SchemaError, DomainError, DuplicatePoints, CatalogMiss, ParamError, ShapeError, InvalidMatrix)

logger = structlog.get_logger()
console = Console(stderr=True)


def configure_logging(level: str) -> None:
    """Rich handler on stderr; structlog routed through stdlib logging."""
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
        force=True,
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.processors.KeyValueRenderer(key_order=["event"]),
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
    )


def exit_code_for(error: AitkenKernelError) -> int:
    if isinstance(error, FamilyInvalid):
        return EXIT_FAILED
    if isinstance(error, INPUT_ERRORS):
        return EXIT_INPUT
    return EXIT_EVAL


def _emit(document: Dict[str, Any], output: Optional[str] = None) -> None:
    text = json.dumps(jsonable(document), sort_keys=True, indent=2)
    click.echo(text)
    if output:
        atomic_write(Path(output), (text + "\n").encode("utf-8"))


def _run(command: str, body: Callable[[], int]) -> None:
    """Run a command body and translate package errors into the exit-code contract."""
    try:
        code = body()
    except AitkenKernelError as e:
        code = exit_code_for(e)
        logger.error("command_failed", command=command, error=str(e), kind=type(e).__name__, exit_code=code)
        console.print(f"[red]{type(e).__name__}:[/red] {escape(str(e))}")
        _emit({"command": command, "error": type(e).__name__, "message": str(e), "witness": e.witness,
               "exit_code": code})
    click.get_current_context().exit(code)


def _summarize_suite(suite: SuiteReport) -> None:
    failed = [c for c in suite.checks if c.passed is False]
    skipped = sum(1 for c in suite.checks if c.skipped)
    status = "[green]pass[/green]" if suite.passed else "[red]FAIL[/red]"
    console.print(f"{suite.suite}: {status} ({len(suite.checks)} checks, {len(failed)} failed, {skipped} skipped)")
    if suite.suite.startswith("aitken"):
        errors = [abs(c.details["lhs"] - c.details["rhs"]) / c.details["rhs"] for c in suite.checks]
        if errors:
            console.print(f"  max relative error {max(errors):.3e}")
    for check in failed:
        hypothesis = check.details.get("hypothesis", check.check)
        family = check.details.get("family")
        label = f"{family}: {hypothesis}" if family else hypothesis
        console.print(f"  [red]failed[/red] {escape(label)} (margin {check.margin:.3e})")


@click.group()
@click.option("--log-level", default=None, help="Override AK_LOG_LEVEL.")
def cli(log_level: Optional[str]):
    """Matrix-valued positive definite kernels from completely monotone functions."""
    configure_logging((log_level or get_settings().runtime.log_level).upper())


@cli.command("build-gram")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("points_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
@click.option("--tol-psd", type=float, default=None, help="PSD tolerance (default 1e-8).")
@click.option("--tol-pd", type=float, default=None, help="PD tolerance (default 1e-10).")
@click.option("--seed", type=int, default=None, help="Root seed (default 42).")
def build_gram(spec_path: str, points_path: str, out_path: str,
               tol_psd: Optional[float], tol_pd: Optional[float], seed: Optional[int]):
    """Assemble and classify the block Gram matrix of SPEC over POINTS."""
    settings = get_settings()
    seed = settings.sampling.seed if seed is None else seed

    def body() -> int:
        spec = load_spec(spec_path)
        resolved = resolve_spec(spec, seed)
        points = read_points(points_path, resolved.domain)
        kernel = resolved.build(seed)
        gram = assemble_gram(kernel, points, provenance={"seed": seed})
        report = classify_gram(gram, tol_psd, tol_pd)
        write_gram_file(out_path, gram, spec_hash(spec), seed, report)

        console.print(
            f"{resolved.spec.theorem} ({resolved.anchor}): {report.classification.value} "
            f"(min_eig {report.min_eig:.6e}, N={gram.n_points}, p={gram.p})"
        )
        _emit({"command": "build-gram", "output": str(out_path), "seed": seed, "report": report.to_dict()})
        return EXIT_OK if report.at_least_psd else EXIT_FAILED

    _run("build-gram", body)


@cli.command("check-validity")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--points", "n_points", type=int, default=None, help="Points per sampled set (at most 8).")
@click.option("--freqs", "n_freq", type=int, default=None, help="Random frequencies u.")
@click.option("--seed", type=int, default=None, help="Root seed (default 42).")
@click.option("--strict", is_flag=True, help="Also check the strictness condition on G.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
def check_validity(spec_path: str, n_points: Optional[int], n_freq: Optional[int], seed: Optional[int],
                   strict: bool, output: Optional[str]):
    """Run every applicable family checker for SPEC."""
    seed = get_settings().sampling.seed if seed is None else seed

    def body() -> int:
        spec = load_spec(spec_path)
        resolved = resolve_spec(spec, seed)
        suite = validity_suite(resolved, n_points, n_freq, seed, strict)
        _summarize_suite(suite)
        _emit({"command": "check-validity", "construction": resolved.construction, "theorem": resolved.spec.theorem,
               "anchor": resolved.anchor, **suite.to_dict()}, output)
        return EXIT_OK if suite.passed else EXIT_FAILED

    _run("check-validity", body)


@cli.command("verify-oracles")
@click.option("--suite", "suite_name", type=click.Choice([*SUITES, "all"]), default="all")
@click.option("--seed", type=int, default=None, help="Root seed (default 42).")
@click.option("--trials", type=int, default=100, show_default=True, help="Random instances for the Aitken suite.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
def verify_oracles(suite_name: str, seed: Optional[int], trials: int, output: Optional[str]):
    """Run the analytic identity suites."""
    seed = get_settings().sampling.seed if seed is None else seed

    def body() -> int:
        suites = run_suites(suite_name, seed, trials)
        for suite in suites:
            _summarize_suite(suite)
        passed = all(suite.passed for suite in suites)
        _emit({"command": "verify-oracles", "seed": seed, "pass": passed,
               "suites": [suite.to_dict() for suite in suites]}, output)
        return EXIT_OK if passed else EXIT_FAILED

    _run("verify-oracles", body)


def catalog_document() -> Dict[str, Any]:
    """Schema-stable listing of every name a spec file can use."""
    return {
        "phi": {name: schema for name, (_, schema) in sorted(CATALOG.items())},
        "bernstein": {name: schema for name, (_, schema) in sorted(BERNSTEIN_CATALOG.items())},
        "family_G": sorted(G_RECIPES),
        "family_H": sorted(H_RECIPES),
        "scalar_kernels": sorted(SCALAR_RECIPES),
        "mixtures": sorted(MIXTURE_RECIPES),
        "constructions": {c.theorem: {"builder": name, **c.to_dict()} for name, c in CONSTRUCTIONS.items()},
        "suites": sorted(SUITES),
    }


@cli.command()
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of tables.")
def catalog(as_json: bool):
    """List catalog functions, family recipes and constructions."""
    document = catalog_document()
    if as_json:
        click.echo(json.dumps(document, sort_keys=True, indent=2))
        return

    out = Console()
    table = Table(title="Completely monotone functions")
    table.add_column("Name")
    table.add_column("Parameters")
    for name, schema in document["phi"].items():
        table.add_row(name, ", ".join(f"{k} {v}" for k, v in schema.items()) or "-")
    out.print(table)

    table = Table(title="Constructions")
    table.add_column("Theorem", no_wrap=True)
    table.add_column("Builder", no_wrap=True)
    table.add_column("Anchor", no_wrap=True)
    for theorem, entry in document["constructions"].items():
        table.add_row(theorem, entry["builder"], entry["anchor"])
    out.print(table)

    table = Table(title="Recipes")
    table.add_column("Role")
    table.add_column("Names")
    for role in ("family_G", "family_H", "scalar_kernels", "mixtures"):
        table.add_row(role, ", ".join(document[role]))
    table.add_row("bernstein", ", ".join(document["bernstein"]))
    out.print(table)


if __name__ == "__main__":
    cli()
