# app/api/commands.py
#
# CLI commands. Every command resolves its input pair the same way
# (fixture, matrix files, or a seeded random pair), calls into app.core, and
# maps toolkit errors onto the documented exit codes:
#   0 success, 1 verification failure, 2 usage / inapplicable, 3 nonexistent, 4 I/O

import contextlib
import logging
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from app.config.settings import PRINT_SIGNIFICANT_DIGITS, get_random_suite_tolerance
from app.core import geninv
from app.core.errors import GeninvError, InapplicableMethodError
from app.core.fixtures import load_fixture
from app.core.geninv import WeightedPair
from app.core.matrix_core import ComplexMatrix
from app.core.reporting import cross_check_csv, cross_check_json, format_error, residual_json, write_report
from app.core.verify_harness import VerificationEngine, identity_weighted_pair, random_weighted_pair
from app.core.wmwg import ReprMethod, represent, wmwg
from app.database.matrix_files import parse_matrix, write_matrix
from app.models.matrix import FixtureName
from app.models.verification import RandomSpec, ToleranceConfig

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NONEXISTENT, EXIT_IO = 0, 1, 2, 3, 4


# ─────────────────────────────────────────────
# SHARED HELPERS
# ─────────────────────────────────────────────

@contextlib.contextmanager
def _exit_on_error() -> Iterator[None]:
    try:
        yield
    except GeninvError as exc:
        err_console.print(f"[bold red]Error ({exc.code}):[/bold red] {escape(exc.message)}")
        raise typer.Exit(code=exc.exit_code)
    except ValidationError as exc:
        err_console.print(f"[bold red]Invalid input:[/bold red] {escape(exc.errors()[0]['msg'])}")
        raise typer.Exit(code=EXIT_USAGE)


def _usage(message: str) -> typer.Exit:
    err_console.print(f"[bold red]Usage error:[/bold red] {escape(message)}")
    return typer.Exit(code=EXIT_USAGE)


def format_complex(z: complex, digits: int = PRINT_SIGNIFICANT_DIGITS) -> str:
    re = 0.0 if z.real == 0 else z.real
    im = 0.0 if z.imag == 0 else z.imag
    if im == 0.0:
        return f"{re:.{digits}g}"
    if re == 0.0:
        return f"{im:.{digits}g}i"
    return f"{re:.{digits}g}{im:+.{digits}g}i"


def render_matrix(a: ComplexMatrix, title: str) -> Table:
    table = Table(title=title, show_header=False, show_lines=False)
    for _ in range(a.shape[1]):
        table.add_column(justify="right")
    for row in a:
        table.add_row(*(format_complex(complex(z)) for z in row))
    return table


def _tolerance(rank_tol: Optional[float], seeded: bool) -> ToleranceConfig:
    if rank_tol is not None:
        return ToleranceConfig(rank_rel_tol=rank_tol)
    return get_random_suite_tolerance() if seeded else ToleranceConfig()


def _load_inputs(
    fixture: Optional[FixtureName],
    matrix: Optional[Path],
    weight: Optional[Path],
    seed: Optional[int],
    q: int,
    n: int,
    planted_index: int,
) -> Tuple[ComplexMatrix, Optional[ComplexMatrix]]:
    sources = sum(x is not None for x in (fixture, matrix, seed))
    if sources != 1:
        raise _usage("give exactly one of --fixture, --matrix, --seed")
    if fixture is not None:
        return load_fixture(fixture)
    if matrix is not None:
        a = parse_matrix(matrix)
        return a, (parse_matrix(weight) if weight is not None else None)
    pair = random_weighted_pair(RandomSpec(seed=seed, q=q, n=n, target_index=planted_index))
    return pair.a, pair.w


def _load_pair(
    fixture, matrix, weight, seed, q, n, planted_index, rank_tol,
) -> WeightedPair:
    a, w = _load_inputs(fixture, matrix, weight, seed, q, n, planted_index)
    if w is None:
        raise _usage("this command needs a weight (--weight, or --fixture / --seed)")
    return WeightedPair.of(a, w, _tolerance(rank_tol, seed is not None))


def _parse_m_list(raw: str) -> List[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise _usage(f"--m must be a comma-separated list of integers (got {raw!r})")
    if not values:
        raise _usage("--m needs at least one value")
    return values


# ─────────────────────────────────────────────
# METHOD TABLE FOR `compute`
# ─────────────────────────────────────────────

_UNWEIGHTED: Dict[str, Callable[[ComplexMatrix, ToleranceConfig], ComplexMatrix]] = {
    "pinv":              geninv.moore_penrose,
    "drazin":            geninv.drazin,
    "group":             geninv.group_inverse,
    "core":              geninv.core_inverse,
    "core-ep":           geninv.core_ep,
    "weak-group":        geninv.weak_group,
    "generalized-group": geninv.generalized_group,
}

_WEIGHTED: Dict[str, Callable[[WeightedPair], ComplexMatrix]] = {
    "w-drazin":     geninv.weighted_drazin,
    "w-group":      geninv.weighted_group,
    "w-core":       geninv.weighted_core,
    "w-core-ep":    geninv.weighted_core_ep,
    "w-weak-group": geninv.weighted_weak_group,
}


def _dispatch(
    method: str,
    a: ComplexMatrix,
    w: Optional[ComplexMatrix],
    m: Optional[int],
    l: Optional[int],
    tol: ToleranceConfig,
) -> ComplexMatrix:
    if method in _UNWEIGHTED:
        return _UNWEIGHTED[method](a, tol)
    if method == "m-weak-group":
        if m is None:
            raise _usage("m-weak-group needs --m")
        return geninv.m_weak_group(a, m, tol)

    if method in _WEIGHTED or method == "wmwg" or method.startswith("wmwg:"):
        if w is None:
            raise _usage(f"{method} needs a weight matrix (--weight)")
        pair = WeightedPair.of(a, w, tol)
        if method in _WEIGHTED:
            return _WEIGHTED[method](pair)
        if m is None:
            raise _usage(f"{method} needs --m")
        if method == "wmwg":
            return wmwg(pair, m)
        return represent(pair, m, ReprMethod.from_tag(method.split(":", 1)[1]), l=l)

    raise InapplicableMethodError(method, "a known method name")


# ─────────────────────────────────────────────
# COMMANDS
# ─────────────────────────────────────────────

FixtureOpt  = typer.Option(None, "--fixture", help="Built-in fixture (ex41).")
MatrixOpt   = typer.Option(None, "--matrix", help="Matrix JSON file (A).")
WeightOpt   = typer.Option(None, "--weight", help="Weight JSON file (W).")
SeedOpt     = typer.Option(None, "--seed", help="Generate a random pair with this seed.")
QOpt        = typer.Option(4, "--q", help="Rows of a generated A.")
NOpt        = typer.Option(4, "--n", help="Columns of a generated A.")
IndexOpt    = typer.Option(2, "--index", help="Planted index of a generated pair.")
RankTolOpt  = typer.Option(None, "--rank-tol", help="Relative rank tolerance (default max(q,n)*eps).")


def compute(
    method: str = typer.Option("wmwg", "--method", help="pinv, drazin, group, core, core-ep, weak-group, generalized-group, "
                               "m-weak-group, w-drazin, w-group, w-core, w-core-ep, w-weak-group, wmwg, wmwg:<Tag>."),
    m: Optional[int] = typer.Option(None, "--m", help="Order m >= 1."),
    l: Optional[int] = typer.Option(None, "--l", help="Free parameter of wmwg:PinvPower (default k)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the result matrix here."),
    fixture: Optional[FixtureName] = FixtureOpt,
    matrix: Optional[Path] = MatrixOpt,
    weight: Optional[Path] = WeightOpt,
    seed: Optional[int] = SeedOpt,
    q: int = QOpt,
    n: int = NOpt,
    planted_index: int = IndexOpt,
    rank_tol: Optional[float] = RankTolOpt,
) -> None:
    """Compute one generalized inverse."""
    with _exit_on_error():
        a, w = _load_inputs(fixture, matrix, weight, seed, q, n, planted_index)
        tol = _tolerance(rank_tol, seed is not None)
        result = _dispatch(method.strip(), a, w, m, l, tol)
        if out is not None:
            write_matrix(out, result)
        console.print(render_matrix(result, f"{method}" + (f" (m={m})" if m is not None else "")))


def table(
    m_list: str = typer.Option("1,2,3", "--m", help="Comma-separated m values."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the report (.csv or .json)."),
    workers: int = typer.Option(1, "--workers", help="Threads used to evaluate methods."),
    extensions: bool = typer.Option(False, "--extensions", help="Add the PinvPower[l=k] row."),
    fixture: Optional[FixtureName] = FixtureOpt,
    matrix: Optional[Path] = MatrixOpt,
    weight: Optional[Path] = WeightOpt,
    seed: Optional[int] = SeedOpt,
    q: int = QOpt,
    n: int = NOpt,
    planted_index: int = IndexOpt,
    rank_tol: Optional[float] = RankTolOpt,
) -> None:
    """Cross-check every representation against the definition."""
    with _exit_on_error():
        m_values = _parse_m_list(m_list)
        pair = _load_pair(fixture, matrix, weight, seed, q, n, planted_index, rank_tol)
        report = VerificationEngine(workers=workers).cross_check(pair, m_values, include_extensions=extensions)

        if out is None:
            typer.echo(cross_check_csv(report), nl=False)
            return
        text = cross_check_json(report) if out.suffix.lower() == ".json" else cross_check_csv(report)
        write_report(out, text)

        grid = Table(title=f"Frobenius errors against the definition (k={report.k})")
        grid.add_column("method")
        for mv in report.m_values:
            grid.add_column(f"m={mv}", justify="right")
        for method in report.methods:
            cells = [report.cell(method, mv) for mv in report.m_values]
            grid.add_row(escape(method), *("NA" if c.inapplicable else f"{c.error:.4e}" for c in cells))
        console.print(grid)


def verify(
    m: int = typer.Option(..., "--m", help="Order m >= 1."),
    tol: float = typer.Option(1e-10, "--tol", help="Largest acceptable relative residual."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the residual report as JSON."),
    fixture: Optional[FixtureName] = FixtureOpt,
    matrix: Optional[Path] = MatrixOpt,
    weight: Optional[Path] = WeightOpt,
    seed: Optional[int] = SeedOpt,
    q: int = QOpt,
    n: int = NOpt,
    planted_index: int = IndexOpt,
    rank_tol: Optional[float] = RankTolOpt,
) -> None:
    """Run the defining-equation and reduction suites; exit 1 on any offender."""
    with _exit_on_error():
        pair = _load_pair(fixture, matrix, weight, seed, q, n, planted_index, rank_tol)
        engine = VerificationEngine()
        report = engine.residual_suite(pair, m, tol=tol)
        reductions = engine.reduction_suite(pair, m)
        if out is not None:
            write_report(out, residual_json(report))

        offenders = [v.name for v in report.violations]
        offenders += [f"reduction.{name}" for name, value in sorted(reductions.items()) if not value <= tol]

        listing = Table(title=f"Residuals (m={m}, k={pair.k}, tol={tol:g})")
        listing.add_column("check")
        listing.add_column("relative residual", justify="right")
        for name, value in report.residuals.items():
            listing.add_row(escape(name), format_error(value))
        for name, value in sorted(reductions.items()):
            listing.add_row(f"reduction.{name}", format_error(value))
        console.print(listing)

        if offenders:
            err_console.print("[bold red]Failed:[/bold red] " + escape(", ".join(offenders)))
            raise typer.Exit(code=EXIT_VERIFY)
        console.print("[green]All residuals within tolerance.[/green]")


def random_pair(
    seed: int = typer.Option(..., "--seed"),
    q: int = QOpt,
    n: int = NOpt,
    planted_index: int = IndexOpt,
    magnitude: float = typer.Option(1.0, "--magnitude", help="Largest entry modulus."),
    identity_weight: bool = typer.Option(False, "--identity-weight", help="Square A with W = I."),
    out_dir: Path = typer.Option(Path("."), "--out-dir", help="Directory for A.json and W.json."),
) -> None:
    """Write a seeded pair with a planted index as two matrix files."""
    with _exit_on_error():
        spec = RandomSpec(seed=seed, q=q, n=n, target_index=planted_index, magnitude=magnitude)
        pair = identity_weighted_pair(spec) if identity_weight else random_weighted_pair(spec)
        write_matrix(out_dir / "A.json", pair.a)
        write_matrix(out_dir / "W.json", pair.w)
        console.print(f"wrote {out_dir / 'A.json'} and {out_dir / 'W.json'} (k={pair.k})")


def show(
    fixture: Optional[FixtureName] = FixtureOpt,
    matrix: Optional[Path] = MatrixOpt,
    which: str = typer.Option("a", "--which", help="Fixture matrix to show: a or w."),
) -> None:
    """Print a matrix at 5 significant digits."""
    with _exit_on_error():
        if (fixture is None) == (matrix is None):
            raise _usage("give exactly one of --fixture, --matrix")
        if fixture is not None:
            a, w = load_fixture(fixture)
            shown = w if which.lower() == "w" else a
            title = f"{fixture.value}.{which.upper()}"
        else:
            shown, title = parse_matrix(matrix), str(matrix)
        console.print(render_matrix(shown, title))


def register_commands(cli: typer.Typer) -> None:
    cli.command("compute")(compute)
    cli.command("table")(table)
    cli.command("verify")(verify)
    cli.command("random")(random_pair)
    cli.command("show")(show)
