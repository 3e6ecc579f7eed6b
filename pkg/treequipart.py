"""
Tree equipartition lab CLI.

Usage:
    # Equipartition run along the sets named in the spec
    python treequipart.py run --spec experiments/ising.json

    # Override the seed and write JSON instead of CSV
    python treequipart.py run --spec experiments/ising.json --seed 7 --format json

    # Exhaustive invariant suites
    python treequipart.py verify --suite all

    # psi-mixing decay and maximal-inequality checks
    python treequipart.py psi --spec experiments/ising.json
    python treequipart.py maximal --spec experiments/ising.json --out results/max.csv

    # JSON tables of the sphere partition and of automorphism constructions
    python treequipart.py export partition --d 3 --n 2
    python treequipart.py export horosphere --d 3 --xi 12312 --zeta 21321 --n 2

Exit status is 0 when every check passes, 1 when a check fails and 2 when
the input is rejected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from config import LOG_LEVEL, RESULTS_DIR
from core.automorphisms import DepthAutomorphism, flip, geodesic_mapper, horosphere_mapper
from core.boundary import BoundaryGroup, export_partition, sphere_partition
from core.tree import Alphabet, format_site, parse_site
from lab.graph import run_maximal, run_psi_decay, run_smb
from lab.report import emit_report
from lab.suites import SUITES, run_suite
from schemas.experiment import ExperimentSpec, load_spec
from schemas.report import (
    AutomorphismExport,
    ConvergenceReport,
    MaximalReport,
    PartitionExport,
    PsiDecayReport,
    SuiteResult,
)

logger = logging.getLogger("treequipart")
console = Console()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_REJECTED = 2


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=False, show_path=False)],
    )


def _fmt(value: float | None, digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


# ─── Spec handling ───────────────────────────────────────────────────────────

def apply_overrides(spec: ExperimentSpec, args: argparse.Namespace) -> ExperimentSpec:
    """Return ``spec`` with the --seed / --out / --format flags applied."""
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output"] = args.out
    if getattr(args, "format", None) is not None:
        updates["format"] = args.format
    if not updates:
        return spec
    return ExperimentSpec.model_validate({**spec.model_dump(), **updates})


def output_path(spec: ExperimentSpec, spec_path: Path, command: str) -> Path:
    """Where the report goes: the spec's ``output`` or ``results/<spec>-<command>.<fmt>``."""
    if spec.output:
        return Path(spec.output)
    return RESULTS_DIR / f"{spec_path.stem}-{command}.{spec.format}"


# ─── Console summaries ──────────────────────────────────────────────────────

def show_convergence(report: ConvergenceReport) -> None:
    table = Table(title=f"Normalized information ({report.spec.mode})")
    for column in ("mode", "n", "|F|", "mean", "sd", "h running"):
        table.add_column(column, justify="right" if column != "mode" else "left")
    for row in report.rows:
        table.add_row(row.mode, str(row.n), str(row.set_size), _fmt(row.mean), _fmt(row.sd), _fmt(row.h_running))
    console.print(table)

    if report.decomposition:
        table = Table(title="Sphere decomposition")
        for column in ("n", "blocks", "identity error", "gap mean", "gap max", "bound", "ok"):
            table.add_column(column, justify="right")
        for row in report.decomposition:
            ok = "-" if row.within_bound is None else ("yes" if row.within_bound else "no")
            table.add_row(
                str(row.n), str(row.n_blocks), f"{row.identity_error:.2e}",
                _fmt(row.gap_mean), _fmt(row.gap_max), _fmt(row.gap_bound), ok,
            )
        console.print(table)

    if report.comparison is not None:
        c = report.comparison
        console.print(
            f"n={c.n}: {c.mode} {c.h:.4f} ± {c.se:.4f} vs {c.companion_mode} "
            f"{c.h_companion:.4f} ± {c.se_companion:.4f} (z = {c.z:.2f})",
            style="bold",
        )


def show_psi(report: PsiDecayReport) -> None:
    table = Table(title="psi-mixing coefficients")
    for column in ("kind", "n", "j", "distance", "|U|", "|V|", "psi", "bound"):
        table.add_column(column, justify="right" if column != "kind" else "left")
    for p in report.points:
        table.add_row(
            p.kind, "-" if p.n is None else str(p.n), "-" if p.j is None else str(p.j),
            str(p.distance), str(p.size_u), str(p.size_v), f"{p.psi:.3e}",
            "-" if p.bound is None else f"{p.bound:.3e}",
        )
    console.print(table)
    if report.trivially_zero:
        console.print("Independent model: psi is identically zero.", style="bold green")
    for label, fit in (("singleton", report.fit), ("block", report.block_fit)):
        if fit is None:
            continue
        verdict = "above" if fit.exceeds_threshold else "below"
        console.print(
            f"{label} fit: lambda = {fit.lam:.4f}, C = {fit.C:.4f} "
            f"({verdict} 2 log(d-1) = {_fmt(fit.threshold)})",
            style="bold",
        )
    if report.skipped_blocks:
        console.print(f"{report.skipped_blocks} sphere-block pairs skipped (atom cap).", style="yellow")


def show_maximal(report: MaximalReport) -> None:
    table = Table(title=f"Tail of sup_n I_n (|E| = {report.n_states})")
    for column in ("r", "tail", "stderr", "bound", "checked", "violation"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(
            f"{row.r:.2f}", f"{row.tail:.4f}", f"{row.stderr:.4f}", f"{row.bound:.4f}",
            "yes" if row.checked else "no",
            "[bold red]yes[/]" if row.violation else "no",
        )
    console.print(table)
    console.print(
        f"r0 = {report.r0:.4f}, E[sup] = {report.sup_mean:.4f} ± {report.sup_se:.4f} "
        f"<= C = {report.constant:.4f}: {'yes' if report.within_constant else 'no'}",
        style="bold",
    )


def show_suites(results: list[SuiteResult]) -> None:
    table = Table(title="Verification suites")
    table.add_column("suite")
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail", overflow="fold")
    for suite in results:
        for check in suite.checks:
            mark = "[green]pass[/]" if check.passed else "[bold red]FAIL[/]"
            table.add_row(suite.suite, check.name, mark, check.detail)
    console.print(table)
    for suite in results:
        style = "bold green" if suite.passed else "bold red"
        passed = sum(check.passed for check in suite.checks)
        console.print(f"{suite.suite}: {passed}/{len(suite.checks)} checks in {suite.wall_time:.1f}s", style=style)


# ─── Commands ────────────────────────────────────────────────────────────────

def _load(args: argparse.Namespace) -> tuple[ExperimentSpec, Path]:
    spec_path = Path(args.spec)
    spec = apply_overrides(load_spec(spec_path), args)
    return spec, spec_path


def cmd_run(args: argparse.Namespace) -> int:
    spec, spec_path = _load(args)
    report = run_smb(spec, base_dir=spec_path.parent)
    show_convergence(report)
    emit_report(report, output_path(spec, spec_path, "run"), spec.format)
    failed = [row.n for row in report.decomposition if row.within_bound is False]
    if failed:
        logger.warning("Decomposition gap above its bound at n = %s", failed)
    return EXIT_OK


def cmd_psi(args: argparse.Namespace) -> int:
    spec, spec_path = _load(args)
    report = run_psi_decay(spec, base_dir=spec_path.parent)
    show_psi(report)
    emit_report(report, output_path(spec, spec_path, "psi"), spec.format)
    return EXIT_OK


def cmd_maximal(args: argparse.Namespace) -> int:
    spec, spec_path = _load(args)
    report = run_maximal(spec, base_dir=spec_path.parent)
    show_maximal(report)
    emit_report(report, output_path(spec, spec_path, "maximal"), spec.format)
    if report.violations:
        logger.error("%d tail points exceed |E|^2 e^(-r)", report.violations)
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_suite(args.suite)
    show_suites(results)
    return EXIT_OK if all(suite.passed for suite in results) else EXIT_FAILED


def _write_json(model, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def _build_mapper(args: argparse.Namespace) -> DepthAutomorphism:
    alphabet = Alphabet(d=args.d)
    if args.target == "flip":
        return flip(alphabet, parse_site(args.base), args.a, args.b, args.radius)
    xi, zeta = parse_site(args.xi), parse_site(args.zeta)
    if args.target == "geodesic":
        return geodesic_mapper(alphabet, xi, zeta, args.radius)
    radius = args.radius if args.radius is not None else 2 * args.n
    return horosphere_mapper(BoundaryGroup(alphabet), xi, zeta, args.n, radius)


def cmd_export(args: argparse.Namespace) -> int:
    if args.target == "partition":
        blocks = sphere_partition(BoundaryGroup(Alphabet(d=args.d)), args.n)
        export = PartitionExport(d=args.d, n=args.n, blocks=export_partition(blocks))
        out = Path(args.out) if args.out else RESULTS_DIR / f"partition-d{args.d}-n{args.n}.json"
        _write_json(export, out)
        console.print(f"{len(blocks)} blocks of S_{2 * args.n} written to {out}", style="bold")
        return EXIT_OK

    phi = _build_mapper(args)
    check = phi.verify()
    export = AutomorphismExport(
        kind=args.target, d=args.d, radius=phi.radius,
        root_image=format_site(phi.root_image), pairs=phi.export(), check=check,
    )
    out = Path(args.out) if args.out else RESULTS_DIR / f"{args.target}-d{args.d}-r{phi.radius}.json"
    _write_json(export, out)
    console.print(f"{len(export.pairs)} sites of ball({phi.radius}) written to {out}", style="bold")
    if not check.ok:
        for violation in check.violations:
            logger.error("%s", violation)
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Boundary-group constructions and entropy equipartition on regular trees."
    )
    parser.add_argument(
        "--log-level",
        default=LOG_LEVEL,
        help="Logging level (default from TREEQUIPART_LOG_LEVEL).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name: str, help_text: str, with_format: bool) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--spec", required=True, help="ExperimentSpec JSON file.")
        p.add_argument("--seed", type=int, default=None, help="Override the spec seed.")
        p.add_argument("--out", default=None, help="Override the output path.")
        if with_format:
            p.add_argument("--format", choices=["csv", "json"], default=None, help="Override the output format.")
        return p

    experiment("run", "Equipartition run along the spec's set family.", True).set_defaults(func=cmd_run)
    experiment("psi", "psi-mixing decay measurement.", True).set_defaults(func=cmd_psi)
    experiment("maximal", "Maximal-inequality tail check.", True).set_defaults(func=cmd_maximal)

    verify = sub.add_parser("verify", help="Run the exhaustive invariant suites.")
    verify.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    verify.set_defaults(func=cmd_verify)

    export = sub.add_parser("export", help="Write a sphere partition or an automorphism table as JSON.")
    targets = export.add_subparsers(dest="target", required=True)

    def target(name: str, help_text: str) -> argparse.ArgumentParser:
        p = targets.add_parser(name, help=help_text)
        p.add_argument("--d", type=int, default=3, help="Tree degree.")
        p.add_argument("--out", default=None, help="Output path (default results/<target>-...json).")
        p.set_defaults(func=cmd_export)
        return p

    partition = target("partition", "Blocks of S_2n at pairwise distance >= 2n.")
    partition.add_argument("--n", type=int, required=True)

    flip_p = target("flip", "Swap the subtrees below u a and u b.")
    flip_p.add_argument("--base", default="", help="The site u (empty for the root).")
    flip_p.add_argument("--a", type=int, required=True)
    flip_p.add_argument("--b", type=int, required=True)
    flip_p.add_argument("--radius", type=int, required=True)

    geodesic = target("geodesic", "Root-fixing map sending the geodesic to xi onto the one to zeta.")
    geodesic.add_argument("--xi", required=True)
    geodesic.add_argument("--zeta", required=True)
    geodesic.add_argument("--radius", type=int, required=True)

    horosphere = target("horosphere", "Root-fixing map sending s(g, xi) to s(g, zeta) on G_n.")
    horosphere.add_argument("--xi", required=True)
    horosphere.add_argument("--zeta", required=True)
    horosphere.add_argument("--n", type=int, required=True)
    horosphere.add_argument("--radius", type=int, default=None, help="Defaults to 2n.")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)
    try:
        return args.func(args)
    except ValueError as e:
        # TreequipartError and pydantic ValidationError both land here
        logger.error("%s", e)
        return EXIT_REJECTED
    except FileNotFoundError as e:
        logger.error("File not found: %s", e.filename)
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
