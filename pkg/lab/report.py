"""
Report emission: CSV (canonical) and JSON.

Column order is fixed and floats are written with ``repr`` so reruns with the
same seed give identical bytes.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

from pydantic import BaseModel

from schemas.report import ConvergenceReport, MaximalReport, PsiDecayReport

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ["mode", "n", "set_size", "replica", "value", "mean", "sd", "h_running"]
PSI_COLUMNS = ["kind", "n", "j", "distance", "size_u", "size_v", "psi", "bound", "within_bound"]
MAXIMAL_COLUMNS = ["r", "tail", "stderr", "bound", "checked", "violation"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convergence_records(report: ConvergenceReport):
    for row in report.rows:
        for replica, value in enumerate(row.values):
            yield [row.mode, row.n, row.set_size, replica, value, row.mean, row.sd, row.h_running]


def _psi_records(report: PsiDecayReport):
    for p in report.points:
        yield [p.kind, p.n, p.j, p.distance, p.size_u, p.size_v, p.psi, p.bound, p.within_bound]


def _maximal_records(report: MaximalReport):
    for row in report.rows:
        yield [row.r, row.tail, row.stderr, row.bound, row.checked, row.violation]


def _table(report: BaseModel):
    if isinstance(report, ConvergenceReport):
        return CONVERGENCE_COLUMNS, _convergence_records(report)
    if isinstance(report, PsiDecayReport):
        return PSI_COLUMNS, _psi_records(report)
    if isinstance(report, MaximalReport):
        return MAXIMAL_COLUMNS, _maximal_records(report)
    raise TypeError(f"Unsupported report type: {type(report).__name__}")


def emit_report(report: BaseModel, path: str | Path, fmt: str = "csv") -> Path:
    """Write a report to ``path`` as CSV or JSON.

    Parameters
    ----------
    report : BaseModel
        ConvergenceReport, PsiDecayReport or MaximalReport.
    path : str or Path
        Destination; parent directories are created.
    fmt : str
        ``"csv"`` or ``"json"``.

    Returns
    -------
    Path
        The written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    elif fmt == "csv":
        columns, records = _table(report)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for record in records:
                writer.writerow({c: _cell(v) for c, v in zip(columns, record)})
    else:
        raise ValueError(f"Unsupported format: {fmt}")
    logger.info("Wrote %s report to %s", fmt, path)
    return path
