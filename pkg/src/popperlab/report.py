"""CSV tables and plain-text reports for sweep rows."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import fields

from .scenarios import CaseIIReport, CaseIResult, SweepRow

CSV_COLUMNS = (
    "a", "b", "t", "sigma_plus", "sigma_minus", "mass",
    "dk2sq_narrow", "dk2sq_small_a", "dk2sq_wide", "dk2sq_quadrature", "dk2sq_quadrature_err",
    "dk2sq_mc", "dk2sq_mc_err",
    "dy2sq_narrow", "dy2sq_small_a", "dy2sq_quadrature", "dy2sq_quadrature_err",
    "dy2sq_mc", "dy2sq_mc_err",
    "flags",
)
FLAG_SEPARATOR = ";"


def format_number(value) -> str:
    """Shortest decimal string that round-trips to the same float; empty for None."""
    if value is None:
        return ""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def emit_csv(rows, sink) -> None:
    """Write ``rows`` to a text sink: header, then one line per row, LF endings."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        cells = [format_number(getattr(row, name)) for name in CSV_COLUMNS[:-1]]
        cells.append(FLAG_SEPARATOR.join(row.flags))
        writer.writerow(cells)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    emit_csv(rows, buf)
    return buf.getvalue()


def parse_csv(text: str) -> list[SweepRow]:
    """Inverse of :func:`emit_csv`."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
    known = {f.name for f in fields(SweepRow)}
    rows = []
    for rec in reader:
        kw = {k: (float(v) if v != "" else None) for k, v in rec.items() if k != "flags" and k in known}
        flags = tuple(rec["flags"].split(FLAG_SEPARATOR)) if rec["flags"] else ()
        rows.append(SweepRow(flags=flags, **kw))
    return rows


def _params_line(p):
    return (f"sigma_plus={p.sigma_plus!r} sigma_minus={p.sigma_minus!r} "
            f"mass={p.mass!r} t={p.time!r}")


def case_ii_text(report: CaseIIReport, p) -> str:
    lines = [
        "case (ii): left slit narrowed, right side open",
        f"  state: {_params_line(p)}",
        f"  narrow-slit limit dk2^2 = {report.narrow!r}",
        f"  wide-slit limit   dk2^2 = {report.wide!r}",
        f"  quadrature column non-increasing in a: {report.monotone}",
    ]
    lines += [f"  note: {n}" for n in report.notes]
    lines.append(f"  {report.label}")
    return "\n".join(lines) + "\n"


def case_i_text(result: CaseIResult) -> str:
    lines = [
        "case (i): right slit inserted with the left slit fixed",
        f"  state: {_params_line(result.params)}",
        f"  a = {result.a!r}, detector band k_max = {result.band.k_max!r}",
        f"  dy2^2 at the right screen (left slit only) = {result.dy2sq.value!r}",
        f"  band-limited dk2^2 with right slit b=a     = {result.k2_right_slit.value!r}",
        f"  band-limited dk2^2 without right slit      = {result.k2_open.value!r}",
        f"  right slit broadens k2: {result.right_slit_broadens}",
        "  note: with a finite right slit the band-limited variance grows linearly with k_max",
        f"  {result.label}",
    ]
    return "\n".join(lines) + "\n"
