"""Command-line front end: ``popper <command> [options]``.

Commands
--------
spread-k2, spread-y2
    Every requested method for one slit configuration, as a one-row CSV.
case-ii
    Narrow the left slit over ``--a-grid`` with the right side open.
case-i
    Compare the band-limited k2 spread with and without a right slit.
sweep
    Cartesian grid over a, b, t, sigma_plus, sigma_minus and mass.
verify
    Run the built-in invariant checks.

Settings come from command-line flags, then from a ``--config`` file, then
from built-in defaults. The config file holds one ``key = value`` pair per
line, where ``key`` is a long option name without the leading dashes
(dashes and underscores are interchangeable); blank lines and lines starting
with ``#`` are ignored. Grids are written ``start:stop:log|lin:count`` or as
comma-separated values; ``inf`` is accepted for b.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence or
failed verification, 3 I/O failure. ``POPPER_THREADS`` caps the number of
worker threads used by sweeps.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from typing import Mapping, Optional, Sequence

import numpy as np

from . import closed_form as cf
from .errors import BandLimitWarning, ConvergenceError, ParameterError, StatisticsError
from .montecarlo import McSpec
from .oracle import QuadratureSpec
from .report import case_i_text, case_ii_text, emit_csv
from .scenarios import DetectorBand, SweepGrid, run_case_i, run_case_ii, sweep
from .verify import CHECKS, run_checks
from .wavepacket import PacketParams

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("spread-k2", "spread-y2", "case-i", "case-ii", "sweep", "verify")

DEFAULTS = {
    "sigma_plus": "1",
    "sigma_minus": "3",
    "mass": "1",
    "t": "0",
    "a": "0.3",
    "b": "inf",
    "k_max": None,
    "a_grid": "0.01:5:log:20",
    "b_grid": "inf",
    "t_grid": None,
    "sigma_plus_grid": None,
    "sigma_minus_grid": None,
    "mass_grid": None,
    "methods": None,
    "rel_tol": "1e-8",
    "abs_tol": "1e-14",
    "domain_sigmas": "12",
    "max_subdivisions": "500",
    "mc_samples": None,
    "seed": "0",
    "output": None,
    "report": None,
    "checks": None,
}


class UsageError(Exception):
    """Bad command line or config file; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="popper", description="Slit-conditioned spreads of an entangled Gaussian pair.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value settings file")
    state = parser.add_argument_group("state")
    state.add_argument("--sigma-plus", help="spread of k1 + k2 (default 1)")
    state.add_argument("--sigma-minus", help="spread of k1 - k2 (default 3)")
    state.add_argument("--mass", help="particle mass (default 1)")
    state.add_argument("--t", help="evolution time (default 0)")
    slits = parser.add_argument_group("slits and detector")
    slits.add_argument("--a", help="left slit half-width (default 0.3)")
    slits.add_argument("--b", help="right slit half-width or inf (default inf)")
    slits.add_argument("--k-max", help="detector band half-width (default 10 sqrt(dk2sq_narrow))")
    grids = parser.add_argument_group("grids (start:stop:log|lin:count or v1,v2,...)")
    grids.add_argument("--a-grid", help="default 0.01:5:log:20")
    grids.add_argument("--b-grid", help="default inf")
    grids.add_argument("--t-grid", help="default: the value of --t")
    grids.add_argument("--sigma-plus-grid", help="default: the value of --sigma-plus")
    grids.add_argument("--sigma-minus-grid", help="default: the value of --sigma-minus")
    grids.add_argument("--mass-grid", help="default: the value of --mass")
    num = parser.add_argument_group("numerics")
    num.add_argument("--methods", help=f"comma list from {', '.join(cf.METHODS)}")
    num.add_argument("--rel-tol", help="quadrature relative tolerance (default 1e-8)")
    num.add_argument("--abs-tol", help="quadrature absolute tolerance (default 1e-14)")
    num.add_argument("--domain-sigmas", help="integration window in marginal widths (default 12)")
    num.add_argument("--max-subdivisions", help="adaptive interval budget (default 500)")
    num.add_argument("--mc-samples", help="enable Monte Carlo with this many draws")
    num.add_argument("--seed", help="Monte Carlo seed (default 0)")
    out = parser.add_argument_group("output")
    out.add_argument("-o", "--output", help="data file (default: standard output)")
    out.add_argument("--report", help="plain-text report file")
    parser.add_argument("--checks", help="verify: comma list of check names (default: all)")
    return parser


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file into option names with underscores."""
    known = set(DEFAULTS)
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            if key not in known:
                raise UsageError(f"{path}:{lineno}: unknown setting {key!r}")
            settings[key] = value.strip()
    return settings


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults (all values still strings)."""
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def parse_float(field, text, allow_inf=False) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParameterError(field, f"not a number: {text!r}") from None
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ParameterError(field, f"must be finite, got {text!r}")
    return value


def parse_int(field, text) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ParameterError(field, f"not an integer: {text!r}") from None


def parse_grid(field, text, allow_inf=False) -> list[float]:
    """``start:stop:log|lin:count`` or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 4 or parts[2] not in ("log", "lin"):
            raise ParameterError(field, f"grid must look like start:stop:log|lin:count, got {text!r}")
        start, stop = parse_float(field, parts[0]), parse_float(field, parts[1])
        count = parse_int(field, parts[3])
        if count < 1:
            raise ParameterError(field, "grid count must be at least 1")
        if parts[2] == "log":
            if not (start > 0 and stop > 0):
                raise ParameterError(field, "log grid endpoints must be positive")
            values = np.geomspace(start, stop, count)
        else:
            values = np.linspace(start, stop, count)
        return [float(v) for v in values]
    values = [parse_float(field, v, allow_inf) for v in text.split(",") if v.strip()]
    if not values:
        raise ParameterError(field, "grid is empty")
    return values


def thread_count(env: Mapping[str, str]) -> int:
    raw = env.get("POPPER_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ParameterError("POPPER_THREADS", f"must be a positive integer, got {raw!r}")
    return n


def _state(s) -> PacketParams:
    return PacketParams(parse_float("sigma_plus", s["sigma_plus"]),
                        parse_float("sigma_minus", s["sigma_minus"]),
                        parse_float("mass", s["mass"]), parse_float("t", s["t"]))


def _quad_spec(s) -> QuadratureSpec:
    return QuadratureSpec(parse_float("rel_tol", s["rel_tol"]), parse_float("abs_tol", s["abs_tol"]),
                          parse_float("domain_sigmas", s["domain_sigmas"]),
                          parse_int("max_subdivisions", s["max_subdivisions"]))


def _mc_spec(s) -> Optional[McSpec]:
    if s["mc_samples"] is None:
        return None
    return McSpec(parse_int("mc_samples", s["mc_samples"]), parse_int("seed", s["seed"]))


def _band(s) -> Optional[DetectorBand]:
    return None if s["k_max"] is None else DetectorBand(parse_float("k_max", s["k_max"]))


def _methods(s, mc) -> list[str]:
    if s["methods"] is None:
        methods = [m for m in cf.METHODS if m != cf.MONTE_CARLO]
        if mc is not None:
            methods.append(cf.MONTE_CARLO)
        return methods
    methods = [m.strip() for m in s["methods"].split(",") if m.strip()]
    unknown = [m for m in methods if m not in cf.METHODS]
    if unknown or not methods:
        raise ParameterError("methods", f"choose from {', '.join(cf.METHODS)}; got {s['methods']!r}")
    if cf.MONTE_CARLO in methods and mc is None:
        raise ParameterError("mc_samples", "required when monte-carlo is requested")
    return methods


def _warn_band_limited(rows):
    if any(f.startswith("dk2sq_quadrature:post-slit") for r in rows for f in r.flags):
        warnings.warn("cells with a finite right slit report a band-limited k2 variance that "
                      "grows linearly with k_max", BandLimitWarning, stacklevel=2)


def _numeric_failure(rows) -> bool:
    return any(f.endswith(":no-convergence") or f.endswith(":too-few-samples")
               for r in rows for f in r.flags)


class _Sink:
    """Open ``path`` for writing or fall back to a stream; never closes the stream."""

    def __init__(self, path, stream):
        self.path, self.stream, self.fh = path, stream, None

    def __enter__(self):
        if self.path is None:
            return self.stream
        self.fh = open(self.path, "w", encoding="utf-8", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def _write_text(path, text, stream):
    with _Sink(path, stream) as fh:
        fh.write(text)


def _cmd_spread(s, quantity, env, stdout):
    p = _state(s)
    mc = _mc_spec(s)
    grid = SweepGrid([parse_float("a", s["a"])], [p.sigma_plus], [p.sigma_minus],
                     b=[parse_float("b", s["b"], allow_inf=True)], t=[p.time], mass=[p.mass])
    rows = sweep(grid, _methods(s, mc), _quad_spec(s), mc, _band(s), quantities=(quantity,))
    _warn_band_limited(rows)
    with _Sink(s["output"], stdout) as fh:
        emit_csv(rows, fh)
    return EXIT_NUMERIC if _numeric_failure(rows) else EXIT_OK


def _cmd_case_ii(s, env, stdout):
    p = _state(s)
    widths = parse_grid("a_grid", s["a_grid"])
    report = run_case_ii(widths, p, _quad_spec(s), _mc_spec(s), workers=thread_count(env))
    with _Sink(s["output"], stdout) as fh:
        emit_csv(report.rows, fh)
    if s["report"] is not None:
        _write_text(s["report"], case_ii_text(report, p), stdout)
    return EXIT_NUMERIC if _numeric_failure(report.rows) else EXIT_OK


def _cmd_case_i(s, env, stdout):
    p = _state(s)
    result = run_case_i(parse_float("a", s["a"]), p, _band(s), _quad_spec(s))
    text = case_i_text(result)
    _write_text(s["output"], text, stdout)
    if s["report"] is not None:
        _write_text(s["report"], text, stdout)
    return EXIT_OK


def _cmd_sweep(s, env, stdout):
    p = _state(s)
    mc = _mc_spec(s)

    def axis(name, fallback, allow_inf=False):
        text = s[name] if s[name] is not None else repr(fallback)
        return parse_grid(name, text, allow_inf)

    grid = SweepGrid(
        a=parse_grid("a_grid", s["a_grid"]),
        b=parse_grid("b_grid", s["b_grid"], allow_inf=True),
        t=axis("t_grid", p.time),
        sigma_plus=axis("sigma_plus_grid", p.sigma_plus),
        sigma_minus=axis("sigma_minus_grid", p.sigma_minus),
        mass=axis("mass_grid", p.mass),
    )
    rows = sweep(grid, _methods(s, mc), _quad_spec(s), mc, _band(s), workers=thread_count(env))
    _warn_band_limited(rows)
    with _Sink(s["output"], stdout) as fh:
        emit_csv(rows, fh)
    return EXIT_NUMERIC if _numeric_failure(rows) else EXIT_OK


def _cmd_verify(s, env, stdout):
    checks = CHECKS
    if s["checks"] is not None:
        wanted = [c.strip() for c in s["checks"].split(",") if c.strip()]
        known = {c.name: c for c in CHECKS}
        unknown = [w for w in wanted if w not in known]
        if unknown or not wanted:
            raise ParameterError("checks", f"unknown check(s) {unknown}; known: {', '.join(known)}")
        checks = tuple(known[w] for w in wanted)
    with _Sink(s["output"], stdout) as fh:
        def show(res):
            status = "PASS" if res.ok else "FAIL"
            fh.write(f"{status} {res.module}/{res.name} ({res.seconds:.1f}s): {res.detail}\n")
            fh.flush()

        results = run_checks(checks, on_result=show)
        failed = [r for r in results if not r.ok]
        if failed:
            fh.write(f"{len(failed)} of {len(results)} checks failed: "
                     f"{', '.join(r.name for r in failed)}\n")
        else:
            fh.write(f"all {len(results)} checks passed\n")
    return EXIT_NUMERIC if failed else EXIT_OK


_HANDLERS = {
    "spread-k2": lambda s, env, out: _cmd_spread(s, "dk2sq", env, out),
    "spread-y2": lambda s, env, out: _cmd_spread(s, "dy2sq", env, out),
    "case-i": _cmd_case_i,
    "case-ii": _cmd_case_ii,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def run_cli(argv: Sequence[str], env: Optional[Mapping[str, str]] = None, stdout=None, stderr=None) -> int:
    """Run one command and return its exit code; never raises on bad input."""
    env = os.environ if env is None else env
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(list(argv))
        settings = resolve(args)
        thread_count(env)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BandLimitWarning)
            code = _HANDLERS[args.command](settings, env, stdout)
        for w in caught:
            print(f"popper: warning: {w.message}", file=stderr)
        return code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"popper: error: {exc}", file=stderr)
        return EXIT_INVALID
    except ParameterError as exc:
        print(f"popper: invalid {exc}", file=stderr)
        return EXIT_INVALID
    except (ConvergenceError, StatisticsError) as exc:
        print(f"popper: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"popper: I/O error: {exc}", file=stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"popper: invalid input: {exc}", file=stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
