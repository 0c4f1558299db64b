"""Monte Carlo estimates of the coincidence spreads.

Random numbers come from numpy's Philox4x64 counter-based generator keyed
directly by the 64-bit seed; independent streams are obtained by jumping the
counter (``Philox.jumped``), so results do not depend on evaluation order.

Position mode samples the coherent coincidence density without touching the
closed window formula. Writing ``g(y2) = int_{-a}^{a} Psi(y1, y2) dy1``,

    |g(y2)|^2 = int int_{|y1|,|y1'|<=a} Psi(y1, y2) conj(Psi(y1', y2)) dy1 dy1'

The modulus of the integrand is a trivariate Gaussian in (y1, y1', y2). We
draw from it exactly, keep draws with both replicas inside the slit, and
weight each by the cosine of the phase difference. Plain rejection on a
single y1 (``coherent=False``) estimates the incoherent spread instead.

Momentum mode tabulates ``|slit_amplitude|^2`` on a grid refined until the
tabulated variance settles, then samples by inverse-CDF interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import closed_form as cf
from .errors import ParameterError, StatisticsError
from .oracle import DEFAULT_SPEC, QuadratureSpec, slit_amplitude
from .wavepacket import PacketParams, evolved_widths, momentum_width, position_density_coefficients

POSITION = "position-spread"
MOMENTUM = "momentum-spread"

MIN_ACCEPTED = 100
_BATCH = 262_144
_JACKKNIFE_GROUPS = 100


@dataclass(frozen=True)
class McSpec:
    sample_count: int = 1_000_000
    seed: int = 0
    mode: str = POSITION

    def __post_init__(self):
        if not (isinstance(self.sample_count, int) and self.sample_count >= 1000):
            raise ParameterError("sample_count", "must be an integer >= 1000")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ParameterError("seed", "must be an integer in [0, 2**64)")
        if self.mode not in (POSITION, MOMENTUM):
            raise ParameterError("mode", f"must be {POSITION!r} or {MOMENTUM!r}")


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``seed``; ``stream`` jumps the counter by stream * 2**128."""
    bits = np.random.Philox(key=seed)
    if stream:
        bits = bits.jumped(stream)
    return np.random.Generator(bits)


def _jackknife_ratio(weights, values):
    """Weighted variance of ``values`` and its delete-a-group jackknife error."""
    n = len(values)
    groups = min(_JACKKNIFE_GROUPS, n)
    idx = np.array_split(np.arange(n), groups)
    w_g = np.array([weights[i].sum() for i in idx])
    m1_g = np.array([(weights[i] * values[i]).sum() for i in idx])
    m2_g = np.array([(weights[i] * values[i] ** 2).sum() for i in idx])

    def var(w, m1, m2):
        mean = m1 / w
        return m2 / w - mean * mean

    full = var(w_g.sum(), m1_g.sum(), m2_g.sum())
    loo = var(w_g.sum() - w_g, m1_g.sum() - m1_g, m2_g.sum() - m2_g)
    se = math.sqrt((groups - 1) / groups * np.sum((loo - loo.mean()) ** 2))
    return float(full), se


def _position_samples(a, p, spec, rng, coherent):
    d, o, _ = position_density_coefficients(p)
    sp, sm = evolved_widths(p)
    im_s = (sp + sm).imag
    im_d = (sp - sm).imag
    if coherent:
        # |Psi(y1,y2)| |Psi(y1',y2)| = exp(-1/2 x^T L x), x = (y1, y1', y2)
        prec = np.array([[d, 0.0, o], [0.0, d, o], [o, o, 2 * d]])
    else:
        prec = 2.0 * np.array([[d, o], [o, d]])
    chol = np.linalg.cholesky(np.linalg.inv(prec))
    dim = prec.shape[0]
    ws, ys = [], []
    remaining = spec.sample_count
    while remaining:
        n = min(remaining, _BATCH)
        remaining -= n
        x = rng.standard_normal((n, dim)) @ chol.T
        if coherent:
            y1, y1p, y2 = x.T
            keep = (np.abs(y1) <= a) & (np.abs(y1p) <= a)
            y1, y1p, y2 = y1[keep], y1p[keep], y2[keep]
            phase = -0.25 * im_s * (y1 * y1 - y1p * y1p) - 0.5 * im_d * (y1 - y1p) * y2
            ws.append(np.cos(phase))
        else:
            keep = np.abs(x[:, 0]) <= a
            y2 = x[keep, 1]
            ws.append(np.ones_like(y2))
        ys.append(y2)
    return np.concatenate(ws), np.concatenate(ys)


def tabulate_k2_density(a, p, q: QuadratureSpec = DEFAULT_SPEC, rel_tol=1e-7):
    """Grid and unnormalised ``|slit_amplitude|^2`` values, refined by doubling."""
    limit = q.domain_sigmas * momentum_width(p)
    n = 1025
    prev = None
    while True:
        grid = np.linspace(-limit, limit, n)
        dens = np.abs(slit_amplitude(grid, a, p)) ** 2
        cdf = _cdf(grid, dens)
        var = _tabulated_variance(grid, cdf)
        if prev is not None and abs(var - prev) <= rel_tol * var:
            return grid, dens
        if n > 2**20:
            return grid, dens
        prev = var
        n = 2 * n - 1


def _cdf(grid, dens):
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    return cdf / cdf[-1]


def _tabulated_variance(grid, cdf):
    # exact variance of the piecewise-uniform law that inverse-CDF interpolation samples
    lo, hi = grid[:-1], grid[1:]
    mass = np.diff(cdf)
    m1 = np.sum(mass * 0.5 * (lo + hi))
    m2 = np.sum(mass * (lo * lo + lo * hi + hi * hi) / 3)
    return m2 - m1 * m1


def _momentum_samples(a, p, spec, rng):
    grid, dens = tabulate_k2_density(a, p)
    cdf = _cdf(grid, dens)
    out = []
    remaining = spec.sample_count
    while remaining:
        n = min(remaining, _BATCH)
        remaining -= n
        out.append(np.interp(rng.random(n), cdf, grid))
    k = np.concatenate(out)
    return np.ones_like(k), k


def mc_estimate(a: float, p: PacketParams, spec: McSpec = McSpec(), *, stream: int = 0,
                coherent: bool = True) -> cf.SpreadEstimate:
    """Monte Carlo variance of y2 (position mode) or k2 (momentum mode).

    ``error_estimate`` is the jackknife standard error. ``stream`` selects an
    independent substream for the same seed. Raises :class:`StatisticsError`
    when fewer than 100 samples survive the slit.
    """
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ParameterError("a", f"slit half-width must be finite and positive, got {a!r}")
    rng = make_generator(spec.seed, stream)
    if spec.mode == POSITION:
        w, x = _position_samples(a, p, spec, rng, coherent)
    else:
        w, x = _momentum_samples(a, p, spec, rng)
    if len(x) < MIN_ACCEPTED:
        raise StatisticsError(
            f"only {len(x)} of {spec.sample_count} samples passed the slit; "
            "increase a or sample_count"
        )
    value, se = _jackknife_ratio(w, x)
    flags = () if coherent else ("incoherent",)
    return cf.SpreadEstimate(value, cf.MONTE_CARLO, se, p, a, flags)
