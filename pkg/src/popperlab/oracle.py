"""Brute-force coincidence spreads by adaptive quadrature.

The inner slit integral is taken over the amplitude (coherent window) and
squared afterwards. The momentum and position spreads are then ratios of
two outer integrals computed on a shared adaptive subdivision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import closed_form as cf
from .errors import ConvergenceError, ParameterError
from .quadrature import integrate
from .special import gaussian_window
from .wavepacket import (
    PacketParams,
    evolved_widths,
    momentum_width,
    position_width,
    principal_sqrt,
    psi_mixed,
    psi_position,
)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation for the outer integrals.

    ``absolute_tolerance`` applies to integrands rescaled to unit value at
    the origin. ``domain_sigmas`` sets the integration window in units of the
    unconditioned marginal width.
    """

    relative_tolerance: float = 1e-8
    absolute_tolerance: float = 1e-14
    domain_sigmas: float = 12.0
    max_subdivisions: int = 500

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise ParameterError("relative_tolerance", "must be positive")
        if not self.absolute_tolerance > 0:
            raise ParameterError("absolute_tolerance", "must be positive")
        if not self.domain_sigmas >= 8:
            raise ParameterError("domain_sigmas", "must be at least 8")
        if not self.max_subdivisions >= 50:
            raise ParameterError("max_subdivisions", "must be at least 50")


DEFAULT_SPEC = QuadratureSpec()
GOLDEN_SPEC = QuadratureSpec(relative_tolerance=1e-10)


def _check_a(a):
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ParameterError("a", f"slit half-width must be finite and positive, got {a!r}")


def _mixed_window(p):
    """Return ``(prefactor, A, C, S)`` with Psi(y1, k2) = prefactor exp(-A y1^2 + i C k2 y1 - k2^2/S)."""
    sp, sm = evolved_widths(p)
    total = sp + sm
    pref = (
        math.sqrt(2.0 / (math.pi * p.sigma_plus * p.sigma_minus))
        * principal_sqrt(sp) * principal_sqrt(sm) / principal_sqrt(total)
    )
    return pref, sp * sm / total, (sp - sm) / total, total


def slit_amplitude(k2, a: float, p: PacketParams):
    """``int_{-a}^{a} psi_mixed(y1, k2) dy1`` via the closed Gaussian window.

    Entries that come out non-finite are recomputed by adaptive quadrature.
    """
    _check_a(a)
    pref, A, C, total = _mixed_window(p)
    k2 = np.asarray(k2, dtype=float)
    out = pref * gaussian_window(A, 1j * C * k2, a, shift=-(k2**2) / total)
    bad = ~np.isfinite(out)
    if np.any(bad):
        out = np.array(out, dtype=complex)
        out[bad] = [slit_amplitude_quadrature(k, a, p) for k in k2[bad]]
    return out


def slit_amplitude_quadrature(k2: float, a: float, p: PacketParams, rel_tol=1e-12):
    """Same quantity as :func:`slit_amplitude` by direct adaptive integration."""
    _check_a(a)
    res = integrate(lambda y: psi_mixed(y, k2, p), -a, a, rel_tol=rel_tol, abs_tol=1e-300,
                    max_subdivisions=2000)
    return complex(res.value)


def position_window_amplitude(y2, a: float, p: PacketParams):
    """``int_{-a}^{a} psi_position(y1, y2) dy1`` via the closed Gaussian window."""
    _check_a(a)
    sp, sm = evolved_widths(p)
    total = sp + sm
    pref = principal_sqrt(sp) * principal_sqrt(sm) / math.sqrt(math.pi * p.sigma_plus * p.sigma_minus)
    y2 = np.asarray(y2, dtype=float)
    out = pref * gaussian_window(total / 4, -(sp - sm) * y2 / 2, a, shift=-total * y2**2 / 4)
    bad = ~np.isfinite(out)
    if np.any(bad):
        out = np.array(out, dtype=complex)
        out[bad] = [
            complex(integrate(lambda y: psi_position(y, v, p), -a, a, rel_tol=1e-12,
                              abs_tol=1e-300, max_subdivisions=2000).value)
            for v in y2[bad]
        ]
    return out


def _incoherent_k2(k2, a, p):
    # int_{-a}^{a} |psi_mixed(y1, k2)|^2 dy1
    pref, A, C, total = _mixed_window(p)
    k2 = np.asarray(k2, dtype=float)
    B = 2 * (1j * C * k2).real
    env = -2 * (1 / total).real * k2**2
    return abs(pref) ** 2 * gaussian_window(2 * A.real, B, a, shift=env).real


def _incoherent_y2(y2, a, p):
    sp, sm = evolved_widths(p)
    total = sp + sm
    norm = abs(sp) * abs(sm) / (math.pi * p.sigma_plus * p.sigma_minus)
    y2 = np.asarray(y2, dtype=float)
    B = -((sp - sm).real) * y2
    return norm * gaussian_window(total.real / 2, B, a, shift=-total.real * y2**2 / 2).real


def _geometric_breaks(scale, limit):
    pts = []
    x = 0.25 * scale
    while x < limit:
        pts.append(x)
        x *= 2
    return pts


def _second_moment(density, limit, scale, q: QuadratureSpec, k_max=None):
    """``(ratio, error, normaliser)`` for an even density on ``[0, limit]``."""
    if k_max is not None:
        limit = min(limit, k_max)
    peak = float(density(np.array([0.0]))[0])
    if not peak > 0:
        peak = 1.0

    def f(x):
        d = density(x) / peak
        return np.stack([x * x * d, d])

    try:
        res = integrate(f, 0.0, limit, rel_tol=q.relative_tolerance, abs_tol=q.absolute_tolerance,
                        max_subdivisions=q.max_subdivisions,
                        breakpoints=_geometric_breaks(scale, limit))
    except ConvergenceError as exc:
        num, den = exc.estimate
        raise ConvergenceError(str(exc), estimate=num / den, error=exc.error) from None
    num, den = res.value
    num_err, den_err = res.error
    ratio = num / den
    err = abs(num_err / den) + abs(ratio * den_err / den)
    return ratio, err, 2 * den * peak


def _k2_density(a, p, coherent):
    if coherent:
        return lambda k: np.abs(slit_amplitude(k, a, p)) ** 2
    return lambda k: _incoherent_k2(k, a, p)


def _y2_density(a, p, coherent):
    if coherent:
        return lambda y: np.abs(position_window_amplitude(y, a, p)) ** 2
    return lambda y: _incoherent_y2(y, a, p)


def dk2sq_quadrature(a: float, p: PacketParams, q: QuadratureSpec = DEFAULT_SPEC, *,
                     k_max: float | None = None, coherent: bool = True) -> cf.SpreadEstimate:
    """Variance of k2 in coincidence with particle 1 passing ``|y1| <= a``.

    ``k_max`` restricts (and renormalises) the k2 distribution to
    ``|k2| <= k_max``. ``coherent=False`` squares before integrating over the
    slit, which is the wrong model and exists only for comparison.
    """
    _check_a(a)
    if k_max is not None and not k_max > 0:
        raise ParameterError("k_max", "must be positive")
    limit = q.domain_sigmas * momentum_width(p)
    scale = math.sqrt(cf.dk2sq_wide(p).value)
    value, err, _ = _second_moment(_k2_density(a, p, coherent), limit, scale, q, k_max)
    flags = () if coherent else ("incoherent",)
    return cf.SpreadEstimate(value, cf.QUADRATURE, err, p, a, flags)


def dy2sq_quadrature(a: float, p: PacketParams, q: QuadratureSpec = DEFAULT_SPEC, *,
                     coherent: bool = True) -> cf.SpreadEstimate:
    """Variance of y2 at time t in coincidence with ``|y1| <= a``."""
    _check_a(a)
    limit = q.domain_sigmas * position_width(p)
    scale = min(math.sqrt(cf.dy2sq_narrow(p).value), position_width(p))
    value, err, _ = _second_moment(_y2_density(a, p, coherent), limit, scale, q)
    flags = () if coherent else ("incoherent",)
    return cf.SpreadEstimate(value, cf.QUADRATURE, err, p, a, flags)


def k2_coincidence_weight(a: float, p: PacketParams, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Denominator of the k2 spread: ``int dk2 |slit_amplitude(k2)|^2``."""
    _check_a(a)
    limit = q.domain_sigmas * momentum_width(p)
    scale = math.sqrt(cf.dk2sq_wide(p).value)
    return _second_moment(_k2_density(a, p, True), limit, scale, q)[2]


def richardson_coefficient(quantity: str, p: PacketParams, widths=(1e-2, 5e-3, 2.5e-3),
                           q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Recover the small-slit coefficient from quadrature alone.

    ``quantity`` is ``"dk2sq"`` (returns delta) or ``"dy2sq"`` (returns
    delta_prime). The ratio ``[spread(a)/spread(0) - 1] / a^2`` is an even
    series in ``a``; ``widths`` must halve successively so that two rounds
    of Richardson extrapolation remove the ``a^2`` and ``a^4`` terms.
    """
    if quantity == "dk2sq":
        fn, limit, sign = dk2sq_quadrature, cf.dk2sq_narrow(p).value, -2.0
    elif quantity == "dy2sq":
        fn, limit, sign = dy2sq_quadrature, cf.dy2sq_narrow(p).value, 2.0
    else:
        raise ParameterError("quantity", f"must be 'dk2sq' or 'dy2sq', got {quantity!r}")
    widths = list(widths)
    if len(widths) < 2:
        raise ParameterError("widths", "need at least two slit widths")
    table = [(fn(a, p, q).value / limit - 1) / a**2 for a in widths]
    level = 1
    while len(table) > 1:
        fac = 4.0**level
        table = [(fac * fine - coarse) / (fac - 1) for coarse, fine in zip(table, table[1:])]
        level += 1
    return table[0] / sign
