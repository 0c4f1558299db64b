"""Analytic slit-conditioned spreads in the narrow, small and wide slit regimes.

Notation used below: ``p = sigma_plus**2``, ``q = sigma_minus**2``,
``T = (t/m)**2``, ``X = p q T`` and ``r = 4 p q / (p + q)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParameterError
from .wavepacket import PacketParams, evolved_widths

CLOSED_NARROW = "closed-narrow"
CLOSED_SMALL_A = "closed-small-a"
CLOSED_WIDE = "closed-wide"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte-carlo"
METHODS = (CLOSED_NARROW, CLOSED_SMALL_A, CLOSED_WIDE, QUADRATURE, MONTE_CARLO)

# 2 a^2 |delta| above this marks a small-slit expansion as untrustworthy.
EXPANSION_LIMIT = 0.5


@dataclass(frozen=True)
class SpreadEstimate:
    """A conditioned variance and how it was obtained.

    ``slit_half_width`` is None for the a -> 0 / a -> inf limits.
    ``flags`` carries trust markers such as ``"expansion-out-of-regime"``.
    """

    value: float
    method: str
    error_estimate: float = 0.0
    params: Optional[PacketParams] = None
    slit_half_width: Optional[float] = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "error_estimate", float(self.error_estimate))
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def valid(self) -> bool:
        return "expansion-out-of-regime" not in self.flags


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Second-order slit-width coefficients.

    delta
        Momentum-spread coefficient: ``dk2^2(a) ~ dk2^2(0) (1 - 2 a^2 delta)``.
    delta_prime
        Position-spread coefficient: ``dy2^2(a) ~ dy2^2(0) (1 + 2 a^2 delta_prime)``.
    sign_flip_time
        Time at which ``delta`` changes sign (delta vanishes identically when
        sigma_plus == sigma_minus; the time is still reported).
    delta_prime_negative_window
        Open time interval on which ``delta_prime < 0``, or None when
        sigma_plus == sigma_minus. The interval is never empty otherwise.
    """

    delta: float
    delta_prime: float
    sign_flip_time: float
    delta_prime_negative_window: Optional[tuple[float, float]]


def _pqT(p: PacketParams):
    return p.sigma_plus**2, p.sigma_minus**2, (p.time / p.mass) ** 2


def dk2sq_narrow(p: PacketParams) -> SpreadEstimate:
    """Momentum spread of particle 2 when particle 1 is pinned (a -> 0).

    ``s/4 (1 + r X) / (1 + X)`` is evaluated as the wide-slit value plus
    ``(p - q)^2 / (4 s (1 + X))``, an exact rearrangement that has no
    cancellation and never rounds below the wide-slit value.
    """
    sp, sm, T = _pqT(p)
    s = sp + sm
    X = sp * sm * T
    value = sp * sm / s + (sp - sm) ** 2 / (4 * s * (1 + X))
    return SpreadEstimate(value, CLOSED_NARROW, 0.0, p, None)


def dk2sq_wide(p: PacketParams) -> SpreadEstimate:
    sp, sm, _ = _pqT(p)
    return SpreadEstimate(sp * sm / (sp + sm), CLOSED_WIDE, 0.0, p, None)


def dy2sq_narrow(p: PacketParams) -> SpreadEstimate:
    """Position spread of particle 2 when particle 1 is pinned (a -> 0).

    The pinned particle itself has zero spread; see :func:`dy1sq_narrow`.
    """
    sp, sm, T = _pqT(p)
    value = (1 + sp**2 * T) * (1 + sm**2 * T) / ((sp + sm) * (1 + sp * sm * T))
    return SpreadEstimate(value, CLOSED_NARROW, 0.0, p, None)


def dy2sq_wide(p: PacketParams) -> SpreadEstimate:
    """Position spread of particle 2 when the left slit admits all of y1.

    Integrating the amplitude over every y1 projects particle 1 onto
    ``k1 = 0``, so the limit is the y2 variance of ``|exp(-A y2^2)|^2`` with
    ``A = s+ s- / (s+ + s-)``, namely ``1 / (4 Re A)``. It is not the
    unconditioned y2 marginal.
    """
    s_plus, s_minus = evolved_widths(p)
    A = s_plus * s_minus / (s_plus + s_minus)
    return SpreadEstimate(1.0 / (4.0 * A.real), CLOSED_WIDE, 0.0, p, None)


def dy1sq_narrow(p: PacketParams) -> float:
    return 0.0


def _delta(sp, sm, T):
    s = sp + sm
    X = sp * sm * T
    rX = 4 * sp * sm / s**2 * X
    return (sp - sm) ** 2 / (12 * s) / (1 + X) * (1 - rX) / (1 + rX)


def _delta_prime(sp, sm, T):
    # Factored form of
    #   (s/12) [2 (1+X) / ((1+p^2 T)(1+q^2 T)) - (1+r) / (1+X)]
    # which avoids cancelling 2 - (1+r) when p ~ q.
    s = sp + sm
    quad = 1 - (sp**2 + 4 * sp * sm + sm**2) * T + (sp * sm * T) ** 2
    denom = (1 + sp**2 * T) * (1 + sm**2 * T) * (1 + sp * sm * T)
    return (sp - sm) ** 2 / (12 * s) * quad / denom


def delta_coeff(p: PacketParams) -> ExpansionCoefficients:
    sp, sm, T = _pqT(p)
    s = sp + sm
    flip = p.mass * s / (2 * sp * sm)
    window = None
    if sp != sm:
        # delta' < 0 between the roots of p^2 q^2 T^2 - (p^2 + 4pq + q^2) T + 1
        b = sp**2 + 4 * sp * sm + sm**2
        disc = s * math.sqrt(sp**2 + 6 * sp * sm + sm**2)
        t_hi = (b + disc) / (2 * sp**2 * sm**2)
        t_lo = 1.0 / (sp**2 * sm**2 * t_hi)
        window = (p.mass * math.sqrt(t_lo), p.mass * math.sqrt(t_hi))
    return ExpansionCoefficients(_delta(sp, sm, T), _delta_prime(sp, sm, T), flip, window)


def _check_a(a):
    if not (math.isfinite(a) and a > 0):
        raise ParameterError("a", f"slit half-width must be finite and positive, got {a!r}")


def dk2sq_small_a(a: float, p: PacketParams) -> SpreadEstimate:
    _check_a(a)
    delta = delta_coeff(p).delta
    corr = 2 * a**2 * delta
    flags = ("expansion-out-of-regime",) if abs(corr) > EXPANSION_LIMIT else ()
    return SpreadEstimate(dk2sq_narrow(p).value * (1 - corr), CLOSED_SMALL_A, 0.0, p, a, flags)


def dy2sq_small_a(a: float, p: PacketParams) -> SpreadEstimate:
    _check_a(a)
    delta_p = delta_coeff(p).delta_prime
    corr = 2 * a**2 * delta_p
    flags = ("expansion-out-of-regime",) if abs(corr) > EXPANSION_LIMIT else ()
    return SpreadEstimate(dy2sq_narrow(p).value * (1 + corr), CLOSED_SMALL_A, 0.0, p, a, flags)


def from_qureshi(omega0: float, sigma: float, mass: float = 1.0, time: float = 0.0) -> PacketParams:
    """Build the state from the (Omega_0, sigma) parametrisation of Qureshi's model.

    The mapping is ``sigma_plus^2 = 1 / (4 Omega_0^2)`` and
    ``sigma_minus^2 = 4 sigma^2``. Omega_0 is read as an inverse momentum
    and sigma as a momentum, so both sigma_plus and sigma_minus come out as
    momenta; the source model does not state its units.
    """
    for name, v in (("omega0", omega0), ("sigma", sigma)):
        if not (math.isfinite(v) and v > 0):
            raise ParameterError(name, f"must be finite and positive, got {v!r}")
    return PacketParams(1.0 / (2.0 * omega0), 2.0 * sigma, mass, time)


def to_qureshi(p: PacketParams) -> tuple[float, float]:
    """Inverse of :func:`from_qureshi`: returns ``(omega0, sigma)``."""
    return 1.0 / (2.0 * p.sigma_plus), p.sigma_minus / 2.0
