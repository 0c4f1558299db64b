"""Entangled two-particle Gaussian state in momentum, mixed and position form.

Natural units with hbar = 1. Only the vertical (y) degrees of freedom are
modelled. The state is

    Psi(k1, k2; t) = exp(-(k1 + k2)^2 / (4 s+) - (k1 - k2)^2 / (4 s-)) / sqrt(pi sp sm)

where ``s±`` are the complex squared widths returned by :func:`complex_width_sq`.
Free evolution enters only through ``1/s = 1/sigma^2 + i t/m``.

All amplitude functions broadcast over numpy arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError


def _check_positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ParameterError(name, f"must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class PacketParams:
    """Physical parameters of the pair state.

    Attributes
    ----------
    sigma_plus : float
        Spread of the total momentum k1 + k2.
    sigma_minus : float
        Spread of the relative momentum k1 - k2.
    mass : float
        Mass of each particle.
    time : float
        Evolution time since emission (t >= 0).
    """

    sigma_plus: float
    sigma_minus: float
    mass: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        _check_positive("sigma_plus", self.sigma_plus)
        _check_positive("sigma_minus", self.sigma_minus)
        _check_positive("mass", self.mass)
        t = self.time
        if not (isinstance(t, (int, float)) and math.isfinite(t) and t >= 0):
            raise ParameterError("time", f"must be finite and non-negative, got {t!r}")

    @property
    def unusual_ordering(self) -> bool:
        """True when sigma_minus <= sigma_plus (realistic sources have sigma_minus >> sigma_plus)."""
        return self.sigma_minus <= self.sigma_plus

    def with_time(self, time: float) -> "PacketParams":
        return PacketParams(self.sigma_plus, self.sigma_minus, self.mass, time)


def complex_width_sq(sigma: float, t: float, m: float) -> complex:
    """Time-evolved squared width ``1 / (1/sigma^2 + i t/m)``.

    >>> complex_width_sq(1.0, 1.0, 1.0)
    (0.5-0.5j)
    """
    _check_positive("sigma", sigma)
    _check_positive("mass", m)
    if not math.isfinite(t):
        raise ParameterError("time", f"must be finite, got {t!r}")
    return 1.0 / complex(1.0 / sigma**2, t / m)


def evolved_widths(p: PacketParams) -> tuple[complex, complex]:
    """Return ``(sigma_plus(t)^2, sigma_minus(t)^2)``."""
    return (
        complex_width_sq(p.sigma_plus, p.time, p.mass),
        complex_width_sq(p.sigma_minus, p.time, p.mass),
    )


def principal_sqrt(z: complex) -> complex:
    """Principal square root, refusing radicands off the right half plane."""
    if not z.real > 0:
        raise ArithmeticError(f"radicand {z!r} has non-positive real part")
    return cmath.sqrt(z)


def _norm(p: PacketParams) -> float:
    return 1.0 / math.sqrt(math.pi * p.sigma_plus * p.sigma_minus)


def psi_momentum(k1, k2, p: PacketParams):
    """Amplitude in the (k1, k2) representation."""
    sp, sm = evolved_widths(p)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    expo = -((k1 + k2) ** 2) / (4 * sp) - ((k1 - k2) ** 2) / (4 * sm)
    return _norm(p) * np.exp(expo)


def psi_mixed(y1, k2, p: PacketParams):
    """Amplitude with particle 1 in position and particle 2 in momentum."""
    sp, sm = evolved_widths(p)
    total = sp + sm
    pref = (
        math.sqrt(2.0) * _norm(p)
        * principal_sqrt(sp) * principal_sqrt(sm) / principal_sqrt(total)
    )
    y1 = np.asarray(y1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    expo = -(sp * sm * y1**2 + k2**2 - 1j * (sp - sm) * y1 * k2) / total
    return pref * np.exp(expo)


def psi_position(y1, y2, p: PacketParams):
    """Amplitude in the (y1, y2) representation."""
    sp, sm = evolved_widths(p)
    pref = principal_sqrt(sp) * principal_sqrt(sm) * _norm(p)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    expo = -0.25 * ((sp + sm) * (y1**2 + y2**2) + 2 * (sp - sm) * y1 * y2)
    return pref * np.exp(expo)


class DensityCoefficients(NamedTuple):
    """``|Psi(y1, y2)|^2 = normalization * exp(-(d y1^2 + 2 o y1 y2 + d y2^2))``."""

    diagonal: float
    off_diagonal: float
    normalization: float

    def covariance(self) -> np.ndarray:
        """Covariance matrix of (y1, y2); the precision matrix is twice the quadratic form."""
        d, o = self.diagonal, self.off_diagonal
        return np.linalg.inv(2.0 * np.array([[d, o], [o, d]]))


def position_density_coefficients(p: PacketParams) -> DensityCoefficients:
    sp, sm = evolved_widths(p)
    norm = abs(sp) * abs(sm) / (math.pi * p.sigma_plus * p.sigma_minus)
    return DensityCoefficients(0.5 * (sp + sm).real, 0.5 * (sp - sm).real, norm)


def joint_position_density(y1, y2, p: PacketParams):
    """Probability density ``|psi_position|^2``, a correlated bivariate Gaussian."""
    d, o, norm = position_density_coefficients(p)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return norm * np.exp(-(d * y1**2 + 2 * o * y1 * y2 + d * y2**2))


def position_width(p: PacketParams) -> float:
    """Standard deviation of either particle's position marginal at time t."""
    sp, sm = evolved_widths(p)
    return 0.5 * math.sqrt(1.0 / sp.real + 1.0 / sm.real)


def momentum_width(p: PacketParams) -> float:
    """Standard deviation of either particle's momentum marginal (time independent)."""
    return 0.5 * math.hypot(p.sigma_plus, p.sigma_minus)
