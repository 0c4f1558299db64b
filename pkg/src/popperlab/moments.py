"""Norms and low moments of the state, integrated numerically in each representation."""

from __future__ import annotations

import math

import numpy as np

from .quadrature import integrate, integrate_2d
from .wavepacket import PacketParams, momentum_width, position_width, psi_mixed, psi_momentum, psi_position

REPRESENTATIONS = ("momentum", "mixed", "position")


def _box(p, representation, sigmas):
    kw = sigmas * momentum_width(p)
    yw = sigmas * position_width(p)
    if representation == "momentum":
        return (-kw, kw), (-kw, kw), psi_momentum
    if representation == "mixed":
        return (-yw, yw), (-kw, kw), psi_mixed
    if representation == "position":
        return (-yw, yw), (-yw, yw), psi_position
    raise ValueError(f"unknown representation {representation!r}")


def _moments(p, representation, rel_tol, sigmas):
    """Integrals of |psi|^2 times 1, u, u^2, v, v^2 with u = x1 + x2, v = x1 - x2."""
    xr, yr, psi = _box(p, representation, sigmas)

    def f(x, ys):
        d = np.abs(psi(x, ys, p)) ** 2
        u = x + ys
        v = x - ys
        return np.stack([d, u * d, u * u * d, v * d, v * v * d])

    return integrate_2d(f, xr, yr, rel_tol=rel_tol, abs_tol=1e-15,
                        x_breakpoints=(0.0,), y_breakpoints=(0.0,), reference="abs").value


def normalization(p: PacketParams, representation: str, rel_tol=1e-12, sigmas=12.0) -> float:
    xr, yr, psi = _box(p, representation, sigmas)
    res = integrate_2d(lambda x, ys: np.abs(psi(x, ys, p)) ** 2, xr, yr, rel_tol=rel_tol,
                       abs_tol=1e-15, x_breakpoints=(0.0,), y_breakpoints=(0.0,))
    return float(res.value)


def sum_difference_spreads(p: PacketParams, representation: str, rel_tol=1e-12, sigmas=12.0):
    """Standard deviations of ``x1 + x2`` and ``x1 - x2`` in the given representation."""
    n, m1u, m2u, m1v, m2v = _moments(p, representation, rel_tol, sigmas)
    su = math.sqrt(m2u / n - (m1u / n) ** 2)
    sv = math.sqrt(m2v / n - (m1v / n) ** 2)
    return su, sv


def heisenberg_product(p: PacketParams, rel_tol=1e-12) -> float:
    """``Delta(k1 + k2) * Delta((y1 + y2) / 2)`` from the momentum and position amplitudes."""
    dk, _ = sum_difference_spreads(p, "momentum", rel_tol)
    dy, _ = sum_difference_spreads(p, "position", rel_tol)
    return dk * dy / 2


def mixed_by_transform(y1: float, k2: float, p: PacketParams, rel_tol=1e-12) -> complex:
    """``(2 pi)^(-1/2) int dk1 exp(i k1 y1) psi_momentum(k1, k2)`` by quadrature."""
    kw = 12.0 * momentum_width(p)
    res = integrate(lambda k: np.exp(1j * k * y1) * psi_momentum(k, k2, p), -kw, kw,
                    rel_tol=rel_tol, abs_tol=1e-300, max_subdivisions=2000)
    return complex(res.value) / math.sqrt(2 * math.pi)


def position_by_transform(y1: float, y2: float, p: PacketParams, rel_tol=1e-11) -> complex:
    """Two-dimensional inverse Fourier transform of ``psi_momentum`` at ``(y1, y2)``."""
    kw = 12.0 * momentum_width(p)
    res = integrate_2d(lambda k1, k2: np.exp(1j * (k1 * y1 + k2 * y2)) * psi_momentum(k1, k2, p),
                       (-kw, kw), (-kw, kw), rel_tol=rel_tol, abs_tol=1e-300, reference="abs")
    return complex(res.value) / (2 * math.pi)
