"""Self-check suite covering the invariants of every module.

Each check returns ``(ok, detail)``. :func:`run_checks` runs them in a fixed
order and times them. Some checks encode claimed properties that the
numerics contradict (for example the sign of the position-spread
coefficient); they are kept as stated and reported as failures rather than
being relaxed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import closed_form as cf
from . import moments
from .montecarlo import MOMENTUM, POSITION, McSpec, make_generator, mc_estimate
from .oracle import (
    QuadratureSpec,
    dk2sq_quadrature,
    dy2sq_quadrature,
    k2_coincidence_weight,
    richardson_coefficient,
    slit_amplitude,
    slit_amplitude_quadrature,
)
from .scenarios import (
    DetectorBand,
    is_non_increasing,
    post_slit_k2_spread,
    run_case_i,
)
from .wavepacket import (
    PacketParams,
    complex_width_sq,
    position_width,
    psi_mixed,
    psi_position,
)

VERIFY_SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    run: Callable[[], tuple[bool, str]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    ok: bool
    detail: str
    seconds: float


def random_params(n, seed=VERIFY_SEED, stream=0):
    """``n`` states with sigma± and m log-uniform on [1e-2, 1e2] and t uniform on [0, 1e3]."""
    rng = make_generator(seed, stream)
    sig = 10.0 ** rng.uniform(-2, 2, size=(n, 2))
    mass = 10.0 ** rng.uniform(-2, 2, size=n)
    t = rng.uniform(0, 1e3, size=n)
    return [PacketParams(float(s[0]), float(s[1]), float(m), float(tt))
            for s, m, tt in zip(sig, mass, t)]


def _rel(x, ref):
    return abs(x - ref) / abs(ref)


_STATES = [
    PacketParams(1.0, 3.0, 1.0, 0.0),
    PacketParams(0.3, 3.0, 0.7, 1.3),
    PacketParams(2.0, 0.5, 1.0, 0.2),
    PacketParams(0.5, 4.0, 2.0, 5.0),
    PacketParams(1.0, 1.0, 1.0, 0.8),
]


# -- wavepacket -------------------------------------------------------------

def check_complex_width():
    worst = math.inf
    for sigma in (1e-2, 1.0, 1e2):
        for t in (0.0, 1e-3, 1.0, 1e3, 1e8):
            w = complex_width_sq(sigma, t, 0.5)
            worst = min(worst, w.real)
            if t == 0 and w != sigma**2:
                return False, f"t=0 gives {w!r} for sigma={sigma!r}"
    return worst > 0, f"smallest real part {worst:.3g}"


def check_normalization():
    worst = 0.0
    for p in _STATES:
        for rep in moments.REPRESENTATIONS:
            worst = max(worst, abs(moments.normalization(p, rep) - 1))
    return worst <= 1e-9, f"max |norm - 1| = {worst:.2e} over {len(_STATES)} states x 3 forms"


def check_parseval():
    worst = 0.0
    for p in _STATES[:3]:
        for y, k in ((0.3, 0.7), (-0.4, 1.1)):
            worst = max(worst, _rel(moments.mixed_by_transform(y, k, p), psi_mixed(y, k, p)))
        y1, y2 = 0.2, -0.5
        worst = max(worst, _rel(moments.position_by_transform(y1, y2, p), psi_position(y1, y2, p)))
    return worst <= 1e-7, f"max relative deviation {worst:.2e}"


def check_marginal_widths():
    worst = 0.0
    for p in _STATES:
        p0 = p.with_time(0.0)
        su, sv = moments.sum_difference_spreads(p0, "momentum")
        worst = max(worst, abs(su - p0.sigma_plus), abs(sv - p0.sigma_minus))
    return worst <= 1e-8, f"max |width - sigma| = {worst:.2e}"


def check_heisenberg():
    worst = max(abs(moments.heisenberg_product(p.with_time(0.0)) - 0.5) for p in _STATES)
    return worst <= 1e-8, f"max |product - 1/2| = {worst:.2e}"


# -- closed_form ------------------------------------------------------------

def check_delta_prime_nonnegative():
    draws = random_params(1000, stream=1)
    neg = [p for p in draws if cf.delta_coeff(p).delta_prime < -1e-12]
    if not neg:
        return True, "delta' >= -1e-12 on 1000 draws"
    worst = min(neg, key=lambda p: cf.delta_coeff(p).delta_prime)
    return False, (f"delta' < 0 on {len(neg)}/1000 draws; most negative at {worst}: "
                   f"{cf.delta_coeff(worst).delta_prime:.4g}")


def check_delta_sign():
    mismatches = 0
    for p in random_params(1000, stream=1):
        c = cf.delta_coeff(p)
        if p.sigma_plus == p.sigma_minus:
            ok = c.delta == 0
        else:
            expected = np.sign(c.sign_flip_time - p.time)
            ok = np.sign(c.delta) == expected or (expected == 0 and abs(c.delta) < 1e-15)
        mismatches += not ok
    return mismatches == 0, f"{mismatches} sign mismatches on 1000 draws"


def check_t0_identity():
    worst = 0.0
    for p in random_params(100, stream=2):
        c = cf.delta_coeff(p.with_time(0.0))
        if c.delta == 0:
            continue
        worst = max(worst, _rel(c.delta_prime, c.delta))
    return worst <= 1e-12, f"max relative |delta' - delta| at t=0: {worst:.2e}"


def check_wide_below_narrow():
    bad = sum(cf.dk2sq_wide(p).value > cf.dk2sq_narrow(p).value * (1 + 1e-15)
              for p in random_params(1000, stream=3))
    return bad == 0, f"{bad}/1000 draws with wide > narrow"


def check_wide_below_small_a():
    bad = 0
    tried = 0
    for p in random_params(1000, stream=3):
        delta = cf.delta_coeff(p).delta
        if not delta > 0:
            continue
        tried += 1
        a_edge = math.sqrt(cf.EXPANSION_LIMIT / (2 * delta))
        wide = cf.dk2sq_wide(p).value
        if any(cf.dk2sq_small_a(a, p).value < wide for a in np.linspace(0.05, 1.0, 20) * a_edge):
            bad += 1
    return bad == 0, f"{bad}/{tried} draws with delta > 0 have small_a < wide inside the regime"


def check_narrow_monotone_in_t():
    for sp, sm in ((1.0, 3.0), (0.2, 5.0), (4.0, 0.5)):
        vals = [cf.dk2sq_narrow(PacketParams(sp, sm, 1.0, t)).value for t in np.linspace(0, 20, 201)]
        if not is_non_increasing(vals, noise=1e-15):
            return False, f"dk2sq_narrow increases in t for sigma±=({sp}, {sm})"
    return True, "non-increasing on a 201-point t grid for 3 states"


def check_factorized_closed():
    worst = 0.0
    for s in (0.1, 1.0, 7.0):
        for t in (0.0, 0.5, 30.0):
            p = PacketParams(s, s, 1.0, t)
            worst = max(worst, _rel(cf.dk2sq_narrow(p).value, s * s / 2),
                        _rel(cf.dk2sq_wide(p).value, s * s / 2))
    return worst <= 1e-15, f"max relative deviation from sigma^2/2: {worst:.2e}"


# -- numeric_oracle ---------------------------------------------------------

def check_slit_amplitude_paths():
    rng = make_generator(VERIFY_SEED, 4)
    worst = 0.0
    for _ in range(20):
        p = PacketParams(float(10 ** rng.uniform(-0.5, 0.5)), float(10 ** rng.uniform(0, 1)),
                         1.0, float(rng.uniform(0, 2)))
        a = float(10 ** rng.uniform(-1.5, 0.5))
        k = float(rng.uniform(-3, 3))
        worst = max(worst, _rel(complex(slit_amplitude(k, a, p)), slit_amplitude_quadrature(k, a, p)))
    return worst <= 1e-10, f"max relative difference {worst:.2e} over 20 points"


def check_narrow_limits():
    worst = 0.0
    for p in (PacketParams(1, 3, 1, 0), PacketParams(1, 3, 1, 2.0), PacketParams(0.4, 2, 0.5, 0.7)):
        a = 1e-4 * position_width(p)
        worst = max(worst, _rel(dk2sq_quadrature(a, p).value, cf.dk2sq_narrow(p).value),
                    _rel(dy2sq_quadrature(a, p).value, cf.dy2sq_narrow(p).value))
    return worst <= 1e-5, f"max relative deviation {worst:.2e}"


def check_wide_limits():
    worst_k = worst_y = 0.0
    for t in (0.0, 1.0, 10.0):
        p = PacketParams(1, 3, 1, t)
        a = 50 * position_width(p)
        worst_k = max(worst_k, _rel(dk2sq_quadrature(a, p).value, cf.dk2sq_wide(p).value))
        worst_y = max(worst_y, _rel(dy2sq_quadrature(a, p).value, cf.dy2sq_wide(p).value))
    ok = worst_k <= 1e-4 and worst_y <= 1e-4
    return ok, f"dk2 {worst_k:.2e}, dy2 {worst_y:.2e} (relative)"


def check_richardson():
    parts = []
    ok = True
    for t in (0.0, 0.1 / 3):
        p = PacketParams(1, 3, 1, t)
        c = cf.delta_coeff(p)
        ed = _rel(richardson_coefficient("dk2sq", p), c.delta)
        ep = _rel(richardson_coefficient("dy2sq", p), c.delta_prime)
        ok &= ed <= 1e-3 and ep <= 1e-3
        parts.append(f"t={t:.4g}: delta {ed:.1e}, delta' {ep:.1e}")
    return ok, "; ".join(parts)


def check_denominator_monotone():
    for p in (PacketParams(1, 3, 1, 0), PacketParams(1, 3, 1, 2), PacketParams(2, 0.5, 1, 0.3)):
        grid = np.geomspace(1e-3, 20, 25) * position_width(p)
        w = [k2_coincidence_weight(float(a), p) for a in grid]
        if any(w2 < w1 * (1 - 1e-9) for w1, w2 in zip(w, w[1:])):
            return False, f"coincidence weight decreases in a for {p}"
    return True, "non-decreasing on 25-point a grids for 3 states"


def check_coherent_differs():
    worst = math.inf
    for p in (PacketParams(1, 3, 1, 0.5), PacketParams(0.3, 2, 1, 2), PacketParams(2, 0.5, 1, 0.3)):
        for a in (0.3, 1.0):
            coh = dk2sq_quadrature(a, p).value
            inc = dk2sq_quadrature(a, p, coherent=False).value
            worst = min(worst, _rel(inc, coh))
    return worst > 1e-6, f"smallest relative coherent/incoherent gap {worst:.2e}"


def check_window_doubling():
    wide = QuadratureSpec(relative_tolerance=1e-12, domain_sigmas=24)
    base = QuadratureSpec(relative_tolerance=1e-12)
    worst = 0.0
    for p in (PacketParams(1, 3, 1, 0), PacketParams(0.5, 4, 1, 0.7)):
        for a in (0.05, 0.5, 3.0):
            worst = max(worst, _rel(dk2sq_quadrature(a, p, wide).value, dk2sq_quadrature(a, p, base).value),
                        _rel(dy2sq_quadrature(a, p, wide).value, dy2sq_quadrature(a, p, base).value))
    return worst < 1e-10, f"max relative change on doubling the window: {worst:.2e}"


def check_mc_agreement(samples=200_000):
    worst = 0.0
    cells = 0
    for i, (a, ratio, t) in enumerate(
        (a, r, t) for a in (0.3, 0.6, 1.2) for r in (1.5, 3.0, 6.0) for t in (0.0, 0.5, 2.0)
    ):
        p = PacketParams(1.0, ratio, 1.0, t)
        for j, (mode, oracle) in enumerate(((MOMENTUM, dk2sq_quadrature), (POSITION, dy2sq_quadrature))):
            est = mc_estimate(a, p, McSpec(samples, VERIFY_SEED, mode), stream=2 * i + j)
            z = abs(est.value - oracle(a, p).value) / est.error_estimate
            worst = max(worst, z)
            cells += 1
    return worst <= 3.0, f"largest |z| = {worst:.2f} over {cells} cells (n={samples})"


def check_mc_determinism():
    p = PacketParams(1, 3, 1, 0.5)
    for mode in (MOMENTUM, POSITION):
        spec = McSpec(20_000, 12345, mode)
        e1, e2 = mc_estimate(0.4, p, spec), mc_estimate(0.4, p, spec)
        if (e1.value, e1.error_estimate) != (e2.value, e2.error_estimate):
            return False, f"{mode} differs between identical runs"
    return True, "identical seeds give bit-identical estimates in both modes"


# -- scenarios --------------------------------------------------------------

def check_case_ii_monotone():
    p0 = PacketParams(1, 3, 1, 0)
    flip = cf.delta_coeff(p0).sign_flip_time
    for t in (0.0, 0.5 * flip, 0.9 * flip):
        p = p0.with_time(t)
        vals = [dk2sq_quadrature(float(a), p).value for a in np.geomspace(0.01, 5, 20)]
        if not is_non_increasing(vals):
            return False, f"dk2sq_quadrature increases in a at t={t!r}"
    return True, "non-increasing on a 20-point log grid at 3 times below the sign flip"


def check_sandwich():
    worst = 0.0
    for t in (0.0, 0.3):
        p = PacketParams(1, 3, 1, t)
        lo, hi = cf.dk2sq_wide(p).value, cf.dk2sq_narrow(p).value
        for a in np.geomspace(1e-3, 30, 30):
            v = dk2sq_quadrature(float(a), p).value
            worst = max(worst, lo - v, v - hi)
    return worst <= 1e-9, f"largest excursion outside [wide, narrow]: {worst:.2e}"


def check_dy2_above_narrow():
    bad = []
    for t in (0.0, 0.5, 5.0):
        p = PacketParams(1, 3, 1, t)
        narrow = cf.dy2sq_narrow(p).value
        low = [float(a) for a in np.geomspace(0.01, 5, 15) if dy2sq_quadrature(float(a), p).value < narrow]
        if low:
            bad.append(f"t={t}: below narrow for a in [{min(low):.3g}, {max(low):.3g}]")
    return not bad, "; ".join(bad) or "dy2sq_quadrature >= dy2sq_narrow at t in {0, 0.5, 5}"


def check_case_i_direction():
    results = []
    for a, t, kmax in ((0.3, 0.5, 30.0), (0.1, 0.0, 60.0), (1.0, 2.0, 20.0)):
        res = run_case_i(a, PacketParams(1, 3, 1, t), DetectorBand(kmax))
        results.append(res.right_slit_broadens)
    return all(results), f"right slit broadens k2 in {sum(results)}/{len(results)} configurations"


def check_open_right_reduction():
    p = PacketParams(1, 3, 1, 0.5)
    worst = 0.0
    for a, kmax in ((0.3, 30.0), (1.0, 5.0)):
        post = post_slit_k2_spread(a, math.inf, DetectorBand(kmax), p).value
        direct = dk2sq_quadrature(a, p, k_max=kmax).value
        worst = max(worst, _rel(post, direct))
    return worst <= 1e-6, f"max relative difference {worst:.2e}"


def check_kmax_divergence():
    p = PacketParams(1, 3, 1, 0.5)
    vals = [post_slit_k2_spread(0.3, 0.3, DetectorBand(k), p, warn=False).value for k in (15.0, 30.0, 60.0)]
    return vals[0] < vals[1] < vals[2], "values " + ", ".join(f"{v:.4g}" for v in vals)


CHECKS = (
    Check("complex-width-positive", "wavepacket", check_complex_width),
    Check("normalization", "wavepacket", check_normalization),
    Check("parseval", "wavepacket", check_parseval),
    Check("marginal-widths", "wavepacket", check_marginal_widths),
    Check("heisenberg-minimum", "wavepacket", check_heisenberg),
    Check("delta-prime-nonnegative", "closed_form", check_delta_prime_nonnegative),
    Check("delta-sign", "closed_form", check_delta_sign),
    Check("t0-identity", "closed_form", check_t0_identity),
    Check("wide-below-narrow", "closed_form", check_wide_below_narrow),
    Check("wide-below-small-a", "closed_form", check_wide_below_small_a),
    Check("narrow-monotone-in-t", "closed_form", check_narrow_monotone_in_t),
    Check("factorized-closed-forms", "closed_form", check_factorized_closed),
    Check("slit-amplitude-paths", "numeric_oracle", check_slit_amplitude_paths),
    Check("narrow-limits", "numeric_oracle", check_narrow_limits),
    Check("wide-limits", "numeric_oracle", check_wide_limits),
    Check("richardson-coefficients", "numeric_oracle", check_richardson),
    Check("denominator-monotone", "numeric_oracle", check_denominator_monotone),
    Check("coherent-window", "numeric_oracle", check_coherent_differs),
    Check("window-doubling", "numeric_oracle", check_window_doubling),
    Check("monte-carlo-agreement", "numeric_oracle", check_mc_agreement),
    Check("monte-carlo-determinism", "numeric_oracle", check_mc_determinism),
    Check("case-ii-monotone", "scenarios", check_case_ii_monotone),
    Check("sandwich", "scenarios", check_sandwich),
    Check("dy2-above-narrow", "scenarios", check_dy2_above_narrow),
    Check("case-i-direction", "scenarios", check_case_i_direction),
    Check("open-right-slit-reduction", "scenarios", check_open_right_reduction),
    Check("k-max-divergence", "scenarios", check_kmax_divergence),
)


def run_checks(checks=CHECKS, on_result=None) -> list[CheckResult]:
    """Run ``checks`` in order; exceptions count as failures."""
    out = []
    for check in checks:
        start = time.perf_counter()
        try:
            ok, detail = check.run()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        res = CheckResult(check.name, check.module, bool(ok), detail, time.perf_counter() - start)
        if on_result is not None:
            on_result(res)
        out.append(res)
    return out
