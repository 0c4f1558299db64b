import math

import mpmath
import numpy as np
import pytest

from popperlab import closed_form as cf
from popperlab.errors import ParameterError
from popperlab.verify import random_params
from popperlab.wavepacket import PacketParams


def literal_delta_prime(sp, sm, t, m):
    """The position-spread coefficient exactly as printed, in 40-digit arithmetic."""
    mpmath.mp.dps = 40
    sp, sm, T = mpmath.mpf(sp), mpmath.mpf(sm), (mpmath.mpf(t) / m) ** 2
    p, q = sp**2, sm**2
    r = (2 * sp * sm / (p + q)) ** 2
    return (p + q) / 12 * (2 * (1 + p * q * T) / ((1 + p * p * T) * (1 + q * q * T))
                           - (1 + r) / (1 + p * q * T))


def test_narrow_momentum_examples():
    assert cf.dk2sq_narrow(PacketParams(1, 3)).value == 2.5
    assert cf.dk2sq_narrow(PacketParams(1, 3, 1, 1e8)).value == pytest.approx(0.9, abs=1e-6)
    for t in (0, 0.3, 40):
        assert cf.dk2sq_narrow(PacketParams(1.7, 1.7, 1, t)).value == pytest.approx(1.7**2 / 2, rel=1e-15)


def test_wide_momentum_examples():
    assert cf.dk2sq_wide(PacketParams(1, 3)).value == pytest.approx(0.9, rel=1e-15)
    assert cf.dk2sq_wide(PacketParams(2, 2, 1, 5)).value == 2.0


def test_narrow_position_examples():
    assert cf.dy2sq_narrow(PacketParams(1, 3)).value == pytest.approx(0.1, rel=1e-15)
    assert cf.dy2sq_narrow(PacketParams(1, 1, 1, 1)).value == pytest.approx(1.0, rel=1e-15)
    assert cf.dy1sq_narrow(PacketParams(1, 3)) == 0.0
    # vanishing needs both large widths and t -> 0
    assert cf.dy2sq_narrow(PacketParams(1e4, 1e4)).value < 1e-8
    assert cf.dy2sq_narrow(PacketParams(1e4, 1e4, 1, 1)).value > 1


def test_delta_examples():
    assert cf.delta_coeff(PacketParams(1, 3)).delta == pytest.approx(8 / 15, rel=1e-15)
    assert cf.delta_coeff(PacketParams(2, 2, 1, 3)).delta == 0
    c = cf.delta_coeff(PacketParams(1, 2))
    assert c.delta == pytest.approx(0.15, rel=1e-15)
    assert c.delta_prime == pytest.approx(0.15, rel=1e-15)


def test_delta_prime_matches_literal_formula():
    for p in random_params(200, seed=11):
        lit = literal_delta_prime(p.sigma_plus, p.sigma_minus, p.time, p.mass)
        got = cf.delta_coeff(p).delta_prime
        assert abs(got - float(lit)) <= 1e-11 * abs(float(lit)) + 1e-300


def test_delta_prime_negative_window_roots():
    p = PacketParams(1, 3)
    lo, hi = cf.delta_coeff(p).delta_prime_negative_window
    assert 0 < lo < hi
    for t in (lo, hi):
        assert abs(float(literal_delta_prime(1, 3, t, 1))) < 1e-12
    assert cf.delta_coeff(p.with_time(math.sqrt(lo * hi))).delta_prime < 0
    assert cf.delta_coeff(p.with_time(0.5 * lo)).delta_prime > 0
    assert cf.delta_coeff(p.with_time(2 * hi)).delta_prime > 0
    assert cf.delta_coeff(PacketParams(2, 2, 1, 1)).delta_prime_negative_window is None


def test_sign_flip_time():
    p = PacketParams(1, 3, 2.0)
    flip = cf.delta_coeff(p).sign_flip_time
    assert flip == pytest.approx(2.0 * 10 / (2 * 9), rel=1e-15)
    assert cf.delta_coeff(p.with_time(0.99 * flip)).delta > 0
    assert abs(cf.delta_coeff(p.with_time(flip)).delta) < 1e-15
    assert cf.delta_coeff(p.with_time(1.01 * flip)).delta < 0


def test_t0_identity():
    for p in random_params(100, seed=5):
        c = cf.delta_coeff(p.with_time(0))
        if c.delta:
            assert abs(c.delta_prime - c.delta) <= 1e-12 * abs(c.delta)


def test_small_a_examples():
    p = PacketParams(1, 3)
    assert cf.dk2sq_small_a(0.1, p).value == pytest.approx(2.5 * (1 - 0.02 * 8 / 15), rel=1e-15)
    assert cf.dk2sq_small_a(0.1, p).value == pytest.approx(2.473333, abs=1e-6)
    assert cf.dy2sq_small_a(0.1, p).value == pytest.approx(0.101067, abs=1e-6)
    assert cf.dk2sq_small_a(1e-9, p).value == pytest.approx(2.5, rel=1e-15)
    assert cf.dy2sq_small_a(1e-9, p).value == pytest.approx(0.1, rel=1e-15)


def test_small_a_regime_flag():
    p = PacketParams(1, 3)
    edge = math.sqrt(cf.EXPANSION_LIMIT / (2 * 8 / 15))
    assert cf.dk2sq_small_a(0.99 * edge, p).valid
    est = cf.dk2sq_small_a(1.01 * edge, p)
    assert not est.valid and "expansion-out-of-regime" in est.flags
    assert not cf.dy2sq_small_a(1.01 * edge, p).valid


def test_small_a_rejects_bad_width():
    with pytest.raises(ParameterError):
        cf.dk2sq_small_a(0, PacketParams(1, 3))
    with pytest.raises(ParameterError):
        cf.dy2sq_small_a(math.inf, PacketParams(1, 3))


def test_wide_never_above_narrow():
    for p in random_params(1000, seed=9):
        assert cf.dk2sq_wide(p).value <= cf.dk2sq_narrow(p).value * (1 + 1e-15)


def test_narrow_non_increasing_in_t():
    vals = [cf.dk2sq_narrow(PacketParams(0.3, 4, 1, t)).value for t in np.linspace(0, 50, 501)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_wide_position_limit_at_t0():
    # at t = 0 the k1 = 0 projection leaves a real Gaussian of variance (p + q) / (4 p q)
    assert cf.dy2sq_wide(PacketParams(1, 3)).value == pytest.approx(10 / 36, rel=1e-15)


def test_closed_form_estimates_carry_zero_error():
    p = PacketParams(1, 3, 1, 0.4)
    for est in (cf.dk2sq_narrow(p), cf.dk2sq_wide(p), cf.dy2sq_narrow(p), cf.dk2sq_small_a(0.1, p)):
        assert est.error_estimate == 0 and est.value >= 0


def test_qureshi_mapping():
    p = cf.from_qureshi(0.5, 0.5)
    assert (p.sigma_plus, p.sigma_minus) == (1.0, 1.0)
    p = cf.from_qureshi(1, 3, mass=2, time=0.5)
    assert (p.sigma_plus, p.sigma_minus, p.mass, p.time) == (0.5, 6.0, 2, 0.5)
    assert cf.to_qureshi(p) == (1.0, 3.0)
    with pytest.raises(ParameterError) as info:
        cf.from_qureshi(0, 1)
    assert info.value.field == "omega0"


def test_narrow_momentum_matches_printed_form():
    mpmath.mp.dps = 40
    for p in random_params(300, seed=13):
        sp, sm = mpmath.mpf(p.sigma_plus) ** 2, mpmath.mpf(p.sigma_minus) ** 2
        T = (mpmath.mpf(p.time) / p.mass) ** 2
        r = 4 * sp * sm / (sp + sm) ** 2
        lit = (sp + sm) / 4 * (1 + r * sp * sm * T) / (1 + sp * sm * T)
        assert cf.dk2sq_narrow(p).value == pytest.approx(float(lit), rel=1e-14)
