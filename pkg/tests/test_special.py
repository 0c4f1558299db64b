import mpmath
import numpy as np
import pytest

from popperlab.errors import OutOfRangeError
from popperlab.special import ERF_WINDOW, complex_erf, faddeeva, gaussian_window


def mp_window(A, B, a, shift=0):
    mpmath.mp.dps = 30
    A, B, shift = mpmath.mpc(A), mpmath.mpc(B), mpmath.mpc(shift)
    f = lambda y: mpmath.exp(shift - A * y * y + B * y)
    return complex(mpmath.quad(f, mpmath.linspace(-a, a, 41)))


def test_erf_basic_values():
    assert complex_erf(0) == 0
    mpmath.mp.dps = 30
    ref = float(2 / mpmath.sqrt(mpmath.pi) * mpmath.quad(lambda s: mpmath.exp(-s * s), [0, 1]))
    assert complex_erf(1.0).real == pytest.approx(ref, rel=1e-14)
    assert complex_erf(1.0).real == pytest.approx(0.842700793, abs=1e-9)


def test_erf_reflections():
    rng = np.random.default_rng(1)
    z = rng.uniform(-4, 4, 100) + 1j * rng.uniform(-4, 4, 100)
    np.testing.assert_allclose(complex_erf(np.conj(z)), np.conj(complex_erf(z)), rtol=1e-14)
    np.testing.assert_allclose(complex_erf(-z), -complex_erf(z), rtol=1e-14)


def test_erf_against_mpmath():
    rng = np.random.default_rng(2)
    mpmath.mp.dps = 40
    for _ in range(60):
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        ref = complex(mpmath.erf(mpmath.mpc(z)))
        assert abs(complex_erf(z) - ref) <= 1e-12 * abs(ref)


def test_erf_window_enforced():
    with pytest.raises(OutOfRangeError):
        complex_erf(ERF_WINDOW + 1)
    with pytest.raises(OutOfRangeError):
        complex_erf(np.array([0, 1j * (ERF_WINDOW + 0.5)]))


def test_faddeeva_at_zero():
    assert faddeeva(0) == 1


@pytest.mark.parametrize("A, B, a", [
    (0.5 + 0.3j, 1.2j, 0.4),
    (2.0 - 1.5j, 0.8 + 3j, 1.1),
    (0.05 + 0.02j, -0.4j, 6.0),
    (3.0 + 8.0j, 5j, 2.5),
    (1.0, 0.0, 10.0),
])
def test_gaussian_window_against_mpmath(A, B, a):
    ref = mp_window(A, B, a)
    assert abs(gaussian_window(A, B, a) - ref) <= 1e-10 * abs(ref)


def test_gaussian_window_random_cases():
    rng = np.random.default_rng(4)
    for _ in range(40):
        A = complex(10 ** rng.uniform(-1.5, 1), rng.uniform(-5, 5))
        B = complex(rng.uniform(-3, 3), rng.uniform(-8, 8))
        a = 10 ** rng.uniform(-1.5, 0.7)
        ref = mp_window(A, B, a)
        assert abs(gaussian_window(A, B, a) - ref) <= 1e-10 * abs(ref)


def test_gaussian_window_shift_avoids_overflow():
    # exp(B^2 / 4A) alone overflows; the shifted integral is ordinary
    got = gaussian_window(0.5, 60.0j, 3.0, shift=-0.0)
    ref = mp_window(0.5, 60.0j, 3.0)
    assert np.isfinite(got)
    assert abs(got - ref) <= 1e-10 * abs(ref)
    big = gaussian_window(1.0, 40.0, 1.0, shift=-40.0)
    assert abs(big - mp_window(1.0, 40.0, 1.0, -40.0)) <= 1e-10 * abs(big)


def test_gaussian_window_broadcasts():
    B = np.array([[0.1j, 2j], [3j, -1j]])
    out = gaussian_window(1 + 1j, B, 0.7)
    assert out.shape == (2, 2)
    assert out[1, 0] == pytest.approx(gaussian_window(1 + 1j, 3j, 0.7), rel=1e-15)


def test_gaussian_window_requires_decay():
    with pytest.raises(ArithmeticError):
        gaussian_window(-1 + 0j, 0, 1)
