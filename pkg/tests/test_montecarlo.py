import numpy as np
import pytest

from popperlab.errors import ParameterError, StatisticsError
from popperlab.montecarlo import MOMENTUM, POSITION, McSpec, make_generator, mc_estimate, tabulate_k2_density
from popperlab.oracle import dk2sq_quadrature, dy2sq_quadrature
from popperlab.wavepacket import PacketParams


@pytest.mark.parametrize("kwargs", [
    dict(sample_count=999),
    dict(sample_count=5000.0),
    dict(seed=-1),
    dict(seed=2**64),
    dict(mode="both"),
])
def test_spec_validation(kwargs):
    with pytest.raises(ParameterError):
        McSpec(**kwargs)


def test_generator_streams_are_distinct_and_reproducible():
    a = make_generator(5, 0).random(4)
    assert np.array_equal(a, make_generator(5, 0).random(4))
    assert not np.array_equal(a, make_generator(5, 1).random(4))
    assert not np.array_equal(a, make_generator(6, 0).random(4))


def test_position_mode_agrees_with_quadrature():
    p = PacketParams(1, 3)
    est = mc_estimate(0.3, p, McSpec(1_000_000, 1, POSITION))
    ref = dy2sq_quadrature(0.3, p).value
    assert abs(est.value - ref) <= 3 * est.error_estimate


def test_momentum_mode_agrees_with_quadrature():
    p = PacketParams(1, 3)
    est = mc_estimate(0.5, p, McSpec(1_000_000, 1, MOMENTUM))
    ref = dk2sq_quadrature(0.5, p).value
    assert abs(est.value - ref) <= 3 * est.error_estimate


def test_position_mode_with_phase_agrees_with_quadrature():
    p = PacketParams(0.5, 4, 1, 0.7)
    est = mc_estimate(0.3, p, McSpec(1_000_000, 2, POSITION))
    assert abs(est.value - dy2sq_quadrature(0.3, p).value) <= 3 * est.error_estimate


def test_incoherent_sampling_estimates_the_incoherent_spread():
    p = PacketParams(1, 3, 1, 0.5)
    est = mc_estimate(0.3, p, McSpec(1_000_000, 3, POSITION), coherent=False)
    assert "incoherent" in est.flags
    ref = dy2sq_quadrature(0.3, p, coherent=False).value
    assert abs(est.value - ref) <= 3 * est.error_estimate
    assert abs(ref - dy2sq_quadrature(0.3, p).value) > 10 * est.error_estimate


@pytest.mark.parametrize("mode", [POSITION, MOMENTUM])
def test_same_seed_bit_identical(mode):
    p = PacketParams(1, 3, 1, 0.4)
    e1 = mc_estimate(0.4, p, McSpec(50_000, 99, mode))
    e2 = mc_estimate(0.4, p, McSpec(50_000, 99, mode))
    assert (e1.value, e1.error_estimate) == (e2.value, e2.error_estimate)
    e3 = mc_estimate(0.4, p, McSpec(50_000, 100, mode))
    assert e3.value != e1.value


def test_frozen_values_for_seed_7():
    # regression guard on the generator contract (Philox keyed by the seed)
    p = PacketParams(1, 3)
    assert mc_estimate(0.3, p, McSpec(100_000, 7)).value == pytest.approx(0.11067364175354266, rel=1e-12)
    assert mc_estimate(0.5, p, McSpec(100_000, 7, MOMENTUM)).value == pytest.approx(1.9639529118843349, rel=1e-12)


def test_too_few_accepted_samples():
    with pytest.raises(StatisticsError, match="increase a or sample_count"):
        mc_estimate(1e-6, PacketParams(1, 3), McSpec(1000, 0, POSITION))


def test_tabulated_density_is_even():
    grid, dens = tabulate_k2_density(0.4, PacketParams(1, 3, 1, 0.6))
    np.testing.assert_allclose(dens, dens[::-1], rtol=1e-12)
    assert grid[0] == -grid[-1]


def test_bad_slit_width():
    with pytest.raises(ParameterError):
        mc_estimate(-0.1, PacketParams(1, 3), McSpec(1000))
