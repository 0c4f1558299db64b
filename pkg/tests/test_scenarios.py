import math
import warnings

import numpy as np
import pytest

from popperlab import closed_form as cf
from popperlab.errors import BandLimitWarning, ParameterError
from popperlab.montecarlo import McSpec, mc_estimate, MOMENTUM, POSITION
from popperlab.oracle import dk2sq_quadrature, dy2sq_quadrature
from popperlab.scenarios import (
    DetectorBand,
    SlitConfig,
    SweepGrid,
    default_band,
    is_non_increasing,
    post_slit_k2_spread,
    run_case_i,
    run_case_ii,
    sweep,
)
from popperlab.wavepacket import PacketParams


def test_slit_and_band_validation():
    assert math.isinf(SlitConfig(0.3).b)
    with pytest.raises(ParameterError):
        SlitConfig(0.0)
    with pytest.raises(ParameterError):
        SlitConfig(0.3, -1)
    with pytest.raises(ParameterError):
        DetectorBand(math.inf)


def test_default_band():
    assert default_band(PacketParams(1, 3)).k_max == pytest.approx(10 * math.sqrt(2.5))


def test_open_right_slit_matches_band_limited_quadrature():
    p = PacketParams(1, 3, 1, 0.5)
    for a, kmax in ((0.3, 30.0), (1.0, 4.0)):
        post = post_slit_k2_spread(a, math.inf, DetectorBand(kmax), p)
        assert post.value == pytest.approx(dk2sq_quadrature(a, p, k_max=kmax).value, rel=1e-6)
        assert "k_max-divergent" not in post.flags


def test_right_slit_broadens_k2():
    p = PacketParams(1, 3, 1, 0.5)
    band = DetectorBand(30)
    with pytest.warns(BandLimitWarning):
        closed = post_slit_k2_spread(0.3, 0.3, band, p)
    open_ = post_slit_k2_spread(0.3, math.inf, band, p)
    assert closed.value > open_.value
    assert "k_max-divergent" in closed.flags


def test_finite_right_slit_grows_with_band():
    p = PacketParams(1, 3, 1, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandLimitWarning)
        vals = [post_slit_k2_spread(0.3, 0.3, DetectorBand(k), p).value for k in (15, 30, 60, 120)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # roughly linear growth: doubling k_max about doubles the variance
    assert vals[3] / vals[2] == pytest.approx(2, rel=0.1)


def test_case_i_record():
    res = run_case_i(0.3, PacketParams(1, 3, 1, 0.5), DetectorBand(30))
    assert res.right_slit_broadens
    assert res.dy2sq.value == pytest.approx(dy2sq_quadrature(0.3, PacketParams(1, 3, 1, 0.5)).value, rel=1e-15)
    assert "propensity" in res.label


def test_case_i_narrow_position_limit():
    res = run_case_i(1e-5, PacketParams(1, 3), DetectorBand(20))
    assert res.dy2sq.value == pytest.approx(0.1, rel=1e-5)


def test_case_ii_endpoints_and_monotone():
    widths = list(np.geomspace(0.01, 5, 20))
    rep = run_case_ii(widths, PacketParams(1, 3))
    assert len(rep.rows) == 20
    assert rep.rows[0].dk2sq_quadrature == pytest.approx(2.5, rel=1e-3)
    assert rep.rows[-1].dk2sq_quadrature == pytest.approx(0.9, rel=1e-6)
    assert rep.monotone
    assert (rep.narrow, rep.wide) == (2.5, pytest.approx(0.9))
    assert all(r.dy2sq_quadrature is None for r in rep.rows)


def test_case_ii_factorized_state_is_flat():
    rep = run_case_ii([0.01, 0.1, 1, 10], PacketParams(1, 1))
    for r in rep.rows:
        assert r.dk2sq_quadrature == pytest.approx(0.5, abs=1e-8)
    assert rep.monotone


def test_case_ii_slope_inversion_note():
    p = PacketParams(1, 3, 1, 2.0)
    assert cf.delta_coeff(p).delta < 0
    rep = run_case_ii([0.01, 0.05], p)
    assert any("slope inverted" in n for n in rep.notes)
    assert "increasing in a" in rep.notes[0]
    before = run_case_ii([0.01, 0.05], PacketParams(1, 3))
    assert not any("slope inverted" in n for n in before.notes)


def test_case_ii_rejects_bad_widths():
    with pytest.raises(ParameterError):
        run_case_ii([], PacketParams(1, 3))
    with pytest.raises(ParameterError):
        run_case_ii([0.2, 0.1], PacketParams(1, 3))


def test_case_ii_not_monotone_after_evolution():
    # the coherent window makes the conditioned spread ring below the wide
    # limit before settling, even though t is below the delta sign flip
    p = PacketParams(1, 3, 1, 0.5 * cf.delta_coeff(PacketParams(1, 3)).sign_flip_time)
    vals = [dk2sq_quadrature(a, p).value for a in (2.6, 3.6)]
    assert vals[0] < 0.9 < vals[1]


def test_monotone_helper():
    assert is_non_increasing([3, 2, 2 + 5e-10, 1])
    assert not is_non_increasing([3, 2, 2.1])
    assert is_non_increasing([None, 1.0, None, 0.5])


def test_one_point_sweep_reproduces_single_operations():
    p = PacketParams(0.7, 2.5, 1.2, 0.3)
    mc = McSpec(20_000, 4)
    (row,) = sweep(SweepGrid([0.4], [0.7], [2.5], t=[0.3], mass=[1.2]), cf.METHODS, mc=mc)
    assert row.dk2sq_narrow == cf.dk2sq_narrow(p).value
    assert row.dk2sq_small_a == cf.dk2sq_small_a(0.4, p).value
    assert row.dk2sq_wide == cf.dk2sq_wide(p).value
    assert row.dk2sq_quadrature == dk2sq_quadrature(0.4, p).value
    assert row.dy2sq_quadrature == dy2sq_quadrature(0.4, p).value
    assert row.dk2sq_mc == mc_estimate(0.4, p, McSpec(20_000, 4, MOMENTUM), stream=0).value
    assert row.dy2sq_mc == mc_estimate(0.4, p, McSpec(20_000, 4, POSITION), stream=1).value
    assert row.params == p


def test_wide_column_constant_over_a():
    rows = sweep(SweepGrid(list(np.geomspace(0.01, 10, 7)), [1], [3]), [cf.CLOSED_WIDE])
    assert len({r.dk2sq_wide for r in rows}) == 1
    assert all(r.dk2sq_quadrature is None and r.dk2sq_narrow is None for r in rows)


def test_sweep_order_and_threads_are_deterministic():
    grid = SweepGrid([0.2, 0.5], [1], [2, 3], b=[math.inf, 0.5], t=[0, 0.4])
    serial = sweep(grid, [cf.QUADRATURE, cf.CLOSED_NARROW])
    threaded = sweep(grid, [cf.QUADRATURE, cf.CLOSED_NARROW], workers=4)
    assert serial == threaded
    assert [(r.a, r.b, r.t, r.sigma_minus) for r in serial] == list(
        (a, b, t, sm) for a in (0.2, 0.5) for b in (math.inf, 0.5) for t in (0, 0.4) for sm in (2, 3))


def test_finite_right_slit_cells_use_post_slit_spread():
    (row,) = sweep(SweepGrid([0.3], [1], [3], b=[0.3], t=[0.5]), cf.METHODS)
    assert row.dk2sq_narrow is None and row.dk2sq_wide is None and row.dk2sq_small_a is None
    assert any(f.startswith("dk2sq_quadrature:post-slit") for f in row.flags)
    band = default_band(PacketParams(1, 3, 1, 0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandLimitWarning)
        assert row.dk2sq_quadrature == post_slit_k2_spread(0.3, 0.3, band, PacketParams(1, 3, 1, 0.5)).value


def test_out_of_regime_expansion_flagged_and_negative_values_left_out():
    (row,) = sweep(SweepGrid([5.0], [1], [3]), [cf.CLOSED_SMALL_A])
    assert "dk2sq_small_a:out-of-regime" in row.flags
    assert row.dk2sq_small_a is None  # the raw expansion is negative here
    assert row.dy2sq_small_a is not None and row.dy2sq_small_a > 0


def test_sweep_records_cell_errors_without_aborting():
    (row,) = sweep(SweepGrid([1e-7], [1], [3]), [cf.MONTE_CARLO], mc=McSpec(1000))
    assert "dy2sq_mc:too-few-samples" in row.flags
    assert row.dk2sq_mc is not None


def test_sweep_grid_cells_agree_with_monte_carlo():
    grid = SweepGrid([0.3, 0.6, 1.2], [1], [3], t=[0, 0.5, 2])
    rows = sweep(grid, [cf.QUADRATURE, cf.MONTE_CARLO], mc=McSpec(200_000, 17), workers=3)
    for r in rows:
        assert abs(r.dk2sq_mc - r.dk2sq_quadrature) <= 3 * r.dk2sq_mc_err
        assert abs(r.dy2sq_mc - r.dy2sq_quadrature) <= 3 * r.dy2sq_mc_err


def test_sweep_validation():
    with pytest.raises(ParameterError):
        sweep(SweepGrid([], [1], [3]))
    with pytest.raises(ParameterError):
        sweep(SweepGrid([0.1], [1], [3]), ["magic"])
