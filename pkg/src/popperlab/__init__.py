"""Entangled two-particle Gaussian wave packets behind slits.

Closed-form, quadrature and Monte Carlo routes to the slit-conditioned
momentum and position spreads of the right-moving particle.
"""

from .closed_form import (
    METHODS,
    ExpansionCoefficients,
    SpreadEstimate,
    delta_coeff,
    dk2sq_narrow,
    dk2sq_small_a,
    dk2sq_wide,
    dy1sq_narrow,
    dy2sq_narrow,
    dy2sq_small_a,
    dy2sq_wide,
    from_qureshi,
    to_qureshi,
)
from .errors import BandLimitWarning, ConvergenceError, OutOfRangeError, ParameterError, StatisticsError
from .montecarlo import McSpec, mc_estimate
from .oracle import QuadratureSpec, dk2sq_quadrature, dy2sq_quadrature, slit_amplitude
from .report import emit_csv, parse_csv
from .scenarios import (
    DetectorBand,
    SlitConfig,
    SweepGrid,
    SweepRow,
    post_slit_k2_spread,
    run_case_i,
    run_case_ii,
    sweep,
)
from .special import complex_erf
from .wavepacket import (
    PacketParams,
    complex_width_sq,
    joint_position_density,
    position_density_coefficients,
    psi_mixed,
    psi_momentum,
    psi_position,
)

__version__ = "0.1.0"

__all__ = [
    "BandLimitWarning",
    "ConvergenceError",
    "DetectorBand",
    "ExpansionCoefficients",
    "METHODS",
    "McSpec",
    "OutOfRangeError",
    "PacketParams",
    "ParameterError",
    "QuadratureSpec",
    "SlitConfig",
    "SpreadEstimate",
    "StatisticsError",
    "SweepGrid",
    "SweepRow",
    "complex_erf",
    "complex_width_sq",
    "delta_coeff",
    "dk2sq_narrow",
    "dk2sq_quadrature",
    "dk2sq_small_a",
    "dk2sq_wide",
    "dy1sq_narrow",
    "dy2sq_narrow",
    "dy2sq_quadrature",
    "dy2sq_small_a",
    "dy2sq_wide",
    "emit_csv",
    "from_qureshi",
    "joint_position_density",
    "mc_estimate",
    "parse_csv",
    "position_density_coefficients",
    "post_slit_k2_spread",
    "psi_mixed",
    "psi_momentum",
    "psi_position",
    "run_case_i",
    "run_case_ii",
    "slit_amplitude",
    "sweep",
    "to_qureshi",
]
