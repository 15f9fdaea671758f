"""Distortion energies of planar maps.

Submodules: :mod:`mat2` (2x2 matrix geometry), :mod:`bounds` (the
volume-ratio bound and sandwiches), :mod:`costfn` (general singular-value
costs), :mod:`maps` and :mod:`shapes` (explicit maps and their images),
:mod:`energy` (quadrature), :mod:`criticality` (discrete Euler-Lagrange
residuals), :mod:`verify` (random-matrix suites) and :mod:`cli`.
"""

from .bounds import F, F_pow, F_prime, Sandwich, sandwich_CO, sandwich_K
from .costfn import CostFunction, F_f, conformal_is_minimizer, phase_threshold
from .domains import Annulus, Disk, Square
from .energy import build_grid, energy_f, energy_p, rigidity_residuals
from .errors import DistortionError
from .maps import (
    RadialMap,
    TwistMap,
    build_ode_minimizer,
    build_twist_minimizer,
    evaluate_cartesian,
    frame_differential,
    homothety,
    identity_map,
    twist_lambda,
)
from .mat2 import Mat2, SingularPair, dist_CO2, dist_K, dist_SO2, polar_factor, singular_values

__version__ = "0.1.0"
