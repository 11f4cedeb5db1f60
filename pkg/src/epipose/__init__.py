"""Camera pose estimation from epipolar pseudo-measurements.

An equivariant filter on the symmetry group SO(3) x SOT(3) estimates
full camera pose (attitude, translation direction and range) from
landmark bearing pairs and measured velocities, together with the
observability diagnostics that predict when the range converges.
"""

from .epipolar import LandmarkSet, bearings_from_landmark, essential_matrix, measure
from .eqf import FilterState, GainConfig, estimate, observer_step
from .liegroup import AlgebraElement, GroupElement
from .observability import ObservabilityReport, analyze_windows, det_bound, pe_integral
from .sim import MetricsRow, RunResult, Scenario, benchmark_scenario, integrate_truth, run_filter
from .symmetry import ORIGIN, BearingPair, State, Velocity, lift, phi, psi, theta

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "BearingPair",
    "FilterState",
    "GainConfig",
    "GroupElement",
    "LandmarkSet",
    "MetricsRow",
    "ObservabilityReport",
    "ORIGIN",
    "RunResult",
    "Scenario",
    "State",
    "Velocity",
    "analyze_windows",
    "bearings_from_landmark",
    "benchmark_scenario",
    "det_bound",
    "essential_matrix",
    "estimate",
    "integrate_truth",
    "lift",
    "measure",
    "observer_step",
    "pe_integral",
    "phi",
    "psi",
    "run_filter",
    "theta",
]
