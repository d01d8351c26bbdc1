"""Two-photon slit diffraction: closed-form patterns, numeric propagation, fitting.

Entangled photon pairs passing a double slit close to their source produce a
coincidence pattern that looks like a classical Young's pattern at half the
wavelength.  This package computes those patterns, checks the conditions
under which the narrowing holds, propagates pair amplitudes numerically when
it does not, and fits synthetic count data for the effective wavelength.
"""

__version__ = "0.1.0"

from .core import (
    DetectionGeometry,
    Finding,
    LinearPhase,
    OpticalSetup,
    Pattern,
    SlitMask,
    SpdcSource,
    ValidationReport,
    reference_setup,
    setup_from_dict,
    setup_to_dict,
    validate_setup,
)
from .errors import (
    ConvergenceError,
    InvalidParameterError,
    InvalidSetupError,
    UnphysicalKinematicsError,
)
from .patterns import (
    PatternMetrics,
    biphoton_diffraction,
    biphoton_double_slit,
    biphoton_interference,
    classical_double_slit,
    classical_single_slit,
    closed_form_pattern,
    nphoton_double_slit,
    pattern_metrics,
)
from .phase_matching import (
    ConditionReport,
    check_diffraction,
    check_erasure,
    check_same_slit,
    energy_conserved,
    exit_angle,
    transverse_matched_internal_angle,
)
from .propagator import (
    PropagationResult,
    coincidence_pattern_numeric,
    joint_amplitude,
    monte_carlo_pattern,
    narrowing_ratio_vs_distance,
)
from .synth import (
    CountRecord,
    FitResult,
    fit_pattern,
    quantum_classical_comparison,
    simulate_counts,
)
