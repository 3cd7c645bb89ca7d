"""Exceptional-point optomechanical force-gradient sensor: numerics and workbench."""

from .dynamics import (
    EffectiveParams,
    ModeBranches,
    OpticalResponse,
    SystemParams,
    build_heff,
    discriminant,
    effective_params,
    eigen_closed_form,
    optical_damping,
    optical_response,
    optical_spring_shift,
    splitting,
)
from .ep import (
    EPResult,
    SqrtFit,
    SweepResult,
    enhancement_factor,
    find_ep,
    fit_sqrt_law,
    splitting_curves,
    splitting_response,
    sweep_branches,
)
from .errors import (
    BalanceError,
    ConvergenceError,
    FitError,
    NoEPError,
    NumericalError,
    ResolutionError,
    ValidationError,
)
from .linalg import eigen_numeric
from .metrology import (
    DetectionFloor,
    detection_floor,
    floor_without_ep,
    freq_shift_from_gradient,
    linewidth,
    membrane_mass,
)
from .timedomain import Trajectory, extract_spectrum, integrate_eom
from .yukawa import (
    ExclusionCurve,
    SlabGeometry,
    differential_signal,
    exclusion_curve,
    slab_yukawa_force,
    slab_yukawa_gradient,
    voxel_oracle,
    yukawa_potential,
)

__version__ = "0.1.0"
