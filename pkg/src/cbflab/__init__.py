"""Spectral simulation laboratory for damped incompressible flow on the torus."""

from .conditions import ConditionReport, check_singleton_condition, grashof, reynolds
from .deterministic import (
    Trajectory,
    energy_residual,
    find_singleton,
    probe_field,
    simulate,
)
from .errors import (
    BlowUpError,
    CBFError,
    CFLViolationError,
    GridMismatchError,
    MeanViolationError,
    NonConvergenceError,
    ValidationError,
)
from .experiments import (
    RateFit,
    SweepRecord,
    contraction_experiment,
    fit_rate,
    measure_distance,
    rate_sweep,
)
from .fields import (
    PhysicalField,
    SpectralVelocity,
    random_field,
    read_field,
    single_mode_field,
    write_field,
    zero_velocity,
)
from .grid import TorusGrid
from .operators import (
    bilinear_B,
    damping_C,
    h_norm,
    inner_h,
    leray_project,
    lr_norm,
    norms,
    stokes_apply,
    trilinear_b,
    v_norm,
)
from .ou import OUPath, WienerPath, ou_from_wiener, ou_path, ou_shift_eval, sample_wiener
from .params import EstimateConstants, PhysicsParams
from .random_pde import (
    NoiseConfig,
    PullbackSample,
    pullback_sample,
    solve_additive_2d,
    solve_multiplicative,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CBFError",
    "CFLViolationError",
    "ConditionReport",
    "EstimateConstants",
    "GridMismatchError",
    "MeanViolationError",
    "NoiseConfig",
    "NonConvergenceError",
    "OUPath",
    "PhysicalField",
    "PhysicsParams",
    "PullbackSample",
    "RateFit",
    "SpectralVelocity",
    "SweepRecord",
    "TorusGrid",
    "Trajectory",
    "ValidationError",
    "WienerPath",
    "bilinear_B",
    "check_singleton_condition",
    "contraction_experiment",
    "damping_C",
    "energy_residual",
    "find_singleton",
    "fit_rate",
    "grashof",
    "h_norm",
    "inner_h",
    "leray_project",
    "lr_norm",
    "measure_distance",
    "norms",
    "ou_from_wiener",
    "ou_path",
    "ou_shift_eval",
    "probe_field",
    "pullback_sample",
    "random_field",
    "rate_sweep",
    "read_field",
    "reynolds",
    "sample_wiener",
    "simulate",
    "single_mode_field",
    "solve_additive_2d",
    "solve_multiplicative",
    "stokes_apply",
    "trilinear_b",
    "v_norm",
    "write_field",
    "zero_velocity",
]
