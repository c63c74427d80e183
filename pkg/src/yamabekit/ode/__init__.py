"""Profile ODE integration, invariant tracking and classification."""

from .integrator import IntegrationError, Solution, StepUnderflowError, dopri5
from .profile import (
    CSV_COLUMNS,
    LABELS,
    Classification,
    InvariantReport,
    ODEState,
    ProfileError,
    ProfileTrajectory,
    SingularStateError,
    TrajectoryTooShortError,
    classify,
    integrate,
    origin_series_start,
    profile_rhs,
    profile_system,
    ricci_gradient,
    scalar_from_state,
    shoot_from_origin,
    track_invariants,
)

__all__ = [
    "CSV_COLUMNS",
    "LABELS",
    "Classification",
    "IntegrationError",
    "InvariantReport",
    "ODEState",
    "ProfileError",
    "ProfileTrajectory",
    "SingularStateError",
    "Solution",
    "StepUnderflowError",
    "TrajectoryTooShortError",
    "classify",
    "dopri5",
    "integrate",
    "origin_series_start",
    "profile_rhs",
    "profile_system",
    "ricci_gradient",
    "scalar_from_state",
    "shoot_from_origin",
    "track_invariants",
]
