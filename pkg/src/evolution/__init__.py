from .integrator import planar_trajectories, rk4_step
from .regulation import (
    ExtendedState,
    RegulationConfig,
    Trace,
    cov_ee,
    cov_ie,
    integrate,
    kernel_average,
    moving_average_rhs,
    regulated_rhs,
)


__all__ = (
    "ExtendedState",
    "RegulationConfig",
    "Trace",
    "cov_ee",
    "cov_ie",
    "integrate",
    "kernel_average",
    "moving_average_rhs",
    "planar_trajectories",
    "regulated_rhs",
    "rk4_step",
)
