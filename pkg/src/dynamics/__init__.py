from .models import (
    ActivityPoint,
    FiringThresholds,
    JacobianInfo,
    StabilityClass,
    SynapticWeights,
    SystemParams,
)
from .core import (
    full_rhs,
    hopf_threshold_wee,
    jacobian_at,
    reduced_rhs,
    s_nullcline_sigma,
    sigma_nullcline_s,
    symmetric_thresholds,
    vector_field,
)


__all__ = (
    "ActivityPoint",
    "FiringThresholds",
    "JacobianInfo",
    "StabilityClass",
    "SynapticWeights",
    "SystemParams",
    "full_rhs",
    "hopf_threshold_wee",
    "jacobian_at",
    "reduced_rhs",
    "s_nullcline_sigma",
    "sigma_nullcline_s",
    "symmetric_thresholds",
    "vector_field",
)
