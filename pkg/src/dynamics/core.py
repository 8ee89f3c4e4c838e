"""
Mean-field vector fields of the two-population network, their nullclines, linearization and
the analytic bifurcation conditions at the symmetric fixed point.

The compiled kernels (`planar_field`, `planar_jacobian`) take flat float arguments so that the
integrators in `src.evolution` and `src.analysis` can call them from inside their own loops.
A single kernel serves both variants: the reduced system is the full one with zero thresholds
and zero resting offset.
"""

import logging
import math

import numpy as np
from numba import njit

from src.config.app import SystemVariant
from src.dynamics.models import (
    ActivityPoint,
    FiringThresholds,
    JacobianInfo,
    SynapticWeights,
    SystemParams,
)
from src.exceptions import DegenerateError, DomainError

logger = logging.getLogger(__name__)

ATANH_GUARD = 1e-12
PLOT_MARGIN = 1e-6


@njit(cache=True)
def planar_field(s, sigma, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset):
    ds = offset - s + 0.5 * math.tanh(beta * (w_ee * s - w_ei * sigma - h_e))
    dsigma = offset - sigma + 0.5 * math.tanh(beta * (w_ie * s - w_ii * sigma - h_i))
    return ds, dsigma


@njit(cache=True)
def planar_jacobian(s, sigma, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta):
    # d/dx [.5 tanh(beta * u)] = .5 * beta * sech^2(beta * u) * du/dx
    t_e = math.tanh(beta * (w_ee * s - w_ei * sigma - h_e))
    t_i = math.tanh(beta * (w_ie * s - w_ii * sigma - h_i))
    gain_e = 0.5 * beta * (1.0 - t_e * t_e)
    gain_i = 0.5 * beta * (1.0 - t_i * t_i)
    return (
        -1.0 + gain_e * w_ee,
        -gain_e * w_ei,
        gain_i * w_ie,
        -1.0 - gain_i * w_ii,
    )


def field_args(params: SystemParams) -> tuple[float, ...]:
    """Flat kernel arguments after the point: weights, thresholds, beta, offset"""
    w = params.weights
    return w.w_ee, w.w_ei, w.w_ie, w.w_ii, params.h_e, params.h_i, params.beta, params.offset


def full_rhs(p: ActivityPoint, params: SystemParams) -> ActivityPoint:
    if params.variant is not SystemVariant.FULL:
        raise DomainError("full_rhs needs the full-system parameters (with thresholds)")

    return ActivityPoint(*planar_field(float(p[0]), float(p[1]), *field_args(params)))


def reduced_rhs(p: ActivityPoint, w: SynapticWeights, beta: float = 1.0) -> ActivityPoint:
    s, sigma = float(p[0]), float(p[1])
    return ActivityPoint(
        *planar_field(s, sigma, w.w_ee, w.w_ei, w.w_ie, w.w_ii, 0.0, 0.0, float(beta), 0.0)
    )


def vector_field(p: ActivityPoint, params: SystemParams) -> ActivityPoint:
    return ActivityPoint(*planar_field(float(p[0]), float(p[1]), *field_args(params)))


def symmetric_thresholds(w: SynapticWeights) -> FiringThresholds:
    """Thresholds that make (.5, .5) a fixed point and a center of symmetry of the full system"""
    return FiringThresholds(h_e=0.5 * (w.w_ee - w.w_ei), h_i=0.5 * (w.w_ie - w.w_ii))


def _checked_atanh(x: float) -> float:
    if abs(x) >= 1.0 - ATANH_GUARD:
        raise DomainError(f"Nullcline undefined at |2x| = {abs(x)!r} (atanh singularity)")
    return math.atanh(x)


def s_nullcline_sigma(s: float, w: SynapticWeights, temperature: float) -> float:
    """sigma on the s-nullcline of the reduced system at abscissa s"""
    if w.w_ei == 0:
        raise DegenerateError("s-nullcline is not a graph over s when w_ei = 0")
    return (w.w_ee * s - temperature * _checked_atanh(2.0 * s)) / w.w_ei


def sigma_nullcline_s(sigma: float, w: SynapticWeights, temperature: float) -> float:
    """s on the sigma-nullcline of the reduced system at ordinate sigma (strictly increasing)"""
    if w.w_ie == 0:
        raise DegenerateError("sigma-nullcline is not a graph over sigma when w_ie = 0")
    return (w.w_ii * sigma + temperature * _checked_atanh(2.0 * sigma)) / w.w_ie


def nullcline_curves(
    params: SystemParams, num: int = 801
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Sampled nullclines of either variant, for plotting.

    Returns (s, sigma) along the s-nullcline and (s, sigma) along the sigma-nullcline; points that
    leave the activity box are dropped. The open interval is sampled with a margin of 1e-6.
    """
    w = params.weights
    if w.w_ei == 0 or w.w_ie == 0:
        raise DegenerateError("Nullclines are not graphs when w_ei or w_ie is 0")

    temperature = params.temperature
    low, high = params.box
    grid = np.linspace(low + PLOT_MARGIN, high - PLOT_MARGIN, num)
    centered = 2.0 * (grid - params.offset)

    s_null_sigma = (w.w_ee * grid - params.h_e - temperature * np.arctanh(centered)) / w.w_ei
    sigma_null_s = (w.w_ii * grid + params.h_i + temperature * np.arctanh(centered)) / w.w_ie

    keep_s = (s_null_sigma >= low) & (s_null_sigma <= high)
    keep_sigma = (sigma_null_s >= low) & (sigma_null_s <= high)
    return grid[keep_s], s_null_sigma[keep_s], sigma_null_s[keep_sigma], grid[keep_sigma]


def jacobian_at(p: ActivityPoint, params: SystemParams) -> JacobianInfo:
    entries = planar_jacobian(float(p[0]), float(p[1]), *field_args(params)[:-1])
    return JacobianInfo.from_entries(*entries)


def hopf_threshold_wee(w_ii: float, temperature: float) -> float:
    return w_ii + 4.0 * temperature


def has_complex_origin_eigenvalues(w: SynapticWeights) -> bool:
    """Linearization of the reduced system at the origin has complex eigenvalues (any beta > 0)"""
    return 4.0 * w.w_ei * w.w_ie > (w.w_ee + w.w_ii) ** 2


def origin_determinant(w: SynapticWeights, beta: float) -> float:
    a11, a12, a21, a22 = planar_jacobian(
        0.0, 0.0, w.w_ee, w.w_ei, w.w_ie, w.w_ii, 0.0, 0.0, float(beta)
    )
    return a11 * a22 - a12 * a21


def bogdanov_takens_point(w_ei: float, w_ii: float, temperature: float) -> tuple[float, float]:
    """(w_ee, w_ie) where the Hopf line meets the pitchfork curve of the reduced system"""
    if w_ei == 0:
        raise DegenerateError("Hopf and pitchfork lines do not meet when w_ei = 0")
    return hopf_threshold_wee(w_ii, temperature), (w_ii + 2.0 * temperature) ** 2 / w_ei
