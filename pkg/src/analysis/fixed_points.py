"""
Equilibria as nullcline intersections.

For every s on a dense grid the sigma-equation has exactly one root (its left-hand side is
strictly decreasing in sigma), so the search reduces to the scalar function
    F(s) = ds/dt evaluated at (s, sigma*(s))
whose sign changes bracket the fixed points. Each bracket is refined with `brentq` and the
resulting point is polished by a 2-D Newton iteration.
"""

import dataclasses
import logging

import numpy as np
from scipy.optimize import brentq

from src.dynamics.core import field_args, jacobian_at, planar_field, planar_jacobian
from src.dynamics.models import ActivityPoint, JacobianInfo, SystemParams

logger = logging.getLogger(__name__)

SCAN_POINTS = 4001
BISECTION_ITERATIONS = 60
NEWTON_TOLERANCE = 1e-10
NEWTON_MAX_ITERATIONS = 50
MERGE_DISTANCE = 1e-6
RESIDUAL_LIMIT = 1e-9


@dataclasses.dataclass(frozen=True)
class FixedPoint:
    location: ActivityPoint
    stability: JacobianInfo

    @property
    def is_stable(self) -> bool:
        return self.stability.stability.is_stable


def _sigma_roots(s: np.ndarray, params: SystemParams) -> np.ndarray:
    """sigma*(s) for an array of s by vectorized bisection on the sigma-equation"""
    _, _, w_ie, w_ii, _, h_i, beta, offset = field_args(params)
    low, high = params.box
    lower = np.full_like(s, low)
    upper = np.full_like(s, high)
    for _ in range(BISECTION_ITERATIONS):
        middle = 0.5 * (lower + upper)
        value = offset - middle + 0.5 * np.tanh(beta * (w_ie * s - w_ii * middle - h_i))
        positive = value > 0
        lower = np.where(positive, middle, lower)
        upper = np.where(positive, upper, middle)
    return 0.5 * (lower + upper)


def _sigma_root(s: float, params: SystemParams) -> float:
    _, _, w_ie, w_ii, _, h_i, beta, offset = field_args(params)
    low, high = params.box

    def equation(sigma: float) -> float:
        return offset - sigma + 0.5 * np.tanh(beta * (w_ie * s - w_ii * sigma - h_i))

    if equation(low) == 0.0:
        return low
    if equation(high) == 0.0:
        return high
    return brentq(equation, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _reduced_s_equation(s: float, params: SystemParams) -> float:
    return planar_field(s, _sigma_root(s, params), *field_args(params))[0]


def _newton_polish(point: ActivityPoint, params: SystemParams) -> ActivityPoint:
    args = field_args(params)
    low, high = params.box
    s, sigma = point
    for _ in range(NEWTON_MAX_ITERATIONS):
        f1, f2 = planar_field(s, sigma, *args)
        if max(abs(f1), abs(f2)) < NEWTON_TOLERANCE:
            return ActivityPoint(s, sigma)
        a11, a12, a21, a22 = planar_jacobian(s, sigma, *args[:-1])
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            break
        s -= (a22 * f1 - a12 * f2) / det
        sigma -= (-a21 * f1 + a11 * f2) / det
        if not (low <= s <= high and low <= sigma <= high):
            break

    # keep the bracketing result
    return point


def residual(point: ActivityPoint, params: SystemParams) -> float:
    return max(abs(v) for v in planar_field(point[0], point[1], *field_args(params)))


def find_fixed_points(params: SystemParams, scan_points: int = SCAN_POINTS) -> list[FixedPoint]:
    """All equilibria of the active variant, sorted by s, each with its linearization"""
    low, high = params.box
    grid = np.linspace(low, high, scan_points)
    sigma_grid = _sigma_roots(grid, params)
    w_ee, w_ei, _, _, h_e, _, beta, offset = field_args(params)
    values = offset - grid + 0.5 * np.tanh(beta * (w_ee * grid - w_ei * sigma_grid - h_e))

    candidates = [float(s) for s, value in zip(grid, values) if value == 0.0]
    for k in np.nonzero(values[:-1] * values[1:] < 0)[0]:
        left, right = float(grid[k]), float(grid[k + 1])
        if _reduced_s_equation(left, params) * _reduced_s_equation(right, params) > 0:
            # grid and scalar sigma roots disagree in the last bits; Newton finishes the job
            candidates.append(left if abs(values[k]) < abs(values[k + 1]) else right)
            continue
        root = brentq(_reduced_s_equation, left, right, args=(params,), xtol=1e-15, maxiter=200)
        candidates.append(float(root))

    points: list[ActivityPoint] = []
    for s in sorted(candidates):
        point = _newton_polish(ActivityPoint(s, _sigma_root(s, params)), params)
        if any(point.distance(other) < MERGE_DISTANCE for other in points):
            continue
        if (value := residual(point, params)) >= RESIDUAL_LIMIT:
            logger.warning(
                "Dropping candidate %(point)s: residual %(residual).3g",
                {"point": point, "residual": value},
            )
            continue
        points.append(point)

    logger.debug("Found %s fixed points for %s", len(points), params)
    return [FixedPoint(location=p, stability=jacobian_at(p, params)) for p in points]


def stable_fixed_points(params: SystemParams) -> list[FixedPoint]:
    return [point for point in find_fixed_points(params) if point.is_stable]
