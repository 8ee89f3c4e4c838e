"""
Critical curves of the reduced system in the (w_ee, w_ie) plane.

The saddle-node curve is where the s-nullcline touches the (inverted) sigma-nullcline away from
the origin. With
    D(s; w_ee) = s_nullcline_sigma(s) - sigma_on_sigma_nullcline(s)
the tangency solves D = 0 and dD/ds = 0. D grows with w_ee for s > 0, so the first w_ee where
max_s D > 0 is bracketed by bisection and the pair (s, w_ee) is polished with `fsolve`.
"""

import dataclasses
import logging
import math

import numpy as np
from scipy.optimize import brentq, fsolve

from src.config.app import SystemVariant
from src.dynamics.core import hopf_threshold_wee
from src.dynamics.models import SystemParams
from src.exceptions import DegenerateError, DomainError, NoTangencyError, NotApplicableError

logger = logging.getLogger(__name__)

W_EE_MAX = 100.0
GAP_GRID_POINTS = 20001
EDGE_MARGIN = 1e-6
BRACKET_TOLERANCE = 1e-9
TANGENCY_TOLERANCE = 1e-10
OVERLAP_RANGE = (-0.4, 0.4)


def inverse_sigma_nullcline(
    s: np.ndarray, w_ie: float, w_ii: float, temperature: float, iterations: int = 100
) -> np.ndarray:
    """sigma with sigma_nullcline_s(sigma) = s, by vectorized bisection (the curve is increasing)"""
    s = np.asarray(s, dtype=float)
    lower = np.full_like(s, -0.5)
    upper = np.full_like(s, 0.5)
    with np.errstate(divide="ignore"):
        for _ in range(iterations):
            middle = 0.5 * (lower + upper)
            above = (w_ii * middle + temperature * np.arctanh(2.0 * middle)) / w_ie > s
            upper = np.where(above, middle, upper)
            lower = np.where(above, lower, middle)
    return 0.5 * (lower + upper)


@dataclasses.dataclass(frozen=True)
class NullclineGap:
    """Vertical distance between the two nullclines of the reduced system, with its slope"""

    w_ei: float
    w_ii: float
    w_ie: float
    temperature: float

    def __post_init__(self) -> None:
        if self.w_ei == 0 or self.w_ie == 0:
            raise DegenerateError("Nullclines are not graphs over s when w_ei or w_ie is 0")
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise DomainError(f"Temperature must be finite and > 0, got {self.temperature}")

    def sigma_on_sigma_nullcline(self, s: np.ndarray) -> np.ndarray:
        return inverse_sigma_nullcline(s, self.w_ie, self.w_ii, self.temperature)

    def value(self, s: np.ndarray, w_ee: float, sigma: np.ndarray | None = None) -> np.ndarray:
        sigma = self.sigma_on_sigma_nullcline(s) if sigma is None else sigma
        return (w_ee * s - self.temperature * np.arctanh(2.0 * s)) / self.w_ei - sigma

    def slope(self, s: np.ndarray, w_ee: float, sigma: np.ndarray | None = None) -> np.ndarray:
        sigma = self.sigma_on_sigma_nullcline(s) if sigma is None else sigma
        s_slope = (w_ee - 2.0 * self.temperature / (1.0 - 4.0 * s * s)) / self.w_ei
        sigma_slope = self.w_ie / (self.w_ii + 2.0 * self.temperature / (1.0 - 4.0 * sigma * sigma))
        return s_slope - sigma_slope


@dataclasses.dataclass(frozen=True)
class Tangency:
    w_ee: float
    s: float
    sigma: float
    value_residual: float
    slope_residual: float


def pitchfork_boundary_wee(w_ei: float, w_ii: float, w_ie: float, temperature: float) -> float:
    """
    w_ee where the origin's Jacobian determinant vanishes:
        (w_ee / 2T - 1)(1 + w_ii / 2T) = w_ei w_ie / 4T^2
    """
    if not (math.isfinite(temperature) and temperature > 0):
        raise NotApplicableError(f"No pitchfork line at temperature {temperature}")

    return 2.0 * temperature + w_ei * w_ie / (w_ii + 2.0 * temperature)


def saddlenode_tangency(
    w_ei: float, w_ii: float, w_ie: float, temperature: float, w_max: float = W_EE_MAX
) -> Tangency:
    """
    Tangency of the nullclines on the positive branch (the negative one is its mirror image).

    NoTangencyError when no tangency exists in (hopf threshold, w_max] or when the pitchfork at
    the origin comes first, i.e. on the non-saddle-node portion of the P/T boundary.
    """
    gap = NullclineGap(w_ei=w_ei, w_ii=w_ii, w_ie=w_ie, temperature=temperature)
    hopf = hopf_threshold_wee(w_ii, temperature)
    pitchfork = pitchfork_boundary_wee(w_ei, w_ii, w_ie, temperature)

    grid = np.linspace(1e-4, 0.5 - EDGE_MARGIN, GAP_GRID_POINTS)
    sigma = gap.sigma_on_sigma_nullcline(grid)

    def crossed(w_ee: float) -> bool:
        return bool(np.max(gap.value(grid, w_ee, sigma)) > 0)

    if crossed(hopf) or not crossed(w_max):
        raise NoTangencyError(
            f"No nullcline tangency for w_ee in ({hopf}, {w_max}] at w_ie={w_ie}, w_ei={w_ei}"
        )

    lower, upper = hopf, w_max
    while upper - lower > BRACKET_TOLERANCE:
        middle = 0.5 * (lower + upper)
        lower, upper = (lower, middle) if crossed(middle) else (middle, upper)

    if upper >= pitchfork - BRACKET_TOLERANCE:
        raise NoTangencyError(
            f"Pitchfork at w_ee={pitchfork:.6g} precedes any tangency (w_ie={w_ie})"
        )

    start = float(grid[int(np.argmax(gap.value(grid, upper, sigma)))])

    def equations(x: np.ndarray) -> list[float]:
        s = np.clip(x[0], -0.5 + EDGE_MARGIN, 0.5 - EDGE_MARGIN)
        return [float(gap.value(s, x[1])), float(gap.slope(s, x[1]))]

    solution, _, status, message = fsolve(equations, [start, upper], xtol=1e-13, full_output=True)
    s_star, w_star = float(solution[0]), float(solution[1])
    residuals = equations(solution)
    if status != 1 or not 0 < s_star < 0.5 or max(map(abs, residuals)) > TANGENCY_TOLERANCE:
        logger.warning(
            "Tangency solve did not converge (%(message)s), using the bisection bracket",
            {"message": message},
        )
        w_star = upper
        s_star = _slope_root(gap, grid, sigma, w_star, start)
        residuals = [float(gap.value(s_star, w_star)), float(gap.slope(s_star, w_star))]

    return Tangency(
        w_ee=w_star,
        s=s_star,
        sigma=float(gap.sigma_on_sigma_nullcline(s_star)),
        value_residual=abs(residuals[0]),
        slope_residual=abs(residuals[1]),
    )


def _slope_root(
    gap: NullclineGap, grid: np.ndarray, sigma: np.ndarray, w_ee: float, start: float
) -> float:
    slopes = gap.slope(grid, w_ee, sigma)
    index = int(np.searchsorted(grid, start))
    for k in range(max(index - 2, 0), min(index + 2, len(grid) - 1)):
        if slopes[k] > 0 >= slopes[k + 1]:
            return float(brentq(lambda s: float(gap.slope(s, w_ee)), grid[k], grid[k + 1]))
    return start


def saddlenode_wee(w_ei: float, w_ii: float, w_ie: float, temperature: float) -> float:
    return saddlenode_tangency(w_ei, w_ii, w_ie, temperature).w_ee


def nullcline_overlap_metric(
    params: SystemParams, s_range: tuple[float, float] = OVERLAP_RANGE, num: int = 801
) -> float:
    """Largest vertical gap between the nullclines over `s_range` (reduced system)"""
    if params.variant is not SystemVariant.REDUCED:
        raise DomainError("Overlap metric is defined on the reduced system")
    if max(abs(s_range[0]), abs(s_range[1])) >= 0.5:
        raise DomainError(f"Nullclines are undefined at |2s| >= 1, range {s_range}")

    w = params.weights
    gap = NullclineGap(w_ei=w.w_ei, w_ii=w.w_ii, w_ie=w.w_ie, temperature=params.temperature)
    grid = np.linspace(s_range[0], s_range[1], num)
    return float(np.max(np.abs(gap.value(grid, w.w_ee))))
