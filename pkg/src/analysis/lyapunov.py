"""
Largest Lyapunov exponent of the regulated system by two-trajectory renormalization: a companion
trajectory starts d0 away from the reference, and every `renormalize_every` time units the
separation is measured, its log growth accumulated, and the companion pulled back to distance d0
along the current separation.

A diagnostic only: a positive estimate over a finite run is evidence of chaos, not a proof.
"""

import dataclasses
import logging

import numpy as np
from numba import njit

from src.config.app import DEFAULT_DT
from src.evolution.integrator import steps_for
from src.evolution.regulation import (
    DYNAMIC_SIZE,
    ExtendedState,
    RegulationConfig,
    regulated_rk4_step,
)
from src.exceptions import DomainError, NonFiniteError

logger = logging.getLogger(__name__)

INITIAL_SEPARATION = 1e-8


@dataclasses.dataclass(frozen=True)
class LyapunovEstimate:
    exponent: float
    times: np.ndarray
    running: np.ndarray

    @property
    def positive(self) -> bool:
        return self.exponent > 0


@njit(cache=True)
def _separation(x, y):
    total = 0.0
    for i in range(DYNAMIC_SIZE):
        delta = y[i] - x[i]
        total += delta * delta
    return np.sqrt(total)


@njit(cache=True)
def _renormalized_growth(x0, coeffs, dt, n_transient, n_blocks, block_steps, d0, logs):
    n = x0.shape[0]
    x = x0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for _ in range(n_transient):
        regulated_rk4_step(x, coeffs, dt, k1, k2, k3, k4, tmp)

    y = x.copy()
    direction = np.sqrt(float(DYNAMIC_SIZE))
    for i in range(DYNAMIC_SIZE):
        y[i] += d0 / direction

    for block in range(n_blocks):
        for _ in range(block_steps):
            regulated_rk4_step(x, coeffs, dt, k1, k2, k3, k4, tmp)
            regulated_rk4_step(y, coeffs, dt, k1, k2, k3, k4, tmp)
        distance = _separation(x, y)
        if not np.isfinite(distance) or distance == 0.0:
            return block
        logs[block] = np.log(distance / d0)
        scale = d0 / distance
        for i in range(DYNAMIC_SIZE):
            y[i] = x[i] + (y[i] - x[i]) * scale
        # display averages carry no dynamics of their own
        for i in range(DYNAMIC_SIZE, n):
            y[i] = x[i]
    return n_blocks


def largest_lyapunov(
    config: RegulationConfig,
    init: ExtendedState,
    t_end: float,
    dt: float = DEFAULT_DT,
    t_transient: float = 0.0,
    renormalize_every: float = 1.0,
    d0: float = INITIAL_SEPARATION,
) -> LyapunovEstimate:
    if not (dt > 0 and t_end > 0 and renormalize_every >= dt):
        raise DomainError("Need dt > 0, t_end > 0 and renormalize_every >= dt")

    block_steps = max(1, int(round(renormalize_every / dt)))
    n_blocks = steps_for(t_end, dt) // block_steps
    logs = np.zeros(n_blocks)
    x0 = init.to_vector()

    done = _renormalized_growth(
        x0, config.coefficients(), dt, steps_for(t_transient, dt), n_blocks, block_steps, d0, logs
    )
    if done < n_blocks:
        raise NonFiniteError(
            f"Separation became degenerate after {done} renormalizations", partial=logs[:done]
        )

    interval = block_steps * dt
    times = interval * np.arange(1, n_blocks + 1)
    running = np.cumsum(logs) / times
    exponent = float(running[-1]) if n_blocks else 0.0
    logger.info("Largest Lyapunov exponent estimate: %.4g", exponent)
    return LyapunovEstimate(exponent=exponent, times=times, running=running)
