"""Fixed-step classical Runge-Kutta integration: a generic step plus compiled planar batch loops"""

import logging
import math
from typing import Callable

import numpy as np
from numba import njit

from src.dynamics.core import field_args, planar_field
from src.dynamics.models import SystemParams
from src.exceptions import DomainError, NonFiniteError

logger = logging.getLogger(__name__)


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], state: np.ndarray, dt: float) -> np.ndarray:
    """
    One classical 4th-order Runge-Kutta step of the autonomous system x' = rhs(x)

    :param rhs: vector field, takes and returns arrays of the state's shape
    :param state: current state
    :param dt: step (> 0)
    :return new state; NonFiniteError when any component is NaN or inf
    """
    if not dt > 0:
        raise DomainError(f"Step must be positive, got {dt}")

    state = np.asarray(state, dtype=float)
    k1 = np.asarray(rhs(state), dtype=float)
    k2 = np.asarray(rhs(state + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(rhs(state + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(rhs(state + dt * k3), dtype=float)
    new_state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(new_state)):
        raise NonFiniteError("RK4 step produced a non-finite state", partial=state)

    return new_state


def steps_for(duration: float, dt: float) -> int:
    return int(math.ceil(duration / dt - 1e-9))


@njit(cache=True)
def _planar_rk4(s, sigma, dt, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset):
    k1s, k1g = planar_field(s, sigma, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset)
    k2s, k2g = planar_field(
        s + 0.5 * dt * k1s, sigma + 0.5 * dt * k1g, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset
    )
    k3s, k3g = planar_field(
        s + 0.5 * dt * k2s, sigma + 0.5 * dt * k2g, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset
    )
    k4s, k4g = planar_field(
        s + dt * k3s, sigma + dt * k3g, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset
    )
    s_next = s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    sigma_next = sigma + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    return s_next, sigma_next


@njit(cache=True)
def _planar_batch(
    initial, dt, n_transient, n_measure, stride, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset
):
    n_traj = initial.shape[0]
    n_samples = n_measure // stride + 1
    samples = np.empty((n_traj, n_samples, 2))
    for k in range(n_traj):
        s = initial[k, 0]
        sigma = initial[k, 1]
        for _ in range(n_transient):
            s, sigma = _planar_rk4(s, sigma, dt, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset)
        samples[k, 0, 0] = s
        samples[k, 0, 1] = sigma
        recorded = 1
        for step in range(1, n_measure + 1):
            s, sigma = _planar_rk4(s, sigma, dt, w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta, offset)
            if step % stride == 0:
                samples[k, recorded, 0] = s
                samples[k, recorded, 1] = sigma
                recorded += 1
    return samples


def planar_trajectories(
    params: SystemParams,
    initial_points: np.ndarray,
    dt: float,
    t_transient: float,
    t_measure: float,
    sample_every: float,
) -> np.ndarray:
    """
    Integrate the fixed-parameter planar system from many initial points at once.

    Returns samples of shape (n_points, n_samples, 2) covering
    [t_transient, t_transient + t_measure].
    """
    if not dt > 0:
        raise DomainError(f"Step must be positive, got {dt}")

    initial = np.ascontiguousarray(np.atleast_2d(initial_points), dtype=float)
    stride = max(1, int(round(sample_every / dt)))
    n_measure = steps_for(t_measure, dt)
    n_measure -= n_measure % stride
    samples = _planar_batch(
        initial, dt, steps_for(t_transient, dt), n_measure, stride, *field_args(params)
    )
    if not np.all(np.isfinite(samples)):
        raise NonFiniteError("Planar integration produced non-finite samples", partial=samples)

    return samples
