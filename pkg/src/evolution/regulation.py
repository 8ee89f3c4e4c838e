"""
The regulated system: activity (s, sigma), its moving averages and the plastic parameters
(w_ee, w_ie, h_E, h_I), integrated as one coupled ODE.

State vector layout shared by the compiled kernels (see `STATE_FIELDS`):
    s, sigma, s_bar, sigma_bar, w_ee, w_ie, h_e, h_i, c_bar_ee, c_bar_ie
The last two are display-only covariance averages over a kernel ten times broader than the
activity averages; nothing feeds back from them.
"""

import dataclasses
import logging
import math
from typing import Iterator

import numpy as np
from numba import njit
from scipy.signal import lfilter

from src.config.app import DEFAULT_BETA, DEFAULT_DT, SystemVariant
from src.dynamics.core import planar_field
from src.dynamics.models import FiringThresholds, SynapticWeights, SystemParams
from src.evolution.integrator import steps_for
from src.exceptions import DomainError, NonFiniteError
from src.utils import content_hash

logger = logging.getLogger(__name__)

STATE_FIELDS = (
    "s",
    "sigma",
    "s_bar",
    "sigma_bar",
    "w_ee",
    "w_ie",
    "h_e",
    "h_i",
    "c_bar_ee",
    "c_bar_ie",
)
STATE_SIZE = len(STATE_FIELDS)
DYNAMIC_SIZE = 8  # everything except the display averages
S, SIGMA, S_BAR, SIGMA_BAR, W_EE, W_IE, H_E, H_I, C_BAR_EE, C_BAR_IE = range(STATE_SIZE)

DISPLAY_KERNEL_FACTOR = 10.0
BOX_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class RegulationConfig:
    """
    Rate constants and control targets of the covariance and threshold rules.

    A rule acts only when its flag is on; the fixed couplings (w_ei, w_ii) and beta are part of
    the configuration because the regulated state carries only the plastic parameters.
    """

    w_ei: float
    w_ii: float
    variant: SystemVariant = SystemVariant.REDUCED
    beta: float = DEFAULT_BETA
    rho: float = 0.1
    eps_ee: float = 0.01
    theta_ee: float = 0.01
    eps_ie: float = -0.01
    theta_ie: float = 0.01
    eps_he: float = 0.0
    theta_he: float = 0.5
    eps_hi: float = 0.0
    theta_hi: float = 0.5
    regulate_w_ee: bool = False
    regulate_w_ie: bool = False
    regulate_h_e: bool = False
    regulate_h_i: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", SystemVariant(self.variant))
        for name in ("w_ei", "w_ii", "beta"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.rho > 0:
            raise DomainError(f"rho must be > 0 (averaging rate), got {self.rho}")
        if self.eps_ee < 0:
            raise DomainError(f"eps_ee must be >= 0, got {self.eps_ee}")
        if self.eps_ie > 0:
            raise DomainError(
                f"eps_ie must be <= 0 (the E-to-I modification rate is negative), got {self.eps_ie}"
            )
        if not (self.theta_ee > 0 and self.theta_ie > 0):
            raise DomainError("theta_ee and theta_ie must be > 0")
        if self.eps_he < 0 or self.eps_hi < 0:
            raise DomainError("eps_he and eps_hi must be >= 0")
        if not (0 < self.theta_he < 1 and 0 < self.theta_hi < 1):
            raise DomainError("theta_he and theta_hi must lie in (0, 1)")
        if self.variant is SystemVariant.REDUCED and (self.regulate_h_e or self.regulate_h_i):
            raise DomainError("Threshold rules need the full system (reduced has no thresholds)")

    @property
    def offset(self) -> float:
        return 0.5 if self.variant is SystemVariant.FULL else 0.0

    @property
    def box(self) -> tuple[float, float]:
        return self.offset - 0.5, self.offset + 0.5

    @property
    def any_rule(self) -> bool:
        return self.regulate_w_ee or self.regulate_w_ie or self.regulate_h_e or self.regulate_h_i

    def coefficients(self) -> np.ndarray:
        """Flat kernel coefficients; a disabled rule gets a zero rate"""
        return np.array(
            [
                self.w_ei,
                self.w_ii,
                self.beta,
                self.offset,
                self.rho,
                self.eps_ee if self.regulate_w_ee else 0.0,
                self.theta_ee,
                self.eps_ie if self.regulate_w_ie else 0.0,
                self.theta_ie,
                self.eps_he if self.regulate_h_e else 0.0,
                self.theta_he,
                self.eps_hi if self.regulate_h_i else 0.0,
                self.theta_hi,
            ],
            dtype=float,
        )

    def system_params(self, state: "ExtendedState") -> SystemParams:
        """Fixed-parameter system frozen at the plastic parameters of `state`"""
        weights = SynapticWeights(w_ee=state.w_ee, w_ei=self.w_ei, w_ie=state.w_ie, w_ii=self.w_ii)
        if self.variant is SystemVariant.FULL:
            return SystemParams.full(weights, FiringThresholds(state.h_e, state.h_i), self.beta)
        return SystemParams.reduced(weights, self.beta)

    def as_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["variant"] = str(self.variant)
        return data


@dataclasses.dataclass(frozen=True)
class ExtendedState:
    s: float
    sigma: float
    s_bar: float
    sigma_bar: float
    w_ee: float
    w_ie: float
    h_e: float = 0.0
    h_i: float = 0.0
    t: float = 0.0
    c_bar_ee: float = 0.0
    c_bar_ie: float = 0.0

    @classmethod
    def initial(
        cls,
        s: float,
        sigma: float,
        w_ee: float,
        w_ie: float,
        h_e: float = 0.0,
        h_i: float = 0.0,
        t: float = 0.0,
    ) -> "ExtendedState":
        """Averages start at the activity itself, so the initial covariance is zero"""
        return cls(s, sigma, s, sigma, w_ee, w_ie, h_e, h_i, t)

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in STATE_FIELDS], dtype=float)

    @classmethod
    def from_vector(cls, vector: np.ndarray, t: float = 0.0) -> "ExtendedState":
        return cls(**{name: float(vector[i]) for i, name in enumerate(STATE_FIELDS)}, t=t)


@njit(cache=True)
def moving_average_rhs(r, r_bar, rho):
    return rho * (r - r_bar)


@njit(cache=True)
def _covariance(a, a_bar, b, b_bar):
    return (a - a_bar) * (b - b_bar)


def cov_ee(state: ExtendedState) -> float:
    return _covariance(state.s, state.s_bar, state.s, state.s_bar)


def cov_ie(state: ExtendedState) -> float:
    return _covariance(state.s, state.s_bar, state.sigma, state.sigma_bar)


@njit(cache=True)
def regulated_derivative(x, coeffs, out):
    w_ei = coeffs[0]
    w_ii = coeffs[1]
    beta = coeffs[2]
    offset = coeffs[3]
    rho = coeffs[4]

    ds, dsigma = planar_field(
        x[S], x[SIGMA], x[W_EE], w_ei, x[W_IE], w_ii, x[H_E], x[H_I], beta, offset
    )
    c_ee = _covariance(x[S], x[S_BAR], x[S], x[S_BAR])
    c_ie = _covariance(x[S], x[S_BAR], x[SIGMA], x[SIGMA_BAR])

    out[S] = ds
    out[SIGMA] = dsigma
    out[S_BAR] = moving_average_rhs(x[S], x[S_BAR], rho)
    out[SIGMA_BAR] = moving_average_rhs(x[SIGMA], x[SIGMA_BAR], rho)
    # covariance rules use the instantaneous covariance, not its average
    out[W_EE] = coeffs[5] * (c_ee - coeffs[6])
    out[W_IE] = coeffs[7] * (c_ie - coeffs[8])
    # threshold rules work in full-system coordinates, activity in [0, 1]
    out[H_E] = coeffs[9] * (x[S_BAR] - coeffs[10])
    out[H_I] = coeffs[11] * (x[SIGMA_BAR] - coeffs[12])
    display_rho = rho / DISPLAY_KERNEL_FACTOR
    out[C_BAR_EE] = moving_average_rhs(c_ee, x[C_BAR_EE], display_rho)
    out[C_BAR_IE] = moving_average_rhs(c_ie, x[C_BAR_IE], display_rho)


@njit(cache=True)
def regulated_rk4_step(x, coeffs, dt, k1, k2, k3, k4, tmp):
    n = x.shape[0]
    regulated_derivative(x, coeffs, k1)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    regulated_derivative(tmp, coeffs, k2)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    regulated_derivative(tmp, coeffs, k3)
    for i in range(n):
        tmp[i] = x[i] + dt * k3[i]
    regulated_derivative(tmp, coeffs, k4)
    for i in range(n):
        x[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True)
def _all_finite(x):
    for i in range(x.shape[0]):
        if not np.isfinite(x[i]):
            return False
    return True


@njit(cache=True)
def _integrate_regulated(x0, coeffs, dt, n_steps, stride, samples, box_low, box_high, tolerance):
    """
    Returns (failed_step, recorded, clamp_events, box_events); failed_step is -1 on success.
    """
    x = x0.copy()
    n = x.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    clamp_events = 0
    box_events = 0

    samples[0, :] = x
    recorded = 1
    for step in range(1, n_steps + 1):
        regulated_rk4_step(x, coeffs, dt, k1, k2, k3, k4, tmp)
        if not _all_finite(x):
            return step, recorded, clamp_events, box_events

        if x[W_EE] < 0.0:
            x[W_EE] = 0.0
            clamp_events += 1
        if x[W_IE] < 0.0:
            x[W_IE] = 0.0
            clamp_events += 1
        for i in range(2):
            if x[i] < box_low - tolerance or x[i] > box_high + tolerance:
                box_events += 1

        if step % stride == 0:
            samples[recorded, :] = x
            recorded += 1

    return -1, recorded, clamp_events, box_events


def regulated_rhs(x: ExtendedState, config: RegulationConfig) -> ExtendedState:
    """Time derivative of the extended state (its `t` field carries dt/dt = 1)"""
    out = np.empty(STATE_SIZE)
    regulated_derivative(x.to_vector(), config.coefficients(), out)
    return ExtendedState.from_vector(out, t=1.0)


def regulated_vector_field(config: RegulationConfig):
    """Array form of `regulated_rhs`, usable with `rk4_step`"""
    coeffs = config.coefficients()

    def rhs(vector: np.ndarray) -> np.ndarray:
        out = np.empty(STATE_SIZE)
        regulated_derivative(np.ascontiguousarray(vector, dtype=float), coeffs, out)
        return out

    return rhs


@dataclasses.dataclass(frozen=True)
class Trace:
    times: np.ndarray
    states: np.ndarray
    metadata: dict[str, str] = dataclasses.field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_FIELDS.index(name)]

    @property
    def s(self) -> np.ndarray:
        return self.column("s")

    @property
    def sigma(self) -> np.ndarray:
        return self.column("sigma")

    @property
    def w_ee(self) -> np.ndarray:
        return self.column("w_ee")

    @property
    def w_ie(self) -> np.ndarray:
        return self.column("w_ie")

    @property
    def h_e(self) -> np.ndarray:
        return self.column("h_e")

    def cov_ee(self) -> np.ndarray:
        return (self.s - self.column("s_bar")) ** 2

    def cov_ie(self) -> np.ndarray:
        return (self.s - self.column("s_bar")) * (self.sigma - self.column("sigma_bar"))

    def snapshot(self, index: int) -> ExtendedState:
        return ExtendedState.from_vector(self.states[index], t=float(self.times[index]))

    @property
    def final(self) -> ExtendedState:
        return self.snapshot(-1)

    def snapshots(self) -> Iterator[ExtendedState]:
        for index in range(len(self)):
            yield self.snapshot(index)

    def tail(self, t_from: float) -> "Trace":
        mask = self.times >= t_from
        return Trace(self.times[mask], self.states[mask], self.metadata)


def integrate(
    config: RegulationConfig,
    init: ExtendedState,
    dt: float = DEFAULT_DT,
    t_end: float = 100.0,
    sample_every: float | None = None,
) -> Trace:
    """
    RK4 integration of the regulated system from `init` over `t_end` time units.

    w_ee and w_ie are clamped at 0 after each step (clamp events are logged); activity is not
    clamped, leaving the box only signals integrator error and is counted in the metadata.
    On a non-finite state, NonFiniteError carries the partial trace.
    """
    if not dt > 0:
        raise DomainError(f"Step must be positive, got {dt}")
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end}")

    sample_every = sample_every or dt
    stride = max(1, int(round(sample_every / dt)))
    n_steps = steps_for(t_end, dt)
    samples = np.empty((n_steps // stride + 1, STATE_SIZE))
    box_low, box_high = config.box

    payload = {
        "config": config.as_dict(),
        "init": dataclasses.asdict(init),
        "dt": dt,
        "t_end": t_end,
        "stride": stride,
    }
    metadata = {
        "run_id": content_hash(payload),
        "dt": repr(dt),
        "t_end": repr(t_end),
        "sample_every": repr(stride * dt),
        "variant": str(config.variant),
        **{f"config.{key}": str(value) for key, value in config.as_dict().items()},
    }
    logger.debug(
        "Integrating %(run_id)s: %(steps)s steps, dt=%(dt)s",
        {"run_id": metadata["run_id"], "steps": n_steps, "dt": dt},
    )

    failed_step, recorded, clamp_events, box_events = _integrate_regulated(
        init.to_vector(),
        config.coefficients(),
        dt,
        n_steps,
        stride,
        samples,
        box_low,
        box_high,
        BOX_TOLERANCE,
    )
    times = init.t + np.arange(recorded) * stride * dt
    metadata.update(
        {
            "clamp_events": str(clamp_events),
            "box_violations": str(box_events),
            "status": "ok" if failed_step < 0 else "non-finite",
        }
    )
    trace = Trace(times=times, states=samples[:recorded].copy(), metadata=metadata)

    if clamp_events:
        logger.warning(
            "Weights clamped at 0 %(count)s times (run %(run_id)s)",
            {"count": clamp_events, "run_id": metadata["run_id"]},
        )
    if box_events:
        logger.warning(
            "Activity left the box %(count)s times (run %(run_id)s), consider a smaller dt",
            {"count": box_events, "run_id": metadata["run_id"]},
        )
    if failed_step >= 0:
        failed_at = init.t + failed_step * dt
        logger.warning("Non-finite state at t=%s, aborting with a partial trace", failed_at)
        raise NonFiniteError(
            f"Regulated integration became non-finite at t={failed_at}",
            partial=trace,
            time=failed_at,
        )

    return trace


def kernel_average(times: np.ndarray, values: np.ndarray, rho: float) -> np.ndarray:
    """
    Exponential-kernel moving average computed by quadrature:
        r_bar(t) = r(t0) e^{-rho (t - t0)} + rho * int_{t0}^{t} r(u) e^{rho (u - t)} du
    i.e. the kernel integral with the signal held at its initial value before t0.

    The trapezoid rule over each sampling interval is a first-order recursive filter, so the
    integral is evaluated with `lfilter`; samples must be uniformly spaced.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return values.copy()

    steps = np.diff(times)
    step = float(steps[0])
    if not np.allclose(steps, step, rtol=1e-9, atol=0.0):
        raise DomainError("kernel_average needs uniformly sampled values")

    decay = math.exp(-rho * step)
    b = [0.5 * rho * step, 0.5 * rho * step * decay]
    a = [1.0, -decay]
    averaged, _ = lfilter(b, a, values, zi=[values[0] * (1.0 - b[0])])
    return averaged


def time_average(trace: Trace, values: np.ndarray, t_from: float) -> float:
    mask = trace.times >= t_from
    if not mask.any():
        raise DomainError(f"Trace ends before t={t_from}")
    return float(np.mean(values[mask]))

