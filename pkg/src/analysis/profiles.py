import dataclasses
import logging

import numpy as np

from src.config.app import DEFAULT_DT
from src.evolution.regulation import ExtendedState, RegulationConfig, integrate

logger = logging.getLogger(__name__)

T_TRANSIENT = 1500.0
T_MEASURE = 500.0
INITIAL_ACTIVITY = (0.1, 0.05)


@dataclasses.dataclass(frozen=True)
class ProfileLine:
    """A line of constant w_ie in the (w_ee, w_ie) plane of the reduced system"""

    w_ie: float
    w_ee: tuple[float, ...]
    w_ei: float = 10.0
    w_ii: float = 2.0
    rho: float = 0.1


@dataclasses.dataclass(frozen=True)
class CovarianceProfile:
    line: ProfileLine
    w_ee: np.ndarray
    c_ee: np.ndarray
    c_bar_ee: np.ndarray
    c_bar_ie: np.ndarray

    def rows(self) -> list[tuple[float, ...]]:
        return [
            (self.line.w_ie, *values)
            for values in zip(
                self.w_ee.tolist(),
                self.c_ee.tolist(),
                self.c_bar_ee.tolist(),
                self.c_bar_ie.tolist(),
            )
        ]

    def at(self, w_ee: float) -> float:
        return float(self.c_ee[int(np.argmin(np.abs(self.w_ee - w_ee)))])


def covariance_profile(
    line: ProfileLine,
    t_transient: float = T_TRANSIENT,
    t_measure: float = T_MEASURE,
    dt: float = DEFAULT_DT,
) -> CovarianceProfile:
    """
    For each w_ee on the line: free (unregulated) run of the reduced system, then the
    time-averaged instantaneous covariance c_ee over the measuring window, together with the
    window means of the display averages c_bar_ee and c_bar_ie.
    """
    config = RegulationConfig(w_ei=line.w_ei, w_ii=line.w_ii, rho=line.rho)
    c_ee, c_bar_ee, c_bar_ie = [], [], []
    for w_ee in line.w_ee:
        init = ExtendedState.initial(*INITIAL_ACTIVITY, w_ee=w_ee, w_ie=line.w_ie)
        trace = integrate(
            config, init, dt=dt, t_end=t_transient + t_measure, sample_every=10 * dt
        ).tail(t_transient)
        c_ee.append(float(np.mean(trace.cov_ee())))
        c_bar_ee.append(float(np.mean(trace.column("c_bar_ee"))))
        c_bar_ie.append(float(np.mean(trace.column("c_bar_ie"))))
        logger.debug("Profile w_ie=%s w_ee=%s: c_ee=%.3g", line.w_ie, w_ee, c_ee[-1])

    return CovarianceProfile(
        line=line,
        w_ee=np.asarray(line.w_ee, dtype=float),
        c_ee=np.asarray(c_ee),
        c_bar_ee=np.asarray(c_bar_ee),
        c_bar_ie=np.asarray(c_bar_ie),
    )
