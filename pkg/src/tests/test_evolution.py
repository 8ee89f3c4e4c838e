import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from src.config.app import SystemVariant
from src.dynamics.core import reduced_rhs
from src.dynamics.models import ActivityPoint, SynapticWeights, SystemParams
from src.evolution.integrator import planar_trajectories, rk4_step
from src.evolution.regulation import (
    ExtendedState,
    RegulationConfig,
    cov_ee,
    cov_ie,
    integrate,
    kernel_average,
    moving_average_rhs,
    regulated_rhs,
    regulated_vector_field,
)
from src.exceptions import DomainError, NonFiniteError

FIG1 = SynapticWeights(w_ee=12, w_ei=10, w_ie=8, w_ii=2)


def decay(x: np.ndarray) -> np.ndarray:
    return -x


def integrate_decay(dt: float) -> float:
    state = np.array([1.0])
    for _ in range(int(round(1.0 / dt))):
        state = rk4_step(decay, state, dt)
    return float(state[0])


def test_rk4_step__global_error():
    assert abs(integrate_decay(0.1) - math.exp(-1.0)) < 1e-6


def test_rk4_step__fourth_order():
    coarse = abs(integrate_decay(0.1) - math.exp(-1.0))
    fine = abs(integrate_decay(0.05) - math.exp(-1.0))

    assert 12 < coarse / fine < 20


def test_rk4_step__one_step_order_on_reduced_field():
    def rhs(x: np.ndarray) -> np.ndarray:
        return np.array(reduced_rhs(ActivityPoint(*x), FIG1))

    start = np.array([0.1, 0.05])

    def error(dt: float) -> float:
        reference = start
        for _ in range(10):
            reference = rk4_step(rhs, reference, dt / 10)
        return float(np.linalg.norm(rk4_step(rhs, start, dt) - reference))

    assert 24 < error(0.02) / error(0.01) < 40


def test_rk4_step__zero_field():
    state = np.array([0.3, -0.2])
    assert np.array_equal(rk4_step(np.zeros_like, state, 0.1), state)


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_rk4_step__bad_step(dt):
    with pytest.raises(DomainError):
        rk4_step(decay, np.array([1.0]), dt)


def test_rk4_step__non_finite():
    with pytest.raises(NonFiniteError):
        rk4_step(lambda x: x / 0.0, np.array([1.0]), 0.1)


@pytest.mark.parametrize(
    "r, r_bar, rho, expected_result",
    [(1.0, 0.0, 0.1, 0.1), (0.3, 0.3, 0.5, 0.0), (-0.2, 0.2, 2.0, -0.8)],
)
def test_moving_average_rhs(r, r_bar, rho, expected_result):
    actual_result = moving_average_rhs(r, r_bar, rho)
    assert actual_result == pytest.approx(expected_result)


@pytest.mark.parametrize(
    "state, expected_result",
    [
        (ExtendedState(0.3, 0.0, 0.1, 0.0, 12, 8), (0.04, 0.0)),
        (ExtendedState(0.3, -0.1, 0.1, 0.0, 12, 8), (0.04, -0.02)),
        (ExtendedState.initial(0.3, 0.2, 12, 8), (0.0, 0.0)),
    ],
)
def test_covariances(state, expected_result):
    actual_result = (cov_ee(state), cov_ie(state))
    assert actual_result == pytest.approx(expected_result)


def test_kernel_average__constant_input():
    times = np.arange(0, 10.0 + 1e-9, 0.01)
    values = np.ones_like(times)
    values[0] = 0.0

    averaged = kernel_average(times, values, rho=0.1)

    # the trapezoid at the first interval sees the jump, later samples follow 1 - exp(-rho t)
    assert averaged[-1] == pytest.approx(1 - math.exp(-1.0), abs=1e-3)


def test_kernel_average__sinusoid_against_quadrature():
    rho = 0.1
    times = np.arange(0, 60.0 + 1e-9, 0.01)
    values = np.sin(times)
    checkpoints = [1000, 2500, 4000, 6000]

    def kernel_integral(t: float) -> float:
        integral, _ = quad(lambda u: math.sin(u) * math.exp(rho * (u - t)), 0.0, t, limit=200)
        return rho * integral

    averaged = kernel_average(times, values, rho)
    errors = [averaged[k] - kernel_integral(times[k]) for k in checkpoints]

    assert math.sqrt(np.mean(np.square(errors))) < 1e-4


def test_kernel_average__needs_uniform_samples():
    with pytest.raises(DomainError):
        kernel_average(np.array([0.0, 0.1, 0.3]), np.zeros(3), rho=0.1)


@pytest.mark.parametrize(
    "changes",
    [
        {"eps_ie": 0.01},
        {"rho": 0.0},
        {"eps_ee": -0.01},
        {"theta_ee": 0.0},
        {"theta_he": 1.0},
        {"regulate_h_e": True},
    ],
)
def test_regulation_config__domain(changes):
    with pytest.raises(DomainError):
        RegulationConfig(w_ei=10, w_ii=2, **changes)


def test_regulated_rhs__rules_off():
    state = ExtendedState(0.2, -0.1, 0.1, 0.05, 12, 8)

    derivative = regulated_rhs(state, RegulationConfig(w_ei=10, w_ii=2))

    assert (derivative.s, derivative.sigma) == pytest.approx(
        tuple(reduced_rhs(ActivityPoint(0.2, -0.1), FIG1))
    )
    assert (derivative.w_ee, derivative.w_ie, derivative.h_e, derivative.h_i) == (0, 0, 0, 0)
    assert (derivative.s_bar, derivative.sigma_bar) == pytest.approx((0.01, -0.015))


def test_regulated_rhs__resting_state():
    config = RegulationConfig(
        w_ei=10, w_ii=2, eps_ee=0.01, eps_ie=-0.02, regulate_w_ee=True, regulate_w_ie=True
    )
    state = ExtendedState.initial(0.0, 0.0, w_ee=12, w_ie=8)

    derivative = regulated_rhs(state, config)

    assert derivative.w_ee == pytest.approx(-0.01 * 0.01)
    assert derivative.w_ie == pytest.approx(0.02 * 0.01)


def test_regulated_rhs__threshold_rules_use_averages():
    config = RegulationConfig(
        w_ei=10,
        w_ii=2,
        variant="full",
        eps_he=0.1,
        eps_hi=0.2,
        regulate_h_e=True,
        regulate_h_i=True,
    )
    state = ExtendedState(0.9, 0.1, 0.7, 0.4, 12, 8, h_e=1, h_i=3)

    derivative = regulated_rhs(state, config)

    assert (derivative.h_e, derivative.h_i) == pytest.approx((0.1 * 0.2, 0.2 * -0.1))


def test_integrate__clamps_weights():
    config = RegulationConfig(w_ei=10, w_ii=2, eps_ee=1.0, theta_ee=10.0, regulate_w_ee=True)
    init = ExtendedState.initial(0.1, 0.05, w_ee=1.0, w_ie=8.0)

    trace = integrate(config, init, dt=0.01, t_end=1.0)

    assert trace.final.w_ee == 0.0
    assert int(trace.metadata["clamp_events"]) > 0
    assert trace.w_ee.min() >= 0.0


def test_integrate__fixed_parameters_stay_fixed():
    config = RegulationConfig(w_ei=10, w_ii=2)
    init = ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=8.0)

    trace = integrate(config, init, dt=0.01, t_end=20.0, sample_every=0.1)

    assert len(trace) == 201
    assert trace.times[-1] == pytest.approx(20.0)
    assert np.all(trace.w_ee == 12.0) and np.all(trace.w_ie == 8.0)
    assert np.abs(trace.states[:, :2]).max() <= 0.5
    assert trace.metadata["box_violations"] == "0"


def test_integrate__matches_planar_batch():
    init = ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=8.0)
    trace = integrate(RegulationConfig(w_ei=10, w_ii=2), init, dt=0.01, t_end=5.0)

    samples = planar_trajectories(
        SystemParams.reduced(FIG1), np.array([[0.1, 0.05]]), 0.01, 0.0, 5.0, 0.01
    )

    assert np.allclose(samples[0, :, 0], trace.s, atol=1e-12)
    assert np.allclose(samples[0, :, 1], trace.sigma, atol=1e-12)


def test_integrate__deterministic_run_id():
    config = RegulationConfig(w_ei=10, w_ii=2, regulate_w_ee=True)
    init = ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=8.0)

    first = integrate(config, init, dt=0.01, t_end=1.0)
    second = integrate(config, init, dt=0.01, t_end=1.0)
    other = integrate(config, init, dt=0.02, t_end=1.0)

    assert first.metadata["run_id"] == second.metadata["run_id"] != other.metadata["run_id"]
    assert np.array_equal(first.states, second.states)


def test_integrate__non_finite_keeps_partial_trace():
    init = ExtendedState.initial(float("nan"), 0.0, w_ee=12.0, w_ie=8.0)

    with pytest.raises(NonFiniteError) as exc_info:
        integrate(RegulationConfig(w_ei=10, w_ii=2), init, dt=0.01, t_end=1.0)

    assert len(exc_info.value.partial) == 1
    assert exc_info.value.time == pytest.approx(0.01)


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45), st.floats(0, 20), st.floats(0, 20))
def test_regulated_vector_field__matches_rhs(s, sigma, w_ee, w_ie):
    config = RegulationConfig(w_ei=10, w_ii=2, regulate_w_ee=True, regulate_w_ie=True)
    state = ExtendedState(s, sigma, 0.0, 0.1, w_ee, w_ie)

    from_vector = regulated_vector_field(config)(state.to_vector())
    from_state = regulated_rhs(state, config).to_vector()

    assert np.array_equal(from_vector, from_state)


@pytest.mark.slow
def test_cov_ie__positive_on_limit_cycle():
    init = ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=8.0)
    trace = integrate(RegulationConfig(w_ei=10, w_ii=2), init, t_end=1000.0, sample_every=0.05)

    last = trace.tail(500.0)

    assert float(np.mean(last.cov_ie())) > 0
    assert float(np.mean(last.cov_ee())) > 1e-4


@pytest.mark.slow
@pytest.mark.parametrize("w_ee, expected_direction", [(12.0, 1), (18.0, -1)])
def test_integrate__w_ee_approaches_saddlenode(w_ee, expected_direction):
    config = RegulationConfig(w_ei=10, w_ii=6, rho=0.1, regulate_w_ee=True)
    init = ExtendedState.initial(0.1, 0.05, w_ee=w_ee, w_ie=12.0)

    trace = integrate(config, init, t_end=4e4, sample_every=1.0)

    assert math.copysign(1, trace.final.w_ee - w_ee) == expected_direction


@pytest.mark.parametrize("w_ee", [3.0, 12.0, 15.0])
def test_planar_trajectories__odd_symmetry(w_ee):
    params = SystemParams.reduced(FIG1.replace(w_ee=w_ee))
    starts = np.array([[0.3, 0.2], [0.05, -0.02], [-0.4, 0.1]])

    forward = planar_trajectories(params, starts, 0.01, 0.0, 5.0, 0.05)
    mirrored = planar_trajectories(params, -starts, 0.01, 0.0, 5.0, 0.05)

    assert np.allclose(mirrored, -forward, rtol=0.0, atol=1e-9)


@pytest.mark.parametrize("activity, average", [("s", "s_bar"), ("sigma", "sigma_bar")])
def test_integrate__running_average_is_the_kernel_integral(activity, average):
    config = RegulationConfig(w_ei=10, w_ii=2, rho=0.1, regulate_w_ee=True)
    init = ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=8.0)

    trace = integrate(config, init, dt=0.01, t_end=200.0)

    expected_result = kernel_average(trace.times, trace.column(activity), config.rho)
    actual_result = trace.column(average)
    assert np.allclose(actual_result, expected_result, rtol=0.0, atol=1e-5)


STANDARD_FULL = RegulationConfig(
    w_ei=10,
    w_ii=6,
    variant=SystemVariant.FULL,
    rho=0.05,
    eps_ie=-0.005,
    eps_he=0.005,
    eps_hi=0.002,
    regulate_w_ee=True,
    regulate_w_ie=True,
    regulate_h_e=True,
    regulate_h_i=True,
)


@pytest.mark.parametrize("dt", [0.01, 0.05])
@pytest.mark.parametrize(
    "config, init",
    [
        (RegulationConfig(w_ei=10, w_ii=2), ExtendedState.initial(0.45, 0.4, w_ee=12.0, w_ie=8.0)),
        (RegulationConfig(w_ei=10, w_ii=2), ExtendedState.initial(0.45, 0.4, w_ee=15.0, w_ie=8.0)),
        (
            RegulationConfig(w_ei=10, w_ii=6, rho=0.1, regulate_w_ee=True, regulate_w_ie=True),
            ExtendedState.initial(0.1, 0.05, w_ee=12.0, w_ie=16.0),
        ),
        (STANDARD_FULL, ExtendedState.initial(0.6, 0.4, w_ee=14.0, w_ie=14.0, h_e=2.0, h_i=4.0)),
    ],
    ids=["cycle", "bistable", "joint", "standard"],
)
def test_integrate__activity_stays_in_the_box(config, init, dt):
    trace = integrate(config, init, dt=dt, t_end=500.0)

    low, high = config.box
    activity = trace.states[:, :2]
    assert trace.metadata["box_violations"] == "0"
    assert activity.min() >= low and activity.max() <= high
