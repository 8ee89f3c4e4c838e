import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from src.analysis.attractors import detect_attractors
from src.analysis.timeseries import estimate_period, peak_lag, upward_crossings
from src.config.app import Population
from src.dynamics.models import FiringThresholds, SynapticWeights, SystemParams
from src.exceptions import DomainError
from src.glauber.network import (
    BinaryNetworkState,
    GlauberConfig,
    activation_probability,
    glauber_step,
    local_field,
    make_rng,
    simulate,
)

FIG1_PARAMS = SystemParams.full(SynapticWeights(12, 10, 8, 2), FiringThresholds(1, 3))


def fig1_config(**changes) -> GlauberConfig:
    return GlauberConfig(**{"n": 70, "params": FIG1_PARAMS, "t_end": 60.0, **changes})


@pytest.mark.parametrize(
    "fill, population, expected_result",
    [(1, Population.E, 1.0), (1, Population.I, 3.0), (0, Population.E, -1.0)],
)
def test_local_field(fill, population, expected_result):
    n = 10
    state = BinaryNetworkState.from_arrays(np.full(n, fill), np.full(n, fill))

    actual_result = local_field(3, population, state, fig1_config(n=n))

    assert actual_result == pytest.approx(expected_result)


def test_local_field__matches_direct_sum():
    rng = make_rng(5)
    config = fig1_config(n=40)
    state = BinaryNetworkState.initial(config, rng)
    w = FIG1_PARAMS.weights

    expected_result = (
        sum(w.w_ee / 40 * x for x in state.x_e) - sum(w.w_ei / 40 * x for x in state.x_i) - 1.0
    )

    assert local_field(0, "E", state, config) == pytest.approx(expected_result)


def test_local_field__index_out_of_range():
    state = BinaryNetworkState.from_arrays(np.zeros(4), np.zeros(4))
    with pytest.raises(DomainError):
        local_field(4, Population.E, state, fig1_config(n=4))


@pytest.mark.parametrize(
    "field, beta, expected_result",
    [(0.7, 0.0, 0.5), (1e-3, 1e6, 1.0), (-1e-3, 1e6, 0.0), (0.3, 1.0, 0.5 * (1 + math.tanh(0.3)))],
)
def test_activation_probability(field, beta, expected_result):
    actual_result = activation_probability(field, beta)
    assert actual_result == expected_result


def test_glauber_step__flip_frequency():
    # zero weights: the local field is -h_E whatever the state
    params = SystemParams.full(SynapticWeights(0, 0, 0, 0), FiringThresholds(-0.3, 0.0))
    config = GlauberConfig(n=1, params=params)
    rng = make_rng(11)
    state = BinaryNetworkState.from_arrays(np.zeros(1), np.zeros(1))

    activations = []
    for _ in range(100_000):
        glauber_step(state, config, rng)
        population, _, new_value = state.last_update
        if population is Population.E:
            activations.append(new_value)

    probability = activation_probability(0.3, 1.0)
    standard_error = math.sqrt(probability * (1 - probability) / len(activations))
    assert abs(np.mean(activations) - probability) < 3 * standard_error


def test_glauber_step__clock_and_cache():
    config = fig1_config(n=25)
    rng = make_rng(2)
    state = BinaryNetworkState.initial(config, rng)

    for _ in range(500):
        glauber_step(state, config, rng)

    state.verify()
    assert state.t == pytest.approx(500 / 50)
    assert set(np.unique(state.x_e)) <= {0, 1}


def test_simulate__sampling_grid():
    trace = simulate(fig1_config(n=10, t_end=1.0, sample_every=0.05))

    assert len(trace) == 21
    assert trace.times[-1] == pytest.approx(1.0)
    assert np.all(np.diff(trace.times) > 0)
    assert trace.mean_e.min() >= 0 and trace.mean_e.max() <= 1


def test_simulate__deterministic_seed():
    first = simulate(fig1_config(seed=7, t_end=5.0))
    second = simulate(fig1_config(seed=7, t_end=5.0))
    other = simulate(fig1_config(seed=8, t_end=5.0))

    assert np.array_equal(first.mean_e, second.mean_e)
    assert np.array_equal(first.mean_i, second.mean_i)
    assert not np.array_equal(first.mean_e, other.mean_e)


def test_simulate__deterministic_initial_state():
    trace = simulate(fig1_config(n=20, t_end=0.5, initial_e=1.0, initial_i=0.25))

    assert (trace.mean_e[0], trace.mean_i[0]) == (1.0, 0.25)


def test_simulate__zero_beta_fair_coins():
    params = SystemParams.full(SynapticWeights(12, 10, 8, 2), FiringThresholds(1, 3), beta=0.0)
    n, t_end = 50, 400.0
    trace = simulate(GlauberConfig(n=n, params=params, t_end=t_end, sample_every=1.0, seed=3))

    samples = trace.mean_e[20:]
    # samples one time unit apart are correlated over ~1 unit, allow for it
    bound = 3 * math.sqrt(0.25 / (n * len(samples))) * 2
    assert abs(float(np.mean(samples)) - 0.5) < bound


def test_simulate__exchangeable_neurons():
    n, runs = 20, 200
    ordered = np.array([1] * 10 + [0] * 10)
    permuted = make_rng(99).permutation(ordered)

    def final_means(initial: np.ndarray, first_seed: int) -> list[float]:
        finals = []
        for seed in range(first_seed, first_seed + runs):
            config = fig1_config(n=n, t_end=2.0, seed=seed)
            state = BinaryNetworkState.from_arrays(initial, ordered)
            finals.append(float(simulate(config, state).mean_e[-1]))
        return finals

    result = ks_2samp(final_means(ordered, 0), final_means(permuted, 10_000))
    assert result.pvalue > 0.01


@pytest.mark.parametrize(
    "changes",
    [
        {"n": 0},
        {"t_end": 0.0},
        {"sample_every": -1.0},
        {"initial_e": 1.5},
        {"params": SystemParams.reduced(SynapticWeights(12, 10, 8, 2))},
    ],
)
def test_glauber_config__domain(changes):
    with pytest.raises(DomainError):
        fig1_config(**changes)


def test_binary_state__rejects_non_binary():
    with pytest.raises(DomainError):
        BinaryNetworkState.from_arrays(np.array([0, 2]), np.array([0, 1]))


@pytest.mark.slow
def test_simulate__fig1_oscillation():
    trace = simulate(fig1_config(seed=1))

    assert float(np.var(trace.mean_e)) > 0.05
    assert 2 * len(upward_crossings(trace.times, trace.mean_e, 0.5)) >= 10


@pytest.mark.slow
def test_simulate__inhibition_lags_excitation():
    trace = simulate(fig1_config(n=500, t_end=100.0, seed=4))
    mean_field = detect_attractors(SystemParams.reduced(FIG1_PARAMS.weights))

    last = slice(len(trace) // 5, None)
    lag = peak_lag(trace.mean_e[last], trace.mean_i[last], 0.05, max_lag=mean_field.period / 4)

    assert lag > 0


@pytest.mark.slow
def test_simulate__large_network_follows_mean_field_period():
    trace = simulate(fig1_config(n=2000, t_end=100.0, seed=3))
    mean_field = detect_attractors(SystemParams.reduced(FIG1_PARAMS.weights))

    last = slice(len(trace) // 5, None)
    estimate = estimate_period(trace.times[last], trace.mean_e[last])

    assert estimate.period == pytest.approx(mean_field.period, rel=0.2)
