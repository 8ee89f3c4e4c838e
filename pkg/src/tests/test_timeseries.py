import numpy as np
import pytest

from src.analysis.timeseries import (
    Phase,
    classify_phases,
    count_phase_transitions,
    estimate_period,
    peak_lag,
    upward_crossings,
)
from src.exceptions import DomainError

TIMES = np.arange(0.0, 100.0, 0.01)


@pytest.mark.parametrize("period", [2.5, 5.0, 12.0])
def test_estimate_period__sinusoid(period):
    estimate = estimate_period(TIMES, np.sin(2 * np.pi * TIMES / period))

    assert estimate.period == pytest.approx(period, abs=1e-3)
    assert estimate.periodic
    assert estimate.variation < 1e-3


@pytest.mark.parametrize(
    "values",
    [np.full(len(TIMES), 0.3), np.exp(-TIMES), np.zeros(1)],
)
def test_estimate_period__no_oscillation(values):
    times = TIMES[: len(values)]

    estimate = estimate_period(times, values)

    assert estimate.period is None
    assert not estimate.periodic


def test_estimate_period__irregular_intervals():
    # alternating short and long cycles
    t0 = 0.0
    times = np.arange(0.0, 120.0, 0.01)
    values = np.empty_like(times)
    for length in [4.0, 8.0] * 10:
        mask = (times >= t0) & (times < t0 + length)
        values[mask] = np.sin(2 * np.pi * (times[mask] - t0) / length)
        t0 += length

    estimate = estimate_period(times, values)

    assert estimate.variation > 0.1
    assert not estimate.periodic


def test_upward_crossings__ignore_noise_at_level():
    times = np.arange(0.0, 30.0, 0.1)
    values = np.where(np.arange(len(times)) % 2 == 0, 0.001, -0.001)
    values[50:] = np.sin(times[50:] - times[50]) * 10

    crossings = upward_crossings(times, values, level=0.0)

    # the small jitter never dips below the arming level
    assert len(crossings) == 3
    assert np.all(crossings > times[50])


@pytest.mark.parametrize("shift", [0.3, 0.5, -0.2])
def test_peak_lag(shift):
    t = np.arange(0.0, 60.0, 0.01)

    actual_result = peak_lag(np.sin(t), np.sin(t - shift), 0.01, max_lag=1.0)

    assert actual_result == pytest.approx(shift, abs=0.011)


def test_peak_lag__length_mismatch():
    with pytest.raises(DomainError):
        peak_lag(np.zeros(10), np.zeros(11), 0.1, max_lag=1.0)


def test_classify_phases():
    times = np.arange(0.0, 120.0, 0.01)
    values = np.select(
        [times < 40, times < 80],
        [np.full_like(times, 0.9), np.full_like(times, 0.1)],
        0.5 + 0.3 * np.sin(2 * np.pi * times),
    )

    episodes = classify_phases(times, values, window=20.0)

    assert episodes.phases == (
        Phase.HIGH,
        Phase.HIGH,
        Phase.LOW,
        Phase.LOW,
        Phase.OSCILLATORY,
        Phase.OSCILLATORY,
    )
    assert episodes.transition_count == 2
    assert list(episodes.transitions) == [40.0, 80.0]
    assert not episodes.irregular


def test_classify_phases__irregular():
    times = np.arange(0.0, 200.0, 0.1)
    high = (times < 20) | ((times >= 40) & (times < 50)) | ((times >= 80) & (times < 90))
    values = np.where(high, 0.9, 0.1)

    episodes = classify_phases(times, values, window=10.0)

    assert episodes.transition_count == 5
    assert episodes.irregular
    assert count_phase_transitions(times, values, window=10.0) == 5


def test_classify_phases__bad_window():
    with pytest.raises(DomainError):
        classify_phases(TIMES, np.zeros(len(TIMES)), window=0.0)
