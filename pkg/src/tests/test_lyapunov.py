import pytest

from src.analysis.lyapunov import largest_lyapunov
from src.evolution.regulation import ExtendedState, RegulationConfig
from src.exceptions import DomainError

FREE = RegulationConfig(w_ei=10.0, w_ii=2.0)


def test_largest_lyapunov__running_estimate():
    estimate = largest_lyapunov(FREE, ExtendedState.initial(0.1, 0.05, w_ee=3.0, w_ie=8.0), 10.0)

    assert len(estimate.running) == len(estimate.times) == 10
    assert estimate.times[-1] == pytest.approx(10.0)


def test_largest_lyapunov__resting_state_is_not_chaotic():
    # fixed weights are neutral directions, everything else contracts
    init = ExtendedState.initial(0.1, 0.05, w_ee=3.0, w_ie=8.0)

    estimate = largest_lyapunov(FREE, init, 200.0, dt=0.05, t_transient=100.0)

    assert estimate.exponent == pytest.approx(0.0, abs=0.05)


@pytest.mark.parametrize(
    "changes",
    [{"dt": 0.0}, {"t_end": -1.0}, {"renormalize_every": 0.001}],
)
def test_largest_lyapunov__domain(changes):
    arguments = {"t_end": 10.0, "dt": 0.01, "renormalize_every": 1.0, **changes}
    with pytest.raises(DomainError):
        largest_lyapunov(FREE, ExtendedState.initial(0.1, 0.05, w_ee=3.0, w_ie=8.0), **arguments)
