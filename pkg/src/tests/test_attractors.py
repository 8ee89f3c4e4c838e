import numpy as np
import pytest

from src.analysis.attractors import (
    AttractorKind,
    TerminalBehavior,
    classify_terminal,
    default_init_grid,
    dense_init_grid,
    detect_attractors,
    merge_behaviors,
)
from src.analysis.bifurcations import saddlenode_wee
from src.dynamics.core import hopf_threshold_wee
from src.dynamics.models import ActivityPoint, FiringThresholds, SynapticWeights, SystemParams

FIG1 = SynapticWeights(w_ee=12, w_ei=10, w_ie=8, w_ii=2)


@pytest.mark.parametrize(
    "w_ee, expected_result",
    [
        (3.0, AttractorKind.SINGLE_POINT),
        (5.8, AttractorKind.SINGLE_POINT),
        (6.2, AttractorKind.LIMIT_CYCLE),
        (12.0, AttractorKind.LIMIT_CYCLE),
        (15.0, AttractorKind.TWO_POINTS),
    ],
)
def test_detect_attractors(w_ee, expected_result):
    report = detect_attractors(SystemParams.reduced(FIG1.replace(w_ee=w_ee)))

    actual_result = report.kind
    assert actual_result == expected_result


def test_detect_attractors__cycle_summary():
    report = detect_attractors(SystemParams.reduced(FIG1))

    assert report.period > 0
    assert 0.1 < report.amplitude <= 1.0
    assert report.cycles[0].center.distance(ActivityPoint(0.0, 0.0)) < 0.05


def test_detect_attractors__full_system_center():
    params = SystemParams.full(FIG1.replace(w_ee=3), FiringThresholds(-3.5, 3.0))

    report = detect_attractors(params)

    assert report.kind is AttractorKind.SINGLE_POINT
    assert report.points[0] == pytest.approx((0.5, 0.5), abs=1e-5)


def test_detect_attractors__saddlenode_flip():
    w_sn = saddlenode_wee(10.0, 2.0, 8.0, 1.0)

    before = detect_attractors(SystemParams.reduced(FIG1.replace(w_ee=w_sn - 0.1)))
    after = detect_attractors(SystemParams.reduced(FIG1.replace(w_ee=w_sn + 0.1)))

    assert (before.kind, after.kind) == (AttractorKind.LIMIT_CYCLE, AttractorKind.TWO_POINTS)


def test_default_init_grid__inside_box():
    params = SystemParams.reduced(FIG1)

    grid = default_init_grid(params)

    assert grid.shape == (29, 2)
    assert grid.min() >= -0.5 and grid.max() <= 0.5
    # no start on the symmetric fixed point
    assert np.min(np.hypot(grid[:, 0], grid[:, 1])) > 1e-3


def test_dense_init_grid__seeds_next_to_stable_points():
    params = SystemParams.reduced(FIG1.replace(w_ee=15))

    grid = dense_init_grid(params)

    assert grid.shape == (15 * 15 + 4 + 2, 2)


def test_classify_terminal():
    times = np.arange(0, 50, 0.05)
    cycle = np.column_stack([0.3 * np.sin(times), 0.2 * np.cos(times)])
    resting = np.tile([0.1, -0.2], (len(times), 1))
    drifting = np.column_stack([1e-4 * times, np.zeros_like(times)])

    assert classify_terminal(resting, 0.05).point == (0.1, -0.2)
    assert classify_terminal(cycle, 0.05).cycle.period == pytest.approx(2 * np.pi, rel=1e-3)
    assert classify_terminal(drifting, 0.05) == TerminalBehavior()


@pytest.mark.parametrize(
    "behaviors, expected_result",
    [
        ([TerminalBehavior(point=ActivityPoint(0.1, 0.1))] * 3, AttractorKind.SINGLE_POINT),
        (
            [
                TerminalBehavior(point=ActivityPoint(0.1, 0.1)),
                TerminalBehavior(point=ActivityPoint(-0.1, -0.1)),
                TerminalBehavior(),
            ],
            AttractorKind.TWO_POINTS,
        ),
        ([TerminalBehavior(), TerminalBehavior()], AttractorKind.UNCLASSIFIED),
    ],
)
def test_merge_behaviors(behaviors, expected_result):
    actual_result = merge_behaviors(behaviors).kind
    assert actual_result == expected_result


@pytest.mark.slow
@pytest.mark.parametrize(
    "w_ee, expected_result",
    [
        (8.9, False),
        (9.01, True),
        (9.1, False),
    ],
)
def test_detect_attractors__three_attractor_strip(w_ee, expected_result):
    params = SystemParams.reduced(SynapticWeights(w_ee=w_ee, w_ei=10, w_ie=2.75, w_ii=2))

    report = detect_attractors(params, dense=True, t_transient=2000.0)

    actual_result = report.kind is AttractorKind.THREE_COEXISTING
    assert actual_result == expected_result


@pytest.mark.parametrize("w_ee", [15.0, 18.0])
def test_detect_attractors__two_points_mirror_each_other(w_ee):
    report = detect_attractors(SystemParams.reduced(FIG1.replace(w_ee=w_ee)))

    first, second = report.points
    assert report.kind is AttractorKind.TWO_POINTS
    assert first == pytest.approx((-second.s, -second.sigma), abs=1e-4)


@pytest.mark.slow
def test_detect_attractors__subcritical_hopf_coexistence():
    hopf = hopf_threshold_wee(2.0, 1.0)

    kinds = [
        detect_attractors(
            SystemParams.reduced(FIG1.replace(w_ee=w_ee, w_ie=100.0)),
            dense=True,
            t_transient=2000.0,
        ).kind
        for w_ee in np.linspace(hopf - 1.0, hopf, 11)[:-1]
    ]

    assert AttractorKind.CYCLE_AND_POINT in kinds
