import math

import pytest
from hypothesis import given, settings, strategies as st

from src.dynamics.core import (
    bogdanov_takens_point,
    full_rhs,
    has_complex_origin_eigenvalues,
    hopf_threshold_wee,
    jacobian_at,
    nullcline_curves,
    origin_determinant,
    reduced_rhs,
    s_nullcline_sigma,
    sigma_nullcline_s,
    symmetric_thresholds,
    vector_field,
)
from src.dynamics.models import (
    ActivityPoint,
    FiringThresholds,
    StabilityClass,
    SynapticWeights,
    SystemParams,
    classify_eigenvalues,
)
from src.exceptions import DegenerateError, DomainError

FIG1 = SynapticWeights(w_ee=12, w_ei=10, w_ie=8, w_ii=2)

weights_strategy = st.builds(
    SynapticWeights,
    w_ee=st.floats(0, 20),
    w_ei=st.floats(0, 20),
    w_ie=st.floats(0, 20),
    w_ii=st.floats(0, 20),
)
coordinate = st.floats(-0.45, 0.45)


def test_jacobian_at_origin():
    info = jacobian_at(ActivityPoint(0.0, 0.0), SystemParams.reduced(FIG1))

    assert info.matrix == ((5.0, -5.0), (4.0, -2.0))
    assert info.stability is StabilityClass.UNSTABLE_SPIRAL


@pytest.mark.parametrize(
    "w_ii, temperature, expected_result",
    [(2.0, 1.0, 6.0), (6.0, 1.0, 10.0), (0.0, 0.5, 2.0)],
)
def test_hopf_threshold_wee(w_ii, temperature, expected_result):
    actual_result = hopf_threshold_wee(w_ii, temperature)
    assert actual_result == expected_result


@pytest.mark.parametrize("w_ee, expected_sign", [(5.9, -1), (6.1, 1)])
def test_hopf_threshold__real_part_sign(w_ee, expected_sign):
    info = jacobian_at(ActivityPoint(0.0, 0.0), SystemParams.reduced(FIG1.replace(w_ee=w_ee)))

    assert info.is_complex
    assert math.copysign(1, info.eigenvalues[0].real) == expected_sign


@pytest.mark.parametrize(
    "weights, expected_result",
    [
        (FIG1, FiringThresholds(1.0, 3.0)),
        (SynapticWeights(12, 10, 10, 1), FiringThresholds(1.0, 4.5)),
        (SynapticWeights(0, 0, 0, 0), FiringThresholds(0.0, 0.0)),
    ],
)
def test_symmetric_thresholds(weights, expected_result):
    actual_result = symmetric_thresholds(weights)
    assert actual_result == expected_result


def test_bogdanov_takens_point():
    w_ee, w_ie = bogdanov_takens_point(w_ei=10, w_ii=2, temperature=1)

    assert (w_ee, w_ie) == pytest.approx((6.0, 1.6))
    # the pitchfork line passes through the same point
    weights = SynapticWeights(w_ee=w_ee, w_ei=10, w_ie=w_ie, w_ii=2)
    assert origin_determinant(weights, beta=1.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "weights, expected_result",
    [(FIG1, True), (SynapticWeights(12, 10, 1, 2), False), (SynapticWeights(3, 1, 1, 3), False)],
)
def test_has_complex_origin_eigenvalues(weights, expected_result):
    actual_result = has_complex_origin_eigenvalues(weights)
    assert actual_result == expected_result


@pytest.mark.parametrize(
    "eigenvalues, expected_result",
    [
        ((-1 + 0j, -2 + 0j), StabilityClass.STABLE_NODE),
        ((1 + 0j, -1 + 0j), StabilityClass.SADDLE),
        ((-1 + 2j, -1 - 2j), StabilityClass.STABLE_SPIRAL),
        ((1 + 1j, 1 - 1j), StabilityClass.UNSTABLE_SPIRAL),
        ((2 + 0j, 1 + 0j), StabilityClass.UNSTABLE_NODE),
        ((1e-12 + 1j, 1e-12 - 1j), StabilityClass.MARGINAL),
        ((0j, -1 + 0j), StabilityClass.MARGINAL),
    ],
)
def test_classify_eigenvalues(eigenvalues, expected_result):
    actual_result = classify_eigenvalues(eigenvalues)
    assert actual_result == expected_result


@pytest.mark.parametrize(
    "build",
    [
        lambda: SynapticWeights(-1, 10, 8, 2),
        lambda: SynapticWeights(float("nan"), 10, 8, 2),
        lambda: SystemParams(weights=FIG1, variant="full"),
        lambda: SystemParams(weights=FIG1, thresholds=FiringThresholds(1, 3)),
        lambda: SystemParams.reduced(FIG1, beta=-1.0),
        lambda: full_rhs(ActivityPoint(0.1, 0.1), SystemParams.reduced(FIG1)),
        lambda: s_nullcline_sigma(0.5, FIG1, 1.0),
        lambda: sigma_nullcline_s(-0.5, FIG1, 1.0),
    ],
)
def test_domain_errors(build):
    with pytest.raises(DomainError):
        build()


@pytest.mark.parametrize(
    "build",
    [
        lambda: s_nullcline_sigma(0.1, FIG1.replace(w_ei=0), 1.0),
        lambda: sigma_nullcline_s(0.1, FIG1.replace(w_ie=0), 1.0),
        lambda: SystemParams.reduced(FIG1, beta=0.0).temperature,
        lambda: nullcline_curves(SystemParams.reduced(FIG1.replace(w_ei=0))),
        lambda: bogdanov_takens_point(0.0, 2.0, 1.0),
    ],
)
def test_degenerate_errors(build):
    with pytest.raises(DegenerateError):
        build()


def test_zero_beta__relaxes_to_rest():
    params = SystemParams.full(FIG1, FiringThresholds(1, 3), beta=0.0)

    assert full_rhs(ActivityPoint(0.9, 0.2), params) == pytest.approx((-0.4, 0.3))


@given(weights_strategy, coordinate, coordinate)
def test_reduced_rhs__odd_symmetry(weights, s, sigma):
    point = ActivityPoint(s, sigma)

    forward = reduced_rhs(point, weights)
    mirrored = reduced_rhs(-point, weights)

    assert mirrored == pytest.approx(-forward, abs=1e-15)


@given(weights_strategy, coordinate, coordinate, st.floats(0.1, 5))
def test_full_rhs__matches_reduced_after_shift(weights, s, sigma, beta):
    params = SystemParams.full(weights, symmetric_thresholds(weights), beta)

    full = full_rhs(ActivityPoint(s, sigma).shifted(0.5), params)
    reduced = reduced_rhs(ActivityPoint(s, sigma), weights, beta)

    assert full == pytest.approx(reduced, abs=1e-12)


@settings(max_examples=60)
@given(weights_strategy, coordinate, coordinate, st.booleans())
def test_jacobian_at__finite_differences(weights, s, sigma, full):
    if full:
        params = SystemParams.full(weights, FiringThresholds(1.0, -2.0))
        s, sigma = s + 0.5, sigma + 0.5
    else:
        params = SystemParams.reduced(weights)
    h = 1e-6

    def field(ds: float, dsigma: float) -> tuple[float, float]:
        return vector_field(ActivityPoint(s + ds, sigma + dsigma), params)

    columns = [
        [(a - b) / (2 * h) for a, b in zip(field(h, 0), field(-h, 0))],
        [(a - b) / (2 * h) for a, b in zip(field(0, h), field(0, -h))],
    ]
    numeric = ((columns[0][0], columns[1][0]), (columns[0][1], columns[1][1]))
    analytic = jacobian_at(ActivityPoint(s, sigma), params).matrix

    for numeric_row, analytic_row in zip(numeric, analytic):
        assert numeric_row == pytest.approx(analytic_row, abs=1e-6)


@given(st.floats(-0.45, 0.45))
def test_nullclines__zero_field(s):
    params = SystemParams.reduced(FIG1)

    on_s_nullcline = ActivityPoint(s, s_nullcline_sigma(s, FIG1, params.temperature))
    on_sigma_nullcline = ActivityPoint(sigma_nullcline_s(s, FIG1, params.temperature), s)

    assert reduced_rhs(on_s_nullcline, FIG1).s == pytest.approx(0.0, abs=1e-12)
    assert reduced_rhs(on_sigma_nullcline, FIG1).sigma == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("variant", ["reduced", "full"])
def test_nullcline_curves__inside_box(variant):
    params = (
        SystemParams.reduced(FIG1)
        if variant == "reduced"
        else SystemParams.full(FIG1, symmetric_thresholds(FIG1))
    )
    low, high = params.box

    for values in nullcline_curves(params):
        assert len(values)
        assert values.min() >= low and values.max() <= high
