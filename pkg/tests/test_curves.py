import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjm_swaption.curves import (
    CurveError,
    SwaptionSpec,
    annuity,
    atm_strike_dual,
    atm_strike_single,
    build_discount_curve,
    build_spread_curve,
    discount,
    flat_spread,
    swap_rate,
    swap_value,
    unit_spread,
)

A_DEFAULT = 365.25 / 360


def test_zero_rate_curve_is_flat_one(zero_curve):
    assert discount(zero_curve, 0.0) == 1.0
    assert discount(zero_curve, 17.3) == 1.0
    assert discount(zero_curve, 75.0) == 1.0


def test_log_linear_midpoint():
    curve = build_discount_curve([(1, 0.98), (2, 0.95)], mode="df")
    assert discount(curve, 1.5) == pytest.approx(math.exp((math.log(0.98) + math.log(0.95)) / 2), rel=1e-15)


def test_flat_curve_matches_exponential():
    pillars = [(t, 0.02) for t in np.arange(0.5, 40.25, 0.5)]
    curve = build_discount_curve(pillars, mode="rate")
    assert abs(discount(curve, 7.25) - math.exp(-0.02 * 7.25)) < 1e-12
    assert abs(discount(curve, 5.0) - math.exp(-0.1)) < 1e-15


def test_flat_forward_extrapolation():
    curve = build_discount_curve([(1, 0.99), (2, 0.97)], mode="df")
    fwd = math.log(0.99 / 0.97)
    assert discount(curve, 5.0) == pytest.approx(0.97 * math.exp(-3 * fwd), rel=1e-14)


def test_vector_query(flat2):
    ts = np.array([0.0, 1.0, 2.5])
    np.testing.assert_allclose(discount(flat2, ts), np.exp(-0.02 * ts), rtol=1e-14)


@pytest.mark.parametrize(
    "pillars, mode",
    [
        ([(2, 0.9), (1, 0.95)], "df"),
        ([(1, 0.9), (1, 0.95)], "df"),
        ([(1, -0.9)], "df"),
        ([(1, 0.0)], "df"),
        ([(1, float("nan"))], "rate"),
        ([(1, 0.01)], "zero"),
        ([], "df"),
    ],
)
def test_bad_pillars(pillars, mode):
    with pytest.raises(CurveError):
        build_discount_curve(pillars, mode=mode)


def test_negative_maturity_rejected(flat2):
    with pytest.raises(CurveError):
        discount(flat2, -0.1)


def test_spec_validation():
    spec = SwaptionSpec(1, 1, 2)
    np.testing.assert_allclose(spec.payment_times, [1.5, 2.0])
    assert spec.n_payments == 2 and spec.end == 2.0
    assert spec.day_count_factor == A_DEFAULT
    with pytest.raises(ValueError):
        SwaptionSpec(1, 1.25, 2)
    with pytest.raises(ValueError):
        SwaptionSpec(0, 1)
    with pytest.raises(ValueError):
        SwaptionSpec(1, 1, 0)


def test_annuity_zero_curve(zero_curve):
    assert annuity(zero_curve, SwaptionSpec(1, 1, 2)) == 1.0
    assert annuity(zero_curve, SwaptionSpec(5, 10, 2)) == 10.0


def test_annuity_flat(flat2):
    assert annuity(flat2, SwaptionSpec(1, 1, 2)) == pytest.approx(0.5 * (math.exp(-0.03) + math.exp(-0.04)), rel=1e-14)


def test_swap_rate(flat2, zero_curve):
    assert swap_rate(zero_curve, SwaptionSpec(3, 7, 2)) == 0.0
    expected = (math.exp(-0.02) - math.exp(-0.04)) / (0.5 * (math.exp(-0.03) + math.exp(-0.04)))
    assert swap_rate(flat2, SwaptionSpec(1, 1, 2)) == pytest.approx(expected, rel=1e-13)
    curve = build_discount_curve([(1, 0.99), (1.5, 0.985), (2, 0.98)], mode="df")
    assert swap_rate(curve, SwaptionSpec(1, 1, 2)) == pytest.approx(0.01 / (0.5 * 1.965), rel=1e-13)


def test_atm_strike_dual_reduces_to_swap_rate(flat2):
    spec = SwaptionSpec(2, 5, 2, day_count_factor=1.0)
    assert abs(atm_strike_dual(flat2, unit_spread(), spec) - swap_rate(flat2, spec)) < 1e-14


def test_atm_strike_dual_zero_curve(zero_curve):
    assert abs(atm_strike_dual(zero_curve, unit_spread(), SwaptionSpec(1, 2, 2))) < 1e-15


def test_atm_strike_dual_brute_force(flat2):
    spec = SwaptionSpec(1, 2, 2)
    S = lambda t: math.exp(-0.001 * t)
    B = lambda t: math.exp(-0.02 * t)
    times = [1.0, 1.5, 2.0, 2.5, 3.0]
    num = sum(B(times[n - 1]) * S(times[n - 1]) / S(times[n]) - B(times[n]) for n in range(1, 5))
    den = sum(B(times[n]) for n in range(1, 5))
    expected = A_DEFAULT * 2 * num / den
    assert atm_strike_dual(flat2, flat_spread(0.001), spec) == pytest.approx(expected, rel=1e-12)


def test_spread_curve():
    s = build_spread_curve([(1.0, 0.999), (10.0, 0.99)])
    assert s(0.0) == 1.0
    assert s(5.5) == pytest.approx(math.exp(math.log(0.999) + (math.log(0.99) - math.log(0.999)) * 0.5))
    with pytest.raises(CurveError):
        build_spread_curve([(1.0, 0.0)])
    with pytest.raises(CurveError):
        build_spread_curve([(0.0, 0.9)])


curves = st.lists(
    st.tuples(st.floats(0.25, 40.0), st.floats(-0.02, 0.08)), min_size=1, max_size=8, unique_by=lambda p: round(p[0], 3)
).map(lambda ps: build_discount_curve(sorted((round(t, 3), r) for t, r in ps), mode="rate"))
specs = st.builds(
    SwaptionSpec,
    expiry=st.sampled_from([0.5, 1.0, 2.0, 5.0, 10.0, 20.0]),
    tenor=st.sampled_from([1.0, 2.0, 5.0, 10.0, 30.0]),
    frequency=st.sampled_from([1, 2, 4]),
    day_count_factor=st.just(1.0),
)


@settings(max_examples=200, deadline=None)
@given(curves, specs)
def test_telescoping_and_parity(curve, spec):
    r = swap_rate(curve, spec)
    assert abs(atm_strike_dual(curve, unit_spread(), spec) - r) < 1e-14
    assert abs(swap_value(curve, spec, r)) < 1e-14


@settings(max_examples=100, deadline=None)
@given(curves, specs, st.floats(0.9, 1.1))
def test_single_atm_strike_zeroes_swap(curve, spec, A):
    spec = SwaptionSpec(spec.expiry, spec.tenor, spec.frequency, day_count_factor=A)
    assert abs(swap_value(curve, spec, atm_strike_single(curve, spec))) < 1e-14


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0.25, 40.0), st.floats(0.0, 0.08)), min_size=1, max_size=8, unique_by=lambda p: round(p[0], 3)),
    st.lists(st.floats(0.0, 60.0), min_size=2, max_size=20),
)
def test_monotone_for_nonnegative_rates(pillars, ts):
    # nonnegative zero rates do not by themselves guarantee nonnegative forwards
    pillars = sorted((round(t, 3), r) for t, r in pillars)
    fwd_ok = all(
        r2 * t2 >= r1 * t1 for (t1, r1), (t2, r2) in zip([(0.0, 0.0)] + pillars, pillars)
    )
    curve = build_discount_curve(pillars, mode="rate")
    ts = sorted(ts)
    dfs = discount(curve, np.array(ts))
    if fwd_ok:
        assert np.all(np.diff(dfs) <= 1e-15)
    assert np.array_equal(dfs, discount(curve, np.array(ts)))
