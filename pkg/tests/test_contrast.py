import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from npspectra.contrast import (
    Cone,
    ContrastError,
    Polygon,
    SignDefinite,
    SmoothVMO,
    Verdict,
    a_bound,
    b_bound,
    critical_interval,
    lambda_to_mu,
    mu_to_lambda,
    polygon_interval_from_radius,
    polygon_intervals,
    verdict,
)
from npspectra.spectral import Space, ess_radius_polygon

omegas = st.floats(1e-3, math.pi - 1e-3)
mus = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda m: m not in (0.0, 1.0))


def test_lambda_map_known_values():
    assert mu_to_lambda(-1) == 0.0
    assert mu_to_lambda(3) == 1.0
    assert mu_to_lambda(-3) == 0.25
    with pytest.raises(ContrastError):
        mu_to_lambda(1)
    with pytest.raises(ContrastError):
        lambda_to_mu(0.5)


@given(mus)
def test_lambda_map_inverts(mu):
    assert lambda_to_mu(mu_to_lambda(mu)) == pytest.approx(mu, rel=1e-9, abs=1e-9)


@given(st.floats(-1e3, -1e-9))
def test_negative_contrast_maps_into_half_disk(mu):
    # μ < 0 ⇔ |λ| < 1/2
    assert abs(mu_to_lambda(mu)) < 0.5


@given(st.floats(0, 0.4999))
def test_critical_interval_endpoints_reciprocal(r):
    lo, hi = critical_interval(r)
    assert lo <= -1 <= hi < 0
    assert lo * hi == pytest.approx(1.0, rel=1e-9)


@given(st.floats(0, 0.49), mus)
def test_critical_interval_is_lambda_disk(r, mu):
    lo, hi = critical_interval(r)
    lam = abs(mu_to_lambda(mu))
    assume(abs(lam - r) > 1e-9)
    assert (lo <= mu <= hi) == (lam <= r)


def test_critical_interval_rejects_bad_radius():
    for r in (-0.1, 0.5, 0.7):
        with pytest.raises(ContrastError):
            critical_interval(r)


def test_polygon_intervals_right_angle():
    # [PAPER] ω = π/2: [-(3+2√2), -(3-2√2)] for s = 3/2 and [-3, -1/3] for s = 1
    iv = polygon_intervals(math.pi / 2)
    assert iv["s32"] == pytest.approx((-(3 + 2 * math.sqrt(2)), -(3 - 2 * math.sqrt(2))), abs=1e-12)
    assert iv["s1"] == pytest.approx((-3.0, -1 / 3), abs=1e-12)


@given(omegas)
def test_bounds_ordered(omega):
    a, b = a_bound(omega), b_bound(omega)
    assert 0 < a <= b < 1


@given(omegas)
def test_intervals_agree_with_essential_radius(omega):
    # the lower endpoint is -1/a, huge for sharp corners; compare its reciprocal
    iv = polygon_intervals(omega)
    for key, space in (("s32", Space.L2), ("s1", Space.HMINUS12)):
        lo, hi = polygon_interval_from_radius(omega, space)
        assert hi == pytest.approx(iv[key][1], abs=1e-12)
        assert 1 / lo == pytest.approx(1 / iv[key][0], abs=1e-12)


@given(omegas, mus, st.sampled_from([1.0, 1.5]))
def test_polygon_verdict_matches_lambda_disk(omega, mu, s):
    space = Space.L2 if s == 1.5 else Space.HMINUS12
    r = ess_radius_polygon(omega, space)
    lam = abs(mu_to_lambda(mu))
    assume(abs(lam - r) > 1e-9)
    v = verdict(Polygon(omega), mu, s)
    expected = Verdict.INSIDE_CRITICAL_INTERVAL if lam <= r else Verdict.SELF_ADJOINT
    assert v.verdict is expected


@given(omegas, st.floats(0, 1e3).filter(lambda m: m not in (0.0, 1.0)), st.sampled_from([1.0, 1.5]))
def test_positive_contrast_is_never_critical(omega, mu, s):
    assert verdict(Polygon(omega), mu, s).verdict is Verdict.SELF_ADJOINT


@given(st.floats(1e-6, 1e6), st.sampled_from([1.0, 1.5]))
def test_sign_definite_positive_is_self_adjoint(mu, s):
    assert verdict(SignDefinite(), mu, s).verdict is Verdict.SELF_ADJOINT


@given(st.floats(1e-3, math.pi - 1e-3), mus)
def test_cone_verdict_regimes(alpha, mu):
    assume(abs(alpha - math.pi / 2) > 1e-9 and mu != -1)
    v = verdict(Cone(alpha), mu, 1.0).verdict
    ok = mu > -1 if alpha < math.pi / 2 else mu < -1
    assert v is (Verdict.SELF_ADJOINT if ok else Verdict.UNKNOWN)


@pytest.mark.parametrize("cls", [SignDefinite(), SmoothVMO(), Polygon(1.0), Cone(1.0)])
def test_mu_zero_is_excluded_for_every_class(cls):
    assert verdict(cls, 0.0, 1.0).verdict is Verdict.EXCLUDED_VALUE


def test_verdict_payload():
    v = verdict(Polygon(math.pi / 2), -2.0, 1.5)
    d = json.loads(v.to_json())
    assert d["class"] == "Polygon" and d["omega"] == pytest.approx(math.pi / 2)
    assert d["verdict"] == "InsideCriticalInterval"
    assert d["interval"] == pytest.approx([-(3 + 2 * math.sqrt(2)), -(3 - 2 * math.sqrt(2))])
    assert d["theorem"] == "curvilinear-polygon"


def test_invalid_inputs():
    with pytest.raises(ContrastError):
        verdict(SmoothVMO(), 2.0, 2.0)
    with pytest.raises(ContrastError):
        Polygon(math.pi)
    with pytest.raises(ContrastError):
        Cone(0.0)
    with pytest.raises(ContrastError):
        verdict(object(), 2.0, 1.0)
    with pytest.raises(ContrastError):
        a_bound(np.pi)


@given(st.floats(-100, 100).filter(lambda m: m != 1.0))
def test_round_trip_tight(mu):
    # relative: rounding λ alone costs about |μ|·eps absolute near |μ| = 100
    assert lambda_to_mu(mu_to_lambda(mu)) == pytest.approx(mu, rel=1e-13, abs=1e-13)


def test_dictionary_examples():
    assert lambda_to_mu(0.0) == -1.0
    assert lambda_to_mu(1.0) == 3.0
    assert lambda_to_mu(-0.5) == 0.0
    assert critical_interval(0.0) == (-1.0, -1.0)
    assert critical_interval(0.25) == pytest.approx((-3.0, -1 / 3), abs=1e-15)
    r = math.sqrt(2) / 4
    assert critical_interval(r) == pytest.approx((-5.828427124746, -0.171572875254), abs=1e-11)
    assert a_bound(math.pi / 2) == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-15)
    assert b_bound(math.pi / 2) == pytest.approx(1 / 3, abs=1e-15)


CLASSES = st.one_of(
    st.just(SignDefinite()), st.just(SmoothVMO()),
    omegas.map(Polygon), st.floats(1e-3, math.pi - 1e-3).map(Cone),
)
SPECIAL_MU = st.sampled_from([0.0, 1.0, -1.0, -3.0, -1 / 3, 2.0])


@given(CLASSES, st.one_of(mus, SPECIAL_MU), st.sampled_from([1.0, 1.5]))
def test_excluded_value_set(cls, mu, s):
    v = verdict(cls, mu, s)
    excluded = mu == 0.0 or (mu == 1.0 and not isinstance(cls, SignDefinite)) or (
        mu == -1.0 and isinstance(cls, SmoothVMO))
    assert (v.verdict is Verdict.EXCLUDED_VALUE) == excluded
    if v.interval is not None:
        lo, hi = v.interval
        assert lo <= -1 <= hi < 0
        assert lo * hi == pytest.approx(1.0, abs=1e-12)


def test_bounds_on_dense_grid():
    w = np.linspace(1e-4, math.pi - 1e-4, 10_000)
    a = np.array([a_bound(x) for x in w])
    b = np.array([b_bound(x) for x in w])
    assert np.all(a < b)                       # equality only in the limit ω → π
    assert np.abs(a - (1 - np.cos(w / 2)) / (1 + np.cos(w / 2))).max() < 1e-14


def test_spec_verdict_examples():
    v = verdict(SignDefinite(), 5.0, 1.5)
    assert v.verdict is Verdict.SELF_ADJOINT and v.theorem == "sign-definite"
    assert verdict(Polygon(math.pi / 2), -10.0, 1.5).verdict is Verdict.SELF_ADJOINT
    assert verdict(Polygon(math.pi / 2), -2.0, 1.0).verdict is Verdict.INSIDE_CRITICAL_INTERVAL
    assert verdict(Cone(math.pi / 4), -0.5, 1.0).verdict is Verdict.SELF_ADJOINT
