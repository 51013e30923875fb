import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import polygamma

from ssb_tma.efficiency import (
    a0_constant,
    efficiency_report,
    efficiency_report_numeric,
    polygamma1,
    series_constant,
)
from ssb_tma.harmonics import ArrayConfig, steering_delays, term_power_sum
from ssb_tma.presets import table2_xi

xi_st = st.lists(st.floats(0.02, 1.0), min_size=2, max_size=12).map(np.array)


@given(st.floats(0.05, 50.0))
def test_trigamma_matches_scipy(z):
    assert polygamma1(z) == pytest.approx(float(polygamma(1, z)), rel=1e-10)


def test_trigamma_domain():
    with pytest.raises(ValueError):
        polygamma1(0.0)


def test_series_constant_against_scipy():
    s = series_constant()
    expected = (polygamma(1, 1 / 8) + polygamma(1, 7 / 8)) / 64
    assert s.a0 == pytest.approx(float(expected), rel=1e-12)
    assert a0_constant("direct_sum", 10**6) == pytest.approx(s.a0, abs=1e-6)
    with pytest.raises(ValueError):
        a0_constant("guess")


@given(xi_st)
def test_product_identity(xi):
    r = efficiency_report(xi)
    assert r.eta == pytest.approx(r.eta_tma * r.eta_bfn, rel=1e-14)
    assert 0 < r.eta_tma <= 1 / a0_constant()
    assert r.eta_db == pytest.approx(10 * np.log10(r.eta))


@given(xi_st)
def test_eta_tma_closed_form(xi):
    # useful / radiated = sum xi^2 / (A0 sum xi)
    r = efficiency_report(xi)
    assert r.eta_tma == pytest.approx(np.sum(xi**2) / (a0_constant() * np.sum(xi)))


def test_phased_values():
    r = efficiency_report(np.ones(30))
    assert r.eta_bfn == pytest.approx(32 * a0_constant() / (np.pi**2 * (1 + np.sqrt(2)) ** 2))
    assert r.eta_tma == pytest.approx(1 / a0_constant())
    assert r.eta_tma_db == pytest.approx(-0.2244, abs=1e-3)


def test_phased_bfn_is_mean_feed_power():
    # closed gates: radiated / static = mean |w + j w_tau|^2 / (2 (1 + sqrt 2)^2) = 2 - sqrt 2
    assert efficiency_report(np.ones(4)).eta_bfn == pytest.approx(2 - np.sqrt(2), rel=1e-12)


def test_rejects_bad_duty():
    with pytest.raises(ValueError):
        efficiency_report([0.5, 0.0])
    with pytest.raises(ValueError):
        efficiency_report([])


@settings(max_examples=10, deadline=None)
@given(xi_st)
def test_numeric_route_matches_closed_form(xi):
    closed = efficiency_report(xi)
    numeric = efficiency_report_numeric(xi, k_max=20000)
    assert numeric.eta_tma == pytest.approx(closed.eta_tma, rel=1e-3)
    assert numeric.eta_bfn == pytest.approx(closed.eta_bfn, rel=1e-3)


def test_numeric_matches_term_sum():
    # the sampled spectrum carries a little aliased power beyond q_max
    xi = table2_xi()
    numeric = efficiency_report_numeric(xi, k_max=200, samples=2**14)
    cfg = ArrayConfig(30)
    assert numeric.p_radiated == pytest.approx(term_power_sum(cfg, None, xi, 200, 2**13 - 1), rel=1e-4)


def test_steering_does_not_change_efficiency():
    cfg = ArrayConfig(30)
    xi = table2_xi()
    a = efficiency_report_numeric(xi, delays=steering_delays(cfg, 33.0), k_max=500)
    b = efficiency_report_numeric(xi, k_max=500)
    assert a.eta == pytest.approx(b.eta, abs=1e-12)
    with pytest.raises(ValueError):
        efficiency_report_numeric(xi, delays=np.zeros(3))


def test_ramps_lower_radiated_power():
    xi = np.ones(30)
    ideal = efficiency_report_numeric(xi, k_max=100)
    ramp = efficiency_report_numeric(xi, rise_fall=0.06, k_max=100)
    assert ramp.p_radiated < ideal.p_radiated
    assert ramp.eta_tma > ideal.eta_tma


def test_report_dict():
    d = efficiency_report(np.ones(3)).as_dict()
    assert set(d) >= {"eta", "eta_tma", "eta_bfn", "eta_db", "p_useful", "p_radiated", "p_static"}
    assert d["p_static"] == pytest.approx(12 * np.pi)
