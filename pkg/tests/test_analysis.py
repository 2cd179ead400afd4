import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sotadc.adc import AdcBank, transfer_sweep
from sotadc.analysis import (
    AFFINE,
    THROUGH_ORIGIN,
    compute_dnl_inl,
    extract_transitions,
    fit_critical_density,
    nonlinearity_of_bank,
)
from sotadc.device import critical_current, ideal_devices
from sotadc.errors import DomainError, MissingCodeError, OrderingError, SingularFitError

J, T = 0.6e12, 15e-9
W = np.arange(1, 8) * 0.6e-6
MA = 1e-3


def test_fit_noiseless_recovers_density():
    i = np.array([critical_current(J, T, w) for w in W])
    for mode in (THROUGH_ORIGIN, AFFINE):
        fit = fit_critical_density(W, i, T, mode)
        assert fit.j_sot_crit == pytest.approx(J, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, rel=1e-12)
    assert fit_critical_density(W, i, T).intercept == 0.0


def test_fit_with_noise_median():
    # Monte Carlo over the estimator itself
    rng = np.random.default_rng(7)
    i = J * T * W
    js = [fit_critical_density(W, i + rng.normal(0, 2 * MA, W.size), T).j_sot_crit for _ in range(1000)]
    assert abs(np.median(js) - J) / J < 0.10


def test_fit_errors():
    with pytest.raises(SingularFitError):
        fit_critical_density([1e-6, 1e-6], [1e-3, 2e-3], T)
    with pytest.raises(DomainError):
        fit_critical_density([1e-6], [1e-3], T)
    with pytest.raises(DomainError):
        fit_critical_density([1e-6, 2e-6], [1e-3, 2e-3], 0.0)
    with pytest.raises(DomainError):
        fit_critical_density([1e-6, 2e-6], [1e-3, 2e-3], T, mode="cubic")


points = st.lists(st.tuples(st.floats(0.1, 10.0), st.floats(0.1, 100.0)), min_size=3, max_size=12)


@given(points)
def test_fit_residuals_orthogonal_to_widths(pts):
    w = np.array([p[0] for p in pts]) * 1e-6
    i = np.array([p[1] for p in pts]) * MA
    if np.all(w == w[0]):
        return
    fit = fit_critical_density(w, i, T)
    resid = i - fit.slope * w
    assert abs(resid @ w) <= 1e-9 * np.linalg.norm(i) * np.linalg.norm(w)
    assert fit.r_squared <= 1.0


@given(points, st.floats(0.01, 100.0))
def test_fit_scale_equivariance(pts, c):
    w = np.array([p[0] for p in pts]) * 1e-6
    i = np.array([p[1] for p in pts]) * MA
    if np.all(w == w[0]) or np.ptp(i) == 0:
        return
    a = fit_critical_density(w, i, T)
    b = fit_critical_density(w, c * i, T)
    assert b.slope == pytest.approx(c * a.slope, rel=1e-9)
    assert b.j_sot_crit == pytest.approx(c * a.j_sot_crit, rel=1e-9)
    assert b.r_squared == pytest.approx(a.r_squared, rel=1e-9, abs=1e-9)


def test_extract_transitions_ideal_fine_sweep():
    bank = AdcBank.ideal()
    sweep = transfer_sweep(bank, 0.0, 40.5 * MA, 40501)  # 1 uA steps
    levels = extract_transitions(sweep)
    want = np.arange(1, 8) * 5.4 * MA
    assert np.all(np.abs(levels - want) <= 0.5e-6 + 1e-12)


def test_extract_transitions_missing_code():
    sweep = [(0.0, 0), (1.0, 1), (2.0, 2), (3.0, 4), (4.0, 5), (5.0, 6), (6.0, 7)]
    with pytest.raises(MissingCodeError) as err:
        extract_transitions(sweep)
    assert err.value.code == 3
    levels = extract_transitions(sweep, allow_missing=True)
    assert levels[2] == levels[3] == 2.5
    with pytest.raises(MissingCodeError) as err:
        extract_transitions([(0.0, 0), (1.0, 6)], allow_missing=True)
    assert err.value.code == 7


def test_extract_transitions_two_points():
    assert extract_transitions([(1.0, 0), (3.0, 1)], n_codes=1).tolist() == [2.0]


def test_dnl_uniform():
    r = compute_dnl_inl(np.arange(1, 8) * 5.4)
    assert r.max_abs_dnl == pytest.approx(0, abs=1e-12)
    assert r.max_abs_inl == pytest.approx(0, abs=1e-12)
    assert r.lsb == pytest.approx(5.4)


def test_dnl_hand_example():
    r = compute_dnl_inl([1, 2, 3.5, 4, 5, 6, 7])
    assert r.lsb == 1.0
    # widths 1, 1.5, 0.5, 1, 1, 1
    assert r.dnl.tolist() == [0.0, 0.5, -0.5, 0.0, 0.0, 0.0, 0.0]
    assert r.inl.tolist() == [0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]
    assert r.max_abs_dnl == 0.5 and r.max_abs_inl == 0.5
    assert r.max_abs_dnl_current == 0.5


def test_dnl_ordering_error():
    with pytest.raises(OrderingError):
        compute_dnl_inl([1, 3, 2, 4, 5, 6, 7])


def test_dnl_alternative_conventions():
    t = [1, 2, 3.5, 4, 5, 6, 7]
    full = compute_dnl_inl(t, full_scale=8.0)
    assert full.lsb == 1.0 and full.inl.tolist() == [0, 0, 0.5, 0, 0, 0, 0]
    best = compute_dnl_inl(t, method="best-fit")
    assert abs(best.inl.sum()) < 1e-12  # least-squares residuals sum to zero


ascending = st.lists(st.floats(0.01, 10.0), min_size=7, max_size=7).map(lambda g: np.cumsum(g) + 1.0)


@given(ascending)
def test_inl_is_cumulative_dnl(t):
    r = compute_dnl_inl(t)
    assert r.inl[1:] == pytest.approx(np.cumsum(r.dnl[:-1]), abs=1e-9)
    assert abs(r.dnl[:-1].sum()) < 1e-9
    assert r.inl[0] == 0.0 and abs(r.inl[-1]) < 1e-12


@given(ascending, st.floats(0.01, 100.0))
def test_metrics_scale_invariant(t, c):
    a, b = compute_dnl_inl(t), compute_dnl_inl(c * t)
    assert b.max_abs_dnl == pytest.approx(a.max_abs_dnl, rel=1e-9, abs=1e-9)
    assert b.max_abs_inl == pytest.approx(a.max_abs_inl, rel=1e-9, abs=1e-9)


def test_nonlinearity_of_ideal_bank():
    r = nonlinearity_of_bank(AdcBank.ideal(), step=1e-6)
    tol = 1e-6 / r.lsb
    assert r.max_abs_dnl <= tol and r.max_abs_inl <= tol


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(1.0, 8.0), min_size=7, max_size=7))
def test_ramp_oracle_matches_analytic(gaps_ma):
    true = np.cumsum(gaps_ma) * MA
    devs = [d.with_threshold(float(t)) for d, t in zip(ideal_devices(), true)]
    step = 2e-6
    ramp = nonlinearity_of_bank(AdcBank(devs), step=step)
    exact = compute_dnl_inl(true)
    # each transition is off by at most step/2: gaps by step, the LSB by step/6
    lsb_lo = exact.lsb - step / 6
    dnl_tol = step / lsb_lo + np.max(np.diff(true)) / exact.lsb * (step / 6) / lsb_lo
    inl_tol = step / lsb_lo + 6 * (step / 6) / lsb_lo
    assert np.max(np.abs(ramp.dnl - exact.dnl)) <= dnl_tol
    assert np.max(np.abs(ramp.inl - exact.inl)) <= inl_tol
