import numpy as np
import pytest

from smoothsign import (
    DomainError,
    SpanError,
    TargetSpec,
    acf1,
    bk_two_sided,
    ht_from_rho,
    hp_concurrent,
    hp_two_sided,
    sign_accuracy,
    wn_mse_nowcast,
)
from smoothsign.stationary_ext import ProcessModel, wold_weights


def dense_hp_row(lam, n, row):
    """Penalized least squares with a dense solver (independent of the sparse path)."""
    D = np.diff(np.eye(n), 2, axis=0)
    return np.linalg.solve(np.eye(n) + lam * D.T @ D, np.eye(n)[row])


# frozen from dense_hp_row(1600, 1001, 500) normalized to unit sum
HP1600_GAMMA0 = 0.05607556913418049


def test_hp_matches_dense_oracle():
    target = hp_two_sided(1600, 500)
    oracle = dense_hp_row(1600, 1001, 500)
    oracle /= oracle.sum()
    np.testing.assert_allclose(target.weights, oracle, atol=1e-13)
    assert target.weights[500] == pytest.approx(HP1600_GAMMA0, abs=1e-12)
    assert target.weights.sum() == pytest.approx(1.0, abs=1e-8)


def test_hp_default_span_and_tail():
    target = hp_two_sided(1600)
    assert target.meta["half_span"] == 500
    assert abs(target.weights[0]) < 1e-12
    assert not target.finite


def test_hp_span_doubling_is_stable():
    a = hp_two_sided(1600, 500).gamma(0)
    b = hp_two_sided(1600, 1000).gamma(0)
    assert abs(a - b) < 1e-10


def test_hp_identity_limit():
    target = hp_two_sided(1e-8, 20)
    assert target.gamma(0) == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(np.delete(target.weights, 20))) < 1e-6


def test_hp_symmetry():
    target = hp_two_sided(1600)
    assert target.gamma(17) == target.gamma(-17)
    assert target.is_symmetric()


def test_hp_tail_check():
    with pytest.raises(SpanError):
        hp_two_sided(1600, 30)
    # disabling the check gives the finite-window smoother
    assert hp_two_sided(1600, 30, tail_tol=None).finite


def test_hp_auto_span_other_lambda():
    target = hp_two_sided(100)
    assert abs(target.weights[0]) < 1e-12


def test_hp_concurrent_identity_limit():
    np.testing.assert_allclose(hp_concurrent(1e-8, 7), np.eye(7)[0], atol=1e-6)


def test_hp_concurrent_matches_dense_last_row():
    oracle = dense_hp_row(14400, 201, 200)[::-1]
    b = hp_concurrent(14400, 201)
    np.testing.assert_allclose(b, oracle, atol=1e-12)
    assert b.sum() == pytest.approx(1.0, abs=1e-10)


def test_hp_concurrent_differs_from_truncated_two_sided():
    assert not np.allclose(hp_concurrent(1600, 101), wn_mse_nowcast(hp_two_sided(1600), 101, 0))


def test_hp_concurrent_differenced_acf_indpro_setup():
    # differenced HP-C output on ARIMA(1,1,0) differences: epsilon-space weights (b * xi)
    b = hp_concurrent(14400, 201)
    xi = wold_weights(ProcessModel(ar=(0.3,)), 402)
    assert acf1(np.convolve(b, xi)[:402]) == pytest.approx(0.954, abs=0.02)


def test_bk_properties():
    target = bk_two_sided(6, 32, 12)
    assert target.is_symmetric()
    assert abs(target.weights.sum()) < 1e-12
    w_lo, w_hi = 2 * np.pi / 32, 2 * np.pi / 6
    k = np.arange(1, 13)
    side = (np.sin(w_hi * k) - np.sin(w_lo * k)) / (np.pi * k)
    b0 = (w_hi - w_lo) / np.pi
    correction = (b0 + 2 * side.sum()) / 25
    assert target.gamma(0) == pytest.approx(b0 - correction, abs=1e-14)
    assert target.gamma(5) == pytest.approx(side[4] - correction, abs=1e-14)


def test_bk_degenerate_band():
    with pytest.raises(DomainError):
        bk_two_sided(6, 6, 12)
    with pytest.raises(DomainError):
        bk_two_sided(1.5, 6, 12)


def test_wn_mse_nowcast_ma1_forecast():
    target = TargetSpec.from_coefficients({0: 1.0, 1: 0.5}, finite=True)
    np.testing.assert_array_equal(wn_mse_nowcast(target, L=3, delta=1), [0.5, 0.0, 0.0])


def test_wn_mse_nowcast_single_weight():
    target = hp_two_sided(1600)
    np.testing.assert_array_equal(wn_mse_nowcast(target, L=1, delta=0), [target.gamma(0)])


def test_wn_mse_nowcast_span_shortfall():
    full = hp_two_sided(1600)
    target = TargetSpec(full.lags[440:561], full.weights[440:561])
    with pytest.raises(SpanError):
        wn_mse_nowcast(target, L=101, delta=0)


def test_hp1600_mse_nowcast_values(hp1600_window, hp1600_gamma):
    g = hp1600_gamma
    r = acf1(g)
    tc = np.sqrt(g @ g / hp1600_window.norm2())
    assert r == pytest.approx(0.926, abs=5e-3)
    assert tc == pytest.approx(0.733, abs=5e-3)
    assert sign_accuracy(tc) == pytest.approx(0.762, abs=5e-3)
    assert ht_from_rho(r) == pytest.approx(8.138, abs=5e-3)
    assert ht_from_rho(hp1600_window.acf1()) == pytest.approx(34.316, abs=5e-3)


def test_csv_export():
    text = bk_two_sided(6, 32, 2).to_csv().splitlines()
    assert text[0] == "lag,weight"
    assert len(text) == 6
    assert text[1].startswith("-2,")
