import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import toeplitz

from conftest import implied_covariance
from lrdu.errors import DomainError
from lrdu.lrd_sim import (
    ContaminationSpec,
    CovarianceModel,
    SamplePath,
    contaminate,
    fgn_correlation,
    simulate_batch,
    simulate_gaussian,
)


def test_fgn_lag_one_closed_form():
    # rho(1) = 2^(2H-1) - 1
    assert fgn_correlation(0.75, 1) == pytest.approx(np.sqrt(2) - 1, abs=1e-15)


def test_fgn_far_lags_match_power_law():
    m = CovarianceModel.fgn(0.9)
    k = 1e6
    assert m.rho(k) * k**m.D == pytest.approx(m.L_const, rel=1e-6)


def test_fgn_stable_form_agrees_with_naive_difference():
    H, k = 0.7, np.arange(2.0, 50.0)
    naive = 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + (k - 1) ** (2 * H))
    np.testing.assert_allclose(fgn_correlation(H, k), naive, rtol=1e-9)


def test_arfima_pure_fractional_lag_one():
    # d / (1 - d)
    m = CovarianceModel.arfima(0.0, 0.35)
    assert m.rho(1) == pytest.approx(0.35 / 0.65, abs=1e-14)


@pytest.mark.parametrize("phi,d", [(0.2, 0.1), (0.2, 0.35), (-0.5, 0.25)])
def test_arfima_constant_is_the_tail_limit(phi, d):
    m = CovarianceModel.arfima(phi, d)
    k = 2e4
    assert m.rho(k) * k**m.D == pytest.approx(m.L_const, rel=2e-4)


def test_arfima_ar_part_raises_short_lags():
    assert CovarianceModel.arfima(0.5, 0.2).rho(1) > CovarianceModel.arfima(0.0, 0.2).rho(1)


@pytest.mark.parametrize("bad", [
    lambda: CovarianceModel.fgn(0.5),
    lambda: CovarianceModel.fgn(1.0),
    lambda: CovarianceModel.arfima(0.2, 0.6),
    lambda: CovarianceModel.arfima(1.0, 0.2),
    lambda: CovarianceModel("ar", H=0.7),
    lambda: ContaminationSpec(10, 1.2),
    lambda: ContaminationSpec(10, 0.1, "gaussian"),
])
def test_domain_guards(bad):
    with pytest.raises(DomainError):
        bad()


@given(st.floats(0.51, 0.99))
def test_fgn_correlations_are_positive_and_decreasing(H):
    r = CovarianceModel.fgn(H).acf(200)
    assert r[0] == 1.0
    assert np.all(r > 0) and np.all(np.diff(r) < 0)


@given(st.floats(-0.8, 0.8), st.floats(0.02, 0.48))
def test_arfima_acf_is_normalised(phi, d):
    r = CovarianceModel.arfima(phi, d).acf(20)
    assert r[0] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.abs(r) <= 1.0 + 1e-12)


@pytest.mark.parametrize("model", [CovarianceModel.fgn(0.7), CovarianceModel.arfima(0.2, 0.35)])
def test_generator_covariance_is_the_toeplitz_matrix(model):
    n = 33
    np.testing.assert_allclose(implied_covariance(model, n), toeplitz(model.acf(n - 1)), atol=1e-12)


def test_same_seed_same_path_and_index_changes_it():
    m = CovarianceModel.fgn(0.8)
    a = simulate_gaussian(m, 100, seed=5).values
    b = simulate_gaussian(m, 100, seed=5).values
    c = simulate_gaussian(m, 100, seed=5, index=1).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_batch_rows_match_single_draws():
    m = CovarianceModel.arfima(0.2, 0.1)
    batch = simulate_batch(m, 64, seed=3, indices=[0, 4])
    assert np.array_equal(batch[1], simulate_gaussian(m, 64, seed=3, index=4).values)


def test_sample_variance_is_near_one():
    x = simulate_batch(CovarianceModel.fgn(0.6), 256, seed=1, indices=range(400))
    assert x.var() == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("scheme,mean", [("bernoulli_half", 0.5), ("rademacher", 0.0)])
def test_contamination_frequency_and_mean(scheme, mean):
    spec = ContaminationSpec(10.0, 0.1, scheme)
    path = SamplePath(np.zeros(200_000))
    y = contaminate(path, spec, seed=9).values
    assert np.mean(y != 0) == pytest.approx(0.1 if scheme == "rademacher" else 0.05, abs=0.003)
    assert y.mean() == pytest.approx(mean, abs=0.03)
    assert set(np.unique(y)) <= {-10.0, 0.0, 10.0}


def test_csv_round_trip_is_bit_exact(tmp_path):
    path = simulate_gaussian(CovarianceModel.arfima(0.2, 0.35), 50, seed=7)
    path = contaminate(path, ContaminationSpec(10.0, 0.1), seed=7)
    out = path.to_csv(tmp_path / "p.csv")
    back = SamplePath.from_csv(out)
    assert np.array_equal(back.values, path.values)
    assert back.model == path.model and back.contamination == path.contamination
    side = json.loads((tmp_path / "p.json").read_text())
    assert side["n"] == 50 and side["seed"] == 7


def test_non_finite_paths_are_rejected():
    with pytest.raises(DomainError):
        SamplePath(np.array([0.0, np.nan]))


def test_model_dict_round_trip():
    for m in (CovarianceModel.fgn(0.6), CovarianceModel.arfima(0.2, 0.1)):
        assert CovarianceModel.from_dict(m.to_dict()) == m
    assert CovarianceModel.with_decay(0.3, "arfima", 0.2).d == pytest.approx(0.35)
