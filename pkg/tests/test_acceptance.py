"""Exit criteria at their stated tolerances, one test per criterion.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.linalg import toeplitz
from scipy.stats import norm

from conftest import implied_covariance
from lrdu.asymptotics import (
    CumulantRequest,
    k_of_D,
    limit_cumulant,
    sample_cumulants,
    sample_limit_law,
    shamos_clt_variance,
    var_fbm,
    var_rosenblatt,
)
from lrdu.estimators import wilcoxon_signed_rank
from lrdu.hermite import AbsDiff, PairAverage, PairSum, alpha_pq
from lrdu.lrd_sim import ContaminationSpec, CovarianceModel
from lrdu.montecarlo import McConfig, collect_draws, ks_distance, rate_study, standardization
from lrdu.uprocess import hoeffding_terms, pairwise_kth, pairwise_values

pytestmark = pytest.mark.acceptance

R = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
ARFIMA_D03 = CovarianceModel.arfima(0.2, 0.35)
ARFIMA_D08 = CovarianceModel.arfima(0.2, 0.1)


class Clock:
    def __init__(self, limit):
        self.limit, self.start = limit, time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.start
        assert elapsed < self.limit, f"took {elapsed:.1f} s, limit {self.limit} s"


def phidot(x):
    return -x * norm.pdf(x)


@pytest.mark.criterion(1, "closed-form Hermite coefficients")
def test_closed_form_hermite_coefficients():
    clock = Clock(1.0)
    s2 = math.sqrt(2)
    np.testing.assert_allclose(alpha_pq(PairAverage, 1, 0, R), -norm.pdf(R * s2) / s2, rtol=0, atol=1e-8)
    pos, neg = R > 0, R < 0
    a20, a11, a10 = (alpha_pq(AbsDiff, p, q, R) for p, q in [(2, 0), (1, 1), (1, 0)])
    np.testing.assert_allclose(a20[pos], phidot(R[pos] / s2), rtol=0, atol=1e-8)
    np.testing.assert_allclose(a11[pos], -phidot(R[pos] / s2), rtol=0, atol=1e-8)
    # for r < 0 the set {|x - y| <= r} is empty, so every coefficient is 0
    np.testing.assert_allclose(a20[neg], 0.0, atol=1e-8)
    np.testing.assert_allclose(a11[neg], 0.0, atol=1e-8)
    np.testing.assert_allclose(a10, 0.0, atol=1e-8)
    clock.check()


@pytest.mark.criterion(2, "Hoeffding, Wilcoxon and selection identities")
def test_structural_identities():
    clock = Clock(30.0)
    rng = np.random.default_rng(20)
    for kernel in (PairAverage, PairSum, AbsDiff):
        for _ in range(5):
            x = rng.standard_normal(rng.integers(2, 120))
            r = float(rng.uniform(-1, 2.5))
            U = float(kernel.U(r))
            un, wn, rn = hoeffding_terms(x, kernel, r, U)
            i, j = np.triu_indices(x.size, k=1)
            h1 = kernel.h1(x, r)
            degenerate = float(np.mean(kernel.h(x[i], x[j], r) - h1[i] - h1[j] + U))
            assert abs((un - U) - (wn + degenerate)) < 1e-12
            assert abs((un - U) - (wn + rn)) < 1e-12
    for _ in range(50):
        x = np.round(rng.standard_normal(rng.integers(1, 300)), int(rng.integers(0, 3)))
        n = x.size
        res = wilcoxon_signed_rank(x)
        i, j = np.triu_indices(n, k=1)
        assert res.T == int(np.sum(x > 0)) + int(np.sum(x[i] + x[j] > 0))
        if n > 1:
            assert n * res.u1 + n * (n - 1) / 2 * res.u2 == pytest.approx(res.T, abs=1e-9)
    for t in range(200):
        n = int(rng.integers(2, 501))
        x = rng.standard_normal(n)
        if t % 3 == 0:
            x = np.round(x, 1)  # ties
        transform = ("average", "sum", "absdiff")[t % 3]
        vals = np.sort(pairwise_values(x, transform))
        for k in {1, vals.size, int(rng.integers(1, vals.size + 1)), math.ceil(vals.size / 2)}:
            assert pairwise_kth(x, transform, k) == vals[k - 1]
    clock.check()


@pytest.mark.criterion(3, "generator covariance equals the Toeplitz target")
def test_generator_exactness():
    clock = Clock(10.0)
    models = [CovarianceModel.fgn(0.6), CovarianceModel.fgn(0.9), ARFIMA_D08, ARFIMA_D03]
    for model in models:
        for n in (2, 3, 10, 37, 64):
            target = toeplitz(model.acf(n - 1))
            assert np.max(np.abs(implied_covariance(model, n) - target)) < 1e-10
    clock.check()


@pytest.mark.criterion(4, "k(D) and limit variances")
def test_constants_and_variances():
    clock = Clock(60.0)
    for D in (0.2, 0.5, 0.8):
        a, b = (1 - D) / 2, D
        head, _ = integrate.quad(lambda y: (1 + y) ** (-a - b), 0, 1, weight="alg", wvar=(a - 1, 0),
                                 epsabs=1e-14, epsrel=1e-13)
        tail, _ = integrate.quad(lambda t: (1 + t) ** (-a - b), 0, 1, weight="alg", wvar=(b - 1, 0),
                                 epsabs=1e-14, epsrel=1e-13)
        assert abs(k_of_D(D) - (head + tail)) < 1e-10 * k_of_D(D)
    for D in (0.2, 0.3, 0.4):
        k = k_of_D(D)
        assert abs(limit_cumulant(CumulantRequest(2, 1, 0, D)) - 4 * k * k / ((1 - 2 * D) * (2 - 2 * D))) < 1e-6
        assert abs(limit_cumulant(CumulantRequest(2, 0, 1, D)) - 2 * var_fbm(D) ** 2) < 1e-6
    clock.check()


@pytest.mark.criterion(5, "limit-law sampler variance and third cumulant")
def test_limit_law_sampler():
    clock = Clock(180.0)
    x = sample_limit_law(1, 0, 0.3, n_approx=2**13, reps=10_000, seed=2024)
    var, k3, _, se3 = sample_cumulants(x)
    assert abs(var / var_rosenblatt(0.3) - 1) < 0.05
    assert abs(k3 - limit_cumulant(CumulantRequest(3, 1, 0, 0.3))) < 3 * se3
    clock.check()


@pytest.mark.criterion(6, "no efficiency loss of Hodges-Lehmann")
def test_efficiency_of_hodges_lehmann():
    clock = Clock(180.0)
    cfg = McConfig(ARFIMA_D08, n=600, reps=1000, estimators=["hl", "mean"], seed=6)
    draws = collect_draws(cfg)
    ratio = draws["hl"].var(ddof=1) / draws["mean"].var(ddof=1)
    assert 0.9 <= ratio <= 1.15
    z = {e: standardization(e, cfg.model, cfg.n)[0] * draws[e] for e in draws}
    assert ks_distance(z["hl"], z["mean"]) < 0.08
    clock.check()


@pytest.mark.criterion(7, "robustness under additive outliers")
def test_robustness_separation():
    clock = Clock(300.0)
    loc = collect_draws(McConfig(ARFIMA_D03, 600, 1000, ["hl", "mean"], ContaminationSpec(10.0, 0.1), seed=7))
    assert abs(loc["mean"].mean() - 0.5) < 0.05
    assert abs(loc["hl"].mean()) < 0.25 * 0.5
    spec = ContaminationSpec(10.0, 0.1, "rademacher")
    scale = collect_draws(McConfig(ARFIMA_D03, 600, 1000, ["shamos", "sd"], spec, seed=8))
    assert scale["sd"].mean() - 1 > 3 * abs(scale["shamos"].mean() - 1)
    clock.check()


@pytest.mark.criterion(8, "convergence-rate slopes")
def test_rate_slopes():
    clock = Clock(1200.0)
    sizes = [2**k for k in range(9, 15)]
    low = rate_study(McConfig(ARFIMA_D03, 600, 500, ["hl", "shamos"], seed=81, grid_sizes=sizes))
    high = rate_study(McConfig(ARFIMA_D08, 600, 500, ["mean"], seed=82, grid_sizes=sizes))
    assert abs(low.fits["hl"].slope + 0.15) < 0.05
    assert abs(low.fits["shamos"].slope + 0.30) < 0.07
    assert abs(high.fits["mean"].slope + 0.40) < 0.05
    clock.check()


@pytest.mark.criterion(9, "Shamos variance in the Gaussian regime")
def test_shamos_clt_variance():
    clock = Clock(600.0)
    model = CovarianceModel.fgn(0.6)
    n = 2**14
    x = collect_draws(McConfig(model, n, 2000, ["shamos"], seed=9))["shamos"]
    mc = n * x.var(ddof=1)
    assert abs(mc / shamos_clt_variance(model) - 1) < 0.15
    clock.check()


@pytest.mark.criterion(10, "Shamos and sd match the Rosenblatt mixture")
def test_scale_estimators_match_rosenblatt_mixture():
    clock = Clock(300.0)
    draws = collect_draws(McConfig(ARFIMA_D03, 600, 1000, ["shamos", "sd"], seed=10))
    limit = sample_limit_law(1, -1, 0.3, n_approx=2**13, reps=4000, seed=11) / 2
    norm_const = k_of_D(0.3) * 600**0.3 / ARFIMA_D03.L_const
    for name in ("shamos", "sd"):
        assert ks_distance(norm_const * (draws[name] - 1), limit) < 0.12
    clock.check()
