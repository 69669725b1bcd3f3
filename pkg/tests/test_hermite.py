import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from lrdu.errors import RankUndetectedError
from lrdu.hermite import (
    AbsDiff,
    Kernel,
    PairAverage,
    PairSum,
    alpha_pq,
    alpha_table,
    gauss_nodes,
    get_kernel,
    h1,
    hermite_all,
    hermite_eval,
    hermite_rank,
    normal_expectation,
    parseval_sum,
)

R = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])


def test_low_order_polynomials():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(hermite_eval(2, x), x**2 - 1)
    np.testing.assert_allclose(hermite_eval(3, x), x**3 - 3 * x)
    np.testing.assert_allclose(hermite_all(4, x)[4], x**4 - 6 * x**2 + 3)


def test_orthogonality_under_the_normal_law():
    x, w = gauss_nodes(64)
    H = hermite_all(8, x)
    gram = (H * w) @ H.T
    np.testing.assert_allclose(gram, np.diag([math.factorial(p) for p in range(9)]), atol=1e-9)


def test_normal_expectation_moments():
    assert normal_expectation(lambda x: x**4) == pytest.approx(3.0, abs=1e-12)
    assert normal_expectation(np.cos) == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_pair_sum_linear_coefficient():
    # E[H1(X) Phi(r - X)] = -phi(r / sqrt 2) / sqrt 2 by Stein's identity
    np.testing.assert_allclose(alpha_pq(PairSum, 1, 0, R), -norm.pdf(R / math.sqrt(2)) / math.sqrt(2), atol=1e-10)


def test_u_is_the_zeroth_coefficient():
    for k in (PairAverage, PairSum, AbsDiff):
        np.testing.assert_allclose(alpha_table(k, 0, R)[0, 0], k.U(R), atol=1e-10)


def test_absdiff_u_by_direct_integration():
    r = 1.0
    val, _ = integrate.quad(lambda x: (norm.cdf(x + r) - norm.cdf(x - r)) * norm.pdf(x), -np.inf, np.inf)
    assert AbsDiff.U(r) == pytest.approx(val, abs=1e-10)


def test_symmetric_kernels_give_symmetric_tables():
    tab = alpha_table(AbsDiff, 4, R)
    np.testing.assert_allclose(tab, tab.transpose(1, 0, 2), atol=1e-10)


def test_absdiff_is_even_so_odd_total_degrees_vanish():
    tab = alpha_table(AbsDiff, 4, np.array([0.7, 1.3]))
    for p in range(5):
        for q in range(5):
            if (p + q) % 2:
                assert np.all(np.abs(tab[p, q]) < 1e-10)


def test_h1_projection_matches_closed_form():
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(h1(AbsDiff, x, 0.8), norm.cdf(x + 0.8) - norm.cdf(x - 0.8))
    np.testing.assert_allclose(h1(PairAverage, x, 0.3), norm.cdf(0.6 - x))


def test_generic_kernel_tracks_builtin():
    generic = Kernel("absdiff_generic", lambda x, y: np.abs(x - y))
    r = np.array([0.5, 1.0])
    np.testing.assert_allclose(alpha_table(generic, 2, r), alpha_table(AbsDiff, 2, r), atol=1e-5)
    np.testing.assert_allclose(h1(generic, np.array([0.0, 1.0]), 1.0),
                               h1(AbsDiff, np.array([0.0, 1.0]), 1.0), atol=1e-5)


def test_ranks_of_builtin_classes():
    grid = np.array([0.25, 0.5, 1.0, 2.0])
    assert (hermite_rank(AbsDiff, grid).m, hermite_rank(AbsDiff, grid).tau) == (2, 2)
    rep = hermite_rank(PairAverage, grid)
    assert (rep.m, rep.tau) == (1, 1)


def test_rank_at_zero_threshold_is_reported_as_missing():
    rep = hermite_rank(AbsDiff, [0.0, 1.0])
    d = rep.to_dict()
    assert d["m_per_r"] == [None, 2]


def test_constant_kernel_rank_is_undetected():
    always = Kernel("always", lambda x, y: np.zeros(np.broadcast(x, y).shape))
    with pytest.raises(RankUndetectedError):
        hermite_rank(always, [1.0], P_max=2)


@given(st.floats(0.1, 3.0))
def test_parseval_bound(r):
    # sum alpha^2 / (p! q!) <= E[h^2] = U(r)
    tab = alpha_table(AbsDiff, 6, np.array([r]))
    assert parseval_sum(tab)[0] <= AbsDiff.U(r) + 1e-9


def test_report_json(tmp_path):
    rep = hermite_rank(PairSum, [0.0, 1.0], P_max=3)
    rep.to_json(tmp_path / "rank.json")
    assert '"m": 1' in (tmp_path / "rank.json").read_text()


def test_kernel_lookup():
    assert get_kernel("ABSDIFF") is AbsDiff
    with pytest.raises(ValueError):
        get_kernel("euclid")
