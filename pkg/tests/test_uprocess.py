import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrdu.errors import DomainError
from lrdu.hermite import AbsDiff, Kernel, PairAverage, PairSum
from lrdu.uprocess import (
    count_pairs_le,
    hoeffding_curve,
    hoeffding_terms,
    pairwise_kth,
    pairwise_values,
    rank_from_probability,
    u_process,
    u_quantile,
)

TRANSFORMS = ["average", "sum", "absdiff"]
samples = st.lists(
    st.one_of(st.floats(-50, 50, allow_nan=False), st.integers(-3, 3).map(float)),
    min_size=2, max_size=60,
)


@given(samples, st.sampled_from(TRANSFORMS), st.floats(-60, 60))
def test_counts_match_enumeration(data, transform, v):
    vals = pairwise_values(np.array(data), transform)
    assert count_pairs_le(data, transform, v) == int(np.sum(vals <= v))


@given(samples, st.sampled_from(TRANSFORMS), st.data())
def test_selection_matches_sorting(data, transform, draw):
    vals = np.sort(pairwise_values(np.array(data), transform))
    k = draw.draw(st.integers(1, vals.size))
    assert pairwise_kth(data, transform, k) == vals[k - 1]


@pytest.mark.parametrize("transform", TRANSFORMS)
def test_selection_on_large_sample_hits_the_band_logic(transform):
    x = np.random.default_rng(2).standard_normal(3000)
    vals = np.sort(pairwise_values(x, transform))
    for k in (1, 12345, vals.size // 2, vals.size):
        assert pairwise_kth(x, transform, k) == vals[k - 1]


def test_selection_with_heavy_ties():
    x = np.repeat([0.0, 1.0, 2.0], 700)
    vals = np.sort(pairwise_values(x, "absdiff"))
    for k in (1, vals.size // 3, vals.size // 2, vals.size):
        assert pairwise_kth(x, "absdiff", k) == vals[k - 1]


def test_rank_out_of_range():
    with pytest.raises(DomainError):
        pairwise_kth([1.0, 2.0], "sum", 2)


def test_worked_values():
    assert u_process([0.0, 1.0], AbsDiff, [1.0]).u[0] == 1.0
    assert u_process([1.0, 2.0, 3.0], PairAverage, [1.6]).u[0] == pytest.approx(1 / 3)
    assert u_process([1.0, 2.0, 4.0], AbsDiff, [2.0]).u[0] == pytest.approx(2 / 3)
    assert u_quantile([1.0, 2.0, 3.0], PairAverage, 0.5) == 2.0
    assert u_quantile([5.0, 5.0, 5.0], AbsDiff, 0.5) == 0.0


def test_curve_is_a_step_function_in_r():
    x = np.random.default_rng(0).standard_normal(200)
    grid = np.linspace(-1, 10, 111)
    u = u_process(x, AbsDiff, grid).u
    assert np.all(np.diff(u) >= 0) and u[0] == 0.0 and u[-1] == 1.0


def test_generic_kernel_path_agrees():
    generic = Kernel("sum_generic", lambda a, b: a + b)
    x = np.random.default_rng(1).standard_normal(150)
    grid = np.linspace(-2, 2, 11)
    np.testing.assert_array_equal(u_process(x, generic, grid).u, u_process(x, PairSum, grid).u)
    assert u_quantile(x, generic, 0.3) == u_quantile(x, PairSum, 0.3)


def test_generic_kernel_size_guard():
    generic = Kernel("g", lambda a, b: a + b)
    with pytest.raises(DomainError):
        u_process(np.zeros(30_000), generic, [0.0])


def test_unsorted_grid_rejected():
    with pytest.raises(DomainError):
        u_process([0.0, 1.0], AbsDiff, [1.0, 0.0])


@given(st.floats(1e-6, 1 - 1e-6), st.integers(1, 10**7))
def test_rank_is_the_generalised_inverse(p, N):
    k = rank_from_probability(p, N)
    assert 1 <= k <= N
    assert k / N >= p * (1 - 1e-12)
    assert k == 1 or (k - 1) / N < p


def test_all_zero_hoeffding_example():
    # U(0) = 0 for AbsDiff; h1(0, 0) = 0; U_n = 1 since all pairs tie at distance 0
    un, wn, rn = hoeffding_terms(np.zeros(5), AbsDiff, 0.0)
    assert (un, wn, rn) == (1.0, 0.0, 1.0)


def _degenerate_remainder(x, kernel, r):
    i, j = np.triu_indices(x.size, k=1)
    h = kernel.h(x[i], x[j], r)
    h1 = kernel.h1(x, r)
    U = kernel.U(r)
    return float(np.mean(h - h1[i] - h1[j] + U))


@pytest.mark.parametrize("kernel", [PairAverage, PairSum, AbsDiff])
def test_remainder_equals_the_degenerate_term(kernel):
    x = np.random.default_rng(4).standard_normal(80)
    un, wn, rn = hoeffding_terms(x, kernel, 0.7)
    assert rn == pytest.approx(_degenerate_remainder(x, kernel, 0.7), abs=1e-12)


def test_curve_columns_and_csv(tmp_path):
    x = np.random.default_rng(5).standard_normal(60)
    curve = hoeffding_curve(x, AbsDiff, [0.5, 1.0])
    np.testing.assert_allclose(curve.u - curve.U, curve.w + curve.rres, atol=1e-15)
    curve.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "r,u,w,rres" and len(lines) == 3


def test_all_zero_pair_average_example():
    assert hoeffding_terms(np.zeros(6), PairAverage, 0.0) == (1.0, 0.0, 0.5)


def test_scaled_remainder_shrinks_for_iid_data():
    rng = np.random.default_rng(8)
    means = []
    for n in (200, 3200):
        rs = [hoeffding_terms(rng.standard_normal(n), PairAverage, 0.3)[2] for _ in range(40)]
        means.append(np.sqrt(n) * np.mean(np.abs(rs)))
    assert means[1] < 0.5 * means[0]
