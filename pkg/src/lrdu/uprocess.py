"""U-process evaluation, Hoeffding decomposition and pairwise order statistics.

Counting for the built-in kernels works on sorted data.  For a fixed row ``i``
the pair value ``T(s_i, s_j)`` computed in floating point is nondecreasing in
``j`` (IEEE rounding is monotone), so ``#{j : T(s_i, s_j) <= v}`` is a prefix
length.  A vectorised ``searchsorted`` locates the prefix up to a few ulps and a
per-row bisection over that narrow band evaluates ``T`` itself, so counts agree
exactly with brute-force enumeration of the same floating-point pair values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .errors import DomainError
from .hermite import Kernel, h1

GENERIC_MAX_N = 20_000
_ULP_GUARD = 16 * np.finfo(float).eps


def _pair_value(transform: str, a, b):
    if transform == "average":
        return (a + b) / 2
    if transform == "sum":
        return a + b
    if transform == "absdiff":
        return np.abs(b - a)
    raise ValueError(f"unknown pair transform {transform!r}")


def _threshold(transform: str, s_i, v):
    """Approximate s_j boundary for T(s_i, s_j) <= v, and a safe half-width."""
    if transform == "average":
        a = 2 * v - s_i
    elif transform == "sum":
        a = v - s_i
    else:
        a = v + s_i
    delta = _ULP_GUARD * (np.abs(s_i) + abs(v) + np.abs(a)) + 1e-300
    return a, delta


def _prefix_counts(s: np.ndarray, transform: str, v: float, strict: bool) -> np.ndarray:
    """Per row i: #{j in [0, n) : T(s_i, s_j) <= v}  (or ``< v`` when strict)."""
    a, delta = _threshold(transform, s, v)
    lo = np.searchsorted(s, a - delta, side="left")
    hi = np.searchsorted(s, a + delta, side="right")
    # absdiff uses the signed s_j - s_i here; the caller guarantees v >= 0
    active = lo < hi
    while np.any(active):
        idx = np.nonzero(active)[0]
        mid = (lo[idx] + hi[idx]) // 2
        val = _pair_value(transform, s[idx], s[mid]) if transform != "absdiff" else s[mid] - s[idx]
        ok = val < v if strict else val <= v
        lo[idx] = np.where(ok, mid + 1, lo[idx])
        hi[idx] = np.where(ok, hi[idx], mid)
        active = lo < hi
    return lo


def _row_counts(s: np.ndarray, transform: str, v: float, strict: bool = False) -> np.ndarray:
    """Per row i: #{j > i : T(s_i, s_j) <= v} for sorted ``s``."""
    n = s.size
    if transform == "absdiff" and (v < 0 or (strict and v == 0)):
        return np.zeros(n, dtype=np.int64)
    pos = _prefix_counts(s, transform, v, strict)
    return np.maximum(pos - np.arange(1, n + 1), 0).astype(np.int64)


def count_pairs_le(data, transform: str, v: float, *, presorted: bool = False) -> int:
    """#{i < j : T(X_i, X_j) <= v}."""
    s = np.asarray(data, dtype=float) if presorted else np.sort(np.asarray(data, dtype=float))
    return int(_row_counts(s, transform, v).sum())


def _gather(s: np.ndarray, transform: str, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """All pair values of rows i with j - i - 1 in [lower_i, upper_i)."""
    sizes = upper - lower
    rows = np.repeat(np.arange(s.size), sizes)
    starts = np.repeat(np.cumsum(sizes) - sizes, sizes)
    offs = np.arange(rows.size) - starts
    cols = rows + 1 + np.repeat(lower, sizes) + offs
    return _pair_value(transform, s[rows], s[cols])


def pairwise_kth(data, transform: str, k: int, *, presorted: bool = False) -> float:
    """Exact k-th smallest (1-based) of ``{T(X_i, X_j) : i < j}``.

    ``transform`` is ``"average"``, ``"sum"`` or ``"absdiff"``.  Sampled pivots
    bracket the target rank, each bracket costing two O(n log n) counting
    passes, until few enough candidate pairs remain to enumerate.
    """
    s = np.asarray(data, dtype=float)
    if s.ndim != 1 or s.size < 2:
        raise DomainError("pairwise selection needs at least 2 observations")
    if not presorted:
        s = np.sort(s)
    n = s.size
    total_pairs = n * (n - 1) // 2
    k = int(k)
    if not (1 <= k <= total_pairs):
        raise DomainError(f"rank k must lie in [1, {total_pairs}], got {k}")
    _pair_value(transform, 0.0, 0.0)

    lower = np.zeros(n, dtype=np.int64)  # pairs known to rank below the target
    upper = np.arange(n - 1, -1, -1, dtype=np.int64)  # row sizes n-1-i
    rng = np.random.default_rng(0x5EED)
    enumerate_below = max(4 * n, 4096)
    while True:
        sizes = upper - lower
        band = int(sizes.sum())
        below = int(lower.sum())
        target = k - below  # rank within the band, 1-based
        if band <= enumerate_below:
            vals = _gather(s, transform, lower, upper)
            return float(np.partition(vals, target - 1)[target - 1])
        m = 512
        picks = rng.integers(0, band, size=m)
        cum = np.cumsum(sizes)
        rows = np.searchsorted(cum, picks, side="right")
        offs = picks - (cum[rows] - sizes[rows])
        sample = np.sort(_pair_value(transform, s[rows], s[rows + 1 + lower[rows] + offs]))
        f = target / band
        spread = 2.5 * math.sqrt(f * (1 - f) / m) + 1.0 / m
        lo_v = sample[max(int(math.floor((f - spread) * m)), 0)]
        hi_v = sample[min(int(math.ceil((f + spread) * m)), m - 1)]

        lt_lo = np.clip(_row_counts(s, transform, lo_v, strict=True), lower, upper)
        le_lo = np.clip(_row_counts(s, transform, lo_v), lower, upper)
        n_lt_lo, n_le_lo = int(lt_lo.sum()), int(le_lo.sum())
        if n_lt_lo < k <= n_le_lo:
            return float(lo_v)
        if k <= n_lt_lo:
            upper = lt_lo
            continue
        le_hi = np.clip(_row_counts(s, transform, hi_v), lower, upper)
        n_le_hi = int(le_hi.sum())
        if k > n_le_hi:
            lower = le_hi
            continue
        lt_hi = np.clip(_row_counts(s, transform, hi_v, strict=True), lower, upper)
        if int(lt_hi.sum()) < k:
            return float(hi_v)
        lower, upper = le_lo, lt_hi


def pairwise_values(data, transform: str) -> np.ndarray:
    """All ``T(X_i, X_j)``, i < j, by enumeration (O(n^2) memory)."""
    x = np.asarray(data, dtype=float)
    i, j = np.triu_indices(x.size, k=1)
    return _pair_value(transform, x[i], x[j])


def rank_from_probability(p: float, n_pairs: int) -> int:
    """Smallest k with k / n_pairs >= p, guarding against p * n_pairs rounding up."""
    k = math.ceil(p * n_pairs * (1 - 4 * np.finfo(float).eps))
    return min(max(k, 1), n_pairs)


@dataclass
class UProcessCurve:
    grid: np.ndarray
    u: np.ndarray
    n: int
    w: np.ndarray | None = None
    rres: np.ndarray | None = None
    U: np.ndarray | None = None
    kernel: str = ""
    limit: object | None = None

    def to_csv(self, path) -> None:
        """CSV with columns r, u[, w, rres] plus a JSON metadata sidecar."""
        cols = {"r": self.grid, "u": self.u}
        if self.w is not None:
            cols["w"] = self.w
            cols["rres"] = self.rres
        io.write_csv(path, cols)
        meta = {"n": self.n, "kernel": self.kernel, "columns": list(cols)}
        if self.U is not None:
            meta["U"] = self.U
        if self.limit is not None and hasattr(self.limit, "to_dict"):
            meta["limit"] = self.limit.to_dict()
        io.write_json(Path(path).with_suffix(".json"), meta)


def _check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DomainError("a U-statistic needs at least 2 observations")
    return x


def _generic_counts(x: np.ndarray, kernel: Kernel, grid: np.ndarray, allow_large: bool) -> np.ndarray:
    if x.size > GENERIC_MAX_N and not allow_large:
        raise DomainError(
            f"generic kernel on n={x.size} > {GENERIC_MAX_N} needs allow_large=True (O(n^2) cost)"
        )
    i, j = np.triu_indices(x.size, k=1)
    vals = np.sort(np.asarray(kernel.G(x[i], x[j]), dtype=float))
    return np.searchsorted(vals, grid, side="right")


def u_process(data, kernel: Kernel, grid, *, allow_large: bool = False) -> UProcessCurve:
    """U_n(r) = #{(i, j), i != j : G(X_i, X_j) <= r} / (n (n - 1)) over a sorted grid."""
    x = _check_data(data)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(np.diff(grid) < 0):
        raise DomainError("grid must be sorted")
    n = x.size
    n_pairs = n * (n - 1) // 2
    if kernel.pair_transform is not None:
        s = np.sort(x)
        counts = np.array([_row_counts(s, kernel.pair_transform, float(r)).sum() for r in grid])
    else:
        counts = _generic_counts(x, kernel, grid, allow_large)
    return UProcessCurve(grid, counts / n_pairs, n, kernel=kernel.name)


def hoeffding_terms(data, kernel: Kernel, r: float, U_of_r: float | None = None):
    """(U_n, W_n, R_n) at threshold r; W_n is the linear projection, R_n the degenerate rest."""
    x = _check_data(data)
    if U_of_r is None:
        U_of_r = float(kernel.U(r))
    un = float(u_process(x, kernel, [r]).u[0])
    wn = 2.0 * float(np.mean(np.asarray(h1(kernel, x, r)) - U_of_r))
    rn = (un - U_of_r) - wn
    return un, wn, rn


def hoeffding_curve(data, kernel: Kernel, grid, U=None) -> UProcessCurve:
    x = _check_data(data)
    curve = u_process(x, kernel, grid)
    Uv = kernel.U(curve.grid) if U is None else np.asarray(U, dtype=float)
    Uv = np.broadcast_to(np.asarray(Uv, dtype=float), curve.grid.shape).copy()
    h1v = np.asarray(h1(kernel, x[:, None], curve.grid[None, :]))
    w = 2.0 * (h1v.mean(axis=0) - Uv)
    curve.w = w
    curve.rres = (curve.u - Uv) - w
    curve.U = Uv
    return curve


def u_quantile(data, kernel: Kernel, p: float) -> float:
    """Generalised inverse inf{r : U_n(r) >= p}, an attained pair value."""
    x = _check_data(data)
    if not (0.0 < p < 1.0):
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    n_pairs = x.size * (x.size - 1) // 2
    k = rank_from_probability(p, n_pairs)
    if kernel.pair_transform is not None:
        return pairwise_kth(x, kernel.pair_transform, k)
    i, j = np.triu_indices(x.size, k=1)
    vals = np.asarray(kernel.G(x[i], x[j]), dtype=float)
    return float(np.partition(vals, k - 1)[k - 1])
