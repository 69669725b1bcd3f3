"""Hermite machinery for indicator kernels ``h(x, y, r) = 1{G(x, y) <= r}``.

Hermite polynomials are the monic (probabilists') family
``H_0 = 1, H_1 = x, H_{p+1} = x H_p - p H_{p-1}``.

For the built-in kernels the sublevel set ``{y : G(x, y) <= r}`` is an
interval with explicit end points, so the inner integral over ``y`` is done in
closed form:

    int_{-inf}^{c} H_q(y) phi(y) dy = Phi(c)                 if q == 0
                                    = -H_{q-1}(c) phi(c)     if q >= 1

which leaves a smooth outer integrand for Gauss-Hermite quadrature.  Generic
kernels use a fine grid in ``y`` with linear location of the set boundary;
their coefficients are good to roughly 1e-5.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt
from typing import Callable

import numpy as np
from scipy.special import roots_hermitenorm
from scipy.stats import norm

from . import io
from .errors import QuadratureError, RankUndetectedError

SQRT2 = sqrt(2.0)
START_NODES = 64
MAX_NODES = 1024
CONVERGED = 1e-9
NONCONVERGED = 1e-6
GENERIC_TOL = 1e-5
DEFAULT_RANK_TOL = 1e-6


def hermite_eval(p: int, x):
    """H_p(x) by the three-term recurrence; vectorised over ``x``."""
    if p < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if p == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, p):
        h_prev, h = h, x * h - k * h_prev
    return h if h.ndim else float(h)


def hermite_all(P: int, x) -> np.ndarray:
    """Stack of H_0..H_P evaluated at ``x``, shape ``(P + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((P + 1,) + x.shape)
    out[0] = 1.0
    if P >= 1:
        out[1] = x
    for k in range(1, P):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def gauss_nodes(n: int):
    """Nodes and probability weights for E[f(Z)], Z ~ N(0, 1)."""
    x, w = roots_hermitenorm(n)
    return x, w / w.sum()


def normal_expectation(f: Callable, n_nodes: int = 128) -> float:
    x, w = gauss_nodes(n_nodes)
    return float(np.sum(w * f(x)))


def _lower_tail_moments(Q: int, c: np.ndarray) -> np.ndarray:
    """I_q(c) = int_{-inf}^c H_q phi for q = 0..Q, with the infinite end points handled."""
    c = np.asarray(c, dtype=float)
    out = np.empty((Q + 1,) + c.shape)
    out[0] = norm.cdf(c)
    if Q >= 1:
        finite = np.isfinite(c)
        cf = np.where(finite, c, 0.0)
        pdf = np.where(finite, norm.pdf(cf), 0.0)
        H = hermite_all(Q - 1, cf)
        out[1:] = -H * pdf
    return out


@dataclass(frozen=True)
class Kernel:
    """Symmetric kernel ``G`` defining the indicator ``1{G(x, y) <= r}``.

    ``interval(x, r)`` returns the end points of ``{y : G(x, y) <= r}`` when it
    is an interval; ``pair_transform`` names the fast pairwise counter in
    :mod:`lrdu.uprocess` (threshold ``r`` is compared against the transformed
    pair value directly).
    """

    name: str
    G: Callable
    interval: Callable | None = None
    U_closed: Callable | None = None
    pair_transform: str | None = None

    @property
    def builtin(self) -> bool:
        return self.interval is not None

    def h(self, x, y, r):
        return (self.G(x, y) <= r).astype(float)

    def h1(self, x, r):
        return h1(self, x, r)

    def U(self, r):
        if self.U_closed is not None:
            out = self.U_closed(np.asarray(r, dtype=float))
            return out if np.ndim(out) else float(out)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return alpha_table(self, 0, r)[0, 0]


def _average_interval(x, r):
    return np.full(np.broadcast(x, r).shape, -np.inf), 2 * r - x


def _sum_interval(x, r):
    return np.full(np.broadcast(x, r).shape, -np.inf), r - x


def _absdiff_interval(x, r):
    rr = np.maximum(r, 0.0)
    lo, hi = x - rr, x + rr
    empty = np.broadcast_to(r < 0, lo.shape)
    return np.where(empty, 0.0, lo), np.where(empty, 0.0, hi)


PairAverage = Kernel(
    "pair_average",
    lambda x, y: (x + y) / 2,
    _average_interval,
    lambda r: norm.cdf(SQRT2 * r),
    "average",
)
PairSum = Kernel(
    "pair_sum",
    lambda x, y: x + y,
    _sum_interval,
    lambda r: norm.cdf(r / SQRT2),
    "sum",
)
AbsDiff = Kernel(
    "abs_diff",
    lambda x, y: np.abs(x - y),
    _absdiff_interval,
    lambda r: np.where(r >= 0, 2 * norm.cdf(np.maximum(r, 0) / SQRT2) - 1, 0.0),
    "absdiff",
)

BUILTIN_KERNELS = {k.name: k for k in (PairAverage, PairSum, AbsDiff)}
KERNEL_ALIASES = {"average": PairAverage, "hl": PairAverage, "sum": PairSum,
                  "absdiff": AbsDiff, "abs_diff": AbsDiff, "pair_average": PairAverage,
                  "pair_sum": PairSum}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNEL_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNEL_ALIASES)}") from None


# -- generic-kernel inner integral -------------------------------------------------

_Y = np.linspace(-12.0, 12.0, 4801)


def _generic_inner(kernel: Kernel, Q: int, x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """int 1{G(x,y) <= r} H_q(y) phi(y) dy on a fine grid, shape (Q+1, len(x), len(r))."""
    y = _Y
    hstep = y[1] - y[0]
    f = hermite_all(Q, y) * norm.pdf(y)  # (Q+1, Y)
    out = np.empty((Q + 1, x.size, r.size))
    for j, rj in enumerate(r):
        g = kernel.G(x[:, None], y[None, :]) - rj  # (N, Y)
        g0, g1 = g[:, :-1], g[:, 1:]
        in0, in1 = g0 <= 0, g1 <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(in0 != in1, g0 / (g0 - g1), 0.0)
        # covered fraction of each cell and the midpoint of the covered part (in cell units)
        frac = np.where(in0 & in1, 1.0, np.where(in0 & ~in1, t, np.where(~in0 & in1, 1 - t, 0.0)))
        mid = np.where(in0 & ~in1, t / 2, np.where(~in0 & in1, (1 + t) / 2, 0.5))
        f0, f1 = f[:, :-1], f[:, 1:]
        fmid = f0[:, None, :] + (f1 - f0)[:, None, :] * mid[None]
        out[:, :, j] = hstep * np.sum(frac[None] * fmid, axis=-1)
    return out


def _inner(kernel: Kernel, Q: int, x: np.ndarray, r: np.ndarray) -> np.ndarray:
    if kernel.builtin:
        lo, hi = kernel.interval(x[:, None], r[None, :])
        return _lower_tail_moments(Q, hi) - _lower_tail_moments(Q, lo)
    return _generic_inner(kernel, Q, x, r)


def _table_at(kernel: Kernel, P: int, r: np.ndarray, n_nodes: int) -> np.ndarray:
    x, w = gauss_nodes(n_nodes)
    inner = _inner(kernel, P, x, r)  # (q, x, r)
    Hp = hermite_all(P, x)  # (p, x)
    return np.einsum("px,qxr,x->pqr", Hp, inner, w)


def alpha_table(kernel: Kernel, P: int, r, *, start_nodes: int = START_NODES) -> np.ndarray:
    """alpha_{p,q}(r) for all p, q <= P; shape ``(P+1, P+1, len(r))``.

    Node count doubles from ``start_nodes`` until successive tables agree to
    1e-9 (built-ins) or 1e-5 (generic kernels).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    stop = CONVERGED if kernel.builtin else GENERIC_TOL
    fail = NONCONVERGED if kernel.builtin else GENERIC_TOL
    n = start_nodes
    prev = _table_at(kernel, P, r, n)
    while True:
        n *= 2
        cur = _table_at(kernel, P, r, n)
        diff = np.max(np.abs(cur - prev))
        if diff < stop:
            return cur
        if n >= MAX_NODES:
            if diff < fail:
                return cur
            raise QuadratureError(
                f"Hermite coefficients of {kernel.name} did not converge: "
                f"doubling to {n} nodes changed them by {diff:.2e}"
            )
        prev = cur


def alpha_pq(kernel: Kernel, p: int, q: int, r):
    """E[1{G(X,Y) <= r} H_p(X) H_q(Y)] for independent standard normals X, Y."""
    if p < 0 or q < 0:
        raise ValueError("Hermite indices must be nonnegative")
    P = max(p, q)
    tab = alpha_table(kernel, P, r)[p, q]
    return tab if np.ndim(r) else float(tab[0])


def h1(kernel: Kernel, x, r):
    """Marginal projection ``h1(x, r) = int h(x, y, r) phi(y) dy``."""
    x_arr = np.asarray(x, dtype=float)
    r_arr = np.asarray(r, dtype=float)
    if kernel.builtin:
        lo, hi = kernel.interval(*np.broadcast_arrays(x_arr, r_arr))
        out = norm.cdf(hi) - norm.cdf(lo)
    else:
        xb, rb = np.broadcast_arrays(x_arr, r_arr)
        xs, rs = xb.ravel(), rb.ravel()
        out = np.empty(xs.shape)
        for rv in np.unique(rs):
            sel = rs == rv
            out[sel] = _generic_inner(kernel, 0, xs[sel], np.array([rv]))[0, :, 0]
        out = np.clip(out.reshape(xb.shape), 0.0, 1.0)
    return out if np.ndim(out) else float(out)


@dataclass
class HermiteReport:
    grid: np.ndarray
    alpha: np.ndarray  # (P+1, P+1, len(grid))
    m: int
    tau: int
    m_per_r: np.ndarray  # 0 where no coefficient exceeded tol
    tau_per_r: np.ndarray
    tol: float
    kernel: str = ""
    P_max: int = field(init=False)

    def __post_init__(self):
        self.P_max = self.alpha.shape[0] - 1

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "grid": self.grid,
            "P_max": self.P_max,
            "tol": self.tol,
            "m": self.m,
            "tau": self.tau,
            "m_per_r": [int(v) if v else None for v in self.m_per_r],
            "tau_per_r": [int(v) if v else None for v in self.tau_per_r],
            "alpha": self.alpha,
        }

    def to_json(self, path) -> None:
        io.write_json(path, self.to_dict())


def hermite_rank(kernel: Kernel, r_grid, P_max: int = 6, tol: float = DEFAULT_RANK_TOL) -> HermiteReport:
    """Hermite ranks m (of h - U) and tau (of h1 - U) over a grid of thresholds."""
    grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty grid")
    alpha = alpha_table(kernel, P_max, grid)
    big = np.abs(alpha) > tol
    p_idx, q_idx = np.meshgrid(np.arange(P_max + 1), np.arange(P_max + 1), indexing="ij")
    degree = (p_idx + q_idx)[..., None] * np.ones(grid.size, dtype=int)
    degree = np.where(big & (degree >= 1), degree, 10**6)
    m_r = degree.min(axis=(0, 1))
    tau_deg = np.where(big[1:, 0, :], np.arange(1, P_max + 1)[:, None], 10**6)
    tau_r = tau_deg.min(axis=0)
    m_r = np.where(m_r >= 10**6, 0, m_r)
    tau_r = np.where(tau_r >= 10**6, 0, tau_r)
    if not np.any(m_r):
        raise RankUndetectedError(
            f"no Hermite coefficient of {kernel.name} above {tol:g} up to total degree {2 * P_max}"
        )
    m = int(m_r[m_r > 0].min())
    tau = int(tau_r[tau_r > 0].min()) if np.any(tau_r) else 0
    return HermiteReport(grid, alpha, m, tau, m_r, tau_r, tol, kernel.name)


def parseval_sum(alpha: np.ndarray) -> np.ndarray:
    """sum_{p,q} alpha_{p,q}^2 / (p! q!) per grid point."""
    P = alpha.shape[0] - 1
    fac = np.array([factorial(k) for k in range(P + 1)], dtype=float)
    return np.einsum("pqr,p,q->r", alpha**2, 1 / fac, 1 / fac)
