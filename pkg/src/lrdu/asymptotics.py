"""Limit-law constants, the short-memory covariance series, cumulants of
``a Z2 + b Z1^2`` and a sampler for that law.

Notation: ``Z1`` is the time-one value of the (unnormalised) fractional
Brownian motion with ``E[Z1^2] = 2 k(D) / ((1 - D)(2 - D))`` and ``Z2`` the
time-one Rosenblatt variable with ``E[Z2^2] = 4 k(D)^2 / ((1 - 2D)(2 - 2D))``,
where ``k(D) = B((1 - D)/2, D)``.

Cumulants
---------
The p-th cumulant of ``a Z2 + b Z1^2`` is

    2^(p-1) (p-1)! k(D)^p  sum_{S subset {1..p}} a^|S| b^(p-|S|) I_S

where ``I_S`` integrates ``prod_j |u_j - v_(j-1)|^-D`` over the unit cube with
``v_j`` identified with ``u_j`` for ``j`` in ``S`` (cyclic, ``v_0 = v_p``).
Following the identifications, each ``I_S`` factors into *path* integrals
``P_l = int prod_{i=1..l} |x_i - x_(i-1)|^-D dx_0..dx_l`` (one per index outside
``S``, ``l - 1`` being the run of ``S`` indices that follow it) or, when
``S`` is everything, a single *cycle* integral ``C_p``.

Each such integrand is translation invariant and homogeneous of degree
``-E D``.  Sorting the N points and writing the gaps as ``r * w`` with
``w`` on the simplex, the range ``r`` integrates in closed form,

    int_0^1 (1 - r) r^(N - 2 - E D) dr = 1/(N - 1 - E D) - 1/(N - E D),

and the remaining (N-2)-dimensional simplex integral has its singularities
only on the boundary, where tensor tanh-sinh quadrature converges quickly.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln
from scipy.stats import norm

from .errors import DomainError, RegimeError, TruncationError
from .hermite import AbsDiff, Kernel, alpha_table, gauss_nodes, h1
from .lrd_sim import CovarianceModel, embedding
from .rng import make_rng

ROSENBLATT_RULE = "Rosenblatt limits need D < 1/2 (non-central regime D < 1/m with m = 2)"
CLT_RULE = "the Gaussian sqrt(n) limit for a rank-2 class needs D > 1/2"
SHAMOS_C = 1.0 / (math.sqrt(2.0) * norm.ppf(0.75))


def _check_D(D):
    if not (0.0 < D < 1.0):
        raise DomainError(f"decay exponent D must lie in (0, 1), got {D!r}")


def _check_rosenblatt(D):
    _check_D(D)
    if D >= 0.5:
        raise RegimeError(f"{ROSENBLATT_RULE}; got D = {D}")


def k_of_D(D: float) -> float:
    """k(D) = B((1 - D)/2, D), through log-gamma."""
    _check_D(D)
    return math.exp(betaln((1.0 - D) / 2.0, D))


def var_fbm(D: float) -> float:
    """E[Z1^2]."""
    return 2.0 * k_of_D(D) / ((1.0 - D) * (2.0 - D))


def var_rosenblatt(D: float) -> float:
    """E[Z2^2]."""
    _check_rosenblatt(D)
    return 4.0 * k_of_D(D) ** 2 / ((1.0 - 2.0 * D) * (2.0 - 2.0 * D))


def var_hl_normalized(D: float) -> float:
    """Variance of k(D)^(-1/2) Z1, the common limit of the Hodges-Lehmann estimator and the mean."""
    _check_D(D)
    return 2.0 / ((1.0 - D) * (2.0 - D))


@dataclass(frozen=True)
class LimitVariances:
    var_Z1: float
    var_Z2: float
    var_hl_normalized: float


def limit_variances(D: float) -> LimitVariances:
    return LimitVariances(var_fbm(D), var_rosenblatt(D), var_hl_normalized(D))


# -- limit descriptors ------------------------------------------------------------


@dataclass
class LimitDescriptor:
    """``scale * n**rate_exponent * (estimate - target)`` converges to the described law.

    ``family`` is ``"gaussian"`` (centred, ``variance``) or ``"rosenblatt_mix"``
    (``a * Z2 + b * Z1**2``).  ``scale`` absorbs ``k(D)`` and the slowly varying
    constant; ``L`` is replaced by its limit.
    """

    family: str
    rate_exponent: float
    scale: float
    D: float | None
    kD: float | None
    variance: float | None = None
    a: float | None = None
    b: float | None = None
    note: str = ""
    profile: list | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def gaussian_limit(rate, scale, variance, D=None, note="") -> LimitDescriptor:
    kD = k_of_D(D) if D is not None else None
    return LimitDescriptor("gaussian", rate, scale, D, kD, variance=variance, note=note)


def rosenblatt_limit(D, L_const, a, b, note="") -> LimitDescriptor:
    _check_rosenblatt(D)
    kD = k_of_D(D)
    return LimitDescriptor("rosenblatt_mix", D, kD / L_const, D, kD, a=a, b=b, note=note)


def location_limit(model: CovarianceModel, note="") -> LimitDescriptor:
    """Rank-one location limit shared by the sample mean and Hodges-Lehmann."""
    D = model.D
    return gaussian_limit(D / 2, model.L_const ** -0.5, var_hl_normalized(D), D, note)


def wilcoxon_limit(model: CovarianceModel) -> LimitDescriptor:
    D = model.D
    return gaussian_limit(
        D / 2, model.L_const ** -0.5, var_hl_normalized(D) / math.pi, D,
        "statistic 2 T_n / (n (n - 1)) - 1/(n - 1) - 1/2",
    )


def shamos_clt_variance(model: CovarianceModel, sigma: float = 1.0, **kw) -> float:
    """Asymptotic variance of sqrt(n) (sigma_BL - sigma) when D > 1/2."""
    c = SHAMOS_C
    s = 1.0 / c
    w_var = clt_covariance(AbsDiff, s, s, model, **kw)
    return c**2 * sigma**2 * w_var / (2.0 * norm.pdf(1.0 / (c * math.sqrt(2.0))) ** 2)


def scale_limit(model: CovarianceModel, estimator: str, sigma: float = 1.0) -> LimitDescriptor:
    """Limit of the Shamos estimator or the sample standard deviation."""
    D = model.D
    if D < 0.5:
        return rosenblatt_limit(D, model.L_const, sigma / 2, -sigma / 2, f"{estimator}: (sigma/2)(Z2 - Z1^2)")
    if D == 0.5:
        raise RegimeError("scale estimators have no stated limit at D = 1/2")
    if estimator == "shamos":
        var = shamos_clt_variance(model, sigma)
    else:
        var = sigma**2 * (1.0 + 2.0 * _lag_power_sum(model, 2)[0]) / 2.0
    return gaussian_limit(0.5, 1.0, var, D, f"{estimator}: sqrt(n) Gaussian")


# -- the Gaussian sqrt(n) regime --------------------------------------------------


def _lag_power_sum(model: CovarianceModel, p: int, L_max: int = 100_000):
    """sum_{l >= 1} rho(l)^p with an integral tail beyond L_max; returns (sum, tail, rel_err)."""
    lags = np.arange(1, L_max + 1, dtype=float)
    rho = model.rho(lags)
    head = float(np.sum(rho**p))
    D, L = model.D, model.L_const
    if p * D <= 1:
        raise RegimeError(f"sum of rho(l)^{p} diverges for D = {D}")
    tail = L**p * (L_max + 0.5) ** (1 - p * D) / (p * D - 1)
    rel = abs((rho[-1] * L_max**D / L) ** p - 1.0) + 1.0 / L_max
    return head + tail, tail, rel


def clt_covariance(kernel: Kernel, s: float, t: float, model: CovarianceModel | None,
                   P_max: int = 12, L_max: int = 100_000, tol: float = 1e-6,
                   return_bound: bool = False):
    """E[W(s) W(t)] of the Gaussian limit of sqrt(n)(U_n - U).

    ``4 Cov(h1(X,s), h1(X,t))`` plus ``8 sum_l sum_p alpha_p0(s) alpha_p0(t) rho(l)^p / p!``.
    ``model=None`` means i.i.d. data.  Raises TruncationError when the combined
    lag/degree truncation bound exceeds ``tol``.
    """
    x, w = gauss_nodes(256)
    hs, ht = np.asarray(h1(kernel, x, s)), np.asarray(h1(kernel, x, t))
    ms, mt = np.sum(w * hs), np.sum(w * ht)
    lag0 = 4.0 * float(np.sum(w * (hs - ms) * (ht - mt)))
    if model is None:
        return (lag0, 0.0) if return_bound else lag0
    if model.D <= 0.5:
        raise RegimeError(f"{CLT_RULE}; got D = {model.D}")
    alpha = alpha_table(kernel, P_max, np.array([s, t]))[:, 0, :]  # (p, 2)
    if np.max(np.abs(alpha[1])) > 1e-6:
        raise RegimeError("clt_covariance needs a class of Hermite rank 2 (alpha_10 = 0)")
    fac = np.array([math.factorial(p) for p in range(P_max + 1)], dtype=float)
    cross = 0.0
    bound = 0.0
    for p in range(2, P_max + 1):
        coef = alpha[p, 0] * alpha[p, 1] / fac[p]
        if coef == 0.0:
            continue
        total, tail, rel = _lag_power_sum(model, p, L_max)
        cross += coef * total
        bound += 8.0 * abs(coef) * tail * rel
    var_s = float(np.sum(w * (hs - ms) ** 2))
    var_t = float(np.sum(w * (ht - mt) ** 2))
    rem_s = max(var_s - float(np.sum(alpha[1:, 0] ** 2 / fac[1:])), 0.0)
    rem_t = max(var_t - float(np.sum(alpha[1:, 1] ** 2 / fac[1:])), 0.0)
    bound += 8.0 * math.sqrt(rem_s * rem_t) * _lag_power_sum(model, P_max + 1, L_max)[0]
    if bound > tol:
        raise TruncationError("Hermite/lag series truncation too coarse for clt_covariance", bound)
    value = lag0 + 8.0 * cross
    return (value, bound) if return_bound else value


# -- cumulants of a Z2 + b Z1^2 ---------------------------------------------------


@dataclass(frozen=True)
class CumulantRequest:
    p: int
    a: float
    b: float
    D: float
    method: str = "quadrature"
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise DomainError("cumulant order must be at least 2")
        if self.method not in ("quadrature", "mc"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.method == "quadrature" and self.p > 4:
            raise DomainError("quadrature cumulants are limited to order p <= 4")
        _check_rosenblatt(self.D)


def _tanh_sinh(h: float, tmax: float = 3.3):
    t = np.arange(-tmax, tmax + h / 2, h)
    u = 0.5 * np.pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-2.0 * u))
    xc = 1.0 / (1.0 + np.exp(2.0 * u))
    e = np.exp(-2.0 * np.abs(u))
    w = h * 0.25 * np.pi * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
    return x, xc, w


def _simplex_sum(N: int, edges, D: float, h: float) -> float:
    """Sum over vertex orderings of the simplex integral of prod_edges |z_a - z_b|^-D."""
    if N == 2:
        return 2.0
    x, xc, w = _tanh_sinh(h)
    grids = np.meshgrid(*([np.arange(x.size)] * (N - 2)), indexing="ij")
    idx = [g.ravel() for g in grids]
    rem = np.ones(idx[0].size)
    weight = np.ones(idx[0].size)
    gaps = []
    for i, ii in enumerate(idx):
        gaps.append(rem * x[ii])
        weight *= w[ii] * xc[ii] ** (N - 3 - i)
        rem = rem * xc[ii]
    gaps.append(rem)
    gaps = np.array(gaps)
    logdist = {}
    for a in range(N):
        csum = np.zeros_like(rem)
        for b in range(a + 1, N):
            csum = csum + gaps[b - 1]
            logdist[a, b] = np.log(csum)
    total = 0.0
    for perm in itertools.permutations(range(N)):
        lg = 0.0
        for u, v in edges:
            a, b = sorted((perm[u], perm[v]))
            lg = lg + logdist[a, b]
        total += float(np.sum(weight * np.exp(-D * lg)))
    return total


@lru_cache(maxsize=256)
def homogeneous_integral(N: int, edges: tuple, D: float, h: float = 1 / 8) -> float:
    """int_{[0,1]^N} prod_{(u,v) in edges} |x_u - x_v|^-D dx."""
    E = len(edges)
    if N - 1 - E * D <= 0:
        raise RegimeError(f"integral with {N} points and {E} singular factors diverges at D = {D}")
    radial = 1.0 / (N - 1 - E * D) - 1.0 / (N - E * D)
    return radial * _simplex_sum(N, edges, D, h)


def path_integral(length: int, D: float) -> float:
    """P_l: a chain of ``length`` factors through length+1 free points."""
    if length == 1:
        return 2.0 / ((1.0 - D) * (2.0 - D))
    if length == 2:
        return (2.0 / (3.0 - 2.0 * D) + 2.0 * math.exp(betaln(2 - D, 2 - D))) / (1.0 - D) ** 2
    edges = tuple((i, i + 1) for i in range(length))
    return homogeneous_integral(length + 1, edges, D)


def cycle_integral(p: int, D: float) -> float:
    """C_p: p factors closing a cycle through p free points."""
    if p == 2:
        return 2.0 / ((1.0 - 2.0 * D) * (2.0 - 2.0 * D))
    if p == 3:
        return 6.0 * math.exp(betaln(1 - D, 1 - D)) * (1.0 / (2 - 3 * D) - 1.0 / (3 - 3 * D))
    edges = tuple((i, (i + 1) % p) for i in range(p))
    return homogeneous_integral(p, edges, D)


def subset_structure(p: int, S: frozenset) -> tuple:
    """('cycle', p) when S is everything, else ('paths', sorted path lengths)."""
    if len(S) == p:
        return ("cycle", p)
    lengths = []
    for j in range(p):
        if j in S:
            continue
        length = 1
        k = (j + 1) % p
        while k in S:
            length += 1
            k = (k + 1) % p
        lengths.append(length)
    return ("paths", tuple(sorted(lengths)))


def _structure_value(struct, D) -> float:
    kind, spec = struct
    if kind == "cycle":
        return cycle_integral(spec, D)
    return math.prod(path_integral(l, D) for l in spec)


def _mc_integrand(p: int, S: frozenset, D: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    vv = np.where(np.isin(np.arange(p), list(S))[None, :], u, v)
    out = np.ones(u.shape[0])
    for j in range(p):
        out *= np.abs(u[:, j] - vv[:, j - 1]) ** (-D)
    return out


def limit_cumulant_with_error(req: CumulantRequest) -> tuple[float, float]:
    """(kappa_p, standard error); the error is 0 for quadrature."""
    p, a, b, D = req.p, req.a, req.b, req.D
    pref = 2.0 ** (p - 1) * math.factorial(p - 1) * k_of_D(D) ** p
    subsets = [frozenset(c) for r in range(p + 1) for c in itertools.combinations(range(p), r)]
    if req.method == "quadrature":
        total = 0.0
        for S in subsets:
            coef = a ** len(S) * b ** (p - len(S))
            if coef != 0.0:
                total += coef * _structure_value(subset_structure(p, S), D)
        return pref * total, 0.0
    rng = make_rng(req.seed, "cumulant-mc", p)
    acc = np.zeros(req.samples)
    chunk = 200_000
    for start in range(0, req.samples, chunk):
        m = min(chunk, req.samples - start)
        u, v = rng.random((m, p)), rng.random((m, p))
        vals = np.zeros(m)
        for S in subsets:
            coef = a ** len(S) * b ** (p - len(S))
            if coef != 0.0:
                vals += coef * _mc_integrand(p, S, D, u, v)
        acc[start:start + m] = vals
    return pref * float(acc.mean()), pref * float(acc.std(ddof=1) / math.sqrt(req.samples))


def limit_cumulant(req: CumulantRequest) -> float:
    """p-th cumulant of ``a Z2 + b Z1^2``.

    Plain Monte Carlo (``method="mc"``) has finite variance only while the most
    singular term is square integrable (``4 D < 1`` for ``p = 2``).
    """
    return limit_cumulant_with_error(req)[0]


# -- sampling a Z2 + b Z1^2 -------------------------------------------------------


def sample_limit_law(a: float, b: float, D: float, n_approx: int = 2**13, reps: int = 10_000,
                     seed: int = 0, model: CovarianceModel | None = None,
                     workers: int | None = None, chunk: int = 128) -> np.ndarray:
    """Draws of ``k(D) n^(D-2) / L [a n sum(X_i^2 - 1) + b (sum X_i)^2]`` from exact paths.

    The default path model is fractional Gaussian noise with ``H = 1 - D/2``.
    Replication ``i`` uses its own stream, so results do not depend on
    ``workers`` or ``chunk``.
    """
    _check_rosenblatt(D)
    if n_approx < 2**10:
        raise DomainError("n_approx must be at least 2^10")
    if model is None:
        model = CovarianceModel.fgn(1.0 - D / 2.0)
    elif abs(model.D - D) > 1e-12:
        raise DomainError(f"model decay exponent {model.D} does not match D = {D}")
    n = int(n_approx)
    gen = embedding(model, n)
    norm_const = k_of_D(D) * n ** (D - 2.0) / model.L_const

    def run(lo, hi):
        eps = np.stack([make_rng(seed, "limit-law", i).standard_normal(gen.input_dim) for i in range(lo, hi)])
        X = gen.transform(eps)
        quad = a * n * np.sum(X * X - 1.0, axis=1) + b * np.sum(X, axis=1) ** 2
        return norm_const * quad

    bounds = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda bd: run(*bd), bounds))
    else:
        parts = [run(*bd) for bd in bounds]
    return np.concatenate(parts) if parts else np.empty(0)


def cumulant_table(D: float, a: float = 1.0, b: float = 0.0, orders=(2, 3, 4)) -> dict:
    """k(D), the limit variances and the cumulants of ``a Z2 + b Z1^2`` as a JSON-ready dict."""
    out = {"D": D, "k": k_of_D(D), "var_Z1": var_fbm(D), "var_hl_normalized": var_hl_normalized(D)}
    if D < 0.5:
        out["var_Z2"] = var_rosenblatt(D)
        out["cumulants"] = {
            str(p): limit_cumulant(CumulantRequest(p, a, b, D)) for p in orders
        }
        out["a"], out["b"] = a, b
    return out


def sample_cumulants(x: np.ndarray):
    """Sample (variance, third central moment) and their standard errors."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = x - x.mean()
    m2, m3 = np.mean(c**2), np.mean(c**3)
    m4, m6 = np.mean(c**4), np.mean(c**6)
    var = m2 * n / (n - 1)
    k3 = m3 * n**2 / ((n - 1) * (n - 2))
    se_var = math.sqrt(max(m4 - m2**2, 0.0) / n)
    se_k3 = math.sqrt(max(m6 - m3**2 - 6 * m4 * m2 + 9 * m2**3, 0.0) / n)
    return var, k3, se_var, se_k3
