"""Pairwise robust estimators, classical comparators and their limit laws.

Every ``EstimatorReport`` carries a ``LimitDescriptor`` when a correlation model
is supplied, so a point estimate can be standardised against its asymptotic law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .asymptotics import (
    SHAMOS_C,
    LimitDescriptor,
    clt_covariance,
    gaussian_limit,
    location_limit,
    rosenblatt_limit,
    scale_limit,
    wilcoxon_limit,
)
from .errors import DomainError
from .hermite import AbsDiff
from .lrd_sim import CovarianceModel
from .uprocess import UProcessCurve, count_pairs_le, pairwise_kth, u_process

RANK_GUARD = 1e-3


@dataclass
class EstimatorReport:
    name: str
    estimate: float
    n: int
    limit: LimitDescriptor | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "estimate": self.estimate, "n": self.n,
               "limit": None if self.limit is None else self.limit.to_dict()}
        if self.extra:
            out["extra"] = self.extra
        return out


def _vector(data, min_n: int, what: str) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim != 1:
        raise DomainError(f"{what} expects a one-dimensional sample")
    if x.size < min_n:
        raise DomainError(f"{what} needs n >= {min_n}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} needs finite observations")
    return x


def _median_rank(n: int) -> int:
    return math.ceil(n * (n - 1) / 4)


# -- point estimates (cheap, used by the Monte Carlo harness) ---------------------


def hl_value(x) -> float:
    x = np.asarray(x, dtype=float)
    return pairwise_kth(x, "average", _median_rank(x.size))


def shamos_value(x) -> float:
    x = np.asarray(x, dtype=float)
    return SHAMOS_C * pairwise_kth(x, "absdiff", _median_rank(x.size))


def mean_value(x) -> float:
    return float(np.mean(x))


def sd_value(x) -> float:
    return float(np.std(x, ddof=1))


POINT_ESTIMATORS = {"hl": hl_value, "shamos": shamos_value, "mean": mean_value, "sd": sd_value}
ESTIMATOR_ALIASES = {"hodges_lehmann": "hl", "sample_mean": "mean", "sample_sd": "sd", "bl": "shamos"}


def canonical_name(name: str) -> str:
    key = name.strip().lower()
    key = ESTIMATOR_ALIASES.get(key, key)
    if key not in POINT_ESTIMATORS:
        raise DomainError(f"unknown estimator {name!r}; choose from {sorted(POINT_ESTIMATORS)}")
    return key


# -- reports ---------------------------------------------------------------------


@lru_cache(maxsize=64)
def _scale_limit_cached(model: CovarianceModel, estimator: str, sigma: float) -> LimitDescriptor:
    return scale_limit(model, estimator, sigma)


def hodges_lehmann(data, model: CovarianceModel | None = None) -> EstimatorReport:
    """Median of the pairwise averages (lower middle value when the pair count is even)."""
    x = _vector(data, 2, "hodges_lehmann")
    lim = location_limit(model, "Hodges-Lehmann") if model is not None else None
    return EstimatorReport("hl", hl_value(x), x.size, lim)


def shamos(data, model: CovarianceModel | None = None, sigma: float = 1.0) -> EstimatorReport:
    """Consistency-scaled median of pairwise distances."""
    x = _vector(data, 2, "shamos")
    lim = _scale_limit_cached(model, "shamos", float(sigma)) if model is not None else None
    return EstimatorReport("shamos", shamos_value(x), x.size, lim)


def sample_mean(data, model: CovarianceModel | None = None) -> EstimatorReport:
    x = _vector(data, 1, "sample_mean")
    lim = location_limit(model, "sample mean") if model is not None else None
    return EstimatorReport("mean", mean_value(x), x.size, lim)


def sample_sd(data, model: CovarianceModel | None = None, sigma: float = 1.0) -> EstimatorReport:
    """Standard deviation with divisor n - 1."""
    x = _vector(data, 2, "sample_sd")
    lim = _scale_limit_cached(model, "sd", float(sigma)) if model is not None else None
    return EstimatorReport("sd", sd_value(x), x.size, lim)


REPORTERS = {"hl": hodges_lehmann, "shamos": shamos, "mean": sample_mean, "sd": sample_sd}


def estimate(name: str, data, model: CovarianceModel | None = None) -> EstimatorReport:
    return REPORTERS[canonical_name(name)](data, model)


def estimate_batch(paths, names, model: CovarianceModel | None = None) -> dict[str, np.ndarray]:
    """Point estimates for each row of ``paths``, keyed by canonical estimator name."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    keys = [canonical_name(nm) for nm in names]
    return {k: np.array([POINT_ESTIMATORS[k](row) for row in paths]) for k in keys}


# -- Wilcoxon ----------------------------------------------------------------------


class WilcoxonResult(NamedTuple):
    T: int
    u1: float
    u2: float
    limit: LimitDescriptor | None = None


def wilcoxon_signed_rank(data, model: CovarianceModel | None = None) -> WilcoxonResult:
    """T_n = #{i : X_i > 0} + #{i < j : X_i + X_j > 0}, with strict inequalities.

    ``u2`` is NaN when ``n = 1`` (there are no pairs).
    """
    x = _vector(data, 1, "wilcoxon_signed_rank")
    n = x.size
    pos = int(np.count_nonzero(x > 0))
    n_pairs = n * (n - 1) // 2
    pair_pos = n_pairs - count_pairs_le(x, "sum", 0.0) if n > 1 else 0
    u1 = pos / n
    u2 = pair_pos / n_pairs if n_pairs else float("nan")
    lim = wilcoxon_limit(model) if model is not None else None
    return WilcoxonResult(pos + pair_pos, u1, u2, lim)


# -- correlation integral --------------------------------------------------------


def correlation_integral(data, grid, model: CovarianceModel | None = None) -> UProcessCurve:
    """Proportion of pairs within distance r, over ``grid``.

    With a model, the curve carries its limit: for ``D < 1/2`` the law is
    ``phi'(r / sqrt 2) (Z2 - Z1^2)`` and ``limit.profile`` holds ``phi'(r / sqrt 2)``;
    for ``D > 1/2`` it is a centred Gaussian process at rate sqrt(n) and
    ``limit.profile`` holds the pointwise variances.
    """
    x = _vector(data, 2, "correlation_integral")
    curve = u_process(x, AbsDiff, grid)
    if model is None:
        return curve
    r = curve.grid
    if np.any(np.abs(r) < RANK_GUARD):
        raise DomainError("limit descriptors need a grid bounded away from r = 0")
    D = model.D
    if D < 0.5:
        z = r / math.sqrt(2.0)
        lim = rosenblatt_limit(D, model.L_const, 1.0, -1.0, "times phi'(r/sqrt2) pointwise")
        lim.profile = (-z * norm.pdf(z)).tolist()
    else:
        var = [clt_covariance(AbsDiff, float(s), float(s), model) for s in r]
        lim = gaussian_limit(0.5, 1.0, None, D, "pointwise variances in profile")
        lim.profile = var
    curve.limit = lim
    return curve
