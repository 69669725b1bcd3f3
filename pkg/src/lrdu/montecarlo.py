"""Replicated estimator experiments on simulated long-memory paths.

Replication ``r`` draws its path from the stream ``(seed, "simulate", r)`` and
its outliers from ``(seed, "contaminate", r)``, so a run is reproducible and
independent of chunking or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import io
from .errors import DomainError, LrduError
from .estimators import POINT_ESTIMATORS, canonical_name
from .asymptotics import location_limit, scale_limit
from .lrd_sim import ContaminationSpec, CovarianceModel, embedding
from .rng import make_rng

LOCATION = {"hl", "mean"}
TARGETS = {"hl": 0.0, "mean": 0.0, "shamos": 1.0, "sd": 1.0}


@dataclass
class McConfig:
    model: CovarianceModel
    n: int = 600
    reps: int = 1000
    estimators: list = field(default_factory=lambda: ["hl", "mean"])
    contamination: ContaminationSpec | None = None
    seed: int = 0
    grid_sizes: list | None = None
    workers: int = 1
    chunk: int = 64

    def __post_init__(self):
        self.estimators = [canonical_name(e) for e in self.estimators]
        if self.reps < 2:
            raise DomainError("reps must be at least 2")
        if self.n < 2:
            raise DomainError("path length must be at least 2")
        if self.grid_sizes is not None:
            self.grid_sizes = [int(g) for g in self.grid_sizes]

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "n": self.n,
            "reps": self.reps,
            "estimators": list(self.estimators),
            "contamination": None if self.contamination is None else self.contamination.to_dict(),
            "seed": self.seed,
            "grid_sizes": self.grid_sizes,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "McConfig":
        try:
            cont = obj.get("contamination")
            return cls(
                model=CovarianceModel.from_dict(obj["model"]),
                n=int(obj.get("n", 600)),
                reps=int(obj.get("reps", 1000)),
                estimators=list(obj.get("estimators", ["hl", "mean"])),
                contamination=None if cont is None else ContaminationSpec.from_dict(cont),
                seed=int(obj.get("seed", 0)),
                grid_sizes=obj.get("grid_sizes"),
                workers=int(obj.get("workers", 1)),
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed experiment configuration: {exc}") from exc


@dataclass
class DensityCurve:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float
    point_mass: bool = False

    def mass(self) -> float:
        return float(np.trapezoid(self.density, self.x)) if not self.point_mass else 1.0


@dataclass
class McResult:
    config: McConfig
    draws: dict[str, np.ndarray]
    summaries: dict[str, dict]
    densities: dict[str, DensityCurve]
    warnings: dict[str, list[str]]

    def summary_dict(self) -> dict:
        return {"config": self.config.to_dict(), "summaries": self.summaries, "warnings": self.warnings}

    def write(self, outdir) -> Path:
        """draws.csv, summary.json and one density_<name>.csv per estimator."""
        outdir = Path(outdir)
        io.write_csv(outdir / "draws.csv", self.draws)
        for name, curve in self.densities.items():
            io.write_csv(outdir / f"density_{name}.csv", {"x": curve.x, "density": curve.density})
        io.write_json(outdir / "summary.json", self.summary_dict())
        return outdir


# -- core loop ---------------------------------------------------------------------


def simulate_replications(config: McConfig, lo: int, hi: int, n: int | None = None) -> np.ndarray:
    """Rows ``lo..hi-1`` of the experiment's (optionally contaminated) paths."""
    n = config.n if n is None else n
    gen = embedding(config.model, n)
    rows = []
    for r in range(lo, hi):
        y = gen.transform(make_rng(config.seed, "simulate", r).standard_normal(gen.input_dim))
        if config.contamination is not None:
            w = config.contamination.draw(make_rng(config.seed, "contaminate", r), n)
            y = y + config.contamination.omega * w
        rows.append(y)
    return np.array(rows)


def _chunk_draws(config: McConfig, n: int, lo: int, hi: int) -> dict[str, np.ndarray]:
    paths = simulate_replications(config, lo, hi, n)
    return {e: np.array([POINT_ESTIMATORS[e](row) for row in paths]) for e in config.estimators}


def collect_draws(config: McConfig, n: int | None = None, workers: int | None = None) -> dict[str, np.ndarray]:
    n = config.n if n is None else int(n)
    workers = config.workers if workers is None else workers
    bounds = [(lo, min(lo + config.chunk, config.reps)) for lo in range(0, config.reps, config.chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _chunk_draws(config, n, *b), bounds))
    else:
        parts = [_chunk_draws(config, n, *b) for b in bounds]
    return {e: np.concatenate([p[e] for p in parts]) for e in config.estimators}


def standardization(name: str, model: CovarianceModel, n: int) -> tuple[float, str]:
    """Multiplier turning ``estimate - target`` into a draw from the limit law."""
    lim = location_limit(model) if name in LOCATION else scale_limit(model, name)
    return lim.scale * n**lim.rate_exponent, lim.family


def run_experiment(config: McConfig, workers: int | None = None) -> McResult:
    draws = collect_draws(config, workers=workers)
    summaries, densities, warnings = {}, {}, {}
    for name, x in draws.items():
        target = TARGETS[name]
        warn = []
        summ = {
            "target": target,
            "mean": float(np.mean(x)),
            "bias": float(np.mean(x) - target),
            "bias_se": float(np.std(x, ddof=1) / math.sqrt(x.size)),
            "variance": float(np.var(x, ddof=1)),
        }
        try:
            mult, family = standardization(name, config.model, config.n)
            summ["standardization"] = {"multiplier": mult, "family": family}
            z = mult * (x - target)
        except LrduError as exc:
            warn.append(f"no limit law for standardization: {exc}")
            z = x - target
        try:
            densities[name] = empirical_density(z)
            if densities[name].point_mass:
                warn.append("draws are constant; density reported as a point mass")
        except DomainError as exc:
            warn.append(str(exc))
        summaries[name] = summ
        warnings[name] = warn
    return McResult(config, draws, summaries, densities, warnings)


# -- density, distances and rates -----------------------------------------------------


def silverman_bandwidth(x: np.ndarray) -> float:
    return 1.06 * float(np.std(x, ddof=1)) * x.size ** (-0.2)


def empirical_density(samples, bandwidth: float | None = None, max_points: int = 4096) -> DensityCurve:
    """Gaussian-kernel density on a grid reaching 5 bandwidths past the data."""
    x = np.asarray(samples, dtype=float)
    if x.size < 30:
        raise DomainError(f"density estimation needs at least 30 samples, got {x.size}")
    if np.ptp(x) == 0.0:
        return DensityCurve(np.array([x[0]]), np.array([np.inf]), 0.0, point_mass=True)
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise DomainError("bandwidth must be positive")
    lo, hi = x.min() - 5 * h, x.max() + 5 * h
    points = int(min(max(512, math.ceil(4 * (hi - lo) / h)), max_points))
    grid = np.linspace(lo, hi, points)
    dens = np.zeros_like(grid)
    for start in range(0, x.size, 1024):
        part = x[start:start + 1024]
        dens += stats.norm.pdf((grid[:, None] - part[None, :]) / h).sum(axis=1)
    return DensityCurve(grid, dens / (x.size * h), h)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_distance needs two nonempty samples")
    return float(stats.ks_2samp(a, b).statistic)


@dataclass
class RateFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    level: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rate_regression(grid_sizes, sds, level: float = 0.95) -> RateFit:
    """Least-squares slope of log(sd) on log(n) with a t-based confidence interval."""
    n = np.asarray(grid_sizes, dtype=float)
    s = np.asarray(sds, dtype=float)
    if n.size != s.size:
        raise DomainError("grid sizes and standard deviations differ in length")
    if n.size < 4:
        raise DomainError(f"rate regression needs at least 4 sizes, got {n.size}")
    if n.max() / n.min() < 4:
        raise DomainError("grid sizes must span at least two octaves")
    if np.any(s <= 0) or np.any(n <= 0):
        raise DomainError("sizes and standard deviations must be positive")
    fit = stats.linregress(np.log(n), np.log(s))
    q = stats.t.ppf(0.5 + level / 2, n.size - 2)
    return RateFit(fit.slope, fit.intercept, fit.stderr, fit.slope - q * fit.stderr,
                   fit.slope + q * fit.stderr, level)


@dataclass
class RateStudy:
    grid_sizes: list
    sds: dict[str, list]
    fits: dict[str, RateFit]

    def to_dict(self) -> dict:
        return {"grid_sizes": self.grid_sizes, "sds": self.sds,
                "fits": {k: v.to_dict() for k, v in self.fits.items()}}


def rate_study(config: McConfig, workers: int | None = None) -> RateStudy:
    """Standard deviation of each estimator across ``config.grid_sizes``.

    All sizes share the replication streams, which correlates the per-size
    errors and steadies the fitted slope.
    """
    if not config.grid_sizes:
        raise DomainError("rate_study needs grid_sizes")
    sds = {e: [] for e in config.estimators}
    for n in config.grid_sizes:
        draws = collect_draws(config, n=n, workers=workers)
        for e, x in draws.items():
            sds[e].append(float(np.std(x, ddof=1)))
    fits = {e: rate_regression(config.grid_sizes, v) for e, v in sds.items()}
    return RateStudy(list(config.grid_sizes), sds, fits)
