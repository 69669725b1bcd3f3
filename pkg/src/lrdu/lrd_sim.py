"""Long-memory Gaussian correlation models, exact simulation and outlier contamination.

Two correlation families are supported, both normalised to unit variance and
both with correlations decaying like ``L * k**-D``:

* fractional Gaussian noise, ``D = 2 - 2H``;
* Gaussian ARFIMA(1, d, 0), ``D = 1 - 2d``.

Paths are drawn by circulant embedding, which is exact: the generator is a
fixed linear map applied to i.i.d. standard normals, so its implied covariance
can be checked entrywise.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import io
from .errors import DomainError, EmbeddingError, NumericError
from .rng import make_rng

EMBEDDING_TOL = 1e-10
ARFIMA_TAIL_TOL = 1e-14
ARFIMA_MAX_TERMS = 1_000_000


def _check_hurst(H):
    if not (0.5 < H < 1.0):
        raise DomainError(f"Hurst exponent must lie in (1/2, 1), got {H!r}")


def fgn_correlation(H: float, k):
    """Autocorrelation of unit-variance fractional Gaussian noise at lag(s) ``k``."""
    _check_hurst(H)
    k = np.abs(np.asarray(k, dtype=float))
    out = np.empty_like(k)
    small = k < 2
    ks = k[small]
    out[small] = 0.5 * ((ks + 1) ** (2 * H) - 2 * ks ** (2 * H) + np.abs(ks - 1) ** (2 * H))
    # second difference of k**2H written with expm1/log1p to avoid cancellation
    kl = k[~small]
    u = 1.0 / kl
    out[~small] = 0.5 * kl ** (2 * H) * (
        np.expm1(2 * H * np.log1p(u)) + np.expm1(2 * H * np.log1p(-u))
    )
    return out if out.ndim else float(out)


def _fi_correlation(d: float, j):
    """Autocorrelation of ARFIMA(0, d, 0), Gamma-ratio form, lags may be negative."""
    j = np.abs(np.asarray(j, dtype=float))
    if d == 0.0:
        return (j == 0).astype(float)
    logr = gammaln(j + d) - gammaln(j + 1 - d) + gammaln(1 - d) - gammaln(d)
    return np.exp(logr)


def _arfima_terms(phi: float) -> int:
    a = abs(phi)
    if a == 0.0:
        return 0
    # tail of the two-sided geometric weights, bounded by 2 a^(M+1)/(1-a)
    m = math.ceil((math.log(ARFIMA_TAIL_TOL * (1 - a) / 2)) / math.log(a))
    if m > ARFIMA_MAX_TERMS:
        raise NumericError(
            f"AR coefficient {phi} needs {m} filter terms; the bilateral "
            f"convolution cannot be truncated below {ARFIMA_TAIL_TOL}"
        )
    return max(m, 1)


def _arfima_unnormalised(phi: float, d: float, k):
    k = np.asarray(k, dtype=float)
    m = _arfima_terms(phi)
    shifts = np.arange(-m, m + 1, dtype=float)
    weights = np.abs(phi) ** np.abs(shifts) * np.sign(phi) ** np.abs(shifts)
    flat = k.reshape(-1, 1)
    out = (_fi_correlation(d, flat + shifts) * weights).sum(axis=1)
    return out.reshape(k.shape)


def arfima_correlation(phi: float, d: float, max_lag: int) -> np.ndarray:
    """Correlations rho(0..max_lag) of the stationary ARFIMA(1, d, 0) solution.

    The fractional-noise autocovariance is convolved with the AR(1) two-sided
    geometric kernel ``phi**|m|`` and the sum truncated once the kernel tail
    drops below 1e-14.
    """
    _check_arfima(phi, d)
    lags = np.arange(int(max_lag) + 1, dtype=float)
    s = _arfima_unnormalised(phi, d, lags)
    return s / s[0]


def _check_arfima(phi, d):
    if not (-1.0 < phi < 1.0):
        raise DomainError(f"AR coefficient must lie in (-1, 1), got {phi!r}")
    if not (0.0 < d < 0.5):
        raise DomainError(f"memory parameter d must lie in (0, 1/2), got {d!r}")


@dataclass(frozen=True)
class CovarianceModel:
    """Stationary unit-variance Gaussian correlation model with power-law decay.

    Build with :meth:`fgn` or :meth:`arfima`.
    """

    kind: str
    H: float | None = None
    phi: float | None = None
    d: float | None = None

    def __post_init__(self):
        if self.kind == "fgn":
            if self.H is None:
                raise DomainError("fgn model needs H")
            _check_hurst(self.H)
        elif self.kind == "arfima":
            if self.phi is None or self.d is None:
                raise DomainError("arfima model needs phi and d")
            _check_arfima(self.phi, self.d)
        else:
            raise DomainError(f"unknown model kind {self.kind!r}")

    @classmethod
    def fgn(cls, H: float) -> "CovarianceModel":
        return cls("fgn", H=float(H))

    @classmethod
    def arfima(cls, phi: float, d: float) -> "CovarianceModel":
        return cls("arfima", phi=float(phi), d=float(d))

    @classmethod
    def with_decay(cls, D: float, kind: str = "fgn", phi: float = 0.0) -> "CovarianceModel":
        if not (0.0 < D < 1.0):
            raise DomainError(f"decay exponent must lie in (0, 1), got {D!r}")
        if kind == "fgn":
            return cls.fgn(1.0 - D / 2.0)
        return cls.arfima(phi, (1.0 - D) / 2.0)

    @property
    def D(self) -> float:
        if self.kind == "fgn":
            return 2.0 - 2.0 * self.H
        return 1.0 - 2.0 * self.d

    @functools.cached_property
    def L_const(self) -> float:
        """Limit of rho(k) * k**D."""
        if self.kind == "fgn":
            return self.H * (2 * self.H - 1)
        phi, d = self.phi, self.d
        fi_const = math.exp(gammaln(1 - d) - gammaln(d))
        s0 = float(_arfima_unnormalised(phi, d, np.array([0.0]))[0])
        return fi_const * (1 + phi) / (1 - phi) / s0

    def rho(self, k):
        if self.kind == "fgn":
            return fgn_correlation(self.H, k)
        k_arr = np.asarray(k, dtype=float)
        s0 = _arfima_unnormalised(self.phi, self.d, np.array([0.0]))[0]
        out = _arfima_unnormalised(self.phi, self.d, np.abs(k_arr)) / s0
        return out if out.ndim else float(out)

    def acf(self, max_lag: int) -> np.ndarray:
        if self.kind == "fgn":
            return fgn_correlation(self.H, np.arange(int(max_lag) + 1))
        return arfima_correlation(self.phi, self.d, max_lag)

    def params(self) -> dict:
        if self.kind == "fgn":
            return {"H": self.H}
        return {"phi": self.phi, "d": self.d}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    @classmethod
    def from_dict(cls, obj: dict) -> "CovarianceModel":
        try:
            kind = obj["kind"]
            params = dict(obj.get("params", {}))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed model description: {obj!r}") from exc
        if kind == "fgn":
            return cls.fgn(params["H"])
        if kind == "arfima":
            return cls.arfima(params["phi"], params["d"])
        raise DomainError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class ContaminationSpec:
    omega: float
    p: float
    scheme: str = "bernoulli_half"

    SCHEMES = ("bernoulli_half", "rademacher")

    def __post_init__(self):
        if self.scheme not in self.SCHEMES:
            raise DomainError(f"unknown contamination scheme {self.scheme!r}")
        if not (0.0 <= self.p < 1.0):
            raise DomainError(f"contamination probability must lie in [0, 1), got {self.p!r}")
        if not np.isfinite(self.omega):
            raise DomainError("outlier magnitude must be finite")

    def to_dict(self) -> dict:
        return {"omega": self.omega, "p": self.p, "scheme": self.scheme}

    @classmethod
    def from_dict(cls, obj: dict) -> "ContaminationSpec":
        return cls(float(obj["omega"]), float(obj["p"]), obj.get("scheme", "bernoulli_half"))

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        if self.scheme == "bernoulli_half":
            return (u < self.p / 2).astype(float)
        return np.where(u < self.p / 2, -1.0, np.where(u < self.p, 1.0, 0.0))


@dataclass
class SamplePath:
    values: np.ndarray
    model: CovarianceModel | None = None
    seed: int | None = None
    contamination: ContaminationSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise DomainError("a sample path needs at least 2 observations")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sample path contains non-finite values")

    def __len__(self):
        return self.values.size

    def sidecar(self) -> dict:
        return {
            "n": int(self.values.size),
            "model": self.model.to_dict() if self.model else None,
            "seed": self.seed,
            "contamination": self.contamination.to_dict() if self.contamination else None,
            **self.meta,
        }

    def to_csv(self, path) -> Path:
        """Write the values as a headerless single-column CSV plus a ``.json`` sidecar."""
        path = Path(path)
        io.write_csv(path, {"x": self.values}, header=False)
        io.write_json(path.with_suffix(".json"), self.sidecar())
        return path

    @classmethod
    def from_csv(cls, path) -> "SamplePath":
        path = Path(path)
        values = io.read_column(path)
        side = path.with_suffix(".json")
        model = seed = contamination = None
        if side.exists():
            meta = io.read_json(side)
            if meta.get("model"):
                model = CovarianceModel.from_dict(meta["model"])
            seed = meta.get("seed")
            if meta.get("contamination"):
                contamination = ContaminationSpec.from_dict(meta["contamination"])
        return cls(values, model, seed, contamination)


class CirculantEmbedding:
    """Exact generator for a stationary Gaussian vector of length ``n``.

    The size-n Toeplitz correlation matrix is embedded in a circulant of size
    ``m = 2(n - 1)``; :meth:`transform` maps ``2m`` i.i.d. standard normals to
    a path, linearly.
    """

    def __init__(self, model: CovarianceModel, n: int):
        if n < 2:
            raise DomainError("path length must be at least 2")
        self.model = model
        self.n = int(n)
        r = model.acf(self.n - 1)
        row = np.concatenate([r, r[-2:0:-1]])
        self.m = row.size
        eig = np.fft.fft(row).real
        lo = eig.min()
        if lo < -EMBEDDING_TOL:
            raise EmbeddingError(lo, self.n)
        self.eigenvalues = np.clip(eig, 0.0, None)
        self._scale = np.sqrt(self.eigenvalues / self.m)

    @property
    def input_dim(self) -> int:
        return 2 * self.m

    def transform(self, eps: np.ndarray) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        z = self._scale * (eps[..., : self.m] + 1j * eps[..., self.m :])
        return np.fft.fft(z, axis=-1).real[..., : self.n]

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = (self.input_dim,) if size is None else (int(size), self.input_dim)
        return self.transform(rng.standard_normal(shape))


@functools.lru_cache(maxsize=32)
def embedding(model: CovarianceModel, n: int) -> CirculantEmbedding:
    return CirculantEmbedding(model, n)


def simulate_gaussian(model: CovarianceModel, n: int, seed: int, index: int = 0) -> SamplePath:
    """Draw one exact path; identical (model, n, seed, index) give identical paths."""
    gen = embedding(model, int(n))
    values = gen.sample(make_rng(seed, "simulate", index))
    return SamplePath(values, model, seed, meta={"index": index} if index else {})


def simulate_batch(model: CovarianceModel, n: int, seed: int, indices, purpose: str = "simulate") -> np.ndarray:
    """Paths for several replication indices, row ``i`` from stream ``(seed, purpose, indices[i])``."""
    gen = embedding(model, int(n))
    eps = np.stack([make_rng(seed, purpose, int(i)).standard_normal(gen.input_dim) for i in indices])
    return gen.transform(eps)


def contaminate(path: SamplePath, spec: ContaminationSpec, seed: int, index: int = 0) -> SamplePath:
    """Additive outliers ``Y + omega * W`` with ``W`` i.i.d. and independent of ``Y``."""
    w = spec.draw(make_rng(seed, "contaminate", index), path.values.size)
    return SamplePath(path.values + spec.omega * w, path.model, path.seed, spec, dict(path.meta))


def contaminate_values(values: np.ndarray, spec: ContaminationSpec, seed: int, index: int = 0) -> np.ndarray:
    w = spec.draw(make_rng(seed, "contaminate", index), np.shape(values)[-1])
    return values + spec.omega * w
