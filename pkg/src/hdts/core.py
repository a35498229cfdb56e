"""Shared substrate: series containers, lagged moments, thresholding and kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.linalg import toeplitz

from .errors import (
    BandwidthUndefined,
    DegenerateColumn,
    InvalidData,
    InvalidThreshold,
    LagOutOfRange,
    ShapeError,
)

__all__ = [
    "Series",
    "KernelSpec",
    "as_series",
    "lag_autocovariance",
    "lag_autocorrelation",
    "hard_threshold",
    "kernel_eval",
    "andrews_bandwidth",
    "theta_matrix",
    "KERNELS",
]


@dataclass(frozen=True)
class Series:
    """An ``n x p`` time-major panel with optional column labels."""

    data: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = as_series(self.data)
        object.__setattr__(self, "data", arr)
        if self.names and len(self.names) != arr.shape[1]:
            raise ShapeError(f"{len(self.names)} names for {arr.shape[1]} columns")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


ArrayLike = Union[np.ndarray, Series, Sequence]


def as_series(y: ArrayLike, min_n: int = 2) -> np.ndarray:
    """Validate ``y`` and return it as a float ``(n, p)`` array.

    One-dimensional input is treated as a single column.
    """
    if isinstance(y, Series):
        return y.data
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d (n, p) panel, got shape {arr.shape}")
    n, p = arr.shape
    if n < min_n or p < 1:
        raise ShapeError(f"need n >= {min_n} and p >= 1, got n={n}, p={p}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidData(f"non-finite value at row {bad[0]}, column {bad[1]}")
    return arr


def _check_lag(k: int, n: int) -> int:
    if int(k) != k or k < 0 or k > n - 2:
        raise LagOutOfRange(f"lag {k} outside [0, {n - 2}]")
    return int(k)


def lag_autocovariance(y: ArrayLike, k: int) -> np.ndarray:
    r"""Lag-``k`` sample autocovariance matrix.

    Returns ``(n-k)^{-1} \sum_t (y_{t+k} - ybar)(y_t - ybar)^T`` where ``ybar`` is
    the full-sample mean, for every ``k`` including zero.
    """
    y = as_series(y)
    n = y.shape[0]
    k = _check_lag(k, n)
    yc = y - y.mean(axis=0)
    return yc[k:].T @ yc[: n - k] / (n - k)


def _column_sd(yc: np.ndarray) -> np.ndarray:
    var = np.mean(yc * yc, axis=0)
    scale = np.maximum(np.max(np.abs(yc), axis=0), 1.0)
    zero = var <= (np.finfo(float).eps * scale) ** 2
    if np.any(zero):
        raise DegenerateColumn(int(np.flatnonzero(zero)[0]))
    return np.sqrt(var)


def lag_autocorrelation(y: ArrayLike, k: int) -> np.ndarray:
    """Lag-``k`` cross-correlation matrix ``D^{-1/2} Sigma(k) D^{-1/2}``.

    ``D`` is the diagonal of the lag-0 autocovariance. Entry ``(i, j)`` is the
    correlation between ``y_{i, t+k}`` and ``y_{j, t}``.
    """
    y = as_series(y)
    n = y.shape[0]
    k = _check_lag(k, n)
    yc = y - y.mean(axis=0)
    sd = _column_sd(yc)
    z = yc / sd
    out = z[k:].T @ z[: n - k] / (n - k)
    if k == 0:
        np.fill_diagonal(out, 1.0)
    return out


def hard_threshold(w: np.ndarray, delta: float) -> np.ndarray:
    """Zero every entry with absolute value strictly below ``delta``."""
    if delta < 0 or not np.isfinite(delta):
        raise InvalidThreshold(f"threshold must be a finite nonnegative number, got {delta}")
    w = np.asarray(w, dtype=float)
    if delta == 0:
        return w.copy()
    return np.where(np.abs(w) >= delta, w, 0.0)


# (q, c_q) pairs for the AR(1) plug-in bandwidth
_ANDREWS = {
    "bartlett": (1, 1.1447),
    "parzen": (2, 2.6614),
    "qs": (2, 1.3221),
}

_ALIASES = {
    "qs": "qs",
    "quadratic-spectral": "qs",
    "quadratic_spectral": "qs",
    "par": "parzen",
    "parzen": "parzen",
    "bart": "bartlett",
    "bartlett": "bartlett",
}

KERNELS = tuple(_ANDREWS)


def _kernel_name(kind: str) -> str:
    try:
        return _ALIASES[str(kind).lower()]
    except KeyError:
        raise ValueError(f"unknown kernel {kind!r}; choose from {sorted(_ALIASES)}") from None


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus bandwidth (a positive float or ``"auto"``)."""

    kind: str = "qs"
    bandwidth: Union[float, str] = "auto"

    def __post_init__(self):
        object.__setattr__(self, "kind", _kernel_name(self.kind))
        bw = self.bandwidth
        if isinstance(bw, str):
            if bw != "auto":
                raise ValueError(f"bandwidth must be positive or 'auto', got {bw!r}")
        elif not (np.isfinite(bw) and bw > 0):
            raise ValueError(f"bandwidth must be positive or 'auto', got {bw!r}")


def kernel_eval(spec: Union[KernelSpec, str], x) -> np.ndarray | float:
    """Evaluate the kernel at ``x`` (scalar or array)."""
    kind = spec.kind if isinstance(spec, KernelSpec) else _kernel_name(spec)
    xa = np.abs(np.asarray(x, dtype=float))
    if kind == "bartlett":
        out = np.clip(1.0 - xa, 0.0, None)
    elif kind == "parzen":
        out = np.where(
            xa <= 0.5,
            1.0 - 6.0 * xa**2 + 6.0 * xa**3,
            np.where(xa <= 1.0, 2.0 * (1.0 - xa) ** 3, 0.0),
        )
    else:
        z = 6.0 * np.pi * xa / 5.0
        with np.errstate(divide="ignore", invalid="ignore"):
            qs = 25.0 / (12.0 * np.pi**2 * xa**2) * (np.sin(z) / z - np.cos(z))
        # series expansion near zero avoids cancellation
        small = 1.0 - z**2 / 10.0 + z**4 / 280.0
        out = np.where(xa < 1e-3, small, qs)
    return float(out) if np.ndim(x) == 0 else out


def andrews_bandwidth(scores: np.ndarray, kind: str = "qs") -> float:
    """AR(1) plug-in bandwidth with unit weights across columns.

    Each non-constant column gets a first-order autoregression; the ratios are
    pooled into Andrews' ``alpha(q)`` and the bandwidth is
    ``c_q * (alpha(q) * n)^(1 / (2q + 1))``, floored at 1 and capped at ``n / 2``.
    """
    kind = _kernel_name(kind)
    s = np.asarray(scores, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    n = s.shape[0]
    if n < 4:
        raise ShapeError(f"need at least 4 rows for bandwidth selection, got {n}")
    sc = s - s.mean(axis=0)
    lead, lag = sc[1:], sc[:-1]
    denom = np.sum(lag * lag, axis=0)
    scale = np.maximum(np.max(np.abs(sc), axis=0), 1e-300)
    keep = np.sum(sc * sc, axis=0) > (1e-12 * scale) ** 2 * n
    if not np.any(keep):
        raise BandwidthUndefined("every score column is constant")
    lead, lag, denom = lead[:, keep], lag[:, keep], denom[keep]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(denom > 0, np.sum(lead * lag, axis=0) / denom, 0.0)
    rho = np.clip(rho, -0.99, 0.99)
    resid = lead - rho * lag
    sigma2 = np.mean(resid * resid, axis=0)

    q, c = _ANDREWS[kind]
    s4 = sigma2**2
    bottom = np.sum(s4 / (1.0 - rho) ** 4)
    if q == 1:
        top = np.sum(4.0 * rho**2 * s4 / ((1.0 - rho) ** 6 * (1.0 + rho) ** 2))
    else:
        top = np.sum(4.0 * rho**2 * s4 / (1.0 - rho) ** 8)
    alpha = top / bottom if bottom > 0 else 0.0
    bw = c * (alpha * n) ** (1.0 / (2 * q + 1))
    if not np.isfinite(bw):
        raise BandwidthUndefined("bandwidth evaluated to a non-finite value")
    return float(min(max(bw, 1.0), max(n / 2.0, 1.0)))


def theta_matrix(n_tilde: int, spec: KernelSpec) -> np.ndarray:
    """Symmetric Toeplitz matrix with entries ``K((i - j) / b_n)``."""
    if spec.bandwidth == "auto":
        raise ValueError("bandwidth must be resolved before building the kernel matrix")
    if n_tilde < 1:
        raise ShapeError("kernel matrix size must be positive")
    col = kernel_eval(spec, np.arange(n_tilde) / float(spec.bandwidth))
    return toeplitz(np.atleast_1d(col))
