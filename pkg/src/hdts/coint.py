"""Cointegration rank of a nonstationary panel via lag-autocovariance eigenanalysis.

The panel is rotated by the eigenvectors of ``sum_{k=0}^K S_k S_k^T``; the
stationary directions sit at the bottom of the spectrum. Their count is read off
either from sample autocorrelations (``acf``) or a unit-root test scan
(``urtest``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ArrayLike, as_series, lag_autocovariance
from .errors import DegenerateColumn, LagOutOfRange
from .spectral import sym_eigen

__all__ = [
    "CointFit",
    "UnitRootTest",
    "adf_unit_root",
    "build_W_check",
    "acf_profile",
    "acf_rank",
    "urtest_rank",
    "fit_coint",
]

# (series, alpha) -> True when the series is judged nonstationary (I(0) rejected)
UnitRootTest = Callable[[np.ndarray, float], bool]


@dataclass
class CointFit:
    """``A`` is orthogonal; ``x = y @ A``. ``rank`` is the headline estimate."""

    A: np.ndarray
    rank: int
    method: str
    eigenvalues: np.ndarray
    acf_rank: Optional[int] = None
    urtest_rank: Optional[int] = None
    lag_k: int = 5


def build_W_check(y: ArrayLike, K: int = 5) -> np.ndarray:
    """``sum_{k=0}^K S_k S_k^T`` including the lag-0 covariance."""
    y = as_series(y)
    if K < 0 or K > y.shape[0] - 2:
        raise LagOutOfRange(f"K={K} outside [0, {y.shape[0] - 2}]")
    p = y.shape[1]
    w = np.zeros((p, p))
    for k in range(K + 1):
        s = lag_autocovariance(y, k)
        w += s @ s.T
    return (w + w.T) / 2.0


def acf_profile(x: ArrayLike, m: int = 20) -> np.ndarray:
    """Mean of ``rho_i(k)`` over ``k = 1..m`` for every column.

    ``rho_i(k) = n sum_{t<=n-k} (x_{t+k}-xbar)(x_t-xbar) / ((n-k) sum_t (x_t-xbar)^2)``.
    """
    x = as_series(x)
    n = x.shape[0]
    if m < 1 or m > n - 2:
        raise LagOutOfRange(f"m={m} outside [1, {n - 2}]")
    xc = x - x.mean(axis=0)
    denom = np.sum(xc * xc, axis=0)
    scale = np.maximum(np.max(np.abs(xc), axis=0), 1.0)
    zero = denom <= n * (np.finfo(float).eps * scale) ** 2
    if np.any(zero):
        raise DegenerateColumn(int(np.flatnonzero(zero)[0]))
    total = np.zeros(x.shape[1])
    for k in range(1, m + 1):
        total += n * np.sum(xc[k:] * xc[: n - k], axis=0) / ((n - k) * denom)
    return total / m


def acf_rank(x: ArrayLike, m: int = 20, c0: float = 0.3) -> int:
    """Number of columns whose mean autocorrelation over lags ``1..m`` is below ``c0``."""
    return int(np.sum(acf_profile(x, m) < c0))


def adf_unit_root(x: np.ndarray, alpha: float) -> bool:
    """Augmented Dickey-Fuller with constant and AIC lag choice.

    Returns True when the unit root is *not* rejected at level ``alpha``, i.e.
    stationarity is rejected.
    """
    from statsmodels.tsa.stattools import adfuller

    x = np.asarray(x, dtype=float).ravel()
    pvalue = adfuller(x, regression="c", autolag="AIC")[1]
    return bool(pvalue >= alpha)


def urtest_rank(x: ArrayLike, alpha: float = 0.01, test: Optional[UnitRootTest] = None) -> int:
    """Scan columns from last to first; stop at the first judged nonstationary.

    Columns are expected in descending-eigenvalue order so the stationary ones
    come last. Returns the number of columns accepted before the first rejection.
    """
    x = as_series(x)
    test = adf_unit_root if test is None else test
    p = x.shape[1]
    for i in range(1, p + 1):
        if test(x[:, p - i], alpha):
            return i - 1
    return p


def fit_coint(
    y: ArrayLike,
    K: int = 5,
    type: str = "acf",
    c0: float = 0.3,
    m: int = 20,
    alpha: float = 0.01,
    test: Optional[UnitRootTest] = None,
) -> CointFit:
    """Estimate the cointegration rank and the rotation ``A``.

    ``type="both"`` computes both ranks; the headline ``rank`` is the acf one.
    """
    if type not in ("acf", "urtest", "both"):
        raise ValueError("type must be 'acf', 'urtest' or 'both'")
    if not 0 < c0 < 1:
        raise ValueError("c0 must lie in (0, 1)")
    y = as_series(y)
    eig = sym_eigen(build_W_check(y, K))
    a = eig.eigenvectors
    x = y @ a
    r_acf = acf_rank(x, m, c0) if type in ("acf", "both") else None
    r_ur = urtest_rank(x, alpha, test) if type in ("urtest", "both") else None
    rank = r_acf if r_acf is not None else r_ur
    return CointFit(a, int(rank), type, eig.eigenvalues, r_acf, r_ur, K)
