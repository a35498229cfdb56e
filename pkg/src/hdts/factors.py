"""Factor models for vector time series, with the two-step strong/weak variant
and observed regressors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .core import ArrayLike, as_series, hard_threshold, lag_autocovariance
from .errors import DegenerateSpectrum, DimensionTooSmall, ShapeError, SingularDesign
from .forecast import ArModel, fit_ar_aic, forecast_ar
from .spectral import ratio_order, sym_eigen

__all__ = [
    "FactorFit",
    "default_delta",
    "build_W",
    "fit_factors",
    "fit_factors_with_regressors",
    "predict_factors",
]


@dataclass
class FactorFit:
    """Estimated factor model.

    ``loading`` has orthonormal columns, ``factors[t] = loading.T @ y[t]``.
    ``reg_coef`` is only set by :func:`fit_factors_with_regressors`.
    """

    factor_num: int
    loading: np.ndarray
    factors: np.ndarray
    lag_k: int
    delta: float
    two_step: bool = False
    step_split: Optional[tuple[int, int]] = None
    reg_coef: Optional[np.ndarray] = None
    eigenvalues: Optional[np.ndarray] = None


def default_delta(n: int, dim: int) -> float:
    """Threshold level ``2 sqrt(log(dim) / n)``."""
    return 2.0 * np.sqrt(np.log(dim) / n)


def build_W(y: ArrayLike, K: int = 5, delta: float = 0.0) -> np.ndarray:
    """Sum of ``T(S_k) T(S_k)^T`` over lags ``k = 1..K`` of thresholded autocovariances."""
    y = as_series(y)
    if K < 1:
        raise ValueError("K must be at least 1")
    p = y.shape[1]
    w = np.zeros((p, p))
    for k in range(1, K + 1):
        s = hard_threshold(lag_autocovariance(y, k), delta)
        w += s @ s.T
    return (w + w.T) / 2.0


def _resolve_delta(y: np.ndarray, thresh: bool, delta: Optional[float]) -> float:
    if not thresh:
        return 0.0
    return default_delta(*y.shape) if delta is None else float(delta)


def _one_step(y: np.ndarray, K: int, delta: float):
    res = sym_eigen(build_W(y, K, delta))
    r = ratio_order(res.eigenvalues)
    return r, res.eigenvectors[:, :r], res.eigenvalues


def fit_factors(
    y: ArrayLike,
    K: int = 5,
    thresh: bool = False,
    delta: Optional[float] = None,
    two_step: bool = False,
) -> FactorFit:
    """Estimate the number of factors and the loading space.

    Parameters
    ----------
    y : array_like, shape (n, p)
    K : int
        Number of autocovariance lags in the eigen-target.
    thresh : bool
        Apply hard thresholding to each lagged autocovariance. When ``delta`` is
        omitted the level is ``2 sqrt(log p / n)``.
    two_step : bool
        After the first pass, project out the estimated loadings and run a second
        pass on the residual panel to pick up weak factors.
    """
    y = as_series(y)
    if y.shape[1] < 2:
        raise DimensionTooSmall("factor estimation needs p >= 2")
    d = _resolve_delta(y, thresh, delta)
    r1, a1, lam = _one_step(y, K, d)
    if not two_step:
        return FactorFit(r1, a1, y @ a1, K, d, eigenvalues=lam)
    resid = y - (y @ a1) @ a1.T
    r2, a2, _ = _one_step(resid, K, d)
    a = np.hstack([a1, a2])
    return FactorFit(r1 + r2, a, y @ a, K, d, True, (r1, r2), eigenvalues=lam)


def _ols_coef(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or np.min(diag) <= max(z.shape) * np.finfo(float).eps * max(np.max(diag), 1e-300):
        raise SingularDesign("regressor matrix is not of full column rank")
    beta = solve_triangular(r, q.T @ y)
    return beta.T


def fit_factors_with_regressors(
    y: ArrayLike,
    z: ArrayLike,
    D: Optional[np.ndarray] = None,
    K: int = 5,
    thresh: bool = False,
    delta: Optional[float] = None,
    two_step: bool = False,
) -> FactorFit:
    """Factor model with observed regressors ``y_t = D z_t + A x_t + e_t``.

    When ``D`` is not supplied it is estimated by least squares of ``y`` on ``z``
    (no intercept). The factor model is then fitted to ``y_t - D z_t`` and the
    reported factors are ``A^T (y_t - D z_t)``.
    """
    y = as_series(y)
    z = as_series(z)
    if z.shape[0] != y.shape[0]:
        raise ShapeError(f"regressors have {z.shape[0]} rows, data has {y.shape[0]}")
    if z.shape[1] > y.shape[0]:
        raise SingularDesign("more regressors than observations")
    if D is None:
        D = _ols_coef(y, z)
    else:
        if np.linalg.matrix_rank(z) < z.shape[1]:
            raise SingularDesign("regressor matrix is not of full column rank")
        D = np.asarray(D, dtype=float)
        if D.shape != (y.shape[1], z.shape[1]):
            raise ShapeError(f"D must have shape {(y.shape[1], z.shape[1])}, got {D.shape}")
    eta = y - z @ D.T
    if np.max(np.abs(eta - eta.mean(axis=0))) <= 1e-10 * max(np.max(np.abs(y - y.mean(axis=0))), 1e-300):
        raise DegenerateSpectrum("regression residual is numerically zero; no factor structure left")
    fit = fit_factors(eta, K, thresh, delta, two_step)
    fit.reg_coef = D
    return fit


def predict_factors(
    fit: FactorFit,
    steps: int = 1,
    ar_max_order: int = 5,
    models: Optional[Sequence[ArModel]] = None,
) -> np.ndarray:
    """Forecast ``y`` by extrapolating each factor path with an AR-AIC model.

    ``models`` may supply one pre-fitted :class:`ArModel` per factor; otherwise
    each path is fitted here. Returns an ``(steps, p)`` array.
    """
    x = fit.factors
    if models is None:
        if x.shape[0] < 10:
            raise ShapeError("need at least 10 factor observations to forecast")
        models = [fit_ar_aic(x[:, j], ar_max_order) for j in range(x.shape[1])]
    elif len(models) != x.shape[1]:
        raise ShapeError(f"{len(models)} models for {x.shape[1]} factors")
    xf = np.column_stack([forecast_ar(m, x[:, j], steps) for j, m in enumerate(models)])
    return xf.reshape(steps, -1) @ fit.loading.T
