"""Small AR / VAR toolkit with AIC order selection.

Univariate models are fitted by Yule-Walker (always stationary), vector models by
least squares with an intercept. Both exist to drive the ``predict_*`` helpers of
the estimators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_toeplitz

from .errors import DegenerateColumn, InsufficientData, SingularDesign

__all__ = [
    "ArModel",
    "VarModel",
    "fit_ar_yw",
    "fit_ar_aic",
    "ar_residuals",
    "forecast_ar",
    "fit_var",
    "fit_var_aic",
    "forecast_var",
]

# relative floor on innovation variances; keeps log() finite on exact fits
_VAR_FLOOR = 1e-20


@dataclass
class ArModel:
    order: int
    coefficients: np.ndarray
    intercept: float
    sigma2: float
    aic: float
    mean: float = 0.0
    aic_curve: np.ndarray = field(default_factory=lambda: np.empty(0))

    def companion_radius(self) -> float:
        if self.order == 0:
            return 0.0
        comp = np.zeros((self.order, self.order))
        comp[0] = self.coefficients
        comp[1:, :-1] = np.eye(self.order - 1)
        return float(np.max(np.abs(np.linalg.eigvals(comp))))


@dataclass
class VarModel:
    order: int
    coefficients: list[np.ndarray]
    intercept: np.ndarray
    sigma: np.ndarray
    aic: float
    aic_curve: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def dim(self) -> int:
        return self.intercept.shape[0]


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def _autocov(xc: np.ndarray, max_lag: int) -> np.ndarray:
    n = xc.size
    return np.array([xc[k:] @ xc[: n - k] / n for k in range(max_lag + 1)])


def fit_ar_yw(x, order: int) -> ArModel:
    """Yule-Walker AR(``order``) fit with AIC ``n log(sigma2) + 2(order + 1)``."""
    x = _as_vector(x)
    n = x.size
    mu = x.mean()
    gam = _autocov(x - mu, order)
    if gam[0] <= (np.finfo(float).eps * max(1.0, np.max(np.abs(x)))) ** 2:
        raise DegenerateColumn(0, "series has zero sample variance")
    if order == 0:
        phi = np.empty(0)
        sigma2 = gam[0]
    else:
        phi = solve_toeplitz(gam[:order], gam[1 : order + 1])
        sigma2 = gam[0] - phi @ gam[1 : order + 1]
    sigma2 = max(sigma2, _VAR_FLOOR * gam[0])
    aic = n * np.log(sigma2) + 2.0 * (order + 1)
    return ArModel(order, phi, mu * (1.0 - phi.sum()), float(sigma2), float(aic), float(mu))


def fit_ar_aic(x, max_order: int = 5) -> ArModel:
    """Pick the AR order in ``0..max_order`` with the smallest AIC (ties go low)."""
    x = _as_vector(x)
    if x.size < max_order + 10:
        raise InsufficientData(f"need at least {max_order + 10} observations, got {x.size}")
    fits = [fit_ar_yw(x, k) for k in range(max_order + 1)]
    curve = np.array([f.aic for f in fits])
    best = fits[int(np.argmin(curve))]
    best.aic_curve = curve
    return best


def ar_residuals(model: ArModel, x) -> np.ndarray:
    """One-step residuals ``e_t`` for ``t > order``; order 0 gives the demeaned series."""
    x = _as_vector(x) - model.mean
    k = model.order
    e = x[k:].copy()
    for j in range(1, k + 1):
        e -= model.coefficients[j - 1] * x[k - j : x.size - j]
    return e


def forecast_ar(model: ArModel, history, h: int) -> np.ndarray:
    """Iterate the fitted recursion ``h`` steps past the end of ``history``."""
    hist = list(_as_vector(history)[-model.order :]) if model.order else []
    if len(hist) < model.order:
        raise InsufficientData(f"history shorter than model order {model.order}")
    out = np.empty(h)
    for i in range(h):
        val = model.intercept
        for j in range(1, model.order + 1):
            val += model.coefficients[j - 1] * hist[-j]
        out[i] = val
        hist.append(val)
    return out


def _var_design(x: np.ndarray, order: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    rows = np.arange(start, n)
    cols = [np.ones((rows.size, 1))]
    for j in range(1, order + 1):
        cols.append(x[rows - j])
    return np.hstack(cols), x[rows]


def _logdet_floored(sigma: np.ndarray, floor: float) -> float:
    lam = np.linalg.eigvalsh((sigma + sigma.T) / 2.0)
    return float(np.sum(np.log(np.maximum(lam, floor))))


def _var_ls(x: np.ndarray, order: int, start: int):
    design, target = _var_design(x, order, start)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesign(f"collinear regressors in VAR({order}) design")
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    sigma = resid.T @ resid / target.shape[0]
    return coef, sigma, target.shape[0]


def fit_var(x, order: int) -> VarModel:
    """Least-squares VAR(``order``) with intercept on all usable rows."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    g = x.shape[1]
    coef, sigma, rows = _var_ls(x, order, order)
    floor = _VAR_FLOOR * max(np.trace(np.cov(x.T, bias=True).reshape(g, g)) / g, 1e-300)
    aic = rows * _logdet_floored(sigma, floor) + 2.0 * (g * g * order + g)
    mats = [coef[1 + (j - 1) * g : 1 + j * g].T for j in range(1, order + 1)]
    return VarModel(order, mats, coef[0].copy(), sigma, float(aic))


def fit_var_aic(x, max_order: int = 6) -> VarModel:
    """Select the VAR order by AIC ``n log det Sigma + 2(g^2 order + g)``.

    Orders are compared on the common sample that drops the first ``max_order``
    rows; the winner is then refitted on all of its usable rows. Orders whose
    design is collinear are skipped.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, g = x.shape
    if n < g * max_order + 10:
        raise InsufficientData(f"need at least {g * max_order + 10} rows, got {n}")
    floor = _VAR_FLOOR * max(np.trace(np.cov(x.T, bias=True).reshape(g, g)) / g, 1e-300)
    curve = np.empty(max_order + 1)
    for k in range(max_order + 1):
        try:
            _, sigma, rows = _var_ls(x, k, max_order)
        except SingularDesign:
            # exact lower-order dynamics make longer lags collinear; skip them
            if k == 0:
                raise
            curve[k] = np.inf
            continue
        curve[k] = rows * _logdet_floored(sigma, floor) + 2.0 * (g * g * k + g)
    best = fit_var(x, int(np.argmin(curve)))
    best.aic_curve = curve
    return best


def forecast_var(model: VarModel, history, h: int) -> np.ndarray:
    """``h``-step iterated forecasts, returned as an ``(h, g)`` array."""
    hist = np.asarray(history, dtype=float)
    if hist.ndim == 1:
        hist = hist[:, None]
    if hist.shape[0] < model.order:
        raise InsufficientData(f"history shorter than model order {model.order}")
    buf = [row for row in hist[hist.shape[0] - model.order :]] if model.order else []
    out = np.empty((h, model.dim))
    for i in range(h):
        val = model.intercept.copy()
        for j, mat in enumerate(model.coefficients, start=1):
            val += mat @ buf[-j]
        out[i] = val
        buf.append(val)
    return out
