"""Time-series PCA: segment a panel into mutually uncorrelated subseries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import erfc

from .core import ArrayLike, as_series, lag_autocorrelation
from .errors import DataError, InsufficientData, InvalidPair, ShapeError
from .factors import build_W, default_delta
from .forecast import ArModel, ar_residuals, fit_ar_aic, fit_var_aic, forecast_ar, forecast_var
from .spectral import inv_sqrt_psd, sym_eigen

__all__ = [
    "SegmentationFit",
    "whiten",
    "segment",
    "cross_correlations",
    "max_cross_correlation",
    "connect_max_cc",
    "max_ratio_cut",
    "connect_fdr",
    "pair_pvalues",
    "fdr_cut",
    "prewhiten_component",
    "group_pairs",
    "predict_segments",
]

Pair = tuple[int, int]


@dataclass
class SegmentationFit:
    """Result of :func:`segment`.

    ``B`` maps observations to transformed components (``X = y @ B.T``); its rows
    are arranged so that every group occupies a contiguous block of columns of
    ``X``. ``groups`` and ``connected_pairs`` index those columns (0-based).
    """

    B: np.ndarray
    X: np.ndarray
    groups: list[list[int]]
    connected_pairs: list[Pair]
    permutation: str = "max"
    eigen_groups: list[list[int]] = field(default_factory=list)
    lag_k: int = 5

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def group_sizes(self) -> list[int]:
        return [len(g) for g in self.groups]


def whiten(y: ArrayLike, ridge: Union[float, str] = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Return ``(y @ V^{-1/2}, V^{-1/2})`` with ``V`` the sample covariance."""
    y = as_series(y)
    yc = y - y.mean(axis=0)
    v = yc.T @ yc / y.shape[0]
    root = inv_sqrt_psd(v, ridge)
    return y @ root, root


def cross_correlations(z: ArrayLike, m: int) -> np.ndarray:
    """Array ``C`` of shape ``(m + 1, p, p)`` with ``C[h, i, j] = corr(z_{i,t+h}, z_{j,t})``.

    Negative lags are ``C[h].T``.
    """
    z = as_series(z)
    if m > z.shape[0] - 2:
        raise ShapeError(f"lag window m={m} too large for n={z.shape[0]}")
    return np.stack([lag_autocorrelation(z, h) for h in range(m + 1)])


def max_cross_correlation(z: ArrayLike, m: int) -> np.ndarray:
    """Matrix of ``max_{|h| <= m} |rho_ij(h)|``."""
    c = np.abs(cross_correlations(z, m))
    out = np.maximum(c.max(axis=0), c.transpose(0, 2, 1).max(axis=0))
    return out


def _pairs(p: int) -> list[Pair]:
    return [(i, j) for i in range(p) for j in range(i + 1, p)]


def max_ratio_cut(values: Sequence[float], fraction: float = 0.75) -> int:
    """Number of leading values to keep from a descending list by the largest ratio.

    Returns ``argmax_{j <= R} L_(j) / L_(j+1)`` with ``R = floor(fraction * len)``;
    requires ``R >= 1``.
    """
    v = np.asarray(values, dtype=float)
    big_r = int(np.floor(fraction * v.size))
    big_r = min(big_r, v.size - 1)
    if big_r < 1:
        raise ValueError("ratio scan needs at least two values")
    head, nxt = v[:big_r], v[1 : big_r + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(nxt > 0, head / nxt, np.where(head > 0, np.inf, 1.0))
    return int(np.argmax(ratios)) + 1


def connect_max_cc(z: ArrayLike, m: int = 10) -> list[Pair]:
    """Connected pairs by the maximum cross-correlation ratio rule.

    With a single pair the ratio scan is empty; the pair is then declared
    connected when its statistic is at least ``2 / sqrt(n)``.
    """
    z = as_series(z)
    n, p = z.shape
    if p < 2:
        return []
    if m < 1:
        raise ValueError("m must be at least 1")
    stat = max_cross_correlation(z, m)
    pairs = _pairs(p)
    vals = np.array([stat[i, j] for i, j in pairs])
    order = np.argsort(-vals, kind="stable")
    if len(pairs) == 1:
        return pairs if vals[0] >= 2.0 / np.sqrt(n) else []
    cut = max_ratio_cut(vals[order])
    return sorted(pairs[i] for i in order[:cut])


def pair_pvalues(z: ArrayLike, m: int = 10) -> tuple[list[Pair], np.ndarray]:
    """Simes-combined p-value for each pair over lags ``-m..m``."""
    z = as_series(z)
    n, p = z.shape
    c = cross_correlations(z, m)
    pairs = _pairs(p)
    lags = 2 * m + 1
    scale = np.arange(1, lags + 1)
    pv = np.empty(len(pairs))
    for idx, (i, j) in enumerate(pairs):
        rho = np.concatenate([c[:, i, j], c[1:, j, i]])
        pvals = np.clip(erfc(np.sqrt(n) * np.abs(rho) / np.sqrt(2.0)), 1e-300, 1.0)
        pv[idx] = np.min(np.sort(pvals) * lags / scale)
    return pairs, pv


def fdr_cut(pvalues: Sequence[float], beta: float, total: Optional[int] = None) -> int:
    """Step-up count ``max{k : pv_(k) <= k beta / total}`` (0 when none qualifies)."""
    pv = np.sort(np.asarray(pvalues, dtype=float))
    total = pv.size if total is None else total
    ok = np.flatnonzero(pv <= np.arange(1, pv.size + 1) * beta / total)
    return int(ok[-1]) + 1 if ok.size else 0


def connect_fdr(z: ArrayLike, m: int = 10, beta: float = 1e-5) -> list[Pair]:
    """Connected pairs by the FDR rule at level ``beta``."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    z = as_series(z)
    if z.shape[1] < 2:
        return []
    pairs, pv = pair_pvalues(z, m)
    cut = fdr_cut(pv, beta)
    order = np.argsort(pv, kind="stable")
    return sorted(pairs[i] for i in order[:cut])


def prewhiten_component(x, max_order: int = 5) -> np.ndarray:
    """Residuals of the AIC-best Yule-Walker AR fit of order ``0..max_order``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 20:
        raise InsufficientData(f"prewhitening needs n >= 20, got {x.size}")
    return ar_residuals(fit_ar_aic(x, max_order), x)


def group_pairs(p: int, pairs: Sequence[Pair]) -> list[list[int]]:
    """Connected components of the pair graph on ``0..p-1``, ordered by smallest member."""
    parent = list(range(p))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        if not (0 <= i < p and 0 <= j < p) or i == j:
            raise InvalidPair(f"pair ({i}, {j}) invalid for p={p}")
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    comps: dict[int, list[int]] = {}
    for i in range(p):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values(), key=lambda g: g[0])


def segment(
    y: ArrayLike,
    K: int = 5,
    permutation: str = "max",
    thresh: bool = False,
    delta: Optional[float] = None,
    prewhiten: bool = True,
    m: int = 10,
    beta: Optional[float] = None,
    ridge: Union[float, str] = "auto",
) -> SegmentationFit:
    """Segment ``y`` into uncorrelated groups of transformed components.

    Parameters
    ----------
    y : array_like, shape (n, p)
    K : int
        Lags used in ``I + sum_k S_k S_k^T`` on the whitened series.
    permutation : {"max", "fdr"}
        Pair-connectivity rule; ``"fdr"`` needs ``beta``.
    prewhiten : bool
        Replace each transformed component by its AR(<=5)-AIC residuals before
        testing connectivity.
    m : int
        Cross-correlations are scanned over lags ``|h| <= m``.
    """
    y = as_series(y)
    n, p = y.shape
    if permutation not in ("max", "fdr"):
        raise ValueError("permutation must be 'max' or 'fdr'")
    if permutation == "fdr" and (beta is None or not 0 < beta < 1):
        raise ValueError("permutation='fdr' needs beta in (0, 1)")
    white, root = whiten(y, ridge)
    if thresh:
        d = default_delta(n, p) if delta is None else float(delta)
    else:
        d = 0.0
    if p == 1:
        return SegmentationFit(root.copy(), y @ root, [[0]], [], permutation, [[0]], K)

    wy = np.eye(p) + build_W(white, K, d)
    gamma = sym_eigen(wy).eigenvectors
    zhat = white @ gamma
    if prewhiten:
        resid = [prewhiten_component(zhat[:, j]) for j in range(p)]
        length = min(r.size for r in resid)
        ztest = np.column_stack([r[r.size - length :] for r in resid])
    else:
        ztest = zhat
    if permutation == "max":
        pairs = connect_max_cc(ztest, m)
    else:
        pairs = connect_fdr(ztest, m, beta)
    eigen_groups = group_pairs(p, pairs)

    order = [j for g in eigen_groups for j in g]
    position = {old: new for new, old in enumerate(order)}
    B = gamma[:, order].T @ root
    groups, start = [], 0
    for g in eigen_groups:
        groups.append(list(range(start, start + len(g))))
        start += len(g)
    mapped = sorted(tuple(sorted((position[i], position[j]))) for i, j in pairs)
    return SegmentationFit(B, y @ B.T, groups, mapped, permutation, eigen_groups, K)


def predict_segments(
    fit: SegmentationFit,
    steps: int = 1,
    ar_max_order: int = 5,
    var_max_order: int = 6,
    models: Optional[Sequence[Union[ArModel, object]]] = None,
) -> np.ndarray:
    """Forecast each group separately and map back through ``B^{-1}``.

    Singleton groups use AR-AIC, larger groups a least-squares VAR with AIC order
    selection. ``models`` may hold one pre-fitted model per group.
    """
    x = fit.X
    if models is not None and len(models) != len(fit.groups):
        raise ShapeError(f"{len(models)} models for {len(fit.groups)} groups")
    xf = np.zeros((steps, x.shape[1]))
    for gi, g in enumerate(fit.groups):
        block = x[:, g]
        model = models[gi] if models is not None else None
        if len(g) == 1:
            model = model or fit_ar_aic(block[:, 0], ar_max_order)
            xf[:, g[0]] = forecast_ar(model, block[:, 0], steps)
        else:
            model = model or fit_var_aic(block, var_max_order)
            xf[:, g] = forecast_var(model, block, steps)
    try:
        return np.linalg.solve(fit.B, xf.T).T
    except np.linalg.LinAlgError as exc:
        raise DataError("transformation matrix is singular") from exc
