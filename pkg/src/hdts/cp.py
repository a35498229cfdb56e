"""CP-decomposition of matrix-valued time series ``Y_t = A X_t B^T + e_t``.

``X_t`` is diagonal, so ``Y_t`` is a sum of ``d`` rank-one atoms ``x_{t,l} a_l b_l^T``.
Two estimators are provided: a direct one built on a rank-reduced generalized
eigenproblem and a refined one that projects onto estimated ``d``-dimensional
loading spaces first. vec(.) stacks columns throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import hard_threshold
from .dgp import RngLike, make_rng
from .errors import (
    DegenerateXi,
    InvalidData,
    InvalidRanks,
    LagOutOfRange,
    RefinementSingular,
    ShapeError,
)
from .forecast import ArModel, fit_ar_aic, forecast_ar
from .spectral import generalized_eigen, ratio_order, sign_normalize, sym_eigen

__all__ = [
    "MatrixSeries",
    "CpFit",
    "CpSimulation",
    "as_matrix_series",
    "vec_panel",
    "default_cp_delta",
    "default_xi",
    "sigma_y_xi",
    "cp_direct",
    "cp_refined",
    "fit_cp",
    "recover_factors",
    "direct_moments",
    "direct_loadings",
    "refined_targets",
    "projected_lag",
    "refinement_matrix",
    "dgp_cp",
    "predict_cp",
]


@dataclass(frozen=True)
class MatrixSeries:
    """``n x p x q`` array of matrix observations, time first."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", as_matrix_series(self.data))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape


def as_matrix_series(y) -> np.ndarray:
    if isinstance(y, MatrixSeries):
        return y.data
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 3:
        raise ShapeError(f"expected an (n, p, q) array, got shape {arr.shape}")
    n, p, q = arr.shape
    if n < 3 or p < 2 or q < 2:
        raise ShapeError(f"need n >= 3, p >= 2, q >= 2, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidData(f"non-finite value at (t, i, j) = {tuple(int(b) for b in bad)}")
    return arr


def vec_panel(y: np.ndarray) -> np.ndarray:
    """Rows ``vec(Y_t)`` (column-major), shape ``(n, p * q)``."""
    return y.transpose(0, 2, 1).reshape(y.shape[0], -1)


@dataclass
class CpFit:
    """Estimated CP model; ``A`` and ``B`` have unit-norm columns."""

    A: np.ndarray
    B: np.ndarray
    factors: np.ndarray
    rank: int
    method: str
    eigenvalues: Optional[np.ndarray] = None


def default_cp_delta(n: int, p: int, q: int) -> float:
    """Threshold level ``2 sqrt(log(pq) / n)``."""
    return 2.0 * np.sqrt(np.log(p * q) / n)


def default_xi(y, kind: str = "pcsum") -> np.ndarray:
    """Scalar summary series ``xi_t`` built from principal components of ``vec(Y_t)``.

    ``kind="pc1"`` projects on the leading principal direction. ``kind="pcsum"``
    (default) keeps the leading ``m`` directions, ``m`` chosen by the eigenvalue
    ratio rule on the sample covariance, and sums their scores after scaling
    each to unit variance. Every factor then contributes comparably to ``xi``,
    which keeps the lagged moment matrices at full rank ``d`` when one factor
    dominates the variance. Both reduce to the same series when ``m = 1``.
    """
    if kind not in ("pc1", "pcsum"):
        raise ValueError("kind must be 'pc1' or 'pcsum'")
    y = as_matrix_series(y)
    v = vec_panel(y)
    vc = v - v.mean(axis=0)
    scale = max(float(np.max(np.abs(v))), 1.0)
    if np.max(np.abs(vc)) <= 1e-12 * scale:
        raise DegenerateXi("matrix series is constant; default xi is identically zero")
    # right singular vectors of the centered data = covariance eigenvectors
    _, s, vt = np.linalg.svd(vc, full_matrices=False)
    if kind == "pc1" or s.size < 2:
        return vc @ sign_normalize(vt[0])
    lam = s**2 / v.shape[0]
    m = ratio_order(lam)
    dirs = sign_normalize(vt[:m].T)
    return (vc @ dirs / np.sqrt(lam[:m])).sum(axis=1)


def sigma_y_xi(y, xi, k: int, delta: float = 0.0) -> np.ndarray:
    """Thresholded ``(n-k)^{-1} sum_{t>k} (Y_t - Ybar)(xi_{t-k} - xibar)``, a ``p x q`` matrix."""
    y = as_matrix_series(y)
    xi = np.asarray(xi, dtype=float).ravel()
    n = y.shape[0]
    if xi.size != n:
        raise ShapeError(f"xi has length {xi.size}, series has n={n}")
    if int(k) != k or k < 1 or k > n - 2:
        raise LagOutOfRange(f"lag {k} outside [1, {n - 2}]")
    yc = y - y.mean(axis=0)
    xc = xi - xi.mean()
    s = np.tensordot(xc[: n - k], yc[k:], axes=(0, 0)) / (n - k)
    return hard_threshold(s, delta)


def recover_factors(y: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Least-squares ``x_t`` from ``vec(Y_t - Ybar) ~ sum_l x_{t,l} vec(a_l b_l^T)``."""
    yc = y - y.mean(axis=0)
    design = np.column_stack([np.kron(b[:, l], a[:, l]) for l in range(a.shape[1])])
    coef, *_ = np.linalg.lstsq(design, vec_panel(yc).T, rcond=None)
    return coef.T


def _unit_columns(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=0)
    norms[norms == 0] = 1.0
    return m / norms


def _resolve(thresh: bool, delta: Optional[float], shape) -> float:
    if not thresh:
        return 0.0
    return default_cp_delta(*shape) if delta is None else float(delta)


def _oriented(y: np.ndarray) -> tuple[np.ndarray, bool]:
    if y.shape[1] < y.shape[2]:
        return y.transpose(0, 2, 1), True
    return y, False


def _finish(y, a, b, flipped, rank, method, lam) -> CpFit:
    a = sign_normalize(_unit_columns(a))
    b = sign_normalize(_unit_columns(b))
    if flipped:
        a, b = b, a
    return CpFit(a, b, recover_factors(y, a, b), rank, method, lam)


def _check_rank(rank: Optional[int], q: int) -> Optional[int]:
    if rank is None:
        return None
    if not 1 <= rank < q:
        raise InvalidRanks(f"rank must lie in [1, {q - 1}], got {rank}")
    return int(rank)


def cp_direct(
    y,
    xi: Optional[np.ndarray] = None,
    thresh: bool = False,
    delta: Optional[float] = None,
    rank: Optional[int] = None,
) -> CpFit:
    """Direct CP estimator.

    Parameters
    ----------
    y : array_like, shape (n, p, q)
    xi : array_like, shape (n,), optional
        Scalar series combining the panel; defaults to :func:`default_xi`.
    thresh, delta : bool, float
        Hard-threshold the lag-1 and lag-2 moment matrices at ``delta``
        (default ``2 sqrt(log(pq) / n)``).
    rank : int, optional
        Fix ``d`` instead of estimating it by the eigenvalue-ratio rule.
    """
    y0 = as_matrix_series(y)
    xi = default_xi(y0) if xi is None else np.asarray(xi, dtype=float).ravel()
    d_level = _resolve(thresh, delta, y0.shape)
    yy, flipped = _oriented(y0)
    q = yy.shape[2]
    s1, _, k1, k2 = direct_moments(yy, xi, d_level)
    eig = sym_eigen(k1)
    d = _check_rank(rank, q) or ratio_order(eig.eigenvalues, 0.75)

    _, bvecs = generalized_eigen(k2, k1, d)
    a, b = direct_loadings(s1, bvecs)
    return _finish(yy, a, b, flipped, d, "direct", eig.eigenvalues)


def direct_moments(y, xi, delta: float = 0.0):
    """``(S1, S2, S1^T S1, S1^T S2)`` with ``S_k`` the thresholded lag-``k`` moment."""
    s1 = sigma_y_xi(y, xi, 1, delta)
    s2 = sigma_y_xi(y, xi, 2, delta)
    return s1, s2, s1.T @ s1, s1.T @ s2


def direct_loadings(s1: np.ndarray, bvecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``a_l = S1 b^l / |S1 b^l|``; ``b_l`` are the columns of ``S1^T (A^+)^T``."""
    a = _unit_columns(s1 @ bvecs)
    b = s1.T @ np.linalg.pinv(a).T
    return a, b


def _theta_sigma(yc_vec: np.ndarray, u: np.ndarray, k: int, delta: float, p: int, q: int) -> np.ndarray:
    """``Theta^T T(Sigma_tilde(k))`` as a ``p x q`` matrix for ``Theta = I_p kron u``."""
    n = yc_vec.shape[0]
    if delta == 0:
        col = yc_vec[k:].T @ (yc_vec[: n - k] @ u) / (n - k)
    else:
        c = yc_vec[k:].T @ yc_vec[: n - k] / (n - k)
        col = hard_threshold(c, delta) @ u
    return col.reshape(q, p).T


def cp_refined(
    y,
    K: int = 20,
    xi: Optional[np.ndarray] = None,
    thresh1: bool = False,
    delta1: Optional[float] = None,
    thresh2: bool = False,
    delta2: Optional[float] = None,
    w: Optional[np.ndarray] = None,
    rank: Optional[int] = None,
) -> CpFit:
    """Refined CP estimator working in ``d``-dimensional projected coordinates.

    ``K`` lags feed the left/right eigen-targets ``M1 = sum S_k S_k^T`` and
    ``M2 = sum S_k^T S_k``. ``w`` (length ``d^2``) defaults to ``vec(I_d) / sqrt(d)``.
    Raises :class:`RefinementSingular` when the projected lag-1 matrix is singular.
    """
    y0 = as_matrix_series(y)
    n = y0.shape[0]
    if K < 2 or K > n - 2:
        raise ValueError(f"K must lie in [2, {n - 2}]")
    xi = default_xi(y0) if xi is None else np.asarray(xi, dtype=float).ravel()
    lvl1 = _resolve(thresh1, delta1, y0.shape)
    lvl2 = _resolve(thresh2, delta2, y0.shape)
    yy, flipped = _oriented(y0)
    _, p, q = yy.shape

    m1, m2 = refined_targets(yy, xi, K, lvl1)
    e1 = sym_eigen(m1)
    d = _check_rank(rank, q) or ratio_order(e1.eigenvalues, max_index=int(np.floor(0.75 * q)))
    pm = e1.eigenvectors[:, :d]
    qm = sym_eigen(m2).eigenvectors[:, :d]

    if w is None:
        w = np.eye(d).ravel(order="F") / np.sqrt(d)
    w = np.asarray(w, dtype=float).ravel()
    if w.size != d * d:
        raise ShapeError(f"w must have length d^2 = {d * d}, got {w.size}")
    u = np.kron(qm, pm) @ w

    chk = [projected_lag(yy, pm, qm, u, k, lvl2) for k in (1, 2)]
    jmat = refinement_matrix(chk[0], chk[1])

    vals, vecs = np.linalg.eig(jmat)
    order = np.lexsort((-vals.real, -np.abs(vals)))
    vecs = np.real_if_close(vecs[:, order], tol=1e6)
    if np.iscomplexobj(vecs):
        vecs = _realify(vecs)
    umat = _unit_columns(chk[0] @ vecs)
    try:
        uinv = np.linalg.inv(umat)
    except np.linalg.LinAlgError as exc:
        raise RefinementSingular("recovered left coordinates are singular") from exc
    vmat = _unit_columns(chk[0].T @ uinv.T)
    return _finish(yy, pm @ umat, qm @ vmat, flipped, d, "refined", e1.eigenvalues)


def refined_targets(y, xi, K: int, delta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``M1 = sum_{k<=K} S_k S_k^T`` and ``M2 = sum_{k<=K} S_k^T S_k``."""
    p, q = y.shape[1:]
    m1 = np.zeros((p, p))
    m2 = np.zeros((q, q))
    for k in range(1, K + 1):
        s = sigma_y_xi(y, xi, k, delta)
        m1 += s @ s.T
        m2 += s.T @ s
    return m1, m2


def projected_lag(y, pm: np.ndarray, qm: np.ndarray, u: np.ndarray, k: int, delta: float = 0.0) -> np.ndarray:
    """``P^T Theta^T T(Sigma_tilde(k)) Q``, the ``d x d`` projected lag-``k`` moment."""
    _, p, q = y.shape
    yc_vec = vec_panel(y - y.mean(axis=0))
    return pm.T @ _theta_sigma(yc_vec, u, k, delta, p, q) @ qm


def refinement_matrix(chk1: np.ndarray, chk2: np.ndarray) -> np.ndarray:
    """``(C1^T C1)^{-1} C1^T C2``; raises :class:`RefinementSingular` when ``C1`` is singular."""
    gram = chk1.T @ chk1
    if np.linalg.cond(gram) > 1e12:
        raise RefinementSingular("projected lag-1 matrix is singular")
    return np.linalg.solve(gram, chk1.T @ chk2)


def _realify(vecs: np.ndarray) -> np.ndarray:
    """Replace conjugate pairs by their real and imaginary parts."""
    out = np.empty(vecs.shape)
    j = 0
    while j < vecs.shape[1]:
        v = vecs[:, j]
        if np.max(np.abs(v.imag)) > 1e-10 and j + 1 < vecs.shape[1]:
            out[:, j], out[:, j + 1] = v.real, v.imag
            j += 2
        else:
            out[:, j] = v.real if np.linalg.norm(v.real) > 0 else v.imag
            j += 1
    return out


def fit_cp(y, method: str = "direct", **kwargs) -> CpFit:
    """Dispatch to :func:`cp_direct` or :func:`cp_refined`."""
    if method == "direct":
        return cp_direct(y, **kwargs)
    if method == "refined":
        return cp_refined(y, **kwargs)
    raise ValueError("method must be 'direct' or 'refined'")


@dataclass
class CpSimulation:
    Y: np.ndarray
    A: np.ndarray
    B: np.ndarray
    factors: np.ndarray
    noise: np.ndarray
    ar_coef: np.ndarray


def dgp_cp(
    n: int,
    p: int,
    q: int,
    d: int = 3,
    d1: Optional[int] = None,
    d2: Optional[int] = None,
    rng: RngLike = None,
    burn_in: int = 200,
) -> CpSimulation:
    """Simulate a CP matrix series with rank-``d1`` left and rank-``d2`` right loadings.

    Loadings come from uniform(-3, 3) draws projected onto their leading singular
    subspaces and column-normalized; factors are independent AR(1) paths with
    coefficients of magnitude in [0.6, 0.95], scaled by the norms removed in the
    normalization. ``Y`` carries standard Gaussian noise (returned as ``noise``).
    """
    d1 = d if d1 is None else d1
    d2 = d if d2 is None else d2
    if not (1 <= d1 <= d and 1 <= d2 <= d and d < min(p, q)):
        raise InvalidRanks(f"need 1 <= d1, d2 <= d < min(p, q); got d={d}, d1={d1}, d2={d2}, p={p}, q={q}")
    rng = make_rng(rng)
    a_dag = rng.uniform(-3.0, 3.0, (p, d))
    b_dag = rng.uniform(-3.0, 3.0, (q, d))
    pm = np.linalg.svd(a_dag, full_matrices=False)[0][:, :d1]
    qm = np.linalg.svd(b_dag, full_matrices=False)[0][:, :d2]
    u_star = pm.T @ a_dag
    v_star = qm.T @ b_dag
    un = np.linalg.norm(u_star, axis=0)
    vn = np.linalg.norm(v_star, axis=0)
    a = pm @ (u_star / un)
    b = qm @ (v_star / vn)

    coef = rng.uniform(0.6, 0.95, d) * rng.choice([-1.0, 1.0], d)
    e = rng.standard_normal((n + burn_in, d))
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, n + burn_in):
        x[t] = coef * x[t - 1] + e[t]
    x = x[burn_in:] * (un * vn)
    noise = rng.standard_normal((n, p, q))
    signal = np.einsum("il,tl,jl->tij", a, x, b)
    return CpSimulation(signal + noise, a, b, x, noise, coef)


def predict_cp(
    fit: CpFit,
    steps: int = 1,
    ar_max_order: int = 5,
    models: Optional[Sequence[ArModel]] = None,
) -> np.ndarray:
    """Forecast ``Y_{n+h} = sum_l x_{n+h,l} a_l b_l^T`` with AR-AIC factor paths.

    Returns an ``(steps, p, q)`` array. ``models`` may supply pre-fitted AR
    models, one per factor.
    """
    x = fit.factors
    if models is None:
        models = [fit_ar_aic(x[:, l], ar_max_order) for l in range(fit.rank)]
    elif len(models) != fit.rank:
        raise ShapeError(f"{len(models)} models for rank {fit.rank}")
    xf = np.column_stack([forecast_ar(m, x[:, l], steps) for l, m in enumerate(models)])
    return np.einsum("il,hl,jl->hij", fit.A, xf.reshape(steps, -1), fit.B)
