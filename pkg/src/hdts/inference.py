"""Bootstrap tests for high-dimensional white noise and martingale differences.

Both tests compare a max-type statistic to quantiles of a Gaussian multiplier
bootstrap whose multipliers are drawn from ``N(0, Theta)``, with ``Theta`` a
kernel matrix over time. Replications are generated in fixed-size blocks, each
with its own child seed, so results do not depend on the number of threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional, Union

import numpy as np

from .core import (
    ArrayLike,
    KernelSpec,
    _column_sd,
    andrews_bandwidth,
    as_series,
    lag_autocorrelation,
    theta_matrix,
)
from .errors import LagOutOfRange, NumericalFailure, ShapeError

__all__ = [
    "TestOutcome",
    "MapLike",
    "BLOCK_SIZE",
    "multiplier_root",
    "multiplier_draws",
    "bootstrap_max",
    "critical_value",
    "bootstrap_pvalue",
    "wn_statistic",
    "wn_scores",
    "wn_test",
    "apply_map",
    "mds_statistic",
    "mds_scores",
    "mds_test",
]

BLOCK_SIZE = 64

MapLike = Union[str, np.ndarray]


@dataclass
class TestOutcome:
    """Result of a bootstrap test. ``reject`` is ``statistic > critical_value``."""

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    lag_k: int
    kernel: KernelSpec
    bootstrap_reps: int
    alpha: float
    seed: Optional[int] = None
    map_kind: Optional[str] = None
    extra: Optional[dict[str, Any]] = None


def _check_k(K: int, n: int) -> int:
    if int(K) != K or K < 1 or K > n - 2:
        raise LagOutOfRange(f"K={K} outside [1, {n - 2}]")
    return int(K)


def _check_bootstrap(B: int, alpha: float) -> None:
    if B < 1:
        raise ValueError("B must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")


def multiplier_root(theta: np.ndarray) -> np.ndarray:
    """Matrix ``L`` with ``L L^T = Theta``.

    Cholesky first, then once more with a ``1e-10`` diagonal jitter, then the
    symmetric square root of the PSD projection.
    """
    theta = np.asarray(theta, dtype=float)
    eye = np.eye(theta.shape[0])
    for jitter in (0.0, 1e-10):
        try:
            return np.linalg.cholesky(theta + jitter * eye)
        except np.linalg.LinAlgError:
            pass
    try:
        lam, vec = np.linalg.eigh((theta + theta.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("cannot factor the kernel matrix") from exc
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T


def _block_seeds(seed: int, B: int) -> list[tuple[np.random.SeedSequence, int]]:
    children = np.random.SeedSequence(seed).spawn((B + BLOCK_SIZE - 1) // BLOCK_SIZE)
    return [(c, min(BLOCK_SIZE, B - i * BLOCK_SIZE)) for i, c in enumerate(children)]


def _block_normals(ss: np.random.SeedSequence, rows: int, cols: int) -> np.ndarray:
    return np.random.Generator(np.random.Philox(ss)).standard_normal((rows, cols))


def multiplier_draws(theta: np.ndarray, B: int, seed: int) -> np.ndarray:
    """``B`` rows drawn from ``N(0, Theta)`` using the blocked seeding scheme."""
    root = multiplier_root(theta)
    m = root.shape[0]
    return np.vstack([_block_normals(ss, r, m) @ root.T for ss, r in _block_seeds(seed, B)])


def bootstrap_max(
    theta: np.ndarray,
    scores: np.ndarray,
    B: int,
    seed: int,
    reduce: Callable[[np.ndarray], np.ndarray],
    threads: int = 1,
) -> np.ndarray:
    """Bootstrap functionals ``reduce(eta_i^T scores / sqrt(n))`` for ``i = 1..B``.

    ``reduce`` maps a ``(rows, dim)`` block of ``g`` vectors to one value per row.
    """
    root = multiplier_root(theta)
    m = root.shape[0]
    if scores.shape[0] != m:
        raise ShapeError("scores and kernel matrix disagree on the time dimension")
    # (Z L^T) S = Z (L^T S): one small product per block
    mixed = root.T @ scores / np.sqrt(m)
    jobs = _block_seeds(seed, B)

    def run(job):
        ss, rows = job
        return reduce(_block_normals(ss, rows, m) @ mixed)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate(parts)


def critical_value(draws: np.ndarray, alpha: float) -> float:
    """``floor(B alpha)``-th largest draw; the maximum when that index is zero."""
    b = draws.size
    idx = int(np.floor(b * alpha))
    ordered = np.sort(draws)[::-1]
    return float(ordered[max(idx, 1) - 1])


def bootstrap_pvalue(draws: np.ndarray, statistic: float) -> float:
    """``(1 + #{draws >= statistic}) / (B + 1)``."""
    return float((1 + np.sum(draws >= statistic)) / (draws.size + 1))


def _resolve_kernel(kernel: Union[KernelSpec, str], scores: np.ndarray) -> KernelSpec:
    spec = kernel if isinstance(kernel, KernelSpec) else KernelSpec(kernel)
    if spec.bandwidth == "auto":
        spec = replace(spec, bandwidth=andrews_bandwidth(scores, spec.kind))
    return spec


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))
    return int(seed)


def _default_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("HDTS_THREADS", "1")))


def wn_statistic(y: ArrayLike, K: int = 2) -> float:
    """``max_{k <= K} max_{i,j} sqrt(n) |rho_ij(k)|``."""
    y = as_series(y, min_n=3)
    n = y.shape[0]
    K = _check_k(K, n)
    return float(max(np.max(np.abs(lag_autocorrelation(y, k))) for k in range(1, K + 1)) * np.sqrt(n))


def wn_scores(y: ArrayLike, K: int = 2) -> np.ndarray:
    """Rows ``f_t`` scaled by ``I_K kron Omega``, shape ``(n - K, K p^2)``."""
    y = as_series(y, min_n=3)
    n, p = y.shape
    K = _check_k(K, n)
    yc = y - y.mean(axis=0)
    z = yc / _column_sd(yc)
    m = n - K
    blocks = [(z[k : k + m, :, None] * z[:m, None, :]).reshape(m, p * p) for k in range(1, K + 1)]
    return np.hstack(blocks)


def _abs_max(block: np.ndarray) -> np.ndarray:
    return np.max(np.abs(block), axis=1)


def wn_test(
    y: ArrayLike,
    K: int = 2,
    B: int = 1000,
    kernel: Union[KernelSpec, str] = "qs",
    alpha: float = 0.05,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    pre_pca: bool = False,
    pca_config: Optional[dict[str, Any]] = None,
) -> TestOutcome:
    """Multiplier-bootstrap white-noise test.

    Parameters
    ----------
    y : array_like, shape (n, p)
    K : int
        Largest lag in the statistic.
    B : int
        Bootstrap replications.
    kernel : KernelSpec or str
        Kernel for ``Theta``; ``"auto"`` bandwidth uses the AR(1) plug-in rule
        on the scaled scores.
    pre_pca : bool
        Test the segmentation-transformed series ``x_t = B y_t`` instead of ``y``.
        ``pca_config`` is forwarded to :func:`hdts.pca.segment`.
    """
    _check_bootstrap(B, alpha)
    y = as_series(y, min_n=3)
    if pre_pca:
        from .pca import segment

        y = segment(y, **(pca_config or {})).X
    stat = wn_statistic(y, K)
    scores = wn_scores(y, K)
    spec = _resolve_kernel(kernel, scores)
    theta = theta_matrix(scores.shape[0], spec)
    seed = _resolve_seed(seed)
    draws = bootstrap_max(theta, scores, B, seed, _abs_max, _default_threads(threads))
    cv = critical_value(draws, alpha)
    return TestOutcome(stat, cv, bootstrap_pvalue(draws, stat), stat > cv, K, spec, B, alpha, seed)


def apply_map(y: np.ndarray, map: MapLike = "linear") -> tuple[np.ndarray, str]:
    """Evaluate ``phi(y_t)`` row-wise; returns the ``(n, d)`` matrix and its kind."""
    if isinstance(map, str):
        kind = map.lower()
        if kind == "linear":
            return y, "linear"
        if kind == "quad":
            return np.hstack([y, y * y]), "quad"
        raise ValueError("map must be 'linear', 'quad' or an (n, d) matrix")
    phi = np.asarray(map, dtype=float)
    if phi.ndim == 1:
        phi = phi[:, None]
    if phi.ndim != 2 or phi.shape[0] != y.shape[0]:
        raise ShapeError(f"map matrix must have {y.shape[0]} rows, got shape {phi.shape}")
    if phi.shape[1] < 1 or not np.all(np.isfinite(phi)):
        raise ShapeError("map matrix must have at least one column of finite values")
    return phi, "custom"


def mds_scores(y: ArrayLike, K: int = 2, map: MapLike = "linear") -> np.ndarray:
    """Rows ``f_t = (vec(phi(y_t) y_{t+k}^T))_{k=1..K}``, shape ``(n - K, K p d)``."""
    y = as_series(y, min_n=3)
    n, p = y.shape
    K = _check_k(K, n)
    phi, _ = apply_map(y, map)
    d = phi.shape[1]
    m = n - K
    blocks = [(phi[:m, :, None] * y[k : k + m, None, :]).reshape(m, d * p) for k in range(1, K + 1)]
    return np.hstack(blocks)


def mds_statistic(y: ArrayLike, K: int = 2, map: MapLike = "linear") -> float:
    """``n sum_k max |beta_k|^2`` with ``beta_k = (n-k)^{-1} sum_t vec(phi(y_t) y_{t+k}^T)``."""
    y = as_series(y, min_n=3)
    n = y.shape[0]
    K = _check_k(K, n)
    phi, _ = apply_map(y, map)
    total = 0.0
    for k in range(1, K + 1):
        beta = phi[: n - k].T @ y[k:] / (n - k)
        total += float(np.max(np.abs(beta))) ** 2
    return n * total


def mds_test(
    y: ArrayLike,
    K: int = 2,
    B: int = 1000,
    map: MapLike = "linear",
    alpha: float = 0.05,
    kernel: Union[KernelSpec, str] = "qs",
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> TestOutcome:
    """Multiplier-bootstrap martingale-difference test.

    ``map`` is ``"linear"``, ``"quad"`` (``phi(x) = (x, x^2)``) or a precomputed
    ``(n, d)`` matrix of ``phi(y_t)`` rows. Bootstrap scores are centered.
    """
    _check_bootstrap(B, alpha)
    y = as_series(y, min_n=3)
    stat = mds_statistic(y, K, map)
    _, kind = apply_map(y, map)
    scores = mds_scores(y, K, map)
    scores = scores - scores.mean(axis=0)
    spec = _resolve_kernel(kernel, scores)
    theta = theta_matrix(scores.shape[0], spec)
    width = scores.shape[1] // K

    def reduce(block):
        sq = block * block
        return sum(np.max(sq[:, k * width : (k + 1) * width], axis=1) for k in range(K))

    seed = _resolve_seed(seed)
    draws = bootstrap_max(theta, scores, B, seed, reduce, _default_threads(threads))
    cv = critical_value(draws, alpha)
    return TestOutcome(stat, cv, bootstrap_pvalue(draws, stat), stat > cv, K, spec, B, alpha, seed, kind)
