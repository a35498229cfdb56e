"""Eigen-machinery: symmetric eigendecomposition, ratio order estimator and
(pseudo-)inverses used by every estimator in the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    DegenerateSpectrum,
    NotSymmetric,
    RankDeficientPencil,
    ShapeError,
    SingularMatrix,
)

__all__ = [
    "SpectralResult",
    "sign_normalize",
    "sym_eigen",
    "ratio_order",
    "pseudo_inverse",
    "inv_sqrt_psd",
    "generalized_eigen",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude is nonnegative."""
    v = np.array(v, dtype=float, copy=True)
    if v.ndim == 1:
        return v if v[np.argmax(np.abs(v))] >= 0 else -v
    idx = np.argmax(np.abs(v), axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    return v


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def sym_eigen(a: np.ndarray) -> SpectralResult:
    """Eigen-decompose a symmetric matrix, eigenvalues in descending order."""
    a = _check_square(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > 1e-8 * scale:
        raise NotSymmetric("matrix is not symmetric to 1e-8 relative tolerance")
    vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    order = np.argsort(vals, kind="stable")[::-1]
    return SpectralResult(vals[order], sign_normalize(vecs[:, order]))


def ratio_order(
    eigenvalues: np.ndarray, fraction: float = 0.75, max_index: Optional[int] = None
) -> int:
    """Index minimising consecutive eigenvalue ratios ``lambda_{i+1} / lambda_i``.

    The search runs over ``i = 1..R`` with ``R = max(1, floor(fraction * len))``
    unless ``max_index`` is given. Ratios whose denominator is numerically zero
    count as 1 so that they never win. The result is 1-based (a count).
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size < 2:
        raise ShapeError("need at least two eigenvalues")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    lam = np.clip(lam, 0.0, None)
    if lam[0] <= 0:
        raise DegenerateSpectrum("all eigenvalues are zero")
    big_r = max_index if max_index is not None else int(np.floor(fraction * lam.size))
    big_r = min(max(1, big_r), lam.size - 1)
    head, nxt = lam[:big_r], lam[1 : big_r + 1]
    alive = head > _EPS * lam[0]
    ratios = np.ones(big_r)
    ratios[alive] = nxt[alive] / head[alive]
    return int(np.argmin(ratios)) + 1


def pseudo_inverse(m: np.ndarray, rank: Optional[int] = None) -> np.ndarray:
    """Moore-Penrose inverse through the SVD, optionally at a fixed rank."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ShapeError("pseudo_inverse expects a matrix")
    if m.size == 0:
        return m.T.copy()
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if rank is None:
        tol = max(m.shape) * _EPS * (s[0] if s.size else 0.0)
        keep = s > tol
    else:
        keep = np.arange(s.size) < rank
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


def inv_sqrt_psd(v: np.ndarray, ridge: Union[float, str] = 0.0) -> np.ndarray:
    """Symmetric inverse square root with eigenvalues floored at ``ridge``.

    ``ridge="auto"`` uses ``1e-8 * trace(v) / p``.
    """
    v = _check_square(v)
    p = v.shape[0]
    if isinstance(ridge, str):
        if ridge != "auto":
            raise ValueError("ridge must be a nonnegative float or 'auto'")
        ridge = 1e-8 * max(np.trace(v), 0.0) / p
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    res = sym_eigen(v)
    lam, u = res.eigenvalues, res.eigenvectors
    if ridge == 0:
        if lam[-1] <= 0:
            raise SingularMatrix("matrix is singular; pass a positive ridge")
    else:
        lam = np.maximum(lam, ridge)
    out = (u / np.sqrt(lam)) @ u.T
    return (out + out.T) / 2.0


def generalized_eigen(a: np.ndarray, b: np.ndarray, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``A x = lambda B x`` on the leading ``rank``-dimensional subspace of ``B``.

    ``B`` is truncated to its top ``rank`` eigenpairs ``U diag(lam) U^T`` and the
    reduced problem ``lam^{-1/2} U^T A U lam^{-1/2} w = lambda w`` is solved; the
    returned vectors are ``U lam^{-1/2} w`` scaled to unit length. A complex
    conjugate pair contributes its real and imaginary parts as two orthonormal
    real vectors (both tagged with the real part of the eigenvalue).

    Returns ``(eigenvalues, vectors)`` with vectors as columns, ordered by
    decreasing eigenvalue modulus.
    """
    a = _check_square(a)
    b = _check_square(b)
    q = a.shape[0]
    if b.shape != a.shape:
        raise ShapeError("pencil matrices must have equal shapes")
    if not 1 <= rank <= q:
        raise ValueError(f"rank must lie in [1, {q}]")
    res = sym_eigen(b)
    lam, u = res.eigenvalues[:rank], res.eigenvectors[:, :rank]
    top = res.eigenvalues[0]
    if top <= 0 or lam[-1] <= max(q * _EPS * top, 0.0):
        raise RankDeficientPencil(f"B has fewer than {rank} eigenvalues above tolerance")
    root = u / np.sqrt(lam)
    c = root.T @ a @ root
    vals, w = np.linalg.eig(c)
    order = np.lexsort((-vals.real, -np.abs(vals)))
    vals, w = vals[order], w[:, order]

    out_vals = np.empty(rank)
    out_vecs = np.empty((q, rank))
    j = 0
    while j < rank:
        vec = root @ w[:, j]
        if abs(vals[j].imag) > 1e-12 * max(1.0, abs(vals[j])) and j + 1 < rank:
            pair = np.column_stack([vec.real, vec.imag])
            qmat, _ = np.linalg.qr(pair)
            out_vecs[:, j : j + 2] = qmat
            out_vals[j : j + 2] = vals[j].real
            j += 2
            continue
        x = vec.real if np.linalg.norm(vec.real) > 0 else vec.imag
        out_vecs[:, j] = x / np.linalg.norm(x)
        out_vals[j] = vals[j].real
        j += 1
    return out_vals, sign_normalize(out_vecs)
