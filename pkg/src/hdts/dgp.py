"""Seeded simulators for the package's benchmark designs.

All generators draw from an explicit :class:`numpy.random.Generator`; the
default bit generator is Philox so streams are reproducible from a seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidCoefficients, ShapeError

__all__ = [
    "BURN_IN",
    "RngSpec",
    "make_rng",
    "sim_arma",
    "sim_var1",
    "sim_integrated",
    "Dataset",
    "make_example",
]

BURN_IN = 200

_BIT_GENERATORS = {
    "philox": np.random.Philox,
    "pcg64": np.random.PCG64,
}


@dataclass(frozen=True)
class RngSpec:
    """Seed plus bit-generator name."""

    seed: int
    algorithm: str = "philox"

    def generator(self) -> np.random.Generator:
        try:
            bitgen = _BIT_GENERATORS[self.algorithm.lower()]
        except KeyError:
            raise ValueError(f"unknown RNG algorithm {self.algorithm!r}") from None
        return np.random.Generator(bitgen(self.seed))


RngLike = Union[None, int, RngSpec, np.random.Generator]


def make_rng(rng: RngLike = None) -> np.random.Generator:
    """Coerce ``None`` / seed / :class:`RngSpec` / Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return rng.generator()
    if rng is None:
        return np.random.Generator(np.random.Philox())
    return RngSpec(int(rng)).generator()


def _check_ar(ar: np.ndarray) -> None:
    if ar.size == 0:
        return
    roots = np.roots(np.r_[1.0, -ar][::-1])
    if np.any(np.abs(roots) <= 1.0 + 1e-10):
        raise InvalidCoefficients(f"AR coefficients {ar.tolist()} are not stationary")


def sim_arma(
    ar: Sequence[float] = (),
    ma: Sequence[float] = (),
    n: int = 100,
    sigma: float = 1.0,
    rng: RngLike = None,
    burn_in: int = BURN_IN,
) -> np.ndarray:
    """Simulate ``x_t = sum ar_i x_{t-i} + e_t + sum ma_j e_{t-j}`` with Gaussian ``e``.

    The first ``burn_in`` values are discarded.
    """
    ar = np.asarray(ar, dtype=float).ravel()
    ma = np.asarray(ma, dtype=float).ravel()
    _check_ar(ar)
    if n < 1:
        raise ShapeError("n must be positive")
    rng = make_rng(rng)
    e = sigma * rng.standard_normal(n + burn_in)
    x = lfilter(np.r_[1.0, ma], np.r_[1.0, -ar], e)
    return x[burn_in:]


def sim_var1(
    coef: np.ndarray, n: int, rng: RngLike = None, burn_in: int = BURN_IN
) -> np.ndarray:
    """VAR(1) ``x_t = M x_{t-1} + e_t`` with standard Gaussian innovations, ``(n, g)``."""
    m = np.atleast_2d(np.asarray(coef, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise ShapeError("VAR coefficient matrix must be square")
    if np.max(np.abs(np.linalg.eigvals(m))) >= 1.0:
        raise InvalidCoefficients("VAR(1) coefficient matrix is explosive")
    rng = make_rng(rng)
    g = m.shape[0]
    e = rng.standard_normal((n + burn_in, g))
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, n + burn_in):
        x[t] = m @ x[t - 1] + e[t]
    return x[burn_in:]


def sim_integrated(
    d: int,
    ar: Sequence[float] = (),
    ma: Sequence[float] = (),
    n: int = 100,
    rng: RngLike = None,
    sigma: float = 1.0,
) -> np.ndarray:
    """Cumulative-sum an ARMA path ``d`` times (``d`` in 0, 1, 2)."""
    if d not in (0, 1, 2):
        raise ValueError("integration order must be 0, 1 or 2")
    x = sim_arma(ar, ma, n, sigma, rng)
    for _ in range(d):
        x = np.cumsum(x)
    return x


@dataclass
class Dataset:
    """Simulated observations plus the ground truth they were built from."""

    example: int
    y: np.ndarray
    truth: dict[str, Any] = field(default_factory=dict)
    z: Optional[np.ndarray] = None


_EX1_AR = (0.6, -0.5, 0.3)


def _example1(n, p, rng, weak):
    r = 3
    x = np.column_stack([sim_arma([a], (), n, rng=rng) for a in _EX1_AR])
    a = rng.uniform(-1.0, 1.0, (p, r))
    if weak:
        a[:, 2] /= p**0.25
    y = x @ a.T + rng.standard_normal((n, p))
    return Dataset(1, y, {"r": r, "A": a, "x": x, "weak": weak})


def _example2(n, p, rng):
    r, m = 3, 2
    x = np.column_stack([sim_arma([a], (), n, rng=rng) for a in _EX1_AR])
    z = sim_var1(np.array([[0.625, 0.125], [0.125, 0.625]]), n, rng)
    a = rng.uniform(-2.0, 2.0, (p, r))
    dmat = rng.uniform(-2.0, 2.0, (p, m))
    y = z @ dmat.T + x @ a.T + rng.standard_normal((n, p))
    return Dataset(2, y, {"r": r, "A": a, "D": dmat, "x": x}, z=z)


def _example3(n, rng):
    p = 6
    e1 = sim_arma([0.5, 0.3], [-0.9, 0.3, 1.2, 1.3], n + 2, rng=rng)
    e2 = sim_arma([0.8, -0.5], [1.0, 0.8, 1.8], n + 1, rng=rng)
    e3 = sim_arma([-0.7, -0.5], [-1.0, -0.8], n, rng=rng)
    x = np.column_stack([e1[i : n + i] for i in range(3)] + [e2[i : n + i] for i in range(2)] + [e3])
    a = rng.uniform(-3.0, 3.0, (p, p))
    groups = [[0, 1, 2], [3, 4], [5]]
    return Dataset(3, x @ a.T, {"A": a, "x": x, "groups": groups, "group_sizes": [3, 2, 1]})


_A11 = np.array([[1.0, 1.0, 0.0], [0.5, 0.0, 1.0], [0.0, 1.0, 0.0]])


def _example5(n, p, rng):
    r = 3
    if p < r + 2:
        raise ShapeError(f"example 5 needs p >= {r + 2}")
    cols = [sim_integrated(1, (), (), n, rng)]
    cols += [rng.standard_normal(n) for _ in range(2)]
    cols += [sim_arma([0.5], (), n, rng=rng) for _ in range(3, r + 1)]
    cols += [sim_integrated(1, [0.6], [0.8], n, rng) for _ in range(r + 1, p)]
    x = np.column_stack(cols)
    a = rng.uniform(-3.0, 3.0, (p, p))
    a[:3, :3] = _A11
    return Dataset(5, x @ a.T, {"r": r, "A": a, "x": x})


def make_example(
    example: int,
    rng: RngLike = None,
    n: Optional[int] = None,
    p: Optional[int] = None,
    weak: bool = False,
) -> Dataset:
    """Generate one of the benchmark designs.

    ========  ==================================================  ==============
    example   design                                              default (n, p)
    ========  ==================================================  ==============
    1         three AR(1) factors, uniform(-1, 1) loadings        (400, 200)
    2         example 1 plus two VAR(1) regressors                (400, 200)
    3         ARMA blocks of sizes 3, 2, 1 mixed by a 6x6 matrix  (1500, 6)
    4         CP matrix series, see :func:`hdts.cp.dgp_cp`        (400, 10x10)
    5         three stationary directions among 8 mixed I(1)s     (1500, 8)
    6         i.i.d. standard Gaussian panel                      (200, 10)
    ========  ==================================================  ==============

    ``weak=True`` shrinks the third loading column of example 1 by ``p ** 0.25``.
    """
    rng = make_rng(rng)
    if example == 1:
        return _example1(n or 400, p or 200, rng, weak)
    if example == 2:
        return _example2(n or 400, p or 200, rng)
    if example == 3:
        if p not in (None, 6):
            raise ShapeError("example 3 has fixed dimension p=6")
        return _example3(n or 1500, rng)
    if example == 4:
        from .cp import dgp_cp

        side = p or 10
        sim = dgp_cp(n or 400, side, side, 3, 3, 3, rng)
        return Dataset(4, sim.Y, {"d": 3, "A": sim.A, "B": sim.B, "x": sim.factors})
    if example == 5:
        return _example5(n or 1500, p or 8, rng)
    if example == 6:
        n, p = n or 200, p or 10
        return Dataset(6, rng.standard_normal((n, p)), {})
    raise ValueError(f"unknown example {example}; choose 1-6")
