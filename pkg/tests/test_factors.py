from __future__ import annotations

import numpy as np
import pytest

from hdts import build_W, fit_factors, fit_factors_with_regressors, make_example, predict_factors
from hdts.dgp import sim_arma
from hdts.errors import DegenerateSpectrum, DimensionTooSmall, SingularDesign
from hdts.factors import FactorFit
from hdts.forecast import ArModel

import oracles


def _sin_angle(a, b):
    qa = np.linalg.qr(a)[0]
    qb = np.linalg.qr(b)[0]
    return np.linalg.norm(qa - qb @ (qb.T @ qa), 2)


def test_build_W_matches_loop():
    y = np.random.default_rng(1).standard_normal((60, 5))
    np.testing.assert_allclose(build_W(y, 3, 0.1), oracles.W(y, 3, 0.1), atol=1e-12)


def test_build_W_single_lag():
    y = np.random.default_rng(2).standard_normal((40, 3))
    yc = y - y.mean(axis=0)
    s = yc[1:].T @ yc[:-1] / 39
    np.testing.assert_allclose(build_W(y, 1), s @ s.T, atol=1e-14)


def test_build_W_white_noise_decays():
    def avg_norm(n):
        return np.mean([np.linalg.norm(build_W(np.random.default_rng(s).standard_normal((n, 5)), 5)) for s in range(20)])

    assert avg_norm(2000) < 0.5 * avg_norm(200)


def test_example1_shape_and_orthonormality():
    ds = make_example(1, 0)
    fit = fit_factors(ds.y)
    assert fit.factor_num == 3
    np.testing.assert_allclose(fit.loading.T @ fit.loading, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(fit.factors, ds.y @ fit.loading, atol=1e-12)


def test_noiseless_rank_one_subspace():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(20)
    x = sim_arma([0.7], n=300, rng=4)
    fit = fit_factors(np.outer(x, a))
    assert fit.factor_num == 1
    assert _sin_angle(fit.loading, a[:, None]) <= 1e-6


def test_rotation_invariance():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((15, 2))
    x = np.column_stack([sim_arma([0.8], n=400, rng=6), sim_arma([-0.6], n=400, rng=7)])
    y = x @ a.T
    qmat = np.linalg.qr(rng.standard_normal((15, 15)))[0]
    f1 = fit_factors(y)
    f2 = fit_factors(y @ qmat.T)
    p1 = f1.loading @ f1.loading.T
    p2 = f2.loading @ f2.loading.T
    assert np.linalg.norm(p1 - qmat.T @ p2 @ qmat) <= 1e-6


def test_scale_invariance():
    y = make_example(1, 3, n=200, p=50).y
    assert fit_factors(y).factor_num == fit_factors(7.5 * y).factor_num


def test_two_step_split_and_threshold():
    ds = make_example(1, 1, weak=True)
    one = fit_factors(ds.y)
    two = fit_factors(ds.y, two_step=True)
    assert two.two_step and two.step_split == (2, 1)
    assert sum(two.step_split) >= one.factor_num
    np.testing.assert_allclose(two.loading[:, :2].T @ two.loading[:, 2:], 0.0, atol=1e-10)
    th = fit_factors(ds.y, thresh=True)
    assert th.delta == pytest.approx(2 * np.sqrt(np.log(200) / 400))


def test_p_one_rejected():
    with pytest.raises(DimensionTooSmall):
        fit_factors(np.random.default_rng(0).standard_normal((50, 1)))


def test_regressors_true_D():
    ds = make_example(2, 0)
    fit = fit_factors_with_regressors(ds.y, ds.z, D=ds.truth["D"])
    assert fit.factor_num == 3
    np.testing.assert_array_equal(fit.reg_coef, ds.truth["D"])
    eta = ds.y - ds.z @ ds.truth["D"].T
    np.testing.assert_allclose(fit.factors, eta @ fit.loading, atol=1e-10)


def test_regressors_ols_exact_and_degenerate():
    rng = np.random.default_rng(8)
    z = rng.standard_normal((100, 2))
    d = rng.standard_normal((6, 2))
    with pytest.raises(DegenerateSpectrum):
        fit_factors_with_regressors(z @ d.T, z)
    from hdts.factors import _ols_coef

    np.testing.assert_allclose(_ols_coef(z @ d.T, z), d, atol=1e-8)
    with pytest.raises(SingularDesign):
        fit_factors_with_regressors(rng.standard_normal((100, 6)), np.zeros((100, 1)))
    with pytest.raises(SingularDesign):
        fit_factors_with_regressors(rng.standard_normal((100, 6)), np.zeros((100, 1)), D=np.ones((6, 1)))


def test_predict_factors_recursion():
    a = np.array([[0.6], [0.8]])
    x = np.array([1.0, 0.5, 2.0])
    fit = FactorFit(1, a, x[:, None], 5, 0.0)
    model = ArModel(1, np.array([0.6]), 0.0, 1.0, 0.0)
    out = predict_factors(fit, 2, models=[model])
    np.testing.assert_allclose(out[0], 1.2 * a[:, 0], atol=1e-6)
    np.testing.assert_allclose(out[1], 0.72 * a[:, 0], atol=1e-6)


def test_predict_factors_example1():
    fit = fit_factors(make_example(1, 2).y)
    out = predict_factors(fit, 3)
    assert out.shape == (3, 200) and np.all(np.isfinite(out))
