from __future__ import annotations

import numpy as np
import pytest

from hdts import make_example, predict_segments, segment
from hdts.dgp import sim_arma, sim_var1
from hdts.errors import InsufficientData, InvalidPair
from hdts.pca import (
    connect_fdr,
    connect_max_cc,
    cross_correlations,
    fdr_cut,
    group_pairs,
    max_ratio_cut,
    pair_pvalues,
    prewhiten_component,
    whiten,
)

import oracles


def test_whiten_identity_covariance():
    y = np.random.default_rng(1).standard_normal((300, 5)) @ np.random.default_rng(2).standard_normal((5, 5))
    z, _ = whiten(y)
    zc = z - z.mean(axis=0)
    np.testing.assert_allclose(zc.T @ zc / 300, np.eye(5), atol=1e-8)


def test_cross_correlations_layout():
    z = np.random.default_rng(3).standard_normal((80, 3))
    c = cross_correlations(z, 4)
    assert c.shape == (5, 3, 3)
    np.testing.assert_allclose(c[2], oracles.autocorr(z, 2), atol=1e-12)


def test_example3_recovers_groups():
    fit = segment(make_example(3, 0).y)
    assert sorted(fit.group_sizes) == [1, 2, 3]
    # groups are contiguous blocks of X columns
    assert [j for g in fit.groups for j in g] == list(range(6))
    np.testing.assert_allclose(fit.X, make_example(3, 0).y @ fit.B.T, atol=1e-10)


def test_groups_equal_closure_of_pairs():
    fit = segment(make_example(3, 5).y)
    assert fit.groups == oracles.closure_groups(6, fit.connected_pairs)


def test_block_diagonal_recovery():
    hits = 0
    for s in range(50):
        rng = np.random.default_rng(s)
        # strongly coupled pair plus an independent AR(1); weakly coupled pairs are
        # not reliably separated at p = 3, where only three pairs enter the ratio scan
        blocks = [sim_var1(np.array([[0.8, 0.5], [-0.5, 0.3]]), 600, rng), sim_arma([-0.5], n=600, rng=rng)[:, None]]
        hits += sorted(segment(np.hstack(blocks)).group_sizes) == [1, 2]
    assert hits >= 40


def test_perfectly_correlated_pair_connected():
    for s in range(50):
        rng = np.random.default_rng(100 + s)
        z = rng.standard_normal((500, 4))
        z[:, 3] = z[:, 0]
        assert (0, 3) in connect_max_cc(z, 5)


def test_fdr_size_on_noise():
    false = 0
    for s in range(100):
        z = np.random.default_rng(200 + s).standard_normal((500, 6))
        false += len(connect_fdr(z, 10, 1e-5))
    # 100 replications x 15 pairs; beta = 1e-5 allows essentially none
    assert false <= 2


def test_fdr_cut_and_max_ratio():
    assert fdr_cut([0.001, 0.02, 0.5], 0.05) == 2
    assert fdr_cut([0.9], 0.05) == 0
    assert fdr_cut([0.01, 0.02, 0.03], 0.1) == oracles.fdr_count([0.01, 0.02, 0.03], 0.1)
    assert max_ratio_cut([1.0, 0.9, 0.1, 0.09]) == 2
    with pytest.raises(ValueError):
        max_ratio_cut([1.0])


def test_pair_pvalues_bounds():
    _, pv = pair_pvalues(np.random.default_rng(9).standard_normal((100, 4)), 3)
    assert pv.shape == (6,) and np.all((pv > 0) & (pv <= 1))


def test_group_pairs_examples():
    assert group_pairs(5, [(0, 2), (2, 4)]) == [[0, 2, 4], [1], [3]]
    assert group_pairs(3, []) == [[0], [1], [2]]
    with pytest.raises(InvalidPair):
        group_pairs(3, [(0, 3)])
    with pytest.raises(InvalidPair):
        group_pairs(3, [(1, 1)])


def test_prewhiten_needs_length():
    with pytest.raises(InsufficientData):
        prewhiten_component(np.arange(10.0))


def test_fdr_requires_beta():
    y = make_example(3, 0).y
    with pytest.raises(ValueError):
        segment(y, permutation="fdr")
    fit = segment(y, permutation="fdr", beta=1e-5)
    assert sum(fit.group_sizes) == 6


def test_predict_segments_var_recursion():
    # barely damped rotation: an exact, noiseless VAR(1) that stays informative
    ang = 0.4
    coef = 0.995 * np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    x = np.empty((500, 2))
    x[0] = [1.0, 0.5]
    for t in range(1, 500):
        x[t] = coef @ x[t - 1]
    fit = segment(x, prewhiten=False)
    assert fit.group_sizes == [2]
    out = predict_segments(fit, 1)
    np.testing.assert_allclose(out[0], coef @ x[-1], atol=1e-4)
    out3 = predict_segments(fit, 3)
    assert out3.shape == (3, 2) and np.all(np.isfinite(out3))
