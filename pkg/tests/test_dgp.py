from __future__ import annotations

import numpy as np
import pytest

from hdts import RngSpec, make_example, make_rng, sim_arma, sim_integrated, sim_var1
from hdts.errors import InvalidCoefficients, ShapeError


def test_rng_reproducible():
    a = make_rng(RngSpec(3)).standard_normal(5)
    b = make_rng(3).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_rng(RngSpec(3, "pcg64")).standard_normal(5))
    with pytest.raises(ValueError):
        RngSpec(1, "mt").generator()


def test_arma_acf():
    x = sim_arma([0.95], n=5000, rng=0)
    xc = x - x.mean()
    r1 = xc[1:] @ xc[:-1] / (xc @ xc)
    assert 0.85 <= r1 <= 0.99


def test_arma_validation():
    with pytest.raises(InvalidCoefficients):
        sim_arma([1.0], n=10)
    with pytest.raises(InvalidCoefficients):
        sim_var1(np.eye(2), 10)
    with pytest.raises(ShapeError):
        sim_arma([], n=0)


def test_integrated_classified_nonstationary():
    from hdts.coint import acf_profile

    vals = [acf_profile(sim_integrated(1, [0.6], [0.8], 1500, rng=s)[:, None], 20)[0] for s in range(100)]
    assert np.mean(np.array(vals) >= 0.3) >= 0.95
    # d = 0 returns the ARMA path itself
    assert np.array_equal(sim_integrated(0, [0.5], (), 50, rng=1), sim_arma([0.5], (), 50, rng=1))


@pytest.mark.parametrize(
    "example, shape",
    [(1, (400, 200)), (2, (400, 200)), (3, (1500, 6)), (4, (400, 10, 10)), (5, (1500, 8)), (6, (200, 10))],
)
def test_example_shapes(example, shape):
    ds = make_example(example, 0)
    assert ds.y.shape == shape and np.all(np.isfinite(ds.y))
    assert np.array_equal(ds.y, make_example(example, 0).y)


def test_example_truths():
    assert make_example(2, 0).z.shape == (400, 2)
    assert make_example(3, 0).truth["group_sizes"] == [3, 2, 1]
    ds = make_example(5, 0)
    np.testing.assert_array_equal(ds.truth["A"][:3, :3], [[1, 1, 0], [0.5, 0, 1], [0, 1, 0]])
    weak = make_example(1, 0, weak=True).truth["A"]
    strong = make_example(1, 0).truth["A"]
    np.testing.assert_allclose(weak[:, 2], strong[:, 2] / 200**0.25)
    with pytest.raises(ValueError):
        make_example(7)
