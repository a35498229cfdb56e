"""High-dimensional time series analysis.

Factor models, time-series PCA segmentation, CP decomposition of matrix
series, cointegration rank estimation and bootstrap white-noise /
martingale-difference tests, plus the simulators used to benchmark them.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .coint import CointFit, acf_rank, build_W_check, fit_coint
from .core import KernelSpec, Series, hard_threshold, lag_autocorrelation, lag_autocovariance
from .cp import CpFit, MatrixSeries, cp_direct, cp_refined, default_xi, dgp_cp, predict_cp, sigma_y_xi
from .dgp import RngSpec, make_example, make_rng, sim_arma, sim_integrated, sim_var1
from .errors import DataError, HDTSError, NumericalError
from .factors import FactorFit, build_W, fit_factors, fit_factors_with_regressors, predict_factors
from .forecast import ArModel, VarModel, fit_ar_aic, fit_var_aic, forecast_ar, forecast_var
from .inference import TestOutcome, mds_statistic, mds_test, wn_statistic, wn_test
from .pca import SegmentationFit, predict_segments, segment
from .spectral import ratio_order, sym_eigen

__all__ = [
    "ArModel",
    "CointFit",
    "CpFit",
    "DataError",
    "FactorFit",
    "HDTSError",
    "KernelSpec",
    "MatrixSeries",
    "NumericalError",
    "RngSpec",
    "SegmentationFit",
    "Series",
    "TestOutcome",
    "VarModel",
    "acf_rank",
    "build_W",
    "build_W_check",
    "cp_direct",
    "cp_refined",
    "default_xi",
    "dgp_cp",
    "fit_ar_aic",
    "fit_coint",
    "fit_factors",
    "fit_factors_with_regressors",
    "fit_var_aic",
    "forecast_ar",
    "forecast_var",
    "hard_threshold",
    "lag_autocorrelation",
    "lag_autocovariance",
    "make_example",
    "make_rng",
    "mds_statistic",
    "mds_test",
    "predict_cp",
    "predict_factors",
    "predict_segments",
    "ratio_order",
    "segment",
    "sigma_y_xi",
    "sim_arma",
    "sim_integrated",
    "sim_var1",
    "sym_eigen",
    "wn_statistic",
    "wn_test",
]
