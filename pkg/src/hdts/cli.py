"""Command-line front end.

Every subcommand reads CSV input, runs one estimator or test and prints a JSON
document ``{method, params, result, timing_ms, seed}``. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .errors import DataError, HDTSError, NumericalError

log = logging.getLogger("hdts")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_io(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", required=True, help="CSV file, rows are time points")
        hdr = p.add_mutually_exclusive_group()
        hdr.add_argument("--header", dest="header", action="store_true", default=None)
        hdr.add_argument("--no-header", dest="header", action="store_false")
    p.add_argument("--out", help="write the JSON document here instead of stdout")
    p.add_argument("--out-dir", help="directory for CSV matrix outputs (--format csv)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="default: $HDTS_THREADS or 1")


def _add_factor_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lag-k", type=int, default=5)
    p.add_argument("--thresh", action="store_true")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--two-step", action="store_true")


def _add_pca_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lag-k", type=int, default=5)
    p.add_argument("--permutation", choices=("max", "fdr"), default="max")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--thresh", action="store_true")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--no-prewhiten", action="store_true")


def _add_cp_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("direct", "refined"), default="direct")
    p.add_argument("--lag-k", type=int, default=20, help="lags for the refined method")
    p.add_argument("--reshape", type=int, nargs=2, metavar=("P", "Q"), default=None,
                   help="read a wide panel and fold each row into a P x Q matrix (row-major)")
    p.add_argument("--thresh", action="store_true")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--thresh2", action="store_true")
    p.add_argument("--delta2", type=float, default=None)
    p.add_argument("--rank", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdts", description="High-dimensional time series toolkit")
    parser.add_argument("--version", action="version", version=f"hdts {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("factors", help="factor model: number of factors and loadings")
    _add_io(p)
    _add_factor_opts(p)

    p = sub.add_parser("hdsreg", help="factor model with observed regressors")
    _add_io(p)
    _add_factor_opts(p)
    p.add_argument("--regressors", required=True, help="CSV of regressors z_t")
    p.add_argument("--D", dest="D", default=None, help="CSV of a known p x m coefficient matrix")

    p = sub.add_parser("pca", help="time-series PCA segmentation")
    _add_io(p)
    _add_pca_opts(p)
    p.add_argument("--correlogram", type=int, default=None, metavar="LAGS",
                   help="also emit cross-correlations of X up to this lag")

    p = sub.add_parser("cp", help="CP decomposition of a matrix time series")
    _add_io(p)
    _add_cp_opts(p)

    p = sub.add_parser("coint", help="cointegration rank")
    _add_io(p)
    p.add_argument("--lag-k", type=int, default=5)
    p.add_argument("--type", choices=("acf", "urtest", "both"), default="acf")
    p.add_argument("--c0", type=float, default=0.3)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.01)

    for name, help_ in (("wn-test", "white-noise test"), ("mds-test", "martingale-difference test")):
        p = sub.add_parser(name, help=help_)
        _add_io(p)
        p.add_argument("--lag-k", type=int, default=2)
        p.add_argument("--B", dest="B", type=int, default=1000)
        p.add_argument("--kernel", choices=("qs", "par", "bart"), default="qs")
        p.add_argument("--bandwidth", type=float, default=None, help="default: data-driven")
        p.add_argument("--alpha", type=float, default=0.05)
        if name == "wn-test":
            p.add_argument("--pre-pca", action="store_true")
        else:
            p.add_argument("--map", default="linear", help="linear | quad | file:<csv of phi(y_t)>")

    p = sub.add_parser("forecast", help="h-step forecasts from a fitted model")
    _add_io(p)
    p.add_argument("--model", choices=("factors", "pca", "cp"), required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--lag-k", type=int, default=None)
    p.add_argument("--thresh", action="store_true")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--two-step", action="store_true")
    p.add_argument("--permutation", choices=("max", "fdr"), default="max")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--method", choices=("direct", "refined"), default="direct")
    p.add_argument("--reshape", type=int, nargs=2, metavar=("P", "Q"), default=None)

    p = sub.add_parser("dgp", help="simulate a benchmark dataset")
    _add_io(p, needs_input=False)
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4, 5, 6), required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--weak", action="store_true", help="example 1 weak third factor")
    p.add_argument("--out-z", default=None, help="example 2: where to write the regressors")
    return parser


# --------------------------------------------------------------------------- helpers


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))
    log.info("no --seed given; drew %d", seed)
    return seed


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.threads
    try:
        return max(1, int(os.environ.get("HDTS_THREADS", "1")))
    except ValueError:
        raise UsageError("HDTS_THREADS must be an integer") from None


def _series(args):
    from .io import read_series_csv

    return read_series_csv(args.input, args.header)


def _matrix_series(args) -> np.ndarray:
    from .io import read_matrix_series_csv

    if args.reshape:
        p, q = args.reshape
        data = _series(args).data
        if data.shape[1] != p * q:
            raise DataError(f"--reshape {p} {q} needs {p * q} columns, input has {data.shape[1]}")
        return data.reshape(data.shape[0], p, q)
    return read_matrix_series_csv(args.input)


def _map_arg(spec: str, y: np.ndarray):
    from .io import read_series_csv

    if spec in ("linear", "quad"):
        return spec
    if spec.startswith("file:"):
        return read_series_csv(spec[5:]).data
    raise UsageError(f"--map must be linear, quad or file:<path>, got {spec!r}")


def _kernel(args):
    from .core import KernelSpec

    return KernelSpec(args.kernel, "auto" if args.bandwidth is None else args.bandwidth)


# --------------------------------------------------------------------------- commands


def cmd_factors(args) -> dict[str, Any]:
    from .factors import fit_factors

    fit = fit_factors(_series(args), args.lag_k, args.thresh, args.delta, args.two_step)
    out = {"factor_num": fit.factor_num, "loading": fit.loading, "factors": fit.factors,
           "delta": fit.delta, "eigenvalues": fit.eigenvalues}
    if fit.two_step:
        out["step_split"] = list(fit.step_split)
    return out


def cmd_hdsreg(args) -> dict[str, Any]:
    from .factors import fit_factors_with_regressors
    from .io import read_matrix_csv, read_series_csv

    y = _series(args)
    z = read_series_csv(args.regressors, args.header)
    d = read_matrix_csv(args.D) if args.D else None
    fit = fit_factors_with_regressors(y, z, d, args.lag_k, args.thresh, args.delta, args.two_step)
    out = {"factor_num": fit.factor_num, "loading": fit.loading, "factors": fit.factors,
           "reg_coef": fit.reg_coef}
    if fit.two_step:
        out["step_split"] = list(fit.step_split)
    return out


def _segment(args, y):
    from .pca import segment

    return segment(y, K=args.lag_k, permutation=args.permutation, thresh=args.thresh,
                   delta=args.delta, prewhiten=not getattr(args, "no_prewhiten", False),
                   m=args.m, beta=args.beta)


def cmd_pca(args) -> dict[str, Any]:
    from .pca import cross_correlations

    fit = _segment(args, _series(args))
    out = {"NoGroups": fit.n_groups, "groups": fit.groups, "group_sizes": fit.group_sizes,
           "connected_pairs": [list(pq) for pq in fit.connected_pairs], "B": fit.B, "X": fit.X}
    if args.correlogram is not None:
        out["correlogram"] = cross_correlations(fit.X, args.correlogram)
    return out


def _cp_fit(args, y):
    from .cp import cp_direct, cp_refined

    if args.method == "direct":
        return cp_direct(y, thresh=args.thresh, delta=args.delta, rank=getattr(args, "rank", None))
    return cp_refined(y, K=args.lag_k or 20, thresh1=args.thresh, delta1=args.delta,
                      thresh2=getattr(args, "thresh2", False), delta2=getattr(args, "delta2", None),
                      rank=getattr(args, "rank", None))


def cmd_cp(args) -> dict[str, Any]:
    fit = _cp_fit(args, _matrix_series(args))
    return {"rank": fit.rank, "A": fit.A, "B": fit.B, "factors": fit.factors, "method": fit.method}


def cmd_coint(args) -> dict[str, Any]:
    from .coint import fit_coint

    fit = fit_coint(_series(args), args.lag_k, args.type, args.c0, args.m, args.alpha)
    out = {"coint_rank": fit.rank, "A": fit.A, "eigenvalues": fit.eigenvalues}
    if args.type == "both":
        out["rank_by_method"] = {"acf": fit.acf_rank, "urtest": fit.urtest_rank}
    return out


def _outcome(o) -> dict[str, Any]:
    return {"statistic": o.statistic, "critical_value": o.critical_value, "p_value": o.p_value,
            "reject": o.reject, "lag_k": o.lag_k, "kernel": o.kernel.kind,
            "bandwidth": o.kernel.bandwidth, "B": o.bootstrap_reps, "alpha": o.alpha,
            "map": o.map_kind}


def cmd_wn_test(args, seed, threads) -> dict[str, Any]:
    from .inference import wn_test

    o = wn_test(_series(args), args.lag_k, args.B, _kernel(args), args.alpha, seed, threads,
                pre_pca=args.pre_pca)
    out = _outcome(o)
    out.pop("map")
    return out


def cmd_mds_test(args, seed, threads) -> dict[str, Any]:
    from .inference import mds_test

    y = _series(args).data
    o = mds_test(y, args.lag_k, args.B, _map_arg(args.map, y), args.alpha, _kernel(args), seed, threads)
    return _outcome(o)


def cmd_forecast(args) -> dict[str, Any]:
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    if args.model == "factors":
        from .factors import fit_factors, predict_factors

        fit = fit_factors(_series(args), args.lag_k or 5, args.thresh, args.delta, args.two_step)
        return {"forecast": predict_factors(fit, args.steps), "factor_num": fit.factor_num}
    if args.model == "pca":
        from .pca import predict_segments

        args.lag_k = args.lag_k or 5
        fit = _segment(args, _series(args))
        return {"forecast": predict_segments(fit, args.steps), "groups": fit.groups}
    from .cp import predict_cp

    fit = _cp_fit(args, _matrix_series(args))
    return {"forecast": predict_cp(fit, args.steps), "rank": fit.rank}


def cmd_dgp(args, seed) -> dict[str, Any]:
    from .dgp import RngSpec, make_example
    from .io import write_matrix_series_csv, write_series_csv

    ds = make_example(args.example, RngSpec(seed), n=args.n, p=args.p, weak=args.weak)
    out: dict[str, Any] = {"example": ds.example, "shape": list(ds.y.shape)}
    if args.out_data:
        if ds.y.ndim == 3:
            write_matrix_series_csv(args.out_data, ds.y)
        else:
            write_series_csv(args.out_data, ds.y)
        out["data"] = args.out_data
    else:
        out["data"] = ds.y
    if ds.z is not None:
        if args.out_z:
            write_series_csv(args.out_z, ds.z, [f"z{j + 1}" for j in range(ds.z.shape[1])])
            out["regressors"] = args.out_z
        else:
            out["regressors"] = ds.z
    out["truth"] = {k: v for k, v in ds.truth.items() if k != "x"}
    return out


# --------------------------------------------------------------------------- output


def _emit(doc: dict[str, Any], args) -> None:
    from .io import dump_json, write_matrix_csv

    if args.format == "csv":
        if not args.out_dir:
            raise UsageError("--format csv needs --out-dir")
        outdir = Path(args.out_dir)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create {outdir}: {exc}") from exc
        for key, val in list(doc["result"].items()):
            if isinstance(val, np.ndarray) and val.ndim in (1, 2):
                path = outdir / f"{key}.csv"
                write_matrix_csv(path, val if val.ndim == 2 else val[:, None])
                doc["result"][key] = str(path)
            elif isinstance(val, np.ndarray) and val.ndim == 3:
                for h in range(val.shape[0]):
                    path = outdir / f"{key}_{h + 1}.csv"
                    write_matrix_csv(path, val[h])
                doc["result"][key] = [str(outdir / f"{key}_{h + 1}.csv") for h in range(val.shape[0])]
    text = dump_json(doc)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text + "\n")


def _params(args) -> dict[str, Any]:
    skip = {"func", "verbose"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def run(args) -> dict[str, Any]:
    seed = _seed(args)
    threads = _threads(args)
    args.seed, args.threads = seed, threads
    start = time.perf_counter()
    cmd = args.command
    if cmd == "dgp":
        # for dgp, --out names the data file; the JSON summary goes to stdout
        args.out_data, args.out = args.out, None
        result = cmd_dgp(args, seed)
    elif cmd == "wn-test":
        result = cmd_wn_test(args, seed, threads)
    elif cmd == "mds-test":
        result = cmd_mds_test(args, seed, threads)
    else:
        result = {
            "factors": cmd_factors,
            "hdsreg": cmd_hdsreg,
            "pca": cmd_pca,
            "cp": cmd_cp,
            "coint": cmd_coint,
            "forecast": cmd_forecast,
        }[cmd](args)
    elapsed = (time.perf_counter() - start) * 1000.0
    params = _params(args)
    if cmd == "dgp":
        params["out"] = params.pop("out_data")
    return {"method": cmd, "params": params, "result": result, "timing_ms": elapsed, "seed": seed}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        doc = run(args)
        _emit(doc, args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DataError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except HDTSError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("invalid argument: %s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
