"""Command-line entry point: ``lrdu {simulate, estimate, uprocess, limits, montecarlo}``.

Exit codes: 0 success, 1 unreadable input or bad usage, 2 parameter out of
domain, 3 limit requested outside its regime, 4 numerical failure.
The default worker count comes from ``LRDU_THREADS``.
"""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import (
    CumulantRequest,
    clt_covariance,
    cumulant_table,
    k_of_D,
    limit_cumulant_with_error,
    sample_limit_law,
    var_fbm,
    var_hl_normalized,
    var_rosenblatt,
)
from .errors import DomainError, LrduError, RegimeError
from .estimators import POINT_ESTIMATORS, canonical_name, estimate, estimate_batch, wilcoxon_signed_rank
from .hermite import get_kernel
from .lrd_sim import ContaminationSpec, CovarianceModel, contaminate, simulate_gaussian
from .montecarlo import McConfig, rate_study, run_experiment
from .uprocess import hoeffding_curve, u_process

THREADS_ENV = "LRDU_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _add_model(p, required=True):
    g = p.add_argument_group("correlation model")
    g.add_argument("--model", choices=["fgn", "arfima"], required=required, help="model family")
    g.add_argument("--H", type=float, help="Hurst index of fgn, in (1/2, 1)")
    g.add_argument("--phi", type=float, default=0.0, help="AR(1) coefficient of arfima")
    g.add_argument("--d", type=float, help="memory parameter of arfima, in (0, 1/2)")


def _model_from(args) -> CovarianceModel | None:
    if args.model is None:
        return None
    if args.model == "fgn":
        if args.H is None:
            raise DomainError("--model fgn needs --H")
        return CovarianceModel.fgn(args.H)
    if args.d is None:
        raise DomainError("--model arfima needs --d")
    return CovarianceModel.arfima(args.phi, args.d)


def _resolved(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# -- subcommands -------------------------------------------------------------------


def cli_simulate(args) -> int:
    model = _model_from(args)
    if args.n < 2:
        raise DomainError("--n must be at least 2")
    path = simulate_gaussian(model, args.n, args.seed, args.index)
    if args.omega is not None:
        spec = ContaminationSpec(args.omega, args.p, args.scheme)
        path = contaminate(path, spec, args.seed, args.index)
    path.meta["config"] = _resolved(args)
    path.to_csv(args.output)
    return 0


def _load_model_for(args, input_path):
    model = _model_from(args)
    if model is None and not args.no_sidecar:
        side = Path(input_path).with_suffix(".json")
        if side.exists():
            meta = io.read_json(side)
            if isinstance(meta, dict) and isinstance(meta.get("model"), dict):
                model = CovarianceModel.from_dict(meta["model"])
    return model


def cli_estimate(args) -> int:
    names = [s for s in args.est.split(",") if s]
    model = _load_model_for(args, args.input)
    if args.batch:
        headers, table = io.read_table(args.input)
        keys = [canonical_name(n) for n in names]
        res = estimate_batch(table.T, keys)
        cols = {"path": np.arange(table.shape[1])}
        cols.update(res)
        io.write_csv(args.output, cols)
        io.write_json(Path(args.output).with_suffix(".json"),
                      {"config": _resolved(args), "paths": headers, "estimators": keys})
        return 0
    x = io.read_column(args.input)
    reports = []
    for name in names:
        if name.strip().lower() == "wilcoxon":
            w = wilcoxon_signed_rank(x, model)
            reports.append({"name": "wilcoxon", "T": w.T, "u1": w.u1, "u2": w.u2, "n": x.size,
                            "limit": None if w.limit is None else w.limit.to_dict()})
        else:
            reports.append(estimate(name, x, model).to_dict())
    io.write_json(args.output, {"config": _resolved(args),
                                "model": None if model is None else model.to_dict(),
                                "reports": reports})
    return 0


def _parse_grid(text: str) -> np.ndarray:
    if ":" in text:
        lo, hi, num = text.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    return np.sort(np.array([float(v) for v in text.split(",") if v]))


def cli_uprocess(args) -> int:
    x = io.read_column(args.input)
    kernel = get_kernel(args.kernel)
    grid = _parse_grid(args.grid)
    curve = hoeffding_curve(x, kernel, grid) if args.hoeffding else u_process(x, kernel, grid)
    curve.to_csv(args.output)
    side = Path(args.output).with_suffix(".json")
    meta = io.read_json(side)
    meta["config"] = _resolved(args)
    io.write_json(side, meta)
    return 0


def cli_limits(args) -> int:
    D = args.D
    out = {"config": _resolved(args), "D": D, "k": k_of_D(D), "var_Z1": var_fbm(D),
           "var_hl_normalized": var_hl_normalized(D)}
    lines = [f"k(D) = {io.FLOAT_FMT % out['k']}", f"var_Z1 = {io.FLOAT_FMT % out['var_Z1']}"]
    if D < 0.5:
        out["var_Z2"] = var_rosenblatt(D)
        lines.append(f"var_Z2 = {io.FLOAT_FMT % out['var_Z2']}")
    if args.cumulant is not None:
        req = CumulantRequest(args.cumulant, args.a, args.b, D, args.method, args.samples, args.seed)
        value, se = limit_cumulant_with_error(req)
        out["cumulant"] = {"p": req.p, "a": req.a, "b": req.b, "method": req.method, "value": value, "se": se}
        lines.append(f"kappa_{req.p} = {io.FLOAT_FMT % value}")
    if args.table:
        out["table"] = cumulant_table(D, args.a, args.b)
    if args.clt is not None:
        model = _model_from(args) or CovarianceModel.with_decay(D)
        s, t = (float(v) for v in args.clt.split(","))
        out["clt_covariance"] = clt_covariance(get_kernel(args.kernel), s, t, model)
        lines.append(f"clt_covariance = {io.FLOAT_FMT % out['clt_covariance']}")
    if args.sample:
        if args.samples_out is None:
            raise UsageError("--sample needs --samples-out")
        draws = sample_limit_law(args.a, args.b, D, args.n_approx, args.sample, args.seed,
                                 workers=args.threads)
        io.write_csv(args.samples_out, {"value": draws}, header=False)
        out["samples"] = {"path": str(args.samples_out), "reps": args.sample}
    if args.output:
        io.write_json(args.output, out)
    print("\n".join(lines))
    return 0


def cli_montecarlo(args) -> int:
    try:
        obj = io.read_json(args.config)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: not valid JSON ({exc})") from exc
    config = McConfig.from_dict(obj)
    result = run_experiment(config, workers=args.threads)
    outdir = Path(args.output)
    tmp = outdir.with_name(f".{outdir.name}.partial")
    try:
        result.write(tmp)
        if config.grid_sizes:
            io.write_json(tmp / "rates.json", rate_study(config, workers=args.threads).to_dict())
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    outdir.mkdir(parents=True, exist_ok=True)
    for f in tmp.iterdir():
        os.replace(f, outdir / f.name)
    tmp.rmdir()
    return 0


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrdu", description="U-processes under long-range dependence.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help=f"worker cap (default from {THREADS_ENV}, else 1)")

    p = sub.add_parser("simulate", help="draw an exact Gaussian path")
    _add_model(p)
    p.add_argument("--n", type=int, required=True, help="path length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0, help="replication index of the stream")
    p.add_argument("--omega", type=float, help="outlier magnitude; enables contamination")
    p.add_argument("--p", type=float, default=0.1, help="outlier probability")
    p.add_argument("--scheme", choices=ContaminationSpec.SCHEMES, default="bernoulli_half")
    p.add_argument("-o", "--output", required=True, help="CSV path; a .json sidecar is written next to it")
    common(p)
    p.set_defaults(func=cli_simulate)

    p = sub.add_parser("estimate", help="apply estimators to a path")
    p.add_argument("-i", "--input", required=True, help="single-column CSV (or a table with --batch)")
    p.add_argument("-o", "--output", required=True, help="JSON report (CSV with --batch)")
    p.add_argument("--est", default="hl,shamos,mean,sd",
                   help=f"comma list from {sorted(POINT_ESTIMATORS) + ['wilcoxon']}")
    p.add_argument("--batch", action="store_true", help="input has one column per path")
    p.add_argument("--no-sidecar", action="store_true", help="ignore the model in the input's sidecar")
    _add_model(p, required=False)
    common(p)
    p.set_defaults(func=cli_estimate)

    p = sub.add_parser("uprocess", help="evaluate U_n(r) on a grid")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--kernel", default="absdiff", help="average, sum or absdiff")
    p.add_argument("--grid", required=True, help="'lo:hi:num' or a comma list")
    p.add_argument("--hoeffding", action="store_true", help="also write W_n and R_n columns")
    common(p)
    p.set_defaults(func=cli_uprocess)

    p = sub.add_parser("limits", help="limit-law constants, cumulants and samples")
    p.add_argument("--D", type=float, required=True, help="decay exponent in (0, 1)")
    p.add_argument("--cumulant", type=int, help="cumulant order p of a Z2 + b Z1^2")
    p.add_argument("--a", type=float, default=1.0, help="coefficient of Z2")
    p.add_argument("--b", type=float, default=0.0, help="coefficient of Z1^2")
    p.add_argument("--method", choices=["quadrature", "mc"], default="quadrature")
    p.add_argument("--samples", type=int, default=1_000_000, help="points for --method mc")
    p.add_argument("--table", action="store_true", help="add cumulants of orders 2 to 4")
    p.add_argument("--clt", help="'s,t': limit covariance of the U-process (needs D > 1/2)")
    p.add_argument("--kernel", default="absdiff", help="kernel for --clt")
    p.add_argument("--sample", type=int, help="number of limit-law draws")
    p.add_argument("--n-approx", type=int, default=2**13, help="path length behind each draw")
    p.add_argument("--samples-out", help="single-column CSV for the draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="JSON table")
    _add_model(p, required=False)
    common(p)
    p.set_defaults(func=cli_limits)

    p = sub.add_parser("montecarlo", help="run a replicated experiment")
    p.add_argument("-c", "--config", required=True, help="experiment JSON")
    p.add_argument("-o", "--output", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cli_montecarlo)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise DomainError("--threads must be at least 1")
        return args.func(args)
    except RegimeError as exc:
        print(f"lrdu: regime error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"lrdu: domain error: {exc}", file=sys.stderr)
        return 2
    except LrduError as exc:
        print(f"lrdu: numerical failure: {exc}", file=sys.stderr)
        return 4
    except (UsageError, OSError, ValueError, KeyError) as exc:
        print(f"lrdu: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
