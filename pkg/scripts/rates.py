"""Convergence-rate study: log standard deviation against log n.

The fitted slope estimates minus the rate exponent of each estimator's limit.
"""
import argparse

from lrdu import io
from lrdu.lrd_sim import CovarianceModel
from lrdu.montecarlo import McConfig, rate_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=0.35)
    ap.add_argument("--phi", type=float, default=0.2)
    ap.add_argument("--estimators", default="hl,shamos,mean,sd")
    ap.add_argument("--min-log2", type=int, default=9)
    ap.add_argument("--max-log2", type=int, default=14)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("-o", "--output", default="results/rates.json")
    args = ap.parse_args()

    sizes = [2**k for k in range(args.min_log2, args.max_log2 + 1)]
    cfg = McConfig(CovarianceModel.arfima(args.phi, args.d), sizes[0], args.reps,
                   args.estimators.split(","), seed=args.seed, grid_sizes=sizes, workers=args.threads)
    study = rate_study(cfg)
    io.write_json(args.output, {"config": cfg.to_dict(), **study.to_dict()})
    D = cfg.model.D
    print(f"D = {D:.3f}; rank-one slope -D/2 = {-D / 2:.3f}, rank-two slope -D = {-D:.3f}")
    for name, fit in study.fits.items():
        print(f"{name:7s} slope {fit.slope:+.3f}  [{fit.ci_low:+.3f}, {fit.ci_high:+.3f}]")


if __name__ == "__main__":
    main()
