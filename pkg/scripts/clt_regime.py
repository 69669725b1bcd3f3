"""Shamos estimator for D > 1/2: Monte Carlo variance of sqrt(n)(sigma_BL - 1) against the series value."""
import argparse

from lrdu.asymptotics import shamos_clt_variance
from lrdu.lrd_sim import CovarianceModel
from lrdu.montecarlo import McConfig, collect_draws


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--H", type=float, default=0.6, help="fgn Hurst index (D = 2 - 2H)")
    ap.add_argument("--log2n", type=int, default=14)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    model = CovarianceModel.fgn(args.H)
    n = 2**args.log2n
    x = collect_draws(McConfig(model, n, args.reps, ["shamos"], seed=args.seed), workers=args.threads)["shamos"]
    mc, theory = n * x.var(ddof=1), shamos_clt_variance(model)
    print(f"D = {model.D:.2f}  n = {n}  MC variance {mc:.4f}  series {theory:.4f}  ratio {mc / theory:.3f}")


if __name__ == "__main__":
    main()
