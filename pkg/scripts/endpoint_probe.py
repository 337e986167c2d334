"""Refinement ratios of the weighted L^2 estimate for e^{i|D|}<D>^m with w = |x|^{-b} 1_{|x|<2}.

For each order m and each f_mu probe the script prints the ratio of the
estimates on N = 512 and N = 1024 together with the analytic membership of
f_mu and T f_mu in L^2_w (T f_mu has a |x|^{mu - m - 1} singularity).
"""

import argparse

from fiolab import normest, weights
from fiolab.applicator import multiplier_map, wave_multiplier
from fiolab.grid import make_grid

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="weighted endpoint probe")
    ap.add_argument("--b", type=float, default=0.9)
    ap.add_argument("--orders", type=float, nargs="+", default=[-1.0, -0.7])
    ap.add_argument("--mus", type=float, nargs="+", default=[0.3, 0.45, 0.55, 0.75, 1.0])
    args = ap.parse_args()
    w = weights.truncated_power_weight(args.b)
    p, n = 2.0, 1
    for m in args.orders:
        for mu in args.mus:
            fam = normest.TestFamily({"f_mu": 1}, mu_values=(mu,))
            est = [normest.opnorm_lpw(multiplier_map(make_grid(1, N, 8), wave_multiplier(m)), p, w, fam).value
                   for N in (512, 1024)]
            f_in = mu > (n + 1) / 2 - 1 / p and args.b < n
            tf_in = (mu - m - n) * p - args.b > -n
            print(f"m={m:+.2f} mu={mu:.2f}  ratio {est[1] / est[0]:.4f}  f_mu in L2_w: {f_in!s:5}  "
                  f"Tf_mu in L2_w: {tf_in}")
