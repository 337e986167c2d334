"""Two-dimensional Sobolev-loss sweep for the wave equation at p = 4, with and without the loss shift.

The probe is f_mu with mu = 1 as initial value and zero velocity.  The
fitted exponent of the ratio against N should be non-positive when the data
norm carries the loss m_p = 1/4 and positive when it does not.
"""

import argparse

from fiolab import hyperbolic, normest

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="Sobolev loss in 2D")
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--N", type=int, nargs="+", default=[64, 128, 256, 512])
    args = ap.parse_args()
    fam = normest.TestFamily({"f_mu": 1}, mu_values=(1.0,))
    for shifted in (True, False):
        rep = hyperbolic.sobolev_loss_sweep(args.p, 0.0, 1.0, fam, n=2, N_list=args.N, L=8.0, shifted=shifted,
                                            velocity=False)
        ratios = " ".join(f"{r:.4f}" for r in rep.ratios)
        print(f"shifted={shifted!s:5}  loss={rep.loss:.3f}  ratios {ratios}  exponent {rep.exponent:+.3f}  "
              f"{rep.verdict}")
