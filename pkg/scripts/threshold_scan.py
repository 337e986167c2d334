"""Growth exponent of empirical L^p norms as the amplitude order crosses the critical order.

For each offset d the amplitude is <xi>^{m_c + d}, m_c = -(n - 1)|1/p - 1/2|,
and the norm is measured on grids of increasing N at fixed half-width.  The
fitted exponent of norm against N is written to a CSV table.
"""

import argparse
from dataclasses import dataclass, field

from fiolab import classes, io, normest


@dataclass
class ScanConfig:
    n: int = 2
    p: float = 1.1
    L: float = 2.0
    offsets: tuple = (-0.5, -0.25, 0.0, 0.25, 0.5, 1.0)
    N_list: tuple = (32, 48, 64, 96)
    probes: dict = field(default_factory=lambda: {"gaussian_bumps": 6, "annular_random": 2})
    seed: int = 0


def scan(cfg: ScanConfig):
    crit = normest.lp_critical_order(cfg.n, cfg.p)
    fam = normest.TestFamily(cfg.probes, seed=cfg.seed)
    m_list = [crit + d for d in cfg.offsets]
    table = normest.threshold_sweep(classes.wave_phase(cfg.n), cfg.p, m_list, cfg.N_list, fam, L=cfg.L, n=cfg.n)
    rows = []
    for d, m in zip(cfg.offsets, m_list):
        norms = table.norms(m)
        rows.append([d, m, table.exponents[m], norms[-1] / norms[0], table.verdicts[m]])
    return crit, rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="threshold scan")
    ap.add_argument("--out", default="threshold_scan.csv")
    ap.add_argument("--p", type=float, default=1.1)
    args = ap.parse_args()
    crit, rows = scan(ScanConfig(p=args.p))
    io.write_rows(args.out, ["offset", "m", "exponent", "total_ratio", "verdict"], rows)
    print(f"critical order {crit:.4f}")
    for r in rows:
        print(f"offset {r[0]:+.2f}  m {r[1]:+.3f}  exponent {r[2]:.3f}  total {r[3]:.3f}  {r[4]}")
