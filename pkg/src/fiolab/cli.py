"""Command-line experiment runner.

    fiolab <experiment> [--config FILE] [--out DIR] [--seed INT] [--threads INT] [--set key=value ...]
    fiolab run --config FILE

Each run writes ``config.txt`` (an exact, re-runnable echo of the inputs),
``summary.json`` and one or more CSV tables into the output directory.
Exit status: 0 on success, 2 on invalid configuration, 3 when a numerical
precondition fails.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.fft

from . import classes, hyperbolic, io, normest, weights
from .applicator import FioOperator, apply_fio, apply_multiplier, multiplier_map, multiplier_of, wave_multiplier
from .config import KINDS, SUBCOMMAND_KIND, ExperimentConfig, from_mapping, parse_overrides, parse_text
from .errors import CapabilityError, ConfigurationError, DomainError, PreconditionError, UsageError
from .grid import gaussian, make_grid

EXIT_OK, EXIT_VALIDATION, EXIT_PRECONDITION = 0, 2, 3


class Artifacts:
    """Tables collected by a runner before anything is written."""

    def __init__(self):
        self.tables: dict[str, tuple[list, list]] = {}
        self.fields: dict = {}

    def table(self, name: str, header, rows):
        self.tables[name] = (list(header), [list(r) for r in rows])


# --------------------------------------------------------------------------- builders


def build_grid(cfg: ExperimentConfig, N: int | None = None):
    return make_grid(cfg.n, cfg.N if N is None else N, cfg.L, require_pow2=False)


def build_symbol(cfg: ExperimentConfig):
    if cfg.symbol == "x_modulated":
        return classes.x_modulated(cfg.m, cfg.modulation)
    return classes.bessel_power(cfg.m, cfg.rho, cfg.delta)


def build_phase(cfg: ExperimentConfig):
    n = cfg.n
    return {
        "linear": lambda: classes.linear_phase(n),
        "wave": lambda: classes.wave_phase(n, cfg.t),
        "shifted": lambda: classes.shifted_phase(n, cfg.t),
        "scaling": lambda: classes.scaling_phase(n, cfg.scale),
        "sine": lambda: classes.sine_diffeo_phase(n, cfg.eps),
        "rough_wave": lambda: classes.rough_wave_phase(n, cfg.time_rule),
        "quadratic": lambda: classes.quadratic_phase(n),
    }[cfg.phase]()


def build_weight(cfg: ExperimentConfig):
    return {
        "none": lambda: None,
        "power": lambda: weights.power_weight(cfg.alpha),
        "truncated": lambda: weights.truncated_power_weight(cfg.b),
        "log": weights.log_weight,
        "constant": weights.constant_weight,
    }[cfg.weight]()


def build_family(cfg: ExperimentConfig) -> normest.TestFamily:
    return normest.TestFamily(dict(cfg.probes), seed=cfg.seed, mu_values=(cfg.mu,))


# --------------------------------------------------------------------------- experiments


def run_apply(cfg, art):
    grid = build_grid(cfg)
    a, phi = build_symbol(cfg), build_phase(cfg)
    op = FioOperator(a, phi, grid, oversample=cfg.oversample)
    u = gaussian(grid, 1.0)
    tu = apply_fio(op, u)
    if cfg.phase == "linear" and cfg.symbol == "bessel_power" and cfg.m == 0:
        reference, check = u, "identity"
    elif a.x_independent and phi.x_independent_part:
        reference, check = apply_multiplier(multiplier_of(op), u, cfg.oversample), "multiplier"
    else:
        reference, check = None, "none"
    err = float(np.max(np.abs(tu.values - reference.values))) if reference is not None else float("nan")
    art.fields["output"] = tu
    ratio = tu.l2_norm() / u.l2_norm()
    art.table("apply.csv", ["quantity", "value"],
              [["l2_ratio", ratio], ["max_error", err], ["check", check]])
    return {"check": check, "max_error": err, "l2_ratio": ratio}


def run_kernel(cfg, art):
    rule = getattr(normest, cfg.kernel_symbol)
    grids = [build_grid(cfg, N) for N in cfg.N_list]
    rows, sups = [], []
    for g in grids:
        rep = normest.kernel_decay_profile(rule, cfg.mu, g)
        rows.append([g.N, g.L, rep.sup, rep.argmax])
        sups.append(rep.sup)
    change = max((abs(b - a) / a for a, b in zip(sups, sups[1:])), default=0.0)
    art.table("kernel.csv", ["N", "L", "weighted_sup", "argmax_abs_y"], rows)
    return {"relative_change": change, "stable": bool(change <= 0.1)}


def run_sweep(cfg, art):
    tab = normest.threshold_sweep(build_phase(cfg), cfg.p, cfg.m_list, cfg.N_list, build_family(cfg),
                                  L=cfg.L, n=cfg.n, w=build_weight(cfg), dense=cfg.dense)
    art.table("sweep.csv", ["m", "N", "norm", "tag"], [[r["m"], r["N"], r["norm"], r["tag"]] for r in tab.rows])
    art.table("exponents.csv", ["m", "exponent", "verdict"],
              [[m, tab.exponents[m], tab.verdicts[m]] for m in cfg.m_list])
    return {"critical_order": normest.lp_critical_order(cfg.n, cfg.p),
            "verdicts": {repr(m): v for m, v in tab.verdicts.items()}}


def run_ce2(cfg, art):
    rep = normest.ce2_profile(cfg.m, cfg.mu, cfg.b, cfg.p)
    art.table("ce2.csv", ["x", "profile", "loglog_slope", "fitted_slope", "claim_slope"],
              [[x, v, rep.loglog_slope, rep.fitted_slope, rep.claim_slope] for x, v in zip(rep.x, rep.profile)])
    return {"claim_slope": rep.claim_slope, "fitted_slope": rep.fitted_slope, "loglog_slope": rep.loglog_slope,
            "f_mu_in_Lpw": rep.f_mu_in_Lpw, "Tf_in_Lpw": rep.Tf_in_Lpw}


def _ball_family(cfg, grid):
    return weights.BallFamily.at_origin(cfg.n, cfg.kmin, cfg.kmax).union(
        weights.BallFamily.default(grid, cfg.kmin, cfg.kmax))


def run_weights(cfg, art):
    grid = build_grid(cfg)
    w = build_weight(cfg) or weights.constant_weight()
    balls = _ball_family(cfg, grid)
    rep = weights.ap1_constant(w, balls, grid) if cfg.p == 1 else weights.ap_constant(w, cfg.p, balls, grid)
    art.table("weights.csv", ["radius", "max_constant"], sorted(rep.per_scale.items()))
    out = {"value": rep.value, "diverges": rep.diverges(), "origin_truncated": rep.origin_truncated}
    if w.family == "power":
        out["in_class"] = weights.power_weight_class(cfg.alpha, cfg.p, cfg.n)
    return out


def run_bmo(cfg, art):
    grid = build_grid(cfg)
    b = build_weight(cfg) or weights.log_weight()
    rep = weights.bmo_norm(b, _ball_family(cfg, grid), grid)
    art.table("bmo.csv", ["radius", "max_oscillation"], sorted(rep.per_scale.items()))
    return {"value": rep.value}


def run_stationary(cfg, art):
    rep = normest.stationary_decay(classes.quadratic_phase(cfg.n), lam_list=cfg.lam_list, n=cfg.n)
    art.table("stationary.csv", ["lambda", "max_abs_integral"], zip(rep.lams, rep.values))
    return {"slope": rep.slope, "expected": rep.expected}


def run_wave(cfg, art):
    grid = build_grid(cfg)
    f0 = gaussian(grid, 0.5)
    data = hyperbolic.CauchyData(f0, f0 * 0.0, cfg.t)
    u = hyperbolic.cauchy_second_order(data)
    art.fields["solution"] = u
    e0 = hyperbolic.energy(hyperbolic.CauchyData(f0, f0 * 0.0, 0.0))
    e1 = hyperbolic.energy(data)
    rep = hyperbolic.sobolev_loss_sweep(cfg.p, cfg.s, cfg.t, build_family(cfg), n=cfg.n, N_list=cfg.N_list,
                                        L=cfg.L, eps=cfg.loss_eps)
    art.table("sobolev.csv", ["N", "ratio", "tag"], [[r["N"], r["ratio"], r["tag"]] for r in rep.rows])
    return {"energy_relative_drift": abs(e1 - e0) / e0, "loss": rep.loss, "verdict": rep.verdict,
            "exponent": rep.exponent}


def run_commutator(cfg, art):
    b = build_weight(cfg) or weights.log_weight()
    fam = build_family(cfg)
    rows, ratios = [], []
    for N in cfg.N_list:
        g = build_grid(cfg, N)
        T = multiplier_map(g, wave_multiplier(cfg.m, cfg.t))
        est = normest.commutator_ratio(b, T, fam, cfg.p, k=cfg.k)
        rows.append([N, est.value, est.tag])
        ratios.append(est.value)
    art.table("commutator.csv", ["N", "ratio", "tag"], rows)
    steps = [y / x for x, y in zip(ratios, ratios[1:])]
    return {"verdict": normest.growth_verdict(ratios), "max_step": max(steps, default=1.0)}


def run_substitution(cfg, art):
    grid = build_grid(cfg)
    rows, ok = [], True
    for name in cfg.maps:
        rule, c = normest.BUILTIN_MAPS[name]
        rep = normest.substitution_check(rule, c, grid, seed=cfg.seed)
        rows.append([name, c, rep.max_density, rep.bound, rep.within_bound, max(rep.formula_errors)])
        ok &= rep.within_bound
    art.table("substitution.csv", ["map", "c", "max_density", "bound", "within_bound", "formula_error"], rows)
    return {"all_within_bound": ok}


RUNNERS: dict[str, Callable] = {
    "apply": run_apply, "kernel": run_kernel, "normest-sweep": run_sweep, "ce2": run_ce2,
    "weights": run_weights, "bmo": run_bmo, "stationary": run_stationary, "wave": run_wave,
    "commutator": run_commutator, "substitution": run_substitution,
}


# --------------------------------------------------------------------------- driver


def run(cfg: ExperimentConfig, out: Path, threads: int | None = None) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    art = Artifacts()
    t0 = time.perf_counter()
    with scipy.fft.set_workers(threads or 1):
        results = RUNNERS[cfg.kind](cfg, art)
    elapsed = time.perf_counter() - t0
    for name, (header, rows) in art.tables.items():
        io.write_rows(out / name, header, rows)
    for name, fld in art.fields.items():
        io.write_field_csv(out / f"{name}.csv", fld)
    summary = {"kind": cfg.kind, "inputs": cfg.to_dict(), "seed": cfg.seed, "results": results,
               "timings": {"seconds": elapsed}, "outputs": sorted([*art.tables, *(f"{k}.csv" for k in art.fields)])}
    io.write_json(out / "summary.json", summary)
    return summary


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fiolab", description="Fourier integral operator experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in [*(k for k in SUBCOMMAND_KIND if k != "normest-sweep"), "run"]:
        p = sub.add_parser(name, help="run the experiment named in the config" if name == "run" else None)
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--out", type=Path, help="output directory (default fiolab-out/<kind>)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--threads", type=int, default=1, help="FFT worker cap")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    return ap


def resolve_config(args) -> ExperimentConfig:
    values = parse_text(_read(args.config)) if args.config else {}
    values.update(parse_overrides(args.set))
    if args.seed is not None:
        values["seed"] = args.seed
    if args.command == "run":
        if "kind" not in values:
            raise ConfigurationError(f"kind: 'run' needs a config naming one of {', '.join(KINDS)}")
    else:
        kind = SUBCOMMAND_KIND[args.command]
        if values.get("kind", kind) != kind:
            raise ConfigurationError(f"kind: config names {values['kind']!r} but the subcommand is {args.command!r}")
        values["kind"] = kind
    return from_mapping(values)


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path} ({exc.strerror})") from None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.threads is not None and args.threads < 1:
            raise ConfigurationError("threads: must be >= 1")
        out = args.out or Path("fiolab-out") / cfg.kind
        summary = run(cfg, out, args.threads)
    except (ConfigurationError, UsageError) as exc:
        print(f"fiolab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PreconditionError, DomainError, CapabilityError) as exc:
        print(f"fiolab: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(f"{cfg.kind}: wrote {', '.join(summary['outputs'])} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
