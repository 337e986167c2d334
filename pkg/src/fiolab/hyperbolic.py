"""Constant-coefficient wave equations solved through half-wave multipliers.

u(t) = cos(t|D|) f0 + sin(t|D|)/|D| f1 is assembled from the two half-wave
operators e^{+-it|D|}; the first has an order 0 amplitude and the second an
order -1 amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .applicator import apply_multiplier
from .cutoffs import plateau
from .errors import PreconditionError, UsageError
from .grid import Grid, SampledField, Side, forward_values, make_grid
from .normest import TestFamily, growth_verdict
from .weights import Weight, weighted_norm

T_MAX_DEFAULT = 4.0


def half_wave(u0: SampledField, t: float) -> SampledField:
    """e^{it|D|} u0."""
    return apply_multiplier(lambda xi: np.exp(1j * t * np.linalg.norm(xi, axis=-1)), u0)


def _sinc_amplitude(t: float):
    def sigma(xi):
        r = np.linalg.norm(xi, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(r == 0, t, np.sin(t * r) / np.where(r == 0, 1.0, r))

    return sigma


@dataclass(frozen=True)
class CauchyData:
    """Initial value ``f0`` and velocity ``f1`` on a shared grid, evolved to time ``t``."""

    f0: SampledField
    f1: SampledField
    t: float
    t_max: float = T_MAX_DEFAULT

    def __post_init__(self):
        if self.f0.grid != self.f1.grid:
            raise UsageError("initial data must share a grid")
        if self.f0.side is not Side.PHYSICAL or self.f1.side is not Side.PHYSICAL:
            raise UsageError("initial data must be physical-side fields")
        if abs(self.t) > self.t_max:
            raise UsageError(f"|t| = {abs(self.t)} exceeds t_max = {self.t_max}")

    @property
    def grid(self) -> Grid:
        return self.f0.grid

    @property
    def n(self) -> int:
        return self.grid.n

    @classmethod
    def zero_velocity(cls, f0: SampledField, t: float, **kw) -> "CauchyData":
        return cls(f0, f0 * 0.0, t, **kw)


def cauchy_second_order(data: CauchyData) -> SampledField:
    """Solution of u_tt = Laplacian u at time ``data.t``."""
    if data.n not in (1, 2):
        raise UsageError("the Cauchy solver covers n = 1 and n = 2")
    t = data.t
    plus, minus = half_wave(data.f0, t), half_wave(data.f0, -t)
    out = (plus + minus) * 0.5
    if np.any(data.f1.values):
        out = out + apply_multiplier(_sinc_amplitude(t), data.f1)
    return out


def _spectra(data: CauchyData):
    g = data.grid
    r = g.abs_xi
    f0, f1 = forward_values(g, data.f0.values), forward_values(g, data.f1.values)
    c, s = np.cos(data.t * r), _sinc_amplitude(data.t)(g.xi)
    u = c * f0 + s * f1
    ut = -r * r * s * f0 + c * f1
    return g, r, u, ut


def energy(data: CauchyData) -> float:
    """||d_t u||^2 + ||grad u||^2 at time ``data.t``, by Parseval on the frequency grid."""
    g, r, u, ut = _spectra(data)
    scale = g.dual_cell_volume / (2 * np.pi) ** g.n
    return float(np.sum(np.abs(ut) ** 2 + (r * np.abs(u)) ** 2) * scale)


def bessel_potential(u: SampledField, sigma: float) -> SampledField:
    """<D>^sigma u."""
    return apply_multiplier(lambda xi: (1.0 + np.sum(xi**2, -1)) ** (sigma / 2.0), u)


def sobolev_norm(u: SampledField, sigma: float, p: float, w: Optional[Weight] = None) -> float:
    """||<D>^sigma u||_{L^p_w}."""
    return weighted_norm(bessel_potential(u, sigma), p, w)


def loss_exponent(n: int, p: float) -> float:
    """(n - 1)|1/p - 1/2|."""
    return (n - 1) * abs(1.0 / p - 0.5)


# --------------------------------------------------------------------------- experiments


@dataclass
class SobolevLossReport:
    p: float
    s: float
    t: float
    n: int
    loss: float
    shifted: bool
    eps: float
    rows: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    verdict: str = ""
    exponent: float = float("nan")


def _slope(N_list, ratios) -> float:
    if len(ratios) < 2:
        return float("nan")
    return float(np.polyfit(np.log(N_list), np.log(ratios), 1)[0])


def sobolev_loss_sweep(p: float, s: float, t: float, fam: TestFamily, *, n: int = 1,
                       N_list: Sequence[int] = (128, 256, 512), L: float = 8.0, eps: float = 0.1,
                       shifted: bool = True, velocity: bool = True) -> SobolevLossReport:
    """sup over probes of ||u(t)||_{H^{s-eps,p}} / sum_j ||f_j||_{H^{s+m_p-j,p}} on refining grids.

    Each probe is used as f0 and, when ``velocity`` is set, also as f1.  With
    ``shifted=False`` the data norms drop the loss m_p.
    """
    if not 1 < p < np.inf:
        raise UsageError("p must lie in (1, inf)")
    loss = loss_exponent(n, p)
    shift = loss if shifted else 0.0
    rep = SobolevLossReport(p, s, t, n, loss, shifted, eps)
    for N in N_list:
        grid = make_grid(n, N, L, require_pow2=False)
        best, best_tag = 0.0, ""
        for tag, f in fam.members(grid, p):
            f1 = f if velocity else f * 0.0
            u = cauchy_second_order(CauchyData(f, f1, t))
            den = sobolev_norm(f, s + shift, p) + (sobolev_norm(f1, s + shift - 1, p) if velocity else 0.0)
            r = sobolev_norm(u, s - eps, p) / den
            if r > best:
                best, best_tag = r, tag
        rep.rows.append({"N": N, "ratio": best, "tag": best_tag})
        rep.ratios.append(best)
    rep.verdict = growth_verdict(rep.ratios)
    rep.exponent = _slope(list(N_list), rep.ratios)
    return rep


@dataclass
class LocalEstimateReport:
    p: float
    s: float
    t: float
    loss: float
    rows: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    verdict: str = ""
    exponent: float = float("nan")


def default_cutoff(radius: float = 3.0) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth spatial cutoff equal to 1 on |x| <= radius/2 and 0 beyond ``radius``."""
    return lambda x: plateau(2.0 * np.linalg.norm(x, axis=-1) / radius)


def weighted_local_estimate(data: CauchyData | Callable[[Grid], CauchyData], w: Optional[Weight], p: float,
                            s: float, cutoff: Optional[Callable] = None, *,
                            grids: Optional[Sequence[Grid]] = None) -> LocalEstimateReport:
    """||chi u(t)||_{H^{s,p}_w} / sum_j ||f_j||_{H^{s+(n+1)/2-j,p}_w}, optionally across refining grids.

    ``data`` is either fixed Cauchy data or a builder evaluated on each of ``grids``.
    """
    if callable(data) and not isinstance(data, CauchyData):
        if not grids:
            raise UsageError("a data builder needs a list of grids")
        cases = [data(g) for g in grids]
    else:
        cases = [data]
    chi = cutoff or default_cutoff()
    t = cases[0].t
    if t == 0:
        raise PreconditionError("t = 0: the phase Hessian has rank 0, not n - 1")
    n = cases[0].n
    loss = (n + 1) / 2.0
    rep = LocalEstimateReport(p, s, t, loss)
    for d in cases:
        u = cauchy_second_order(d)
        local = u.with_values(u.values * chi(d.grid.x))
        den = sobolev_norm(d.f0, s + loss, p, w)
        if np.any(d.f1.values):
            den += sobolev_norm(d.f1, s + loss - 1, p, w)
        r = sobolev_norm(local, s, p, w) / den
        rep.rows.append({"N": d.grid.N, "ratio": r})
        rep.ratios.append(r)
    rep.verdict = growth_verdict(rep.ratios) if len(rep.ratios) > 1 else "single"
    rep.exponent = _slope([d.grid.N for d in cases], rep.ratios)
    return rep


def outside_mass_fraction(u: SampledField, radius: float) -> float:
    """Fraction of ||u||_2^2 carried by cells with |x| > radius."""
    a = np.abs(u.values) ** 2
    total = float(np.sum(a))
    return float(np.sum(a[u.grid.abs_x > radius])) / total if total else 0.0


def dalembert(f0: Callable, f1_antiderivative: Optional[Callable], x, t: float):
    """1D d'Alembert solution from f0 and an antiderivative F of f1."""
    x = np.asarray(x, float)
    out = 0.5 * (f0(x + t) + f0(x - t))
    if f1_antiderivative is not None:
        out = out + 0.5 * (f1_antiderivative(x + t) - f1_antiderivative(x - t))
    return out


__all__ = [
    "CauchyData", "LocalEstimateReport", "SobolevLossReport", "T_MAX_DEFAULT", "bessel_potential",
    "cauchy_second_order", "dalembert", "default_cutoff", "energy", "half_wave", "loss_exponent",
    "outside_mass_fraction", "sobolev_loss_sweep", "sobolev_norm", "weighted_local_estimate",
]
