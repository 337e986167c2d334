"""Empirical norm estimates, threshold sweeps and quantitative checks of the sharp-order examples.

Random members are drawn from ``numpy.random.default_rng(seed)`` (PCG64), so
every estimate is reproducible from its seed and configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.ndimage import binary_erosion
from scipy.optimize import curve_fit

from . import cutoffs
from .applicator import FioOperator, LinearMap, apply_multiplier, as_map, multiplier_map, multiplier_of
from .classes import PhaseSpec, bessel_power
from .decompose import littlewood_paley, max_dyadic_level
from .errors import CapabilityError, PreconditionError, UsageError
from .grid import Grid, SampledField, Side, inverse_values, make_grid
from .weights import Weight, _cell_values, cell_indicator, weighted_norm

FAMILY_TAGS = ("gaussian_bumps", "annular_random", "f_mu", "indicator_smoothed")


# --------------------------------------------------------------------------- probe families


@dataclass(frozen=True)
class TestFamily:
    """Seeded probe functions, each normalised to unit L^p_w norm.

    ``gaussian_bumps``: the first bump is centred with width ``narrow_cells``
    grid cells (a delta-like probe that sharpens with the grid); the others have
    random widths in ``width_range``, centers in [-L/4, L/4]^n and, half the
    time, a random modulation.  ``annular_random``: random phases on a dyadic
    annulus.  ``f_mu``: u_hat = exp(-i|xi|) <xi>^{-mu} for each mu in
    ``mu_values``.  ``indicator_smoothed``: random boxes blurred over a few cells.
    """

    __test__ = False  # not a pytest class

    counts: dict
    seed: int = 0
    narrow_cells: float = 1.0
    width_range: tuple = (0.25, 2.0)
    mu_values: tuple = (0.75,)

    def __post_init__(self):
        bad = set(self.counts) - set(FAMILY_TAGS)
        if bad:
            raise UsageError(f"unknown probe tags {sorted(bad)}")

    def members(self, grid: Grid, p: float = 2.0, w: Optional[Weight] = None) -> list[tuple[str, SampledField]]:
        rng = np.random.default_rng(self.seed)
        out = []
        for tag in FAMILY_TAGS:
            k = int(self.counts.get(tag, 0))
            if k <= 0:
                continue
            for u in getattr(self, "_" + tag)(grid, k, rng):
                nrm = weighted_norm(u, p, w)
                if np.isfinite(nrm) and nrm > 0:
                    out.append((tag, u * (1.0 / nrm)))
        if not out:
            raise UsageError("the probe family is empty")
        return out

    def _gaussian_bumps(self, grid, k, rng):
        n, L = grid.n, grid.L
        yield _bump(grid, self.narrow_cells * grid.spacing, np.zeros(n), np.zeros(n))
        lo, hi = np.log(self.width_range[0]), np.log(self.width_range[1])
        for _ in range(k - 1):
            width = float(np.exp(rng.uniform(lo, hi)))
            center = rng.uniform(-L / 4, L / 4, n)
            mod = rng.uniform(-1, 1, n) * grid.nyquist / 4 * (rng.uniform() < 0.5)
            yield _bump(grid, width, center, mod)

    def _annular_random(self, grid, k, rng):
        top = max(1, min(max_dyadic_level(grid) - 1, 8))
        dp = littlewood_paley(grid, top)
        for _ in range(k):
            j = int(rng.integers(1, top + 1))
            ph = np.exp(2j * np.pi * rng.uniform(size=grid.shape))
            yield SampledField(grid, inverse_values(grid, dp.values(j) * ph), Side.PHYSICAL)

    def _f_mu(self, grid, k, rng):
        for mu in list(self.mu_values)[:k]:
            yield f_mu(grid, mu)

    def _indicator_smoothed(self, grid, k, rng):
        n, L = grid.n, grid.L
        for _ in range(k):
            c = rng.uniform(-L / 4, L / 4, n)
            half = rng.uniform(0.25, L / 8, n)
            box = cell_indicator(grid, c - half, c + half)
            blur = 2 * grid.spacing
            yield apply_multiplier(lambda xi: np.exp(-0.5 * blur**2 * np.sum(xi**2, -1)), box)


def _bump(grid, width, center, mod):
    x = grid.x - center
    vals = np.exp(-np.sum(x**2, -1) / (2 * width**2)) * np.exp(1j * (grid.x @ mod))
    return SampledField(grid, vals, Side.PHYSICAL)


def f_mu(grid: Grid, mu: float) -> SampledField:
    """f_mu with u_hat(xi) = exp(-i|xi|) <xi>^{-mu}, synthesised exactly on the frequency grid."""
    r2 = np.sum(grid.xi**2, -1)
    return SampledField(grid, inverse_values(grid, np.exp(-1j * np.sqrt(r2)) * (1 + r2) ** (-mu / 2)), Side.PHYSICAL)


# --------------------------------------------------------------------------- operator norms


@dataclass
class NormEstimate:
    value: float
    converged: bool
    iterations: int
    seed: int
    history: list = field(default_factory=list)


def opnorm_l2(op, iters: int = 200, seed: int = 0, tol: float = 1e-6) -> NormEstimate:
    """sqrt of the dominant eigenvalue of T*T by power iteration from a seeded complex Gaussian start."""
    T = as_map(op)
    g = T.grid
    rng = np.random.default_rng(seed)
    v = SampledField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    v = v * (1.0 / v.l2_norm())
    lam_old, hist = None, []
    for it in range(1, iters + 1):
        tv = T.forward(v)
        lam = tv.l2_norm() ** 2
        hist.append(math.sqrt(lam))
        w = T.backward(tv)
        nw = w.l2_norm()
        if nw == 0:
            return NormEstimate(0.0, True, it, seed, hist)
        v = w * (1.0 / nw)
        if lam_old is not None and abs(lam - lam_old) <= tol * max(lam, 1e-300):
            return NormEstimate(math.sqrt(lam), True, it, seed, hist)
        lam_old = lam
    return NormEstimate(hist[-1], False, iters, seed, hist)


@dataclass
class LpwEstimate:
    value: float
    tag: str
    index: int
    ratios: list


def opnorm_lpw(op, p: float, w: Optional[Weight], fam: TestFamily) -> LpwEstimate:
    """max over the family of ||Tu||_{L^p_w} / ||u||_{L^p_w}: a lower bound on the operator norm."""
    if not 1 < p < np.inf:
        raise UsageError("p must lie in (1, inf)")
    T = as_map(op)
    ratios = []
    for tag, u in fam.members(T.grid, p, w):
        ratios.append((tag, weighted_norm(T.forward(u), p, w) / weighted_norm(u, p, w)))
    k = int(np.argmax([r for _, r in ratios]))
    return LpwEstimate(float(ratios[k][1]), ratios[k][0], k, ratios)


def lp_critical_order(n: int, p: float) -> float:
    """-(n - 1)|1/p - 1/2|."""
    return -(n - 1) * abs(1.0 / p - 0.5)


def growth_verdict(norms: Sequence[float], stable: float = 1.5, growing: float = 2.0) -> str:
    """'stable' if every successive ratio <= ``stable``; 'growing' if monotone with total ratio >= ``growing``."""
    r = [b / a for a, b in zip(norms, norms[1:])]
    if all(x <= stable for x in r):
        return "stable"
    if all(x > 1 for x in r) and norms[-1] / norms[0] >= growing:
        return "growing"
    return "inconclusive"


@dataclass
class GrowthTable:
    rows: list
    exponents: dict
    verdicts: dict
    p: float
    seed: int

    def norms(self, m: float) -> list:
        return [r["norm"] for r in self.rows if r["m"] == m]


def threshold_sweep(phase: PhaseSpec, p: float, m_list, N_list, fam: TestFamily, *, L: float = 2.0,
                    n: Optional[int] = None, w: Optional[Weight] = None, dense: bool = False) -> GrowthTable:
    """Empirical L^p_w norms of T with amplitude <xi>^m for every (m, N) on grids of half-width L.

    Phases of the form <x, xi> + psi(xi) use the exact multiplier path unless ``dense`` is set.
    """
    n = phase.params.get("n") if n is None else n
    rows, exps, verdicts = [], {}, {}
    for m in m_list:
        norms = []
        for N in N_list:
            grid = make_grid(n, N, L, require_pow2=False)
            op = FioOperator(bessel_power(m), phase, grid)
            T = multiplier_map(grid, multiplier_of(op)) if (phase.x_independent_part and not dense) else op
            est = opnorm_lpw(T, p, w, fam)
            rows.append({"m": m, "N": N, "norm": est.value, "tag": est.tag})
            norms.append(est.value)
        exps[m] = float(np.polyfit(np.log(N_list), np.log(norms), 1)[0]) if len(N_list) > 1 else float("nan")
        verdicts[m] = growth_verdict(norms)
    return GrowthTable(rows, exps, verdicts, p, fam.seed)


# --------------------------------------------------------------------------- counterexample profile


def bracket_power_transform(s: float, x) -> np.ndarray:
    """int_R exp(i x xi) <xi>^s dxi for s < 0 and x != 0, by QAWF cosine quadrature."""
    if s >= 0:
        raise PreconditionError("the profile is a function only for negative orders")
    out = []
    for xv in np.atleast_1d(np.abs(np.asarray(x, float))):
        if xv == 0:
            raise PreconditionError("x = 0 is the singular point")
        val, _ = quad(lambda t: (1 + t * t) ** (s / 2), 0, np.inf, weight="cos", wvar=xv, limlst=200)
        out.append(2 * val)
    return np.array(out)


def _power_plus_constant(lx, logA, e, B):
    return np.log(np.abs(np.exp(logA + e * lx) + B))


@dataclass
class Ce2Report:
    m: float
    mu: float
    b: float
    p: float
    n: int
    x: np.ndarray
    profile: np.ndarray
    loglog_slope: float
    fitted_slope: float
    claim_slope: float
    fit_constant: float
    f_mu_in_Lpw: bool
    Tf_in_Lpw: bool
    Tf_in_Lpw_fitted: bool


def ce2_profile(m: float, mu: float, b: float, p: float, grid: Optional[Grid] = None, *,
                window=(2.0**-6, 2.0**-2), samples: int = 17) -> Ce2Report:
    """Profile of T_m f_mu = <D>^{m - mu} delta near the origin, with w = |x|^{-b} 1_{|x|<2}.

    ``profile`` holds int exp(i x xi) <xi>^{m-mu} dxi (2 pi times T_m f_mu).  Two
    exponents are reported: the plain log-log slope over the window, and the
    exponent e of the model A|x|^e + B fitted by least squares in log space,
    which separates the singular part from the bounded background.
    """
    n = 1 if grid is None else grid.n
    if n != 1:
        raise CapabilityError("the radial profile is implemented for n = 1")
    if mu >= m + n:
        raise PreconditionError(f"need mu < m + n, got mu={mu}, m={m}")
    s = m - mu
    x = np.geomspace(window[0], window[1], samples)
    prof = bracket_power_transform(s, x)
    lx, ly = np.log(x), np.log(np.abs(prof))
    slope = float(np.polyfit(lx, ly, 1)[0])
    e0 = min(slope, -1e-3)
    try:
        popt, _ = curve_fit(_power_plus_constant, lx, ly, p0=(ly[0] - e0 * lx[0], e0, 0.0), maxfev=20000)
        fitted, const = float(popt[1]), float(popt[2])
    except RuntimeError:
        fitted, const = slope, 0.0
    claim = mu - m - n
    return Ce2Report(m, mu, b, p, n, x, prof, slope, fitted, claim, const,
                     f_mu_in_Lpw=bool(mu > (n + 1) / 2 - 1 / p and b < n),
                     Tf_in_Lpw=bool(claim * p - b > -n),
                     Tf_in_Lpw_fitted=bool(fitted * p - b > -n))


# --------------------------------------------------------------------------- stationary phase


def gaussian_amplitude(xi, lam):
    return np.exp(-np.sum(xi**2, -1))


def inflated_amplitude(mu: float):
    """chi_0(xi / lam^mu): support grows like lam^mu."""
    def rule(xi, lam):
        return cutoffs.chi0(xi / lam**mu)

    return rule


@dataclass
class StationaryReport:
    lams: np.ndarray
    values: np.ndarray
    slope: float
    expected: float


def _is_geometric(lams) -> bool:
    r = np.asarray(lams[1:]) / np.asarray(lams[:-1])
    return bool(np.all(r > 1) and np.allclose(r, r[0], rtol=1e-9))


def stationary_decay(phi: PhaseSpec, amplitude: Callable = gaussian_amplitude, lam_list=None, *, n: Optional[int] = None,
                     x_samples=None, support_power: float = 0.0, radius: Optional[float] = None,
                     hess_floor: float = 1e-8, resolution: float = 1.2) -> StationaryReport:
    """I(lam, x) = int exp(i lam phi(x, xi)) a(xi) dxi by the trapezoid rule; slope of log max_x |I| vs log lam.

    The quadrature step resolves the largest local frequency lam (|x| + R) with
    R the amplitude's effective radius (4.3 for the Gaussian, 2 lam^mu for
    inflated cutoffs).
    """
    n = phi.params.get("n", 1) if n is None else n
    lams = np.asarray([8, 16, 32, 64, 128, 256, 512] if lam_list is None else lam_list, float)
    if len(lams) < 5 or not _is_geometric(lams):
        raise PreconditionError("lam_list must be geometric with at least 5 values")
    xs = np.zeros((1, n)) if x_samples is None else np.asarray(x_samples, float).reshape(-1, n)

    def support_radius(lam):
        if radius is not None:
            return radius * lam**support_power
        return 4.3 if amplitude is gaussian_amplitude else 2.0 * lam**support_power

    probe = np.linspace(-1, 1, 7)
    pts = np.stack(np.meshgrid(*([probe] * n), indexing="ij"), -1).reshape(-1, n) * support_radius(lams[0])
    pts = pts[np.sum(pts**2, -1) > 0]
    det = np.abs(np.linalg.det(np.asarray(phi.hess_xixi(xs[:1, None, :], pts[None]), float)))
    if np.min(det) < hess_floor:
        raise PreconditionError(f"degenerate frequency Hessian: min |det| = {np.min(det):.3g}")

    vals = []
    for lam in lams:
        R = support_radius(lam)
        xmax = float(np.max(np.abs(xs))) if len(xs) else 0.0
        h = resolution * np.pi / (lam * (R + xmax) + 1.0)
        axis = np.arange(-R, R + h / 2, h)
        best = 0.0
        for x in xs:
            best = max(best, abs(_trapezoid_nd(phi, amplitude, x, axis, lam, n)))
        vals.append(best)
    vals = np.array(vals)
    slope = float(np.polyfit(np.log(lams), np.log(vals), 1)[0])
    return StationaryReport(lams, vals, slope, n * support_power - n / 2)


def _trapezoid_nd(phi, amplitude, x, axis, lam, n):
    h = axis[1] - axis[0]
    if n == 1:
        xi = axis[:, None]
        return complex(np.sum(np.exp(1j * lam * phi(x, xi)) * amplitude(xi, lam)) * h)
    if n != 2:
        raise CapabilityError("stationary_decay supports n <= 2")
    total = 0j
    step = max(1, (1 << 22) // len(axis))
    for s in range(0, len(axis), step):
        a1 = axis[s:s + step]
        xi = np.stack(np.meshgrid(a1, axis, indexing="ij"), -1)
        total += np.sum(np.exp(1j * lam * phi(x, xi)) * amplitude(xi, lam))
    return complex(total * h * h)


# --------------------------------------------------------------------------- low-frequency kernels


def chi0_abs(x, xi):
    """chi_0(xi) |xi|."""
    return cutoffs.chi0(xi) * np.sqrt(np.sum(xi**2, -1))


def chi0_abs_phase(x, xi):
    """chi_0(xi) |xi| exp(i |xi|)."""
    r = np.sqrt(np.sum(xi**2, -1))
    return cutoffs.chi0(xi) * r * np.exp(1j * r)


def chi0_only(x, xi):
    return cutoffs.chi0(xi) + 0j


@dataclass
class KernelDecayReport:
    mu: float
    sup: float
    argmax: float
    y: np.ndarray
    kernel: np.ndarray


def kernel_decay_profile(b_rule: Callable, mu: float, grid: Grid, *, x=None, y_max: float = 100.0) -> KernelDecayReport:
    """sup_{|y| <= y_max} <y>^{n + mu} |B(x, y)| with B(x, y) = int exp(-i <y, xi>) b(x, xi) dxi on the grid."""
    if not 0 <= mu < 1:
        raise PreconditionError("mu must lie in [0, 1)")
    n = grid.n
    x = np.zeros(n) if x is None else np.asarray(x, float)
    bvals = np.asarray(b_rule(x, grid.xi), complex)
    inv = inverse_values(grid, bvals) * (2 * np.pi) ** n  # int exp(+i<y,xi>) b at grid y
    flip = tuple(slice(None, None, -1) for _ in range(n))
    B = np.roll(inv[flip], 1, axis=tuple(range(n)))  # value at -y
    r = grid.abs_x
    mask = r <= y_max
    weighted = (1 + r**2) ** ((n + mu) / 2) * np.abs(B)
    k = np.argmax(np.where(mask, weighted, -1.0))
    return KernelDecayReport(mu, float(weighted.reshape(-1)[k]), float(r.reshape(-1)[k]), r[mask], B[mask])


def kernel_decay_refinement(b_rule: Callable, mu: float, grids: Sequence[Grid], **kw) -> tuple[list, float]:
    """Weighted sups on successive grids and the largest relative change between neighbours."""
    sups = [kernel_decay_profile(b_rule, mu, g, **kw).sup for g in grids]
    change = max(abs(b - a) / a for a, b in zip(sups, sups[1:])) if len(sups) > 1 else 0.0
    return sups, float(change)


# --------------------------------------------------------------------------- commutators


def _b_values(b, grid: Grid) -> np.ndarray:
    vals = _cell_values(b, grid)
    if not np.all(np.isfinite(vals)):
        raise UsageError("b is not finite on the grid")
    return vals


def commutator_apply(b, op, u: SampledField, k: int = 1) -> SampledField:
    """T((b(x) - b(.))^k u) = sum_j C(k, j) b^{k-j} (-1)^j T(b^j u); k = 1 gives b T u - T(b u)."""
    if k < 1:
        raise UsageError("k must be >= 1")
    T = as_map(op)
    bv = _b_values(b, u.grid)
    out = np.zeros(u.grid.shape, complex)
    for j in range(k + 1):
        term = T.forward(u.with_values(bv**j * u.values)).values
        out += math.comb(k, j) * (-1) ** j * bv ** (k - j) * term
    return u.with_values(out)


def commutator_direct(b, op, u: SampledField) -> SampledField:
    """b T u - T(b u)."""
    T = as_map(op)
    bv = _b_values(b, u.grid)
    return u.with_values(bv * T.forward(u).values - T.forward(u.with_values(bv * u.values)).values)


def commutator_ratio(b, op, fam: TestFamily, p: float = 2.0, w: Optional[Weight] = None, k: int = 1) -> LpwEstimate:
    """max over the family of ||[b, T]_k u||_{L^p_w} / ||u||_{L^p_w}."""
    T = as_map(op)
    ratios = [(tag, weighted_norm(commutator_apply(b, T, u, k), p, w) / weighted_norm(u, p, w))
              for tag, u in fam.members(T.grid, p, w)]
    i = int(np.argmax([r for _, r in ratios]))
    return LpwEstimate(float(ratios[i][1]), ratios[i][0], i, ratios)


# --------------------------------------------------------------------------- rough substitution


def dilation_map(s: float = 2.0):
    return lambda x: s * np.asarray(x, float)


def sine_map(eps: float = 0.25):
    return lambda x: np.asarray(x, float) + eps * np.sin(x)


def identity_map():
    return lambda x: np.asarray(x, float)


BUILTIN_MAPS = {"dilation": (dilation_map(2.0), 2.0), "sine": (sine_map(0.25), 0.75), "identity": (identity_map(), 1.0)}


@dataclass
class SubstitutionReport:
    max_density: float
    bound: float
    within_bound: bool
    formula_errors: list
    c: float
    bin_width: float


def substitution_check(t_rule: Callable, c: float, grid: Grid, *, refine: int = 8, bin_cells: int = 4,
                       pairs: int = 256, seed: int = 0, tests: int = 3) -> SubstitutionReport:
    """Push Lebesgue measure forward through t and compare its density with 2 sqrt(n) / c."""
    n = grid.n
    rng = np.random.default_rng(seed)
    pts = grid.x.reshape(-1, n)
    i, j = rng.integers(0, len(pts), (2, pairs))
    keep = i != j
    x, y = pts[i[keep]], pts[j[keep]]
    lhs = np.linalg.norm(t_rule(x) - t_rule(y), axis=-1)
    rhs = c * np.linalg.norm(x - y, axis=-1)
    bad = np.flatnonzero(lhs < rhs * (1 - 1e-12))
    if len(bad):
        k = bad[0]
        raise PreconditionError(f"|t(x)-t(y)| < c|x-y| at x={x[k].tolist()}, y={y[k].tolist()}")

    fine = grid.refined(refine)
    src = fine.x.reshape(-1, n) + fine.spacing / 2
    mass = fine.cell_volume
    img = t_rule(src)
    hb = bin_cells * grid.spacing
    lo = np.floor(img.min(0) / hb) * hb
    hi = np.ceil(img.max(0) / hb) * hb + hb
    edges = [np.arange(lo[d], hi[d] + hb / 2, hb) for d in range(n)]
    counts, _ = np.histogramdd(img, bins=edges)
    dens = counts * mass / hb**n
    interior = binary_erosion(counts > 0, iterations=1, border_value=0)
    max_d = float(dens[interior].max()) if interior.any() else float("nan")
    bound = 2 * np.sqrt(n) / c

    centers = np.stack(np.meshgrid(*[(e[:-1] + e[1:]) / 2 for e in edges], indexing="ij"), -1)
    errs = []
    sig = grid.L / 8
    for _ in range(tests):
        c0 = t_rule(rng.uniform(-grid.L / 4, grid.L / 4, (1, n)))[0]

        def u(z, c0=c0):
            return np.exp(-np.sum((z - c0) ** 2, -1) / (2 * sig**2))

        direct = np.sum(u(img)) * mass
        pushed = np.sum(u(centers) * dens) * hb**n
        errs.append(float(abs(direct - pushed) / abs(direct)))
    return SubstitutionReport(max_d, float(bound), bool(max_d <= bound), errs, c, hb)
