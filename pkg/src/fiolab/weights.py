"""Weights, ball families, A_p constants, maximal functions, BMO and weighted norms.

A grid sample u_k is read as the value of u on the cell [x_k, x_k + dx)^n.
Weights enter through exact (or dyadically refined Gauss-Legendre) cell
averages, so singular weights such as |x|^alpha are integrated rather than
sampled at the origin.  Every supremum over balls is a maximum over a finite,
declared family and is therefore a lower bound of the continuum quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import CapabilityError, UsageError
from .grid import Grid, SampledField, Side, forward_values, inverse_values

WEIGHT_FAMILIES = ("power", "truncated_power", "log", "constant", "tabulated")
GL_NODES = 8
SHELL_DEPTH = 40  # dyadic shells used when the origin cell is not integrable


def _gl01(k: int = GL_NODES):
    t, w = np.polynomial.legendre.leggauss(k)
    return 0.5 * (t + 1.0), 0.5 * w


# --------------------------------------------------------------------------- weights


@dataclass(frozen=True, eq=False)
class Weight:
    family: str
    params: dict = field(default_factory=dict)
    table: Optional[np.ndarray] = None
    table_grid: Optional[Grid] = None

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise UsageError(f"unknown weight family {self.family!r}")
        if self.family == "tabulated":
            if self.table is None or self.table_grid is None:
                raise UsageError("tabulated weights need a table and its grid")
            if np.any(np.asarray(self.table) < 0):
                raise UsageError("weights must be nonnegative")

    # radial profile rho(r)^s
    def radial(self, r, s: float = 1.0):
        r = np.asarray(r, float)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.family == "constant":
                return np.full_like(r, p.get("value", 1.0) ** s)
            if self.family == "power":
                beta = p["alpha"] * s
                if beta == 0:
                    return np.ones_like(r)
                return np.where(r > 0, r**beta, np.inf if beta < 0 else 0.0)
            if self.family == "truncated_power":
                beta = -p["b"] * s
                inside = np.where(r > 0, r**beta, np.inf if beta < 0 else (1.0 if beta == 0 else 0.0))
                outside = 0.0 if s > 0 else (1.0 if s == 0 else np.inf)
                return np.where(r < p.get("radius", 2.0), inside, outside)
            if self.family == "log":
                core = np.where(r > 0, -np.log(np.where(r > 0, r, 1.0)), np.inf)
                return np.where(r < np.exp(-1.0), core, 1.0) ** s
        raise CapabilityError("tabulated weights have no radial profile")

    def __call__(self, x, s: float = 1.0):
        x = np.asarray(x, float)
        if self.family == "tabulated":
            g = self.table_grid
            idx = np.floor((x + g.L) / g.spacing).astype(int) % g.N
            return np.asarray(self.table)[tuple(np.moveaxis(idx, -1, 0))] ** s
        return self.radial(np.sqrt(np.sum(x**2, axis=-1)), s)

    def power_exponent(self, s: float = 1.0) -> Optional[float]:
        """beta with rho^s = r^beta near the origin, for the power-type families."""
        if self.family == "power":
            return self.params["alpha"] * s
        if self.family == "truncated_power":
            return -self.params["b"] * s
        if self.family == "constant":
            return 0.0
        return None

    def origin_integrable(self, n: int, s: float = 1.0) -> bool:
        beta = self.power_exponent(s)
        if beta is None:
            return self.family != "log" or s > -np.inf
        return beta > -n

    def cell_averages(self, grid: Grid, s: float = 1.0) -> np.ndarray:
        """Average of w^s over every cell [x_k, x_k + dx)^n.

        Exact for power-type families in 1D; otherwise Gauss-Legendre, with
        dyadic corner refinement on the 2^n cells touching the origin.  When
        w^s is not integrable at the origin those cells hold the integral over
        the region outside a cube of side dx 2^{-40}: a finite lower bound.
        """
        if self.family == "tabulated":
            if self.table_grid != grid:
                raise UsageError("tabulated weight lives on another grid")
            return np.asarray(self.table, float).reshape(grid.shape) ** s
        if grid.n == 1 and self.family != "log":
            return self._cells_1d_exact(grid, s)
        return self._cells_numeric(grid, s)

    def _cells_1d_exact(self, grid: Grid, s: float) -> np.ndarray:
        dx = grid.spacing
        left = grid.x_axis
        a = np.where(left >= 0, left, -(left + dx))
        b = a + dx
        a = np.abs(np.round(a / dx)) * dx  # exact zero for the origin cells
        return self._interval_integral(a, b, s) / dx

    def _interval_integral(self, a, b, s):
        """int_a^b rho(r)^s dr for 0 <= a < b (vectorised)."""
        p = self.params
        if self.family == "constant":
            return (b - a) * p.get("value", 1.0) ** s
        beta = self.power_exponent(s)
        if self.family == "power":
            return _power_integral(a, b, beta)
        R = p.get("radius", 2.0)
        ai, bi = np.minimum(a, R), np.minimum(b, R)
        inside = np.where(bi > ai, _power_integral(ai, np.maximum(bi, ai), beta), 0.0)
        out_len = np.maximum(b - np.maximum(a, R), 0.0)
        if s > 0:
            outside = 0.0
        elif s == 0:
            outside = out_len
        else:
            outside = np.where(out_len > 0, np.inf, 0.0)
        return inside + outside

    def _cells_numeric(self, grid: Grid, s: float) -> np.ndarray:
        n, dx = grid.n, grid.spacing
        t, w = _gl01()
        nodes = np.stack(np.meshgrid(*([t] * n), indexing="ij"), -1).reshape(-1, n)
        wts = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij"), -1).reshape(-1, n), axis=-1)
        corners = grid.x.reshape(-1, n)
        out = np.empty(len(corners))
        step = max(1, (1 << 20) // len(nodes))
        for i in range(0, len(corners), step):
            pts = corners[i:i + step, None, :] + dx * nodes[None]
            out[i:i + step] = np.sum(self(pts, s) * wts, axis=-1)
        origin = np.all(np.isclose(corners, 0.0, atol=dx * 1e-9) | np.isclose(corners, -dx, atol=dx * 1e-9), axis=1)
        corner_avg = self._corner_average(n, dx, s)
        out[origin] = corner_avg
        return out.reshape(grid.shape)

    def _corner_average(self, n: int, h: float, s: float) -> float:
        """Average of rho(|x|)^s over [0, h]^n by dyadic shells (exact tail for power-type profiles)."""
        t, w = _gl01()
        sub = [np.array(c) for c in np.ndindex(*([2] * n)) if any(c)]
        nodes = np.stack(np.meshgrid(*([t] * n), indexing="ij"), -1).reshape(-1, n)
        wts = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij"), -1).reshape(-1, n), axis=-1)

        def shell(side):
            half = side / 2
            tot = 0.0
            for c in sub:
                pts = (c * half) + half * nodes
                tot += np.sum(self.radial(np.sqrt(np.sum(pts**2, -1)), s) * wts) * half**n
            return tot

        beta = self.power_exponent(s)
        scale_free = beta is not None and (
            self.family != "truncated_power" or h * np.sqrt(n) < self.params.get("radius", 2.0))
        if scale_free and beta > -n:
            # homogeneity: I(h) = shell(h) / (1 - 2^{-(n + beta)})
            return shell(h) / (1.0 - 2.0 ** (-(n + beta))) / h**n
        total, side = 0.0, h
        for _ in range(SHELL_DEPTH if scale_free else 60):
            total += shell(side)
            side /= 2
        return total / h**n


def _power_integral(a, b, beta):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(a > 0, a, b * 2.0 ** (-SHELL_DEPTH))
        if beta > -1:
            return (b ** (beta + 1) - a ** (beta + 1)) / (beta + 1)
        if beta == -1:
            return np.log(b / lo)
        return (b ** (beta + 1) - lo ** (beta + 1)) / (beta + 1)


def power_weight(alpha: float) -> Weight:
    return Weight("power", {"alpha": float(alpha)})


def truncated_power_weight(b: float, radius: float = 2.0) -> Weight:
    return Weight("truncated_power", {"b": float(b), "radius": float(radius)})


def log_weight() -> Weight:
    """log(1/|x|) on |x| < 1/e, 1 elsewhere."""
    return Weight("log")


def constant_weight(value: float = 1.0) -> Weight:
    return Weight("constant", {"value": float(value)})


def tabulated_weight(grid: Grid, values) -> Weight:
    return Weight("tabulated", table=np.asarray(values, float).reshape(grid.shape), table_grid=grid)


def power_weight_class(alpha: float, p: float, n: int) -> bool:
    """|x|^alpha in A_1 iff -n < alpha <= 0; in A_p (p > 1) iff -n < alpha < n(p - 1)."""
    if p < 1:
        raise UsageError("p must be >= 1")
    if p == 1:
        return -n < alpha <= 0
    return -n < alpha < n * (p - 1)


# --------------------------------------------------------------------------- balls


@dataclass(frozen=True, eq=False)
class BallFamily:
    """Explicit balls (``centers``, ``radii``) and/or centred balls of ``centered_radii`` at every grid point."""

    centers: np.ndarray
    radii: np.ndarray
    centered_radii: Optional[np.ndarray] = None
    rule: str = "explicit"

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, float))
        r = np.atleast_1d(np.asarray(self.radii, float))
        if c.size == 0:
            c = c.reshape(0, c.shape[-1] if c.ndim == 2 else 1)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        if len(c) != len(r):
            raise UsageError("centers and radii differ in length")
        if np.any(r <= 0) or (self.centered_radii is not None and np.any(np.asarray(self.centered_radii) <= 0)):
            raise UsageError("radii must be positive")
        if self.centered_radii is not None:
            object.__setattr__(self, "centered_radii", np.sort(np.asarray(self.centered_radii, float)))

    def __len__(self):
        return len(self.radii) + (0 if self.centered_radii is None else len(self.centered_radii))

    @property
    def empty(self) -> bool:
        return len(self) == 0

    def union(self, other: "BallFamily") -> "BallFamily":
        cr = [x for x in (self.centered_radii, other.centered_radii) if x is not None]
        n = max(self.centers.shape[1], other.centers.shape[1])
        return BallFamily(np.vstack([self.centers.reshape(-1, n), other.centers.reshape(-1, n)]),
                          np.concatenate([self.radii, other.radii]),
                          np.unique(np.concatenate(cr)) if cr else None, "union")

    @classmethod
    def explicit(cls, centers, radii) -> "BallFamily":
        return cls(np.asarray(centers, float), np.asarray(radii, float))

    @classmethod
    def dyadic(cls, centers, kmin: int = -8, kmax: int = 3, R0: float = 1.0) -> "BallFamily":
        """Radii R0 2^k, kmin <= k <= kmax, at each center."""
        c = np.atleast_2d(np.asarray(centers, float))
        radii = R0 * 2.0 ** np.arange(kmin, kmax + 1)
        return cls(np.repeat(c, len(radii), axis=0), np.tile(radii, len(c)), rule=f"dyadic[{kmin},{kmax}]")

    @classmethod
    def at_origin(cls, n: int, kmin: int = -8, kmax: int = 3) -> "BallFamily":
        return cls.dyadic(np.zeros((1, n)), kmin, kmax)

    @classmethod
    def default(cls, grid: Grid, kmin: int = -8, kmax: int = 3) -> "BallFamily":
        """Dyadic radii 2^kmin..2^kmax at the origin and on a sublattice of spacing L/4 inside [-L/2, L/2]^n."""
        axis = np.arange(-2, 3) * grid.L / 4
        c = np.stack(np.meshgrid(*([axis] * grid.n), indexing="ij"), -1).reshape(-1, grid.n)
        return cls.dyadic(c, kmin, kmax)

    @classmethod
    def centered(cls, n: int, radii) -> "BallFamily":
        return cls(np.zeros((0, n)), np.zeros(0), np.asarray(radii, float), "centered")

    @classmethod
    def centered_dyadic(cls, n: int, kmin: int = -8, kmax: int = 3) -> "BallFamily":
        return cls.centered(n, 2.0 ** np.arange(kmin, kmax + 1))

    @classmethod
    def all_radii(cls, grid: Grid, R: float) -> "BallFamily":
        """Centred balls with every radius that is a multiple of dx/2 up to R."""
        k = np.arange(1, int(np.floor(2 * R / grid.spacing)) + 1)
        return cls.centered(grid.n, k * grid.spacing / 2)

    def explicit_balls(self, grid: Grid):
        """All balls as (center, radius), the centred part expanded to every grid point."""
        for c, r in zip(self.centers, self.radii):
            yield c, r
        if self.centered_radii is not None:
            pts = grid.x.reshape(-1, grid.n)
            for r in self.centered_radii:
                for c in pts:
                    yield c, r


def ball_overlap(grid: Grid, center, radius: float, supersample: int = 8):
    """Flat cell indices meeting the ball and the fraction of each cell inside it."""
    n, dx, L = grid.n, grid.spacing, grid.L
    c = np.asarray(center, float).reshape(n)
    lo = np.maximum(np.floor((c - radius + L) / dx).astype(int), 0)
    hi = np.minimum(np.ceil((c + radius + L) / dx).astype(int), grid.N)
    if np.any(hi <= lo):
        return np.zeros(0, int), np.zeros(0)
    if n == 1:
        k = np.arange(lo[0], hi[0])
        a = -L + k * dx
        frac = (np.minimum(a + dx, c[0] + radius) - np.maximum(a, c[0] - radius)) / dx
        keep = frac > 0
        return k[keep], np.clip(frac[keep], 0.0, 1.0)
    ranges = [np.arange(l, h) for l, h in zip(lo, hi)]
    idx = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, n)
    corner = -L + idx * dx
    t = (np.arange(supersample) + 0.5) / supersample
    sub = np.stack(np.meshgrid(*([t] * n), indexing="ij"), -1).reshape(-1, n) * dx
    inside = np.sum((corner[:, None, :] + sub[None] - c) ** 2, -1) <= radius**2
    frac = inside.mean(axis=1)
    keep = frac > 0
    flat = np.ravel_multi_index(tuple(idx[keep].T), grid.shape)
    return flat, frac[keep]


def _ball_stats(vals: np.ndarray, grid: Grid, center, radius):
    idx, frac = ball_overlap(grid, center, radius)
    if len(idx) == 0:
        raise UsageError(f"ball at {center} with radius {radius} misses the grid")
    v = vals.reshape(-1)[idx]
    with np.errstate(invalid="ignore"):
        mean = np.inf if np.any(np.isinf(v)) else float(np.sum(frac * v) / np.sum(frac))
    return idx, frac, v, mean


# --------------------------------------------------------------------------- A_p


@dataclass
class ApReport:
    value: float
    p: float
    per_ball: list
    per_scale: dict
    lower_bound: bool = True
    origin_truncated: bool = False
    resolution: float = 0.0  # smallest radius whose balls resolve several cells (4 dx)

    def trend(self, min_radius: Optional[float] = None) -> list:
        """(radius, value) for radii >= ``min_radius`` (default: the resolution radius), increasing radius."""
        lo = self.resolution if min_radius is None else min_radius
        return [(r, v) for r, v in sorted(self.per_scale.items()) if r >= lo]

    def diverges(self, min_radius: Optional[float] = None, runs: int = 3, factor: float = 1.5) -> bool:
        """Monotone growth over >= ``runs`` successive dyadic scales with total factor >= ``factor``."""
        return trend_grows(self.trend(min_radius), runs, factor)


def trend_grows(trend, runs: int = 3, factor: float = 1.5) -> bool:
    """True when some run of >= ``runs`` successive increases multiplies the value by >= ``factor``."""
    vals = [v for _, v in trend]
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or not vals[i] > vals[i - 1] * (1 + 1e-9):
            if i - 1 - start >= runs and vals[i - 1] >= factor * vals[start]:
                return True
            start = i
    return False


def ap_constant(w: Weight, p: float, balls: BallFamily, grid: Grid) -> ApReport:
    """max over the family of w_B (w^{-1/(p-1)})_B^{p-1}; per-scale maxima in ``per_scale``."""
    if p <= 1:
        raise UsageError("p must exceed 1; use ap1_constant for A_1")
    if balls.empty:
        raise UsageError("empty ball family")
    sigma = -1.0 / (p - 1)
    wc = w.cell_averages(grid)
    vc = w.cell_averages(grid, sigma)
    rows = []
    for c, r in balls.explicit_balls(grid):
        _, _, _, mw = _ball_stats(wc, grid, c, r)
        _, _, _, mv = _ball_stats(vc, grid, c, r)
        rows.append((tuple(np.atleast_1d(c)), float(r), mw * mv ** (p - 1)))
    return _report(rows, p, w, grid, sigma)


def ap1_constant(w: Weight, balls: BallFamily, grid: Grid) -> ApReport:
    """max over the family of w_B / ess inf_B w (cell averages stand in for point values)."""
    if balls.empty:
        raise UsageError("empty ball family")
    wc = w.cell_averages(grid)
    rows = []
    for c, r in balls.explicit_balls(grid):
        _, _, v, mw = _ball_stats(wc, grid, c, r)
        low = float(np.min(v))
        rows.append((tuple(np.atleast_1d(c)), float(r), np.inf if low == 0 else mw / low))
    return _report(rows, 1.0, w, grid, 1.0)


def _report(rows, p, w, grid, sigma):
    per_scale: dict = {}
    for _, r, v in rows:
        per_scale[r] = max(per_scale.get(r, 0.0), v)
    value = max(v for _, _, v in rows)
    trunc = not (w.origin_integrable(grid.n) and w.origin_integrable(grid.n, sigma))
    return ApReport(float(value), p, rows, per_scale, True, trunc, 4 * grid.spacing)


# --------------------------------------------------------------------------- maximal function


def _centered_means(vals: np.ndarray, grid: Grid, radius: float) -> np.ndarray:
    """Mean of the cell function over the ball of ``radius`` centred at every grid point."""
    dx, L = grid.spacing, grid.L
    if grid.n == 1:
        edges = -L + dx * np.arange(grid.N + 1)
        cum = np.concatenate([[0.0], np.cumsum(vals) * dx])
        x = grid.x_axis
        lo = np.clip(x - radius, -L, L)
        hi = np.clip(x + radius, -L, L)
        return (np.interp(hi, edges, cum) - np.interp(lo, edges, cum)) / np.maximum(hi - lo, 1e-300)
    m = int(np.ceil(radius / dx))
    offsets = np.arange(-m, m) * dx
    corner = np.stack(np.meshgrid(*([offsets] * grid.n), indexing="ij"), -1)
    t = (np.arange(8) + 0.5) / 8 * dx
    sub = np.stack(np.meshgrid(*([t] * grid.n), indexing="ij"), -1).reshape(-1, grid.n)
    kern = np.mean(np.sum((corner[..., None, :] + sub) ** 2, -1) <= radius**2, axis=-1)
    flip = kern[(slice(None, None, -1),) * grid.n]
    num = fftconvolve(vals, flip, mode="full")
    den = fftconvolve(np.ones(grid.shape), flip, mode="full")
    sl = tuple(slice(m - 1, m - 1 + grid.N) for _ in range(grid.n))
    return np.real(num[sl]) / np.maximum(np.real(den[sl]), 1e-300)


def maximal(u: SampledField, balls: BallFamily, p_exp: float = 1.0) -> SampledField:
    """sup over family balls containing x of (|u|^p)_B, to the power 1/p."""
    if u.side is not Side.PHYSICAL:
        raise UsageError("maximal function needs a physical-side field")
    if balls.empty:
        raise UsageError("empty ball family")
    if p_exp < 1:
        raise UsageError("p_exp must be >= 1")
    g = u.grid
    vals = np.abs(u.values) ** p_exp
    out = np.zeros(g.shape)
    if balls.centered_radii is not None:
        for r in balls.centered_radii:
            out = np.maximum(out, _centered_means(vals, g, r))
    pts = g.x.reshape(-1, g.n)
    flat = out.reshape(-1)
    for c, r in zip(balls.centers, balls.radii):
        _, _, _, mean = _ball_stats(vals, g, c, r)
        inside = np.sum((pts - c) ** 2, -1) <= r * r * (1 + 1e-12)
        flat[inside] = np.maximum(flat[inside], mean)
    return SampledField(g, np.maximum(out, 0.0) ** (1.0 / p_exp), Side.PHYSICAL)


# --------------------------------------------------------------------------- norms


def weighted_norm(u: SampledField, p: float, w: Optional[Weight] = None) -> float:
    """(sum_k |u_k|^p <w>_k dx^n)^{1/p}; ``p = inf`` gives max |u| on the support of w."""
    if u.side is not Side.PHYSICAL:
        raise UsageError("weighted norms need a physical-side field")
    g = u.grid
    a = np.abs(u.values)
    wc = np.ones(g.shape) if w is None else w.cell_averages(g)
    if np.isinf(p):
        return float(np.max(np.where(wc > 0, a, 0.0)))
    if p <= 0:
        raise UsageError("p must be positive")
    with np.errstate(invalid="ignore"):
        terms = np.where(a > 0, a**p * wc, 0.0)
    return float(np.sum(terms) * g.cell_volume) ** (1.0 / p)


def cell_indicator(grid: Grid, lo, hi) -> SampledField:
    """Average of the indicator of the box [lo, hi] over every cell."""
    n, dx = grid.n, grid.spacing
    lo = np.broadcast_to(np.asarray(lo, float), (n,))
    hi = np.broadcast_to(np.asarray(hi, float), (n,))
    a = grid.x_axis
    parts = [np.clip((np.minimum(a + dx, hi[i]) - np.maximum(a, lo[i])) / dx, 0.0, 1.0) for i in range(n)]
    vals = parts[0]
    for p in parts[1:]:
        vals = np.multiply.outer(vals, p)
    return SampledField(grid, vals, Side.PHYSICAL)


@dataclass
class BmoReport:
    value: float
    per_ball: list
    per_scale: dict

    def trend(self, min_radius: float = 0.0):
        return [(r, v) for r, v in sorted(self.per_scale.items()) if r >= min_radius]


def _cell_values(b, grid: Grid) -> np.ndarray:
    if isinstance(b, Weight):
        return b.cell_averages(grid)
    if isinstance(b, SampledField):
        return np.real(b.values)
    if callable(b):
        t, w = _gl01()
        nodes = np.stack(np.meshgrid(*([t] * grid.n), indexing="ij"), -1).reshape(-1, grid.n)
        wts = np.prod(np.stack(np.meshgrid(*([w] * grid.n), indexing="ij"), -1).reshape(-1, grid.n), axis=-1)
        pts = grid.x.reshape(-1, 1, grid.n) + grid.spacing * nodes[None]
        return np.sum(np.real(b(pts)) * wts, axis=-1).reshape(grid.shape)
    return np.asarray(b, float).reshape(grid.shape)


def bmo_norm(b, balls: BallFamily, grid: Grid) -> BmoReport:
    """max over the family of (1/|B|) int_B |b - b_B|; ``b`` may be a Weight, a field, a rule or an array."""
    if balls.empty:
        raise UsageError("empty ball family")
    vals = _cell_values(b, grid)
    if not np.all(np.isfinite(vals)):
        raise UsageError("b is not finite on the grid cells")
    rows = []
    for c, r in balls.explicit_balls(grid):
        _, frac, v, mean = _ball_stats(vals, grid, c, r)
        osc = float(np.sum(frac * np.abs(v - mean)) / np.sum(frac))
        rows.append((tuple(np.atleast_1d(c)), float(r), osc))
    per_scale: dict = {}
    for _, r, v in rows:
        per_scale[r] = max(per_scale.get(r, 0.0), v)
    return BmoReport(max(v for *_, v in rows), rows, per_scale)


def triebel_lizorkin_norm(u: SampledField, s: float, p: float, q: float, w: Optional[Weight], dp) -> float:
    """|| (sum_j |2^{js} chi_j(D) u|^q)^{1/q} ||_{L^p_w} over the pieces of ``dp``."""
    if np.isinf(q) or np.isinf(p):
        raise UsageError("p = inf or q = inf is not supported")
    if dp.grid != u.grid:
        raise UsageError("partition built on another grid")
    g = u.grid
    uhat = forward_values(g, u.values)
    acc = np.zeros(g.shape)
    for j in range(dp.count):
        piece = inverse_values(g, dp.values(j) * uhat)
        acc += (2.0 ** (j * s) * np.abs(piece)) ** q
    return weighted_norm(SampledField(u.grid, acc ** (1.0 / q)), p, w)


def smooth_average(u: SampledField, profile: Callable[[np.ndarray], np.ndarray]) -> SampledField:
    """Discrete convolution phi * |u| with phi = profile(|x|) normalised to unit discrete integral."""
    g = u.grid
    # cell j contributes phi at the offset from its midpoint
    ker = profile(np.linalg.norm(g.x - g.spacing / 2, axis=-1))
    ker = ker / (np.sum(ker) * g.cell_volume)
    full = fftconvolve(np.abs(u.values), ker, mode="full") * g.cell_volume
    h = g.N // 2
    return SampledField(g, np.real(full[tuple(slice(h, h + g.N) for _ in range(g.n))]), Side.PHYSICAL)
