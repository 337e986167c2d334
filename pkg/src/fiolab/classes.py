"""Amplitude (symbol) and phase classes with numerical seminorm reporting.

Evaluation rules take ``x`` and ``xi`` arrays of shape ``(..., n)`` that
broadcast against each other and return an array of the broadcast leading
shape.  Derivatives used by the reports are nested central differences of
the evaluation rule; every "sup" in a report is a maximum over a finite,
deterministic sample set and therefore a lower bound of the true supremum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cutoffs
from .errors import CapabilityError, ConfigurationError, DomainError
from .grid import Grid

EvalRule = Callable[[np.ndarray, np.ndarray], np.ndarray]

SYMBOL_FAMILIES = ("bessel_power", "cutoff_times_power", "x_modulated", "tabulated", "custom")
PHASE_FAMILIES = ("linear", "wave", "shifted", "diffeo", "rough_wave", "custom")

RANK_RTOL = 1e-8
LOWER_BOUND_NOTE = "sampled maximum over a finite lattice: a lower bound of the true supremum"


def _norm(v):
    return np.sqrt(np.sum(np.asarray(v, float) ** 2, axis=-1))


def bracket(xi):
    """<xi> = (1 + |xi|^2)^{1/2}."""
    return np.sqrt(1.0 + np.sum(np.asarray(xi, float) ** 2, axis=-1))


@dataclass(frozen=True)
class OrderParams:
    m: float
    rho: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("rho", "delta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")

    def lam(self, n: int) -> float:
        """min(0, n (rho - delta))."""
        return min(0.0, n * (self.rho - self.delta))


# --------------------------------------------------------------------------- symbols


@dataclass(frozen=True)
class SymbolSpec:
    order: OrderParams
    family: str
    func: EvalRule
    rough_in_x: bool = False
    x_independent: bool = False
    x_smoothness: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in SYMBOL_FAMILIES:
            raise ConfigurationError(f"unknown symbol family {self.family!r}")
        if self.rough_in_x and self.x_smoothness:
            raise ConfigurationError("a rough_in_x symbol cannot declare x-smoothness")

    def __call__(self, x, xi):
        xi = np.asarray(xi, dtype=float)
        if x is None:
            if not self.x_independent:
                raise CapabilityError("this symbol depends on x")
            x = np.zeros(xi.shape[-1])
        return np.asarray(self.func(np.asarray(x, dtype=float), xi), dtype=complex)

    def times(self, g: Callable[[np.ndarray, np.ndarray], np.ndarray], *, x_independent: Optional[bool] = None,
              label: str = "product") -> "SymbolSpec":
        """Pointwise product with another rule; the result is tagged ``custom``."""
        f = self.func
        xi_only = self.x_independent if x_independent is None else x_independent
        return SymbolSpec(self.order, "custom", lambda x, xi: f(x, xi) * g(x, xi), self.rough_in_x,
                          xi_only, self.x_smoothness, {"base": self.family, "op": label})


def bessel_power(m: float, rho: float = 1.0, delta: float = 0.0) -> SymbolSpec:
    """a(x, xi) = (1 + |xi|^2)^{m/2}."""
    return SymbolSpec(OrderParams(m, rho, delta), "bessel_power",
                      lambda x, xi: (1.0 + np.sum(xi**2, axis=-1)) ** (m / 2.0),
                      x_independent=True, x_smoothness=99, params={"m": m})


def cutoff_times_power(m: float, *, cutoff: str = "high", base: str = "bracket", low_cut: float = 2.0,
                       declared_m: Optional[float] = None) -> SymbolSpec:
    """c(xi) * w(xi)^m with c in {chi0, 1 - chi0} and w in {<xi>, |xi|}.

    ``cutoff="low", base="abs", m=1`` is the low-frequency amplitude chi0(xi)|xi|.
    """
    if cutoff not in ("low", "high"):
        raise ConfigurationError("cutoff must be 'low' or 'high'")
    if base not in ("bracket", "abs"):
        raise ConfigurationError("base must be 'bracket' or 'abs'")

    def rule(x, xi):
        c = cutoffs.chi0(xi, low_cut)
        if cutoff == "high":
            c = 1.0 - c
        w = bracket(xi) if base == "bracket" else _norm(xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(w > 0, w ** m, 0.0 if m > 0 else (1.0 if m == 0 else np.inf))
        return np.where(c == 0, 0.0, c * p)

    order = OrderParams(m if declared_m is None else declared_m, 1.0, 0.0)
    if cutoff == "low":
        order = OrderParams(-np.inf if declared_m is None else declared_m, 1.0, 0.0)
    return SymbolSpec(order, "cutoff_times_power", rule, x_independent=True, x_smoothness=99,
                      params={"m": m, "cutoff": cutoff, "base": base, "low_cut": low_cut})


def step_modulation(x, *, jump: float = 1.0, level: float = 1.0):
    """Bounded measurable factor: ``level`` for x_1 < 0, ``level + jump`` for x_1 >= 0."""
    return level + jump * (np.asarray(x)[..., 0] >= 0)


def sawtooth_modulation(x, *, period: float = 1.0, level: float = 1.0, amplitude: float = 1.0):
    """level + amplitude * frac(x_1 / period)."""
    s = np.asarray(x)[..., 0] / period
    return level + amplitude * (s - np.floor(s))


MODULATIONS = {"step": step_modulation, "sawtooth": sawtooth_modulation}


def x_modulated(m: float, modulation: str = "step", **mod_params) -> SymbolSpec:
    """g(x) <xi>^m with g a bounded measurable (step or sawtooth) factor: an L-infinity S^m_1 amplitude."""
    if modulation not in MODULATIONS:
        raise ConfigurationError(f"unknown modulation {modulation!r}")
    g = MODULATIONS[modulation]
    return SymbolSpec(OrderParams(m, 1.0, 0.0), "x_modulated",
                      lambda x, xi: g(x, **mod_params) * (1.0 + np.sum(xi**2, axis=-1)) ** (m / 2.0),
                      rough_in_x=True, params={"m": m, "modulation": modulation, **mod_params})


def _nearest_index(grid: Grid, pts: np.ndarray, side: str) -> np.ndarray:
    pts = np.asarray(pts, float)
    if side == "x":
        idx = np.rint((pts + grid.L) / grid.spacing).astype(int)
    else:
        idx = np.rint(pts / grid.dual_spacing).astype(int)
    idx %= grid.N
    return np.ravel_multi_index(tuple(np.moveaxis(idx, -1, 0)), grid.shape)


def tabulated(grid: Grid, table: np.ndarray, order: OrderParams, *, rough_in_x: bool = True) -> SymbolSpec:
    """Symbol given by values ``table[x_flat, xi_flat]`` on ``grid``; evaluation uses the nearest node.

    ``xi_flat`` indexes the frequency grid in FFT order.
    """
    table = np.asarray(table, dtype=complex)
    if table.shape != (grid.size, grid.size):
        raise ConfigurationError(f"table must have shape {(grid.size, grid.size)}, got {table.shape}")

    def rule(x, xi):
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        return table[_nearest_index(grid, x, "x"), _nearest_index(grid, xi, "xi")]

    return SymbolSpec(order, "tabulated", rule, rough_in_x=rough_in_x, params={"grid": grid.describe()})


def custom_symbol(func: EvalRule, order: OrderParams, *, rough_in_x: bool = False, x_independent: bool = False,
                  x_smoothness: int = 0, **params) -> SymbolSpec:
    return SymbolSpec(order, "custom", func, rough_in_x, x_independent, x_smoothness, params)


# --------------------------------------------------------------------------- phases


@dataclass(frozen=True)
class PhaseSpec:
    func: EvalRule
    grad_xi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess_xixi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess_mixed: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    k: int = 2
    rough_in_x: bool = False
    homogeneous_degree_1: bool = True
    family: str = "custom"
    x_independent_part: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in PHASE_FAMILIES:
            raise ConfigurationError(f"unknown phase family {self.family!r}")
        if self.rough_in_x and self.hess_mixed is not None:
            raise ConfigurationError("rough phases carry no mixed Hessian")

    @property
    def class_tag(self) -> str:
        return f"{'Linf' if self.rough_in_x else ''}Phi^{self.k}"

    def __call__(self, x, xi):
        return np.asarray(self.func(np.asarray(x, float), np.asarray(xi, float)), dtype=float)


def _outer_eye(xi, n):
    return np.broadcast_to(np.eye(n), np.shape(xi)[:-1] + (n, n))


def _abs_hessian(xi):
    xi = np.asarray(xi, float)
    n = xi.shape[-1]
    r = _norm(xi)[..., None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.eye(n) / r - xi[..., :, None] * xi[..., None, :] / r**3


def _unit(xi):
    xi = np.asarray(xi, float)
    r = _norm(xi)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, xi / np.where(r > 0, r, 1.0), 0.0)


def linear_phase(n: int) -> PhaseSpec:
    """<x, xi>."""
    return PhaseSpec(
        func=lambda x, xi: np.sum(x * xi, axis=-1),
        grad_xi=lambda x, xi: np.broadcast_to(x, np.broadcast_shapes(np.shape(x), np.shape(xi))).astype(float),
        hess_xixi=lambda x, xi: np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))[:-1] + (n, n)),
        hess_mixed=lambda x, xi: _outer_eye(np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
        family="linear", x_independent_part=True, params={"n": n})


def wave_phase(n: int, t: float = 1.0) -> PhaseSpec:
    """<x, xi> + t |xi|."""
    def grad(x, xi):
        return x + t * _unit(xi)

    return PhaseSpec(
        func=lambda x, xi: np.sum(x * xi, axis=-1) + t * _norm(xi),
        grad_xi=grad,
        hess_xixi=lambda x, xi: np.broadcast_to(t * _abs_hessian(xi), np.broadcast_shapes(
            np.shape(x), np.shape(xi))[:-1] + (n, n)),
        hess_mixed=lambda x, xi: _outer_eye(np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
        family="wave", x_independent_part=True, params={"n": n, "t": t})


def shifted_phase(n: int, amount: float = 1.0, axis: int = 0) -> PhaseSpec:
    """<x, xi> + amount * xi_axis: non-degenerate, but the frequency Hessian vanishes."""
    e = np.zeros(n)
    e[axis] = amount
    return PhaseSpec(
        func=lambda x, xi: np.sum(x * xi, axis=-1) + xi[..., axis] * amount,
        grad_xi=lambda x, xi: x + e + 0.0 * xi,
        hess_xixi=lambda x, xi: np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))[:-1] + (n, n)),
        hess_mixed=lambda x, xi: _outer_eye(np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
        family="shifted", x_independent_part=True, params={"n": n, "amount": amount, "axis": axis})


def diffeo_phase(n: int, kappa: Callable, jacobian: Callable, name: str = "custom", **params) -> PhaseSpec:
    """<kappa(x), xi>; ``jacobian(x)`` returns d kappa_k / d x_j at index [..., j, k]."""
    def hess_mixed(x, xi):
        shape = np.broadcast_shapes(np.shape(x), np.shape(xi))[:-1] + (n, n)
        return np.broadcast_to(jacobian(np.asarray(x, float)), shape)

    return PhaseSpec(
        func=lambda x, xi: np.sum(kappa(x) * xi, axis=-1),
        grad_xi=lambda x, xi: np.broadcast_to(kappa(x), np.broadcast_shapes(np.shape(x), np.shape(xi))).astype(float),
        hess_xixi=lambda x, xi: np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))[:-1] + (n, n)),
        hess_mixed=hess_mixed,
        family="diffeo", params={"n": n, "kappa": name, **params})


def scaling_phase(n: int, s: float = 2.0) -> PhaseSpec:
    """<s x, xi>: the FIO with amplitude 1 is the composition u -> u(s x)."""
    return diffeo_phase(n, lambda x: s * np.asarray(x, float),
                        lambda x: s * np.broadcast_to(np.eye(n), np.shape(x)[:-1] + (n, n)),
                        name="scaling", s=s, kappa_max_slope=abs(s))


def sine_diffeo_phase(n: int, eps: float = 0.25) -> PhaseSpec:
    """<kappa(x), xi> with kappa_i(x) = x_i + eps sin(x_i); |eps| < 1 keeps kappa' >= 1 - |eps|."""
    if abs(eps) >= 1:
        raise ConfigurationError("|eps| must be < 1 for a diffeomorphism")

    def jac(x):
        d = 1.0 + eps * np.cos(np.asarray(x, float))
        return d[..., :, None] * np.eye(n)

    return diffeo_phase(n, lambda x: np.asarray(x, float) + eps * np.sin(x), jac, name="sine", eps=eps,
                        kappa_max_slope=1.0 + abs(eps))


TIME_RULES = {
    "step": lambda x, t0=1.0, t1=0.5: t0 + t1 * (np.asarray(x)[..., 0] >= 0),
    "sawtooth": lambda x, t0=1.0, t1=0.5, period=1.0: t0 + t1 * np.mod(np.asarray(x)[..., 0] / period, 1.0),
    "constant": lambda x, t0=1.0: t0 + 0.0 * np.asarray(x)[..., 0],
}


def rough_wave_phase(n: int, rule: str | Callable = "step", **rule_params) -> PhaseSpec:
    """<x, xi> + t(x) |xi| with t bounded measurable."""
    t_rule = TIME_RULES[rule] if isinstance(rule, str) else rule

    def t_of(x):
        return t_rule(np.asarray(x, float), **rule_params)

    def hess(x, xi):
        shape = np.broadcast_shapes(np.shape(x), np.shape(xi))[:-1]
        return t_of(x)[..., None, None] * np.broadcast_to(_abs_hessian(xi), shape + (n, n))

    return PhaseSpec(
        func=lambda x, xi: np.sum(x * xi, axis=-1) + t_of(x) * _norm(xi),
        grad_xi=lambda x, xi: x + t_of(x)[..., None] * _unit(xi),
        hess_xixi=hess,
        rough_in_x=True, family="rough_wave",
        params={"n": n, "rule": rule if isinstance(rule, str) else "callable", **rule_params})


def quadratic_phase(n: int) -> PhaseSpec:
    """<x, xi> + |xi|^2 / 2: inhomogeneous, frequency Hessian the identity (stationary-phase model)."""
    return PhaseSpec(
        func=lambda x, xi: np.sum(x * xi, axis=-1) + 0.5 * np.sum(xi**2, axis=-1),
        grad_xi=lambda x, xi: x + xi,
        hess_xixi=lambda x, xi: _outer_eye(np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
        hess_mixed=lambda x, xi: _outer_eye(np.zeros(np.broadcast_shapes(np.shape(x), np.shape(xi))), n),
        homogeneous_degree_1=False, family="custom", x_independent_part=True, params={"n": n, "name": "quadratic"})


# --------------------------------------------------------------------------- finite differences


def _nested_diff(f, x, xi, dirs, hx, hxi):
    if not dirs:
        return f(x, xi)
    kind, i = dirs[0]
    rest = dirs[1:]
    if kind == "xi":
        e = np.zeros(xi.shape[-1])
        e[i] = 1.0
        step = hxi[..., None] * e
        plus = _nested_diff(f, x, xi + step, rest, hx, hxi)
        minus = _nested_diff(f, x, xi - step, rest, hx, hxi)
        return (plus - minus) / (2.0 * hxi)
    e = np.zeros(x.shape[-1])
    e[i] = hx
    plus = _nested_diff(f, x + e, xi, rest, hx, hxi)
    minus = _nested_diff(f, x - e, xi, rest, hx, hxi)
    return (plus - minus) / (2.0 * hx)


def partial_derivative(f, x, xi, alpha, beta, *, rel_step: float = 1e-3, x_step: float = 1e-3):
    """d^alpha_xi d^beta_x f at (x, xi) by nested central differences (xi step relative to <xi>)."""
    x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
    dirs = [("xi", i) for i, a in enumerate(alpha) for _ in range(a)]
    dirs += [("x", i) for i, b in enumerate(beta) for _ in range(b)]
    hxi = rel_step * bracket(xi)
    return _nested_diff(f, x, xi, dirs, x_step, hxi)


def multi_indices(n: int, order: int):
    """All multi-indices of length n and total order exactly ``order``."""
    return [a for a in itertools.product(range(order + 1), repeat=n) if sum(a) == order]


# --------------------------------------------------------------------------- reports


@dataclass
class SeminormReport:
    entries: dict
    max_order: int
    samples: str
    tolerance: float
    violations: list
    note: str = LOWER_BOUND_NOTE

    @property
    def violated(self) -> bool:
        return bool(self.violations)

    def rows(self):
        for (a, b), v in sorted(self.entries.items()):
            yield {"alpha": "".join(map(str, a)), "beta": "".join(map(str, b)), "sup": v,
                   "violation": (a, b) in self.violations}


def default_xi_samples(grid: Grid, max_points: int = 4096, floor: float = 0.0) -> np.ndarray:
    """Deterministic frequency lattice: the grid's dual points, strided down to at most ``max_points``."""
    pts = grid.xi.reshape(-1, grid.n)
    pts = pts[_norm(pts) >= floor]
    stride = max(1, int(np.ceil(len(pts) / max_points)))
    return pts[::stride]


def default_x_samples(grid: Grid, count: int = 9) -> np.ndarray:
    """A small deterministic set of physical points spread over the middle half of the box."""
    axis = np.linspace(-grid.L / 2, grid.L / 2, count)
    if grid.n == 1:
        return axis[:, None]
    side = max(2, int(round(count ** (1.0 / grid.n))))
    axis = np.linspace(-grid.L / 2, grid.L / 2, side)
    return np.stack(np.meshgrid(*([axis] * grid.n), indexing="ij"), -1).reshape(-1, grid.n)


def seminorm_report(a: SymbolSpec, max_order: int, grid: Grid, x_samples=None, *, tol: float = 10.0,
                    x_orders: bool = True, xi_samples=None) -> SeminormReport:
    """Sampled suprema of <xi>^{-m + rho|alpha| - delta|beta|} |d^alpha_xi d^beta_x a|."""
    n = grid.n
    xs = default_x_samples(grid) if x_samples is None else np.asarray(x_samples, float).reshape(-1, n)
    xis = default_xi_samples(grid) if xi_samples is None else np.asarray(xi_samples, float).reshape(-1, n)
    if x_orders:
        require_x_derivatives(a, max_order)
    if x_orders and not a.x_independent and max_order > a.x_smoothness:
        raise CapabilityError(f"symbol declares x-derivatives only up to order {a.x_smoothness}")
    X = xs[:, None, :]
    XI = xis[None, :, :]
    m, rho, delta = a.order.m, a.order.rho, a.order.delta
    entries = {}
    for total in range(max_order + 1):
        for split in range(total + 1):
            bsum = total - split
            if bsum and not x_orders:
                continue
            for alpha in multi_indices(n, split):
                for beta in multi_indices(n, bsum):
                    if bsum and a.x_independent:
                        d = np.zeros(np.broadcast_shapes(X.shape, XI.shape)[:-1])
                    else:
                        d = partial_derivative(a.func, X, XI, alpha, beta)
                    w = bracket(XI) ** (-m + rho * split - delta * bsum)
                    entries[(alpha, beta)] = float(np.max(np.abs(d) * w))
    violations = [k for k, v in entries.items() if not np.isfinite(v) or v > tol]
    desc = f"{len(xs)} x-points x {len(xis)} xi-points (grid dual lattice, |xi| <= {float(_norm(xis).max()):.4g})"
    return SeminormReport(entries, max_order, desc, tol, violations)


def require_x_derivatives(a: SymbolSpec, order: int):
    if order > 0 and a.rough_in_x:
        raise CapabilityError("x-derivatives requested on a rough_in_x symbol")


@dataclass
class PhaseReport:
    min_det_mixed: Optional[float]
    hessian_rank_min: int
    hessian_rank_max: int
    det_n_minus_1_min: float
    rough_nondegeneracy_c: float
    phi_seminorms: dict
    samples: str
    note: str = LOWER_BOUND_NOTE


def unit_directions(n: int, count: int = 64) -> np.ndarray:
    """Deterministic directions on S^{n-1}: {+-1} (n=1), equiangular (n=2), Fibonacci lattice (n=3)."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], -1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z**2)
        th = np.pi * (1 + 5**0.5) * i
        return np.stack([r * np.cos(th), r * np.sin(th), z], -1)
    raise ConfigurationError("unit directions available for n <= 3")


def det_n_minus_1(M: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, float]:
    """Rank and det_{n-1}: product of the nonzero eigenvalues of the symmetric matrix M (0.0 when M = 0)."""
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    ev = np.linalg.eigvalsh(M)
    smax = np.max(np.abs(ev), axis=-1, keepdims=True)
    nz = (np.abs(ev) >= rtol * smax) & (smax > 0)
    rank = np.sum(nz, axis=-1)
    det = np.prod(np.where(nz, ev, 1.0), axis=-1)
    det = np.where(rank > 0, det, 0.0)
    return rank, det


def phase_report(phi: PhaseSpec, grid: Grid, x_samples=None, *, xi_samples=None, xi_floor: Optional[float] = None,
                 max_order: int = 3, pair_xi: int = 32) -> PhaseReport:
    """Non-degeneracy, frequency-Hessian rank / det_{n-1}, rough constant c and Phi^k seminorms."""
    n = grid.n
    floor = grid.dual_spacing if xi_floor is None else xi_floor
    xs = default_x_samples(grid) if x_samples is None else np.asarray(x_samples, float).reshape(-1, n)
    if xi_samples is None:
        xis = default_xi_samples(grid, max_points=512, floor=floor)
    else:
        xis = np.asarray(xi_samples, float).reshape(-1, n)
        r = _norm(xis)
        if np.any(r == 0) or (xi_floor is not None and np.any(r < xi_floor)):
            raise DomainError("xi sample inside the excluded ball around 0: homogeneous phases are singular there")
    X = xs[:, None, :]
    XI = xis[None, :, :]

    min_det = None
    if not phi.rough_in_x and phi.hess_mixed is not None:
        min_det = float(np.min(np.abs(np.linalg.det(phi.hess_mixed(X, XI)))))

    dirs = unit_directions(n)
    H = phi.hess_xixi(xs[:, None, :], dirs[None, :, :])
    rank, det = det_n_minus_1(np.asarray(H, float))
    det_min = float(np.min(np.abs(det)))

    c = np.inf
    sub = xis[:: max(1, len(xis) // pair_xi)]
    if len(xs) >= 2:
        G = phi.grad_xi(xs[:, None, :], sub[None, :, :])  # (k, j, n)
        i, j = np.triu_indices(len(xs), 1)
        dx = _norm(xs[i] - xs[j])
        dg = _norm(G[i] - G[j])  # (pairs, j)
        c = float(np.min(dg / dx[:, None]))

    semis = {}
    for total in range(phi.k, max_order + 1):
        for split in range(total + 1):
            bsum = total - split
            if bsum and phi.rough_in_x:
                continue
            for alpha in multi_indices(n, split):
                for beta in multi_indices(n, bsum):
                    d = partial_derivative(phi.func, X, XI, alpha, beta)
                    w = _norm(XI) ** (-1.0 + split)
                    semis[(alpha, beta)] = float(np.max(np.abs(d) * w))
    desc = f"{len(xs)} x-points x {len(xis)} xi-points with |xi| >= {floor:.4g}; {len(dirs)} unit directions"
    return PhaseReport(min_det, int(rank.min()), int(rank.max()), det_min, c, semis, desc)


# --------------------------------------------------------------------------- property checks


def homogeneity_error(phi: PhaseSpec, x, xi, s: float) -> float:
    """max |phi(x, s xi) - s phi(x, xi)| / (s |phi(x, xi)|) over the given points."""
    a = phi(x, s * np.asarray(xi, float))
    b = s * phi(x, xi)
    scale = np.maximum(np.abs(b), 1e-300)
    return float(np.max(np.abs(a - b) / scale))


def gradient_fd_error(phi: PhaseSpec, x, xi, h: float) -> float:
    """max |grad_xi phi - central difference with absolute step h|."""
    x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
    g = phi.grad_xi(x, xi)
    errs = []
    for i in range(xi.shape[-1]):
        e = np.zeros(xi.shape[-1])
        e[i] = h
        fd = (phi(x, xi + e) - phi(x, xi - e)) / (2 * h)
        errs.append(np.max(np.abs(fd - g[..., i])))
    return float(max(errs))
