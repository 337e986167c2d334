"""Frequency decompositions: dyadic Littlewood-Paley pieces, angular cone frames and phase reduction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cutoffs
from .classes import OrderParams, PhaseSpec, SymbolSpec, custom_symbol, linear_phase, multi_indices, unit_directions
from .errors import ConfigurationError, UsageError
from .grid import Grid


def _norm(v):
    return np.sqrt(np.sum(np.asarray(v, float) ** 2, axis=-1))


# --------------------------------------------------------------------------- Littlewood-Paley


@dataclass(frozen=True)
class DyadicPartition:
    """chi_0 + sum_{j=1}^{J_max} chi_j with chi_j(xi) = chi(2^{-j} xi).

    With ``absorb_tail`` the last piece becomes ``1 - plateau(2^{1-J_max}|xi|)``
    so the pieces sum to one on the whole frequency grid.
    """

    grid: Grid
    J_max: int
    absorb_tail: bool = False

    @property
    def count(self) -> int:
        return self.J_max + 1

    def piece(self, j: int, xi) -> np.ndarray:
        if not 0 <= j <= self.J_max:
            raise UsageError(f"piece index {j} outside 0..{self.J_max}")
        r = _norm(xi)
        if j == 0:
            return np.ones_like(r) if (self.absorb_tail and self.J_max == 0) else cutoffs.plateau(r)
        outer = cutoffs.plateau(r / 2.0**j)
        if self.absorb_tail and j == self.J_max:
            outer = 1.0
        return outer - cutoffs.plateau(r / 2.0 ** (j - 1))

    def values(self, j: int) -> np.ndarray:
        """chi_j on the frequency grid (FFT order)."""
        return self.piece(j, self.grid.xi)

    def all_values(self) -> np.ndarray:
        return np.stack([self.values(j) for j in range(self.count)])

    def support(self, j: int) -> tuple[float, float]:
        if j == 0:
            return 0.0, (np.inf if (self.absorb_tail and self.J_max == 0) else 2.0)
        hi = np.inf if (self.absorb_tail and j == self.J_max) else 2.0 ** (j + 1)
        return 2.0 ** (j - 1), hi

    def exact_region(self) -> float:
        """Radius up to which the pieces sum to one."""
        return np.inf if self.absorb_tail else 2.0**self.J_max

    def sum_deviation(self) -> float:
        """max |sum_j chi_j - 1| over grid points inside the exactness region."""
        total = np.sum(self.all_values(), axis=0)
        mask = self.grid.abs_xi <= self.exact_region()
        return float(np.max(np.abs(total[mask] - 1.0)))


def littlewood_paley(grid: Grid, J_max: int, *, absorb_tail: bool = False) -> DyadicPartition:
    """Dyadic partition on ``grid``; the innermost edge 2^{J_max-1} of the last annulus must be resolved."""
    if J_max < 0:
        raise ConfigurationError("J_max must be >= 0")
    if J_max >= 1 and 2.0 ** (J_max - 1) > grid.nyquist:
        raise ConfigurationError(
            f"J_max={J_max} too large: annulus starting at {2.0 ** (J_max - 1):g} lies beyond Nyquist {grid.nyquist:.4g}")
    return DyadicPartition(grid, int(J_max), absorb_tail)


def max_dyadic_level(grid: Grid) -> int:
    """Largest J_max accepted by :func:`littlewood_paley` on ``grid``."""
    return int(np.floor(np.log2(grid.nyquist))) + 1


# --------------------------------------------------------------------------- cone frames


def _fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z**2)
    th = np.pi * (1.0 + 5.0**0.5) * i
    return np.stack([r * np.cos(th), r * np.sin(th), z], -1)


def _greedy_packing(candidates: np.ndarray, sep: float) -> np.ndarray:
    chosen = [candidates[0]]
    dmin = _norm(candidates - candidates[0])
    while True:
        k = int(np.argmax(dmin))
        if dmin[k] < sep:
            break
        chosen.append(candidates[k])
        dmin = np.minimum(dmin, _norm(candidates - candidates[k]))
    return np.array(chosen)


def _orthonormal_frame(v: np.ndarray) -> np.ndarray:
    """Columns: v, then an orthonormal basis of its complement."""
    n = len(v)
    if n == 1:
        return np.array([[np.sign(v[0]) or 1.0]])
    m = np.column_stack([v, np.eye(n)])
    q, _ = np.linalg.qr(m)
    q = q[:, :n]
    if q[:, 0] @ v < 0:
        q[:, 0] = -q[:, 0]
    return q


@dataclass(frozen=True)
class ConeFrame:
    h: float
    n: int
    centers: np.ndarray
    bump_radius: float
    method: str
    covering_radius: float
    min_separation: float
    frames: np.ndarray = field(repr=False)

    @property
    def J(self) -> int:
        return len(self.centers)

    @property
    def aperture(self) -> float:
        return float(np.sqrt(self.h))

    @property
    def cardinality_ratio(self) -> float:
        """J * h^{(n-1)/2}: bounded above and below independently of h."""
        return self.J * self.h ** ((self.n - 1) / 2.0)

    def _check(self, nu: int):
        if not 0 <= nu < self.J:
            raise UsageError(f"cone index {nu} outside 0..{self.J - 1}")

    def _bumps(self, xi) -> np.ndarray:
        xi = np.asarray(xi, float)
        r = _norm(xi)[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(r > 0, xi / np.where(r > 0, r, 1.0), 0.0)
        if self.n == 1:
            s = u[..., 0]
            return np.stack([(s > 0).astype(float), (s < 0).astype(float)], -1)
        d = _norm(u[..., None, :] - self.centers)  # (..., J)
        b = cutoffs.bump(d / self.bump_radius)
        return np.where(r > 0, b, 0.0)

    def psi_all(self, xi) -> np.ndarray:
        """All partition functions at ``xi``; shape ``(J,) + xi.shape[:-1]``, zero at xi = 0."""
        b = self._bumps(xi)
        tot = np.sum(b, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(tot > 0, b / np.where(tot > 0, tot, 1.0), 0.0)
        return np.moveaxis(out, -1, 0)

    def psi(self, nu: int, xi) -> np.ndarray:
        self._check(nu)
        return self.psi_all(xi)[nu]

    def local_frame(self, nu: int) -> np.ndarray:
        """Orthonormal basis (columns) whose first vector is the cone center."""
        self._check(nu)
        return self.frames[nu]

    def in_cone(self, nu: int, xi) -> np.ndarray:
        self._check(nu)
        xi = np.asarray(xi, float)
        r = _norm(xi)[..., None]
        u = xi / np.where(r > 0, r, 1.0)
        return (r[..., 0] > 0) & (_norm(u - self.centers[nu]) <= self.aperture * (1 + 1e-12))

    def to_dict(self) -> dict:
        return {"h": self.h, "n": self.n, "J": self.J, "centers": self.centers.tolist(), "method": self.method,
                "bump_radius": self.bump_radius, "covering_radius": self.covering_radius,
                "min_separation": self.min_separation}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sss_frame(h: float, n: int) -> ConeFrame:
    """Cone frame at scale h on S^{n-1}.

    n = 1: the two half-lines.  n = 2: equiangular centers, the largest count
    keeping chordal separation >= sqrt(h).  n = 3: greedy maximal packing with
    separation sqrt(h) over a Fibonacci lattice of candidate directions.
    Partition functions are bump(dist / sqrt(h)) normalised by their sum.
    """
    if not 0 < h <= 1:
        raise ConfigurationError(f"h must lie in (0, 1], got {h}")
    if n not in (1, 2, 3):
        raise ConfigurationError(f"n must be 1, 2 or 3, got {n}")
    s = np.sqrt(h)
    if n == 1:
        centers = np.array([[1.0], [-1.0]])
        return ConeFrame(h, 1, centers, s, "half-lines", 0.0, 2.0, np.array([[[1.0]], [[-1.0]]]))
    if n == 2:
        J = int(np.floor(np.pi / np.arcsin(s / 2.0) + 1e-12))
        th = 2 * np.pi * np.arange(J) / J
        centers = np.stack([np.cos(th), np.sin(th)], -1)
        cover = 2 * np.sin(np.pi / (2 * J))
        sep = 2 * np.sin(np.pi / J)
        method = "equiangular"
    else:
        cand = _fibonacci_sphere(max(4000, int(400 / h)))
        centers = _greedy_packing(cand, s)
        test = _fibonacci_sphere(4 * len(cand) + 1)
        cover = float(np.max(np.min(_norm(test[:, None, :] - centers[None]), axis=1))) if len(centers) < 4000 else s
        d = _norm(centers[:, None, :] - centers[None])
        sep = float(np.min(d + 3 * np.eye(len(centers))))
        method = "greedy-fibonacci"
    frames = np.stack([_orthonormal_frame(c) for c in centers])
    # the bump support must reach every direction; it only exceeds sqrt(h) if the lattice covering does
    radius = max(s, 1.02 * cover)
    return ConeFrame(float(h), n, centers, float(radius), method, float(cover), float(sep), frames)


def covering_check(frame: ConeFrame, samples: int = 10_000) -> float:
    """Largest distance from a sampled unit direction to its nearest center."""
    if frame.n == 1:
        return 0.0
    dirs = unit_directions(2, samples) if frame.n == 2 else _fibonacci_sphere(samples)
    return float(np.max(np.min(_norm(dirs[:, None, :] - frame.centers[None]), axis=1)))


# --------------------------------------------------------------------------- SSS amplitudes


def sss_symbol(a: SymbolSpec, phi: PhaseSpec, frame: ConeFrame, nu: int, h: Optional[float] = None,
               *, annulus=cutoffs.annulus) -> SymbolSpec:
    """b^nu(x, xi, h) = exp((i/h) <grad phi(x, xi) - grad phi(x, xi^nu), xi>) chi(xi) psi^nu(xi) a(x, xi/h)."""
    h = frame.h if h is None else h
    frame._check(nu)
    center = frame.centers[nu]

    def rule(x, xi):
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        g = phi.grad_xi(x, xi) - phi.grad_xi(x, np.broadcast_to(center, xi.shape))
        pivot = np.exp(1j / h * np.sum(g * xi, axis=-1))
        return pivot * annulus(xi) * frame.psi(nu, xi) * a.func(x, xi / h)

    return custom_symbol(rule, OrderParams(a.order.m, a.order.rho, a.order.delta), rough_in_x=True,
                         x_independent=a.x_independent and phi.x_independent_part,
                         nu=nu, h=h, base=a.family)


@dataclass
class SssDiagnostic:
    nu: int
    h: float
    sups: dict
    normalized: dict

    @property
    def max_constant(self) -> float:
        return max(self.normalized.values())


def cone_samples(frame: ConeFrame, nu: int, radial=(0.55, 0.8, 1.0, 1.4, 1.9), angular: int = 21) -> np.ndarray:
    """Points of the annulus 1/2 < |xi| < 2 inside cone ``nu``."""
    c = frame.centers[nu]
    if frame.n == 1:
        return np.array(radial)[:, None] * c
    q = frame.local_frame(nu)
    s = frame.aperture
    ts = np.linspace(-s, s, angular)
    if frame.n == 2:
        dirs = [c + t * q[:, 1] for t in ts]
    else:
        dirs = [c + t1 * q[:, 1] + t2 * q[:, 2] for t1 in ts for t2 in ts if t1 * t1 + t2 * t2 <= s * s]
    dirs = np.array(dirs)
    dirs /= _norm(dirs)[:, None]
    return (np.array(radial)[:, None, None] * dirs[None]).reshape(-1, frame.n)


def sss_symbol_diagnostic(b: SymbolSpec, frame: ConeFrame, nu: int, x_samples, *, order: int = 1,
                          step: float = 1e-4, m: Optional[float] = None, rho: float = 1.0) -> SssDiagnostic:
    """Sampled sup |d^alpha b^nu| in the nu-adapted frame against h^{-m - |alpha|(1-rho) - |alpha'|/2}.

    ``alpha[0]`` counts derivatives along the cone center, the rest the orthogonal directions.
    """
    m = b.order.m if m is None else m
    h = frame.h
    q = frame.local_frame(nu)
    xs = np.asarray(x_samples, float).reshape(-1, frame.n)
    xis = cone_samples(frame, nu)
    X = xs[:, None, :]
    XI = xis[None, :, :]
    sups, normalized = {}, {}
    for k in range(order + 1):
        for alpha in multi_indices(frame.n, k):
            dirs = [q[:, i] for i, c in enumerate(alpha) for _ in range(c)]
            d = _directional(b.func, X, XI, dirs, step)
            val = float(np.max(np.abs(d)))
            expo = -m - k * (1 - rho) - (k - alpha[0]) / 2.0
            sups[alpha] = val
            normalized[alpha] = val / h**expo
    return SssDiagnostic(nu, h, sups, normalized)


def _directional(f, x, xi, dirs, step):
    if not dirs:
        return f(x, xi)
    e, rest = dirs[0], dirs[1:]
    return (_directional(f, x, xi + step * e, rest, step) - _directional(f, x, xi - step * e, rest, step)) / (2 * step)


def psi_derivative_constants(frame: ConeFrame, order: int = 2, step: float = 1e-5) -> dict:
    """Measured C_alpha = sup |d^alpha psi^nu| h^{|alpha|/2} over unit directions, per frame-adapted alpha."""
    out = {}
    for k in range(1, order + 1):
        for alpha in multi_indices(frame.n, k):
            best = 0.0
            for nu in range(frame.J):
                q = frame.local_frame(nu)
                pts = cone_samples(frame, nu, radial=(1.0,), angular=41)
                dirs = [q[:, i] for i, c in enumerate(alpha) for _ in range(c)]
                d = _directional(lambda x, xi, nu=nu: frame.psi(nu, xi), None, pts, dirs, step * np.sqrt(frame.h))
                best = max(best, float(np.max(np.abs(d))))
            out[alpha] = best * frame.h ** (k / 2.0)
    return out


# --------------------------------------------------------------------------- phase reduction


@dataclass(frozen=True)
class ReducedPhase:
    """phi = theta_l + <grad_xi phi(x, zeta_l), xi> on the support of Xi_l, for each covering piece l."""

    phi: PhaseSpec
    centers: np.ndarray
    support_radius: float
    diameter: float

    @property
    def M(self) -> int:
        return len(self.centers)

    def pivot(self, l: int, x) -> np.ndarray:
        x = np.asarray(x, float)
        return self.phi.grad_xi(x, np.broadcast_to(self.centers[l], x.shape))

    def theta(self, l: int, x, xi) -> np.ndarray:
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        return self.phi(x, xi) - np.sum(self.pivot(l, x) * xi, axis=-1)

    def theta_grad(self, l: int, x, xi) -> np.ndarray:
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        return self.phi.grad_xi(x, xi) - self.pivot(l, x)

    def _dist(self, xi):
        xi = np.asarray(xi, float)
        r = _norm(xi)[..., None]
        u = xi / np.where(r > 0, r, 1.0)
        return _norm(u[..., None, :] - self.centers)

    def cutoffs(self, xi) -> np.ndarray:
        """Xi_l(xi), shape ``(M,) + xi.shape[:-1]``; homogeneous of degree 0, summing to one off the origin."""
        if self.centers.shape[1] == 1:
            s = np.asarray(xi, float)[..., 0]
            return np.stack([(s > 0).astype(float), (s < 0).astype(float)])
        b = cutoffs.bump(self._dist(xi) / self.support_radius)
        tot = np.sum(b, axis=-1, keepdims=True)
        return np.moveaxis(np.where(tot > 0, b / np.where(tot > 0, tot, 1.0), 0.0), -1, 0)

    def in_support(self, l: int, xi) -> np.ndarray:
        return self._dist(xi)[..., l] < self.support_radius

    def reconstruction_error(self, x_samples, xi_samples) -> float:
        X = np.asarray(x_samples, float)[:, None, :]
        XI = np.asarray(xi_samples, float)[None, :, :]
        worst = 0.0
        for l in range(self.M):
            mask = np.broadcast_to(self.in_support(l, XI), np.broadcast_shapes(X.shape, XI.shape)[:-1])
            if not mask.any():
                continue
            lhs = self.phi(X, XI)
            rhs = self.theta(l, X, XI) + np.sum(self.pivot(l, X) * XI, axis=-1)
            scale = np.maximum(1.0, np.abs(lhs))
            worst = max(worst, float(np.max((np.abs(lhs - rhs) / scale)[mask])))
        return worst

    def derivative_constant(self, x_samples, xi_samples) -> float:
        """max over pieces of sup_{supp Xi_l} |d_xi theta_l| / d."""
        X = np.asarray(x_samples, float)[:, None, :]
        XI = np.asarray(xi_samples, float)[None, :, :]
        worst = 0.0
        for l in range(self.M):
            mask = np.broadcast_to(self.in_support(l, XI), np.broadcast_shapes(X.shape, XI.shape)[:-1])
            if not mask.any():
                continue
            g = np.max(np.abs(self.theta_grad(l, X, XI)), axis=-1)
            worst = max(worst, float(np.max(g[mask])))
        return worst / self.diameter if self.diameter > 0 else worst


def phase_reduce(phi: PhaseSpec, M: int, n: Optional[int] = None, *, diameter: float = 0.5) -> ReducedPhase:
    """Cover the sphere by M pieces of chordal diameter <= ``diameter`` centred at zeta_l.

    n = 2: equiangular centers, each piece an arc of half-angle 1.5 pi / M
    (so neighbouring pieces overlap).  n = 3: Fibonacci centers with support
    radius 1.5x the measured covering radius.  n = 1: the two half-lines.
    """
    if not phi.homogeneous_degree_1:
        raise ConfigurationError("phase reduction needs a phase homogeneous of degree 1")
    n = phi.params.get("n") if n is None else n
    if n is None:
        raise ConfigurationError("dimension not recorded on the phase; pass n")
    if n == 1:
        return ReducedPhase(phi, np.array([[1.0], [-1.0]]), 1.0, 0.0)
    if n == 2:
        if M < 3:
            raise ConfigurationError("need at least 3 pieces on the circle")
        th = 2 * np.pi * np.arange(M) / M
        centers = np.stack([np.cos(th), np.sin(th)], -1)
        half = 1.5 * np.pi / M
        radius = 2 * np.sin(half / 2)
        d = 2 * np.sin(half)
    elif n == 3:
        centers = _fibonacci_sphere(M)
        test = _fibonacci_sphere(20 * M + 1)
        cover = float(np.max(np.min(_norm(test[:, None, :] - centers[None]), axis=1)))
        radius = 1.5 * cover
        d = 2 * radius
    else:
        raise ConfigurationError("phase reduction implemented for n <= 3")
    if d > diameter:
        raise ConfigurationError(f"M={M} pieces give diameter {d:.4f} > requested {diameter}")
    return ReducedPhase(phi, centers, float(radius), float(d))


def min_pieces(n: int, diameter: float = 0.5) -> int:
    """Smallest M accepted by :func:`phase_reduce` for the given dimension."""
    if n == 1:
        return 2
    if n == 2:
        return int(np.ceil(1.5 * np.pi / np.arcsin(diameter / 2)))
    M = 4
    while True:
        try:
            phase_reduce(linear_phase(3), M, 3, diameter=diameter)
            return M
        except ConfigurationError:
            M = int(M * 1.25) + 1
