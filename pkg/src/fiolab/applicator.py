"""Applying Fourier integral operators to sampled fields.

The dense quadrature

    T u(x) = (2 pi)^{-n} sum_xi exp(i phi(x, xi)) a(x, xi) u_hat(xi) dxi

is the reference path (cost O(N^{2n})).  With ``oversample = q`` the
transform of u is taken on a box q times larger with the same spacing, which
refines the frequency quadrature and removes periodisation wrap for phases
that move mass around (e.g. the dilation x -> 2x).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cutoffs
from .classes import PhaseSpec, SymbolSpec
from .decompose import ConeFrame, DyadicPartition
from .errors import ConfigurationError, UsageError
from .grid import Grid, SampledField, Side, forward_values, inverse_values

CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class FioOperator:
    a: SymbolSpec
    phi: PhaseSpec
    grid: Grid
    low_cut: float = 2.0
    oversample: int = 1
    cache_matrix: bool = True

    def __post_init__(self):
        if not self.low_cut > 0:
            raise ConfigurationError("low_cut must be positive")
        if self.oversample < 1:
            raise ConfigurationError("oversample must be >= 1")

    @property
    def quad_grid(self) -> Grid:
        return self.grid.padded(self.oversample) if self.oversample > 1 else self.grid

    @property
    def quadrature_weights(self) -> np.ndarray:
        """Equal trapezoid weights dxi^n on the quadrature frequency grid."""
        q = self.quad_grid
        return np.full(q.size, q.dual_cell_volume)

    @property
    def offset(self) -> int:
        return (self.quad_grid.N - self.grid.N) // 2

    def embed(self, values: np.ndarray) -> np.ndarray:
        """Zero-pad physical samples into the quadrature box."""
        if self.oversample == 1:
            return values
        out = np.zeros(self.quad_grid.shape, complex)
        sl = tuple(slice(self.offset, self.offset + self.grid.N) for _ in range(self.grid.n))
        out[sl] = values
        return out

    def crop(self, values: np.ndarray) -> np.ndarray:
        if self.oversample == 1:
            return values
        sl = tuple(slice(self.offset, self.offset + self.grid.N) for _ in range(self.grid.n))
        return values[sl]

    def _xi_flat(self) -> np.ndarray:
        return self.quad_grid.xi.reshape(-1, self.grid.n)

    def kernel_block(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """exp(i phi(x, xi)) a(x, xi) for x of shape (r, n) against xi of shape (k, n)."""
        X = x[:, None, :]
        XI = xi[None, :, :]
        ph = self.phi(X, XI)
        if self.phi.homogeneous_degree_1:
            # homogeneous phases vanish at xi = 0 (limit value); avoid evaluating the singular rule there
            ph = np.where(np.sum(XI * XI, axis=-1) == 0, 0.0, ph)
        return np.exp(1j * ph) * self.a(X, XI)

    def _chunks(self, k: int):
        rows = self.grid.size
        step = max(1, CHUNK_ENTRIES // max(k, 1))
        for s in range(0, rows, step):
            yield slice(s, min(rows, s + step))

    def matrix(self) -> np.ndarray:
        """Dense matrix E[x, xi] (cached when small)."""
        cached = getattr(self, "_matrix", None)
        if cached is not None:
            return cached
        x = self.grid.x.reshape(-1, self.grid.n)
        E = self.kernel_block(x, self._xi_flat())
        if self.cache_matrix and E.size <= CHUNK_ENTRIES:
            object.__setattr__(self, "_matrix", E)
        return E

    def _small(self) -> bool:
        return self.grid.size * self.quad_grid.size <= CHUNK_ENTRIES

    def spectrum(self, u: SampledField) -> np.ndarray:
        return forward_values(self.quad_grid, self.embed(u.values)).reshape(-1)

    def apply_spectrum(self, uhat: np.ndarray, columns: Optional[np.ndarray] = None) -> np.ndarray:
        """Quadrature sum for a given (flattened) spectrum, optionally restricted to some columns."""
        q = self.quad_grid
        coef = q.dual_cell_volume / (2 * np.pi) ** q.n
        xi = self._xi_flat()
        if columns is not None:
            xi, uhat = xi[columns], uhat[columns]
        if self._small() and columns is None:
            out = self.matrix() @ uhat
        else:
            x = self.grid.x.reshape(-1, self.grid.n)
            out = np.empty(self.grid.size, complex)
            for sl in self._chunks(len(xi)):
                out[sl] = self.kernel_block(x[sl], xi) @ uhat
        return coef * out


def _check_field(op: FioOperator, u: SampledField):
    if u.grid != op.grid:
        raise UsageError("field and operator live on different grids")
    if u.side is not Side.PHYSICAL:
        raise UsageError("operator input must be a physical-side field")


def apply_fio(op: FioOperator, u: SampledField) -> SampledField:
    """Dense oscillatory quadrature; the xi = 0 bin uses the phase's limit value (part of the chi_0 branch)."""
    _check_field(op, u)
    out = op.apply_spectrum(op.spectrum(u))
    return SampledField(op.grid, out.reshape(op.grid.shape), Side.PHYSICAL)


def adjoint(op: FioOperator, v: SampledField) -> SampledField:
    """T* v for the inner product sum_x f conj(g) dx; satisfies <Tu, v> = <u, T* v>."""
    _check_field(op, v)
    q = op.quad_grid
    x = op.grid.x.reshape(-1, op.grid.n)
    xi = op._xi_flat()
    vv = v.values.reshape(-1) * op.grid.cell_volume
    if op._small():
        g = op.matrix().conj().T @ vv
    else:
        g = np.zeros(q.size, complex)
        for sl in op._chunks(q.size):
            g += op.kernel_block(x[sl], xi).conj().T @ vv[sl]
    y = inverse_values(q, g.reshape(q.shape))
    return SampledField(op.grid, op.crop(y), Side.PHYSICAL)


def inner(u: SampledField, v: SampledField) -> complex:
    return complex(np.sum(u.values * np.conj(v.values)) * u.grid.cell_volume)


def apply_multiplier(sigma: Callable[[np.ndarray], np.ndarray] | np.ndarray, u: SampledField,
                     oversample: int = 1) -> SampledField:
    """Inverse transform of sigma(xi) u_hat(xi); sigma is a rule of xi (shape (..., n)) or an array in FFT order.

    ``oversample > 1`` zero-pads to a larger box first (sigma must then be a rule).
    """
    if u.side is not Side.PHYSICAL:
        raise UsageError("multiplier input must be a physical-side field")
    g = u.grid
    q = g.padded(oversample) if oversample > 1 else g
    if not callable(sigma) and oversample > 1:
        raise UsageError("an oversampled multiplier needs a rule, not an array")
    s = sigma(q.xi) if callable(sigma) else np.asarray(sigma)
    s = np.broadcast_to(s, q.shape)
    if not np.all(np.isfinite(s)):
        raise UsageError("multiplier is not finite on the frequency grid")
    if oversample == 1:
        return SampledField(g, inverse_values(g, s * forward_values(g, u.values)), Side.PHYSICAL)
    off = (q.N - g.N) // 2
    sl = tuple(slice(off, off + g.N) for _ in range(g.n))
    big = np.zeros(q.shape, complex)
    big[sl] = u.values
    out = inverse_values(q, s * forward_values(q, big))
    return SampledField(g, out[sl], Side.PHYSICAL)


def multiplier_of(op: FioOperator) -> Callable[[np.ndarray], np.ndarray]:
    """sigma(xi) = exp(i (phi(0, xi))) a(0, xi) for x-independent amplitudes and phases <x, xi> + psi(xi)."""
    if not (op.a.x_independent and op.phi.x_independent_part):
        raise UsageError("operator is not a Fourier multiplier")
    n = op.grid.n

    def sigma(xi):
        zero = np.zeros(n)
        ph = op.phi(zero, xi)
        if op.phi.homogeneous_degree_1:
            ph = np.where(np.sum(xi * xi, axis=-1) == 0, 0.0, ph)
        return np.exp(1j * ph) * op.a(zero, xi)

    return sigma


def kernel_row(op: FioOperator, x, y_points) -> np.ndarray:
    """K(x, y) = (2 pi)^{-n} sum_xi exp(i(phi(x, xi) - <y, xi>)) a(x, xi) dxi on the quadrature grid."""
    n = op.grid.n
    x = np.asarray(x, float).reshape(1, n)
    y = np.asarray(y_points, float).reshape(-1, n)
    q = op.quad_grid
    xi = op._xi_flat()
    row = op.kernel_block(x, xi)[0] * (q.dual_cell_volume / (2 * np.pi) ** n)
    out = np.empty(len(y), complex)
    step = max(1, CHUNK_ENTRIES // len(xi))
    for s in range(0, len(y), step):
        out[s:s + step] = np.exp(-1j * (y[s:s + step] @ xi.T)) @ row
    return out


@dataclass
class PieceDiagnostics:
    pieces: dict = field(default_factory=dict)
    level_norms: dict = field(default_factory=dict)
    wall_time: dict = field(default_factory=dict)
    exponent: float = float("nan")
    sum_error: float = float("nan")  # max |sum of piece weights - 1| on the frequency grid

    def rows(self):
        for key in sorted(self.pieces):
            j, nu = key
            yield {"j": j, "nu": nu, "norm": self.pieces[key], "seconds": self.wall_time[key]}


def apply_decomposed(op: FioOperator, u: SampledField, dp: DyadicPartition,
                     frames: Optional[dict[int, ConeFrame]] = None, *, return_pieces: bool = False):
    """Sum over chi_0 and every (j, nu) piece a chi_j psi^nu, each applied by the dense quadrature.

    ``frames[j]`` must have scale h = 2^{-j}; levels without a frame are applied whole.
    Returns the summed field and the per-piece diagnostics.
    """
    _check_field(op, u)
    frames = frames or {}
    for j, fr in frames.items():
        if not np.isclose(fr.h, 2.0 ** (-j), rtol=1e-12):
            raise ConfigurationError(f"frame for level {j} has h={fr.h}, expected {2.0 ** (-j)}")
        if fr.n != op.grid.n:
            raise ConfigurationError("frame dimension differs from the grid")
    q = op.quad_grid
    if dp.grid not in (op.grid, q):
        raise ConfigurationError("partition built on an unrelated grid")
    xi = op._xi_flat()
    uhat = op.spectrum(u)

    part = DyadicPartition(q, dp.J_max, dp.absorb_tail)
    weights = {}
    for j in range(part.count):
        chi = part.piece(j, xi)
        if j in frames and j > 0:
            psi = frames[j].psi_all(xi)
            for nu in range(frames[j].J):
                weights[(j, nu)] = chi * psi[nu]
        else:
            weights[(j, -1)] = chi
    total_w = sum(weights.values())
    cover = float(np.max(np.abs(total_w - 1.0)))
    if cover > 1e-12:
        raise ConfigurationError(f"pieces do not cover the frequency grid (deviation {cover:.2e}); "
                                 "use absorb_tail or a larger J_max")

    coef = q.dual_cell_volume / (2 * np.pi) ** q.n
    x = op.grid.x.reshape(-1, op.grid.n)
    cols = {k: np.flatnonzero(w) for k, w in weights.items()}
    outs = {k: np.zeros(op.grid.size, complex) for k in weights}
    times = dict.fromkeys(weights, 0.0)
    for sl in op._chunks(len(xi)):
        E = op.kernel_block(x[sl], xi)
        for k, w in weights.items():
            t0 = time.perf_counter()
            c = cols[k]
            if len(c):
                outs[k][sl] = E[:, c] @ (w[c] * uhat[c])
            times[k] += time.perf_counter() - t0
    diag = PieceDiagnostics()
    total = np.zeros(op.grid.size, complex)
    for k in sorted(outs):
        outs[k] *= coef
        total += outs[k]
        diag.pieces[k] = float(np.linalg.norm(outs[k]) * np.sqrt(op.grid.cell_volume))
        diag.wall_time[k] = times[k]
    for j in sorted({k[0] for k in outs}):
        lvl = sum(outs[k] for k in outs if k[0] == j)
        diag.level_norms[j] = float(np.linalg.norm(lvl) * np.sqrt(op.grid.cell_volume))
    js = np.array([j for j in sorted(diag.level_norms) if j >= 1 and diag.level_norms[j] > 0])
    if len(js) >= 2:
        diag.exponent = float(np.polyfit(js, np.log2([diag.level_norms[j] for j in js]), 1)[0])
    diag.sum_error = cover
    field_out = SampledField(op.grid, total.reshape(op.grid.shape), Side.PHYSICAL)
    if return_pieces:
        return field_out, diag, {k: v.reshape(op.grid.shape) for k, v in outs.items()}
    return field_out, diag


def band_limit(u: SampledField, radius: float) -> SampledField:
    """Smoothly restrict u_hat to |xi| <= radius (for probes that must avoid aliasing)."""
    return apply_multiplier(lambda xi: cutoffs.chi0(xi, radius), u)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear operator on fields of ``grid`` given by its action and adjoint."""

    grid: Grid
    forward: Callable[[SampledField], SampledField]
    backward: Callable[[SampledField], SampledField]
    label: str = "map"

    def __call__(self, u: SampledField) -> SampledField:
        return self.forward(u)


def as_map(op) -> LinearMap:
    """Wrap a FioOperator (dense quadrature) or pass a LinearMap through."""
    if isinstance(op, LinearMap):
        return op
    if isinstance(op, FioOperator):
        return LinearMap(op.grid, lambda u: apply_fio(op, u), lambda v: adjoint(op, v), "fio")
    raise UsageError(f"cannot use {type(op).__name__} as an operator")


def multiplier_map(grid: Grid, sigma: Callable[[np.ndarray], np.ndarray] | np.ndarray,
                   label: str = "multiplier") -> LinearMap:
    """Fourier multiplier with adjoint conj(sigma)."""
    s = np.broadcast_to(sigma(grid.xi) if callable(sigma) else np.asarray(sigma), grid.shape)
    return LinearMap(grid, lambda u: apply_multiplier(s, u), lambda v: apply_multiplier(np.conj(s), v), label)


def wave_multiplier(m: float, t: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """exp(i t |xi|) <xi>^m."""
    def sigma(xi):
        r2 = np.sum(np.asarray(xi, float) ** 2, axis=-1)
        return np.exp(1j * t * np.sqrt(r2)) * (1.0 + r2) ** (m / 2.0)

    return sigma
