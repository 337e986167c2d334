"""Uniform periodic grids, sampled fields and the continuous-normalised FFT pair.

The continuous Fourier transform is taken as

    u_hat(xi) = int exp(-i <x, xi>) u(x) dx,
    u(x) = (2 pi)^{-n} int exp(i <x, xi>) u_hat(xi) dxi,

and both integrals are discretised by the trapezoidal rule on the grid
[-L, L)^n and its DFT dual.  Frequency-side arrays are stored in FFT order
(the order of ``numpy.fft.fftfreq``), never shifted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, UsageError


def is_power_of_two(N: int) -> bool:
    return N > 0 and (N & (N - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Grid covering [-L, L)^n with N points per axis.

    ``Grid`` itself only requires an even point count; :func:`make_grid`
    enforces the power-of-two rule used everywhere except refinement
    sweeps that need intermediate sizes.
    """

    dim: int
    points_per_axis: int
    half_width: float

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"dim must be >= 1, got {self.dim}")
        if self.points_per_axis < 2 or self.points_per_axis % 2:
            raise ConfigurationError(f"points_per_axis must be even and >= 2, got {self.points_per_axis}")
        if not self.half_width > 0:
            raise ConfigurationError(f"half_width must be positive, got {self.half_width}")

    # short aliases used throughout the numerics
    @property
    def n(self) -> int:
        return self.dim

    @property
    def N(self) -> int:
        return self.points_per_axis

    @property
    def L(self) -> float:
        return self.half_width

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def dual_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return np.pi * self.points_per_axis / (2.0 * self.half_width)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def dual_cell_volume(self) -> float:
        return self.dual_spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @cached_property
    def x_axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points_per_axis)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    @cached_property
    def x(self) -> np.ndarray:
        """Physical coordinates, shape ``shape + (n,)``."""
        return _mesh(self.x_axis, self.dim)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency coordinates in FFT order, shape ``shape + (n,)``."""
        return _mesh(self.xi_axis, self.dim)

    @cached_property
    def abs_x(self) -> np.ndarray:
        return np.sqrt(np.sum(self.x**2, axis=-1))

    @cached_property
    def abs_xi(self) -> np.ndarray:
        return np.sqrt(np.sum(self.xi**2, axis=-1))

    @cached_property
    def _shift(self) -> np.ndarray:
        # exp(i L sum_k xi_k): accounts for the grid starting at -L instead of 0
        return np.exp(1j * self.half_width * np.sum(self.xi, axis=-1))

    def origin_index(self) -> tuple[int, ...]:
        return (self.points_per_axis // 2,) * self.dim

    def refined(self, factor: int) -> "Grid":
        """Same box, ``factor`` times more points per axis."""
        return Grid(self.dim, self.points_per_axis * factor, self.half_width)

    def padded(self, factor: int) -> "Grid":
        """Same spacing, box enlarged ``factor`` times (finer frequency quadrature)."""
        return Grid(self.dim, self.points_per_axis * factor, self.half_width * factor)

    def describe(self) -> dict:
        return {"n": self.dim, "N": self.points_per_axis, "L": self.half_width}


def _mesh(axis: np.ndarray, n: int) -> np.ndarray:
    return np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)


def make_grid(n: int, N: int, L: float, *, require_pow2: bool = True) -> Grid:
    """Build a :class:`Grid`; N must be a power of two >= 8 unless ``require_pow2`` is off."""
    if require_pow2 and (not is_power_of_two(int(N)) or N < 8):
        raise ConfigurationError(f"N must be a power of two >= 8, got {N}")
    return Grid(int(n), int(N), float(L))


class Side(str, enum.Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


class Direction(str, enum.Enum):
    FORWARD = "forward"   # physical -> frequency
    INVERSE = "inverse"   # frequency -> physical


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: Grid
    values: np.ndarray
    side: Side = Side.PHYSICAL

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise UsageError(f"values has {vals.size} entries, grid needs {self.grid.size}")
        vals = vals.reshape(self.grid.shape).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "SampledField":
        """Sample ``f`` (called with coordinates of shape ``shape + (n,)``) on the physical grid."""
        return cls(grid, f(grid.x), Side.PHYSICAL)

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values, self.side)

    def __add__(self, other: "SampledField") -> "SampledField":
        _check_same(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _check_same(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "SampledField":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        vol = self.grid.cell_volume if self.side is Side.PHYSICAL else self.grid.dual_cell_volume
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * vol))


def _check_same(a: SampledField, b: SampledField):
    if a.grid != b.grid or a.side is not b.side:
        raise UsageError("fields live on different grids or sides")


def forward_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    axes = tuple(range(grid.dim))
    return grid.cell_volume * grid._shift * sfft.fftn(values, axes=axes)


def inverse_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    axes = tuple(range(grid.dim))
    return sfft.ifftn(values * np.conj(grid._shift), axes=axes) / grid.cell_volume


def transform(u: SampledField, direction: Direction | str) -> SampledField:
    """Continuous-normalised FFT; ``inverse(forward(u)) == u`` to rounding."""
    direction = Direction(direction)
    if direction is Direction.FORWARD:
        if u.side is not Side.PHYSICAL:
            raise UsageError("forward transform needs a physical-side field")
        return SampledField(u.grid, forward_values(u.grid, u.values), Side.FREQUENCY)
    if u.side is not Side.FREQUENCY:
        raise UsageError("inverse transform needs a frequency-side field")
    return SampledField(u.grid, inverse_values(u.grid, u.values), Side.PHYSICAL)


def gaussian(grid: Grid, width: float = 1.0, center=None, k0=None) -> SampledField:
    """exp(-|x-c|^2 / (2 width^2)) * exp(i <k0, x>) on ``grid``."""
    c = np.zeros(grid.dim) if center is None else np.broadcast_to(np.asarray(center, float), (grid.dim,))
    x = grid.x - c
    vals = np.exp(-np.sum(x**2, axis=-1) / (2.0 * width**2)).astype(complex)
    if k0 is not None:
        k = np.broadcast_to(np.asarray(k0, float), (grid.dim,))
        vals = vals * np.exp(1j * (grid.x @ k))
    return SampledField(grid, vals, Side.PHYSICAL)
