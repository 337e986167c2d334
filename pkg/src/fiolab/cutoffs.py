"""Smooth cutoff functions shared by the partitions and the amplitude families."""

from __future__ import annotations

import numpy as np


def _psi(t):
    # exp(-1/t) for t > 0, else 0
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = _psi(t)
    b = _psi(1.0 - t)
    return a / (a + b)


def plateau(r):
    """Radial profile equal to 1 on r <= 1 and 0 on r >= 2."""
    return 1.0 - smooth_step(np.asarray(r, dtype=float) - 1.0)


def chi0(xi, radius: float = 2.0):
    """Low-frequency cutoff: 1 on |xi| <= radius/2, supported in |xi| <= radius.

    ``xi`` has shape ``(..., n)``.
    """
    r = np.sqrt(np.sum(np.asarray(xi, float) ** 2, axis=-1))
    return plateau(2.0 * r / radius)


def annulus(xi):
    """chi(xi) = chi0(xi) - chi0(2 xi), supported in 1/2 <= |xi| <= 2."""
    r = np.sqrt(np.sum(np.asarray(xi, float) ** 2, axis=-1))
    return plateau(r) - plateau(2.0 * r)


def bump(t):
    """exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside; bump(0) = 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out
