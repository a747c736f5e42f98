"""Spectral operators: Leray projection, Stokes operator, advection, damping, norms.

All public entry points take and return `SpectralVelocity`; the `*_kernel`
functions work on raw coefficient arrays and are shared with the time
integrators, which avoid per-step object construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MeanViolationError, ValidationError
from .fields import SpectralVelocity
from .grid import DAMPING_PAD, QUADRATIC_PAD, TorusGrid

#: Divergence below ``SNAP_TOL * max(1, |u_k|)`` is treated as exact zero, so
#: projecting twice returns the first result bit-for-bit.
SNAP_TOL = 0.5e-12


# ---------------------------------------------------------------------------
# Leray (Helmholtz-Hodge) projection
# ---------------------------------------------------------------------------

def leray_kernel(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Per-mode projection I - k k^T / |k|^2 onto divergence-free fields.

    Modes whose divergence already sits below round-off (relative to the
    per-mode amplitude, with an absolute floor of one) are left untouched;
    that makes the projection exactly idempotent instead of polishing noise.
    """
    div = np.einsum("i...,i...->...", grid.k, coeffs)
    amp = np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=0))
    kmag = np.sqrt(grid.k2)
    apply = np.abs(div) > SNAP_TOL * np.maximum(1.0, amp) * np.maximum(1.0, kmag)
    apply &= grid.k2 > 0
    if not np.any(apply):
        return coeffs
    out = np.array(coeffs)
    ratio = div[apply] / grid.k2[apply]
    for i in range(grid.dim):
        out[i, apply] -= grid.k[i, apply] * ratio
    return out


def leray_project(grid: TorusGrid, raw) -> SpectralVelocity:
    """Project raw coefficients onto mean-free, divergence-free fields.

    A nonzero k = 0 coefficient is rejected: the projection removes gradient
    parts, it does not silently discard a mean flow.
    """
    if isinstance(raw, SpectralVelocity):
        grid = raw.grid
        raw = raw.coeffs
    coeffs = np.asarray(raw, dtype=complex)
    if coeffs.shape != (grid.dim,) + grid.shape:
        raise ValidationError(
            f"raw coefficient shape {coeffs.shape} does not match the grid"
        )
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    origin = (slice(None),) + (0,) * grid.dim
    if np.max(np.abs(coeffs[origin])) > 1.0e-12 * scale:
        raise MeanViolationError("raw coefficients carry a nonzero mean mode")
    work = np.array(coeffs)
    work[:, ~grid.mask] = 0.0
    return SpectralVelocity(grid, leray_kernel(grid, work))


# ---------------------------------------------------------------------------
# Stokes operator
# ---------------------------------------------------------------------------

def stokes_kernel(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    return coeffs * (grid.lambda1 * grid.k2)


def stokes_apply(u: SpectralVelocity) -> SpectralVelocity:
    """A u = -P(Laplacian u): diagonal multiplier (4 pi^2 / L^2) |k|^2."""
    return SpectralVelocity(u.grid, stokes_kernel(u.grid, u.coeffs))


# ---------------------------------------------------------------------------
# Advection B(u, v) = P (u . grad) v
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _half_wavevectors(dim: int, m: int) -> np.ndarray:
    """Integer mode numbers on the rfft half-lattice of size m."""
    full = np.fft.fftfreq(m, d=1.0 / m)
    half = np.arange(m // 2 + 1, dtype=float)
    k = np.stack(np.meshgrid(*([full] * (dim - 1) + [half]), indexing="ij"))
    k.flags.writeable = False
    return k


def bilinear_kernel(grid: TorusGrid, u_coeffs, v_coeffs=None):
    """Dealiased pseudo-spectral (u . grad) v, projected.

    Returns (coeffs, vmax) where vmax is the max pointwise |u| on the padded
    lattice, reused by the advective CFL guard.
    """
    factor = max(grid.dealias_factor, QUADRATIC_PAD)
    m = grid.padded_size(factor)
    axes = tuple(range(-grid.dim, 0))
    scale = float(m**grid.dim)
    shape = (m,) * grid.dim
    u_half = grid.pad_half(u_coeffs, m)
    u_phys = np.fft.irfftn(u_half, s=shape, axes=axes) * scale
    v_half = u_half if v_coeffs is None else grid.pad_half(v_coeffs, m)
    khalf = _half_wavevectors(grid.dim, m)
    # all dim^2 derivatives d v_j / d x_i in one batched transform
    dv_hat = (2j * np.pi / grid.L) * (khalf[None, :] * v_half[:, None])
    dv = np.fft.irfftn(dv_hat, s=shape, axes=axes) * scale
    advect = np.einsum("i...,ji...->j...", u_phys, dv)
    coeffs = grid.from_phys(advect, m)
    vmax = float(np.sqrt(np.max(np.sum(u_phys * u_phys, axis=0))))
    return leray_kernel(grid, coeffs), vmax


def bilinear_B(u: SpectralVelocity, v: SpectralVelocity | None = None) -> SpectralVelocity:
    """B(u, v) = P (u . grad) v; B(u) = B(u, u)."""
    if v is not None:
        u.same_grid(v)
    coeffs, _ = bilinear_kernel(u.grid, u.coeffs, None if v is None else v.coeffs)
    return SpectralVelocity(u.grid, coeffs)


def trilinear_b(u: SpectralVelocity, v: SpectralVelocity, w: SpectralVelocity) -> float:
    """b(u, v, w) = <B(u, v), w>, evaluated by spectral quadrature."""
    u.same_grid(v)
    u.same_grid(w)
    return inner_h(bilinear_B(u, v), w)


# ---------------------------------------------------------------------------
# Nonlinear damping C(u) = P(|u|^(r-1) u)
# ---------------------------------------------------------------------------

def damping_kernel(grid: TorusGrid, coeffs: np.ndarray, r: float) -> np.ndarray:
    if r < 1:
        raise ValidationError(f"absorption exponent r must be >= 1, got {r}")
    if r == 1.0:
        # |u|^0 u = u on divergence-free input; skip the transform round trip
        return coeffs
    u_phys, m = grid.to_phys(coeffs, max(grid.dealias_factor, DAMPING_PAD))
    mag2 = np.sum(u_phys * u_phys, axis=0)
    weight = np.power(mag2, 0.5 * (r - 1.0))
    out = grid.from_phys(weight[None, ...] * u_phys, m)
    return leray_kernel(grid, out)


def damping_C(u: SpectralVelocity, r: float) -> SpectralVelocity:
    """C(u) = P(|u|^(r-1) u) on a 2x padded lattice (all r >= 1)."""
    if r == 1.0:
        return u
    return SpectralVelocity(u.grid, damping_kernel(u.grid, u.coeffs, r))


# ---------------------------------------------------------------------------
# Norms and inner products
# ---------------------------------------------------------------------------

def inner_h_kernel(grid: TorusGrid, a: np.ndarray, b: np.ndarray) -> float:
    return float(grid.volume() * np.real(np.sum(a * np.conj(b))))


def inner_h(a: SpectralVelocity, b: SpectralVelocity) -> float:
    """L^2 inner product (a, b) by Parseval."""
    a.same_grid(b)
    return inner_h_kernel(a.grid, a.coeffs, b.coeffs)


def h_norm_kernel(grid: TorusGrid, coeffs: np.ndarray) -> float:
    return float(np.sqrt(grid.volume() * np.sum(np.abs(coeffs) ** 2)))


def v_norm_kernel(grid: TorusGrid, coeffs: np.ndarray) -> float:
    s = np.sum(np.abs(coeffs) ** 2, axis=0)
    return float(np.sqrt(grid.volume() * grid.lambda1 * np.sum(grid.k2 * s)))


def a_norm_kernel(grid: TorusGrid, coeffs: np.ndarray) -> float:
    s = np.sum(np.abs(coeffs) ** 2, axis=0)
    return float(
        np.sqrt(grid.volume() * grid.lambda1**2 * np.sum(grid.k2**2 * s))
    )


def h_norm(u: SpectralVelocity) -> float:
    return h_norm_kernel(u.grid, u.coeffs)


def v_norm(u: SpectralVelocity) -> float:
    return v_norm_kernel(u.grid, u.coeffs)


def a_norm(u: SpectralVelocity) -> float:
    return a_norm_kernel(u.grid, u.coeffs)


def lr_norm_kernel(grid: TorusGrid, coeffs: np.ndarray, r: float) -> float:
    if r < 1:
        raise ValidationError(f"lr_norm exponent r must be >= 1, got {r}")
    u_phys, m = grid.to_phys(coeffs, max(grid.dealias_factor, DAMPING_PAD))
    mag = np.sqrt(np.sum(u_phys * u_phys, axis=0))
    w = (grid.L / m) ** grid.dim
    return float(np.power(np.sum(mag ** (r + 1.0)) * w, 1.0 / (r + 1.0)))


def lr_norm(u: SpectralVelocity, r: float) -> float:
    """L^(r+1) norm by collocation quadrature on the damping lattice."""
    return lr_norm_kernel(u.grid, u.coeffs, r)


@dataclass(frozen=True)
class FieldNorms:
    h: float
    v: float
    a: float


def norms(u: SpectralVelocity) -> FieldNorms:
    """Parseval H, V and D(A) norms in one call."""
    return FieldNorms(h=h_norm(u), v=v_norm(u), a=a_norm(u))


def h_distance(a: SpectralVelocity, b: SpectralVelocity) -> float:
    a.same_grid(b)
    return h_norm_kernel(a.grid, a.coeffs - b.coeffs)
