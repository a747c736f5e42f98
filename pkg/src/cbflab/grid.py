"""Periodic-box discretization and Fourier lattice bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

#: Padding ratio used for the quadratic advection product (3/2 rule floor).
QUADRATIC_PAD = 1.5
#: Padding ratio used for the |u|^(r-1)u damping product and L^p quadrature.
DAMPING_PAD = 2.0


@dataclass(frozen=True)
class TorusGrid:
    """
    Discretization of the periodic box [0, L]^dim.

    Retained wavevectors are the integer modes with every component strictly
    below the Nyquist index N/2 in magnitude, so the lattice is symmetric
    (k retained iff -k retained).  The k = 0 mode is part of the lattice but
    velocity fields keep it identically zero (mean-free constraint).

    Parameters
    ----------
    dim : int
        Spatial dimension, 2 or 3.
    N : int
        Modes per dimension; even, at least 8.
    L : float
        Period of the box.
    dealias_factor : float
        Zero-padding ratio for quadratic products.  Values below 3/2 are
        accepted but the advection kernel always pads by at least 3/2.
    """

    dim: int
    N: int
    L: float = 2.0 * math.pi
    dealias_factor: float = QUADRATIC_PAD

    # caches populated in __post_init__
    k: np.ndarray = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)
    mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        problems = []
        if self.dim not in (2, 3):
            problems.append(f"grid.dim: must be 2 or 3, got {self.dim}")
        if self.N % 2 != 0 or self.N < 8:
            problems.append(f"grid.N: must be even and >= 8, got {self.N}")
        if not (self.L > 0):
            problems.append(f"grid.L: must be positive, got {self.L}")
        if not (self.dealias_factor >= 1.0):
            problems.append(
                f"grid.dealias_factor: must be >= 1, got {self.dealias_factor}"
            )
        if problems:
            raise ValidationError(problems)

        freqs = np.fft.fftfreq(self.N, d=1.0 / self.N)  # integer mode numbers
        mesh = np.meshgrid(*([freqs] * self.dim), indexing="ij")
        k = np.stack(mesh).astype(np.float64)
        k2 = np.sum(k * k, axis=0)
        # symmetric retention: drop the unmatched -N/2 plane and the mean mode
        mask = np.ones(k2.shape, dtype=bool)
        for axis_k in mesh:
            mask &= np.abs(axis_k) < self.N // 2
        mask[(0,) * self.dim] = False
        for arr in (k, k2, mask):
            arr.flags.writeable = False
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "mask", mask)

    # -- derived scalars ---------------------------------------------------

    @property
    def lambda1(self) -> float:
        """Smallest Stokes eigenvalue, 4 pi^2 / L^2."""
        return 4.0 * math.pi**2 / self.L**2

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.dim

    def volume(self) -> float:
        return self.L**self.dim

    def compatible(self, other: "TorusGrid") -> bool:
        return (
            self.dim == other.dim
            and self.N == other.N
            and self.L == other.L
        )

    # -- padded-lattice plumbing --------------------------------------------
    #
    # Physical fields are real, so transforms run through rfftn/irfftn on a
    # half-spectrum whose last axis keeps only nonnegative frequencies.
    # Padding and truncation move the 2^dim frequency corner blocks with
    # contiguous slice copies.

    def padded_size(self, factor: float) -> int:
        m = math.ceil(self.N * factor)
        return m + (m % 2)

    def _block_pairs(self, m: int):
        """(source, destination) slice pairs for the low/high frequency blocks."""
        n2 = self.N // 2
        pos = (slice(0, n2), slice(0, n2))
        neg = (slice(n2 + 1, self.N), slice(m - n2 + 1, m))
        return pos, neg

    def pad_half(self, coeffs: np.ndarray, m: int) -> np.ndarray:
        """Embed retained coefficients into the rfft half-lattice of size m."""
        pos, neg = self._block_pairs(m)
        out = np.zeros(
            coeffs.shape[: -self.dim] + (m,) * (self.dim - 1) + (m // 2 + 1,),
            dtype=complex,
        )
        for combo in np.ndindex(*((2,) * (self.dim - 1))):
            src = tuple((pos, neg)[c][0] for c in combo) + (pos[0],)
            dst = tuple((pos, neg)[c][1] for c in combo) + (pos[1],)
            out[(...,) + dst] = coeffs[(...,) + src]
        return out

    def to_phys(self, coeffs: np.ndarray, factor: float = 1.0) -> tuple:
        """Collocation values of the trig polynomial on a padded lattice.

        Returns (values, m) where values is real with lattice size m per axis.
        Coefficients follow the convention u(x) = sum_k u_k exp(2 pi i k.x/L),
        i.e. an unnormalized forward transform and 1/m^dim inverse.
        """
        m = self.padded_size(factor) if factor > 1.0 else self.N
        axes = tuple(range(-self.dim, 0))
        half = self.pad_half(coeffs, m)
        vals = np.fft.irfftn(half, s=(m,) * self.dim, axes=axes) * float(m**self.dim)
        return vals, m

    def from_phys(self, values: np.ndarray, m: int) -> np.ndarray:
        """Retained-lattice coefficients of collocation values on an m-lattice.

        The returned array is exactly Hermitian: the negative-frequency half
        of the last axis is the conjugate mirror of the computed half, and
        the zero-frequency plane is symmetrized.
        """
        axes = tuple(range(-self.dim, 0))
        half = np.fft.rfftn(values, axes=axes) / float(m**self.dim)
        pos, neg = self._block_pairs(m)
        out = np.zeros(
            values.shape[: -self.dim] + (self.N,) * self.dim, dtype=complex
        )
        for combo in np.ndindex(*((2,) * (self.dim - 1))):
            src = tuple((pos, neg)[c][0] for c in combo) + (pos[0],)
            dst = tuple((pos, neg)[c][1] for c in combo) + (pos[1],)
            out[(...,) + src] = half[(...,) + dst]
        plane = (slice(None),) * (out.ndim - 1) + (0,)
        out[plane] = 0.5 * (
            out[plane] + np.conj(_negate_last_axes(out[plane], self.dim - 1))
        )
        mirror = np.conj(self.negate_modes(out))
        tail = (slice(None),) * (out.ndim - 1) + (slice(self.N // 2 + 1, self.N),)
        out[tail] = mirror[tail]
        out[..., ~self.mask] = 0.0
        return out

    def negate_modes(self, coeffs: np.ndarray) -> np.ndarray:
        """Reindex an array by k -> -k on the FFT lattice."""
        return _negate_last_axes(coeffs, self.dim)


def _negate_last_axes(arr: np.ndarray, n_axes: int) -> np.ndarray:
    out = arr
    for ax in range(-n_axes, 0):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out
