"""Periodic box grids, sampled fields, and their Fourier counterparts.

All analysis in this package happens on a periodic box [0,L1)x[0,L2)x[0,L3)
sampled on N1 x N2 x N3 points (each Ni a power of two, Ni >= 8).  Frequency
multipliers are exact on the discrete lattice

    xi = 2*pi*(m1/L1, m2/L2, m3/L3),

which is why the whole toolkit is built on it.  Dyadic shell operators are
only meaningful for shell indices whose annulus fits inside the lattice; the
resolvable ranges are computed once per grid and enforced everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, StructureError

#: relative tolerance used by the mean-free invariant
MEAN_FREE_RTOL = 1e-12

#: per-grid cache of derived lattice arrays (moduli, shell multipliers)
_GRID_CACHE: dict = {}


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class CutoffProfile:
    """The fixed radial cutoff chi_hat and its annulus function psi_hat.

    chi_hat(t) = 1 for |t| <= 1, 0 for |t| >= 2 and on (1, 2) uses the smooth
    bump transition

        chi_hat(t) = theta(2 - t) / (theta(2 - t) + theta(t - 1)),
        theta(s)   = exp(-1/s) for s > 0, else 0,

    which is C-infinity and monotone on [1, 2].  The annulus function is
    psi_hat(t) = chi_hat(t/2) - chi_hat(t), supported on (1, 4), and the
    family psi_hat(2^-l t) telescopes to 1 for every t > 0.  This profile is
    fixed once so that every block energy in the package is bit-reproducible.
    """

    @staticmethod
    def _theta(s: np.ndarray) -> np.ndarray:
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    def chi_hat(self, t) -> np.ndarray:
        """Evaluate chi_hat at |t| (vectorized)."""
        t = np.abs(np.asarray(t, dtype=np.float64))
        up = self._theta(2.0 - t)
        down = self._theta(t - 1.0)
        with np.errstate(invalid="ignore"):
            mid = np.where(up + down > 0, up / (up + down), 0.0)
        return np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, mid))

    def psi_hat(self, t) -> np.ndarray:
        """Annulus function psi_hat(t) = chi_hat(t/2) - chi_hat(t)."""
        t = np.asarray(t, dtype=np.float64)
        return self.chi_hat(t / 2.0) - self.chi_hat(t)


#: module-wide cutoff instance; all shell operators share it
DEFAULT_CUTOFF = CutoffProfile()


def _shell_range(n: int, length_max: float, n_min: int, length_min: float):
    """Resolvable dyadic shell range for one direction.

    The lowest shell is the smallest k whose open annulus (2^k, 2^{k+2})
    contains the smallest nonzero lattice modulus 2*pi/length_max.  The top
    shell keeps the full annulus strictly inside the Nyquist band:
    2^{k+2} < pi*n/length (two outermost shells excluded relative to the raw
    lattice limit, which avoids annuli truncated by the lattice boundary).
    """
    xi_min = 2.0 * math.pi / length_max
    nyq = math.pi * n_min / length_min if length_min else math.pi * n / length_max
    # smallest k with 2^(k+2) > xi_min  (strict: psi_hat vanishes at the edge)
    k_lo = math.floor(math.log2(xi_min)) - 1
    while 2.0 ** (k_lo + 2) <= xi_min * (1 + 1e-12):
        k_lo += 1
    # largest k with 2^(k+2) < nyq
    k_hi = math.floor(math.log2(nyq)) - 2
    while 2.0 ** (k_hi + 2) >= nyq * (1 - 1e-12):
        k_hi -= 1
    while 2.0 ** (k_hi + 3) < nyq * (1 - 1e-12):
        k_hi += 1
    return k_lo, k_hi


@dataclass(frozen=True)
class Grid:
    """Periodic box discretization.

    Attributes:
        dims: points per direction (N1, N2, N3); powers of two, each >= 8.
        lengths: box edge lengths (L1, L2, L3).
        shell_range_h: resolvable horizontal dyadic indices [k_lo, k_hi].
        shell_range_v: resolvable vertical dyadic indices [j_lo, j_hi].
        shell_range_iso: resolvable isotropic dyadic indices.
    """

    dims: tuple
    lengths: tuple
    shell_range_h: tuple = field(init=False)
    shell_range_v: tuple = field(init=False)
    shell_range_iso: tuple = field(init=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        lengths = tuple(float(x) for x in self.lengths)
        if len(dims) != 3 or len(lengths) != 3:
            raise StructureError("Grid needs three dims and three lengths")
        for n in dims:
            if not _is_pow2(n) or n < 8:
                raise DomainError(f"grid dims must be powers of two >= 8, got {n}")
        for x in lengths:
            if not (x > 0):
                raise DomainError(f"grid lengths must be positive, got {x}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)
        n1, n2, n3 = dims
        l1, l2, l3 = lengths
        object.__setattr__(
            self, "shell_range_h", _shell_range(min(n1, n2), max(l1, l2), min(n1, n2), max(l1, l2))
        )
        object.__setattr__(self, "shell_range_v", _shell_range(n3, l3, n3, l3))
        object.__setattr__(
            self,
            "shell_range_iso",
            _shell_range(min(dims), max(lengths), min(dims), max(lengths)),
        )

    # -- lattice geometry -------------------------------------------------

    @property
    def npoints(self) -> int:
        n1, n2, n3 = self.dims
        return n1 * n2 * n3

    @property
    def volume(self) -> float:
        l1, l2, l3 = self.lengths
        return l1 * l2 * l3

    @property
    def cell_volume(self) -> float:
        return self.volume / self.npoints

    def axis_coords(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        return np.arange(n) * (self.lengths[axis] / n)

    def meshgrid(self):
        """Physical coordinates X1, X2, X3 with shape dims (indexing 'ij')."""
        return np.meshgrid(*(self.axis_coords(a) for a in range(3)), indexing="ij")

    def freq_axis(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        return 2.0 * math.pi * np.fft.fftfreq(n, d=1.0 / n) / self.lengths[axis]

    def xi(self):
        """Frequency lattice components xi1, xi2, xi3 broadcastable to dims."""
        x1 = self.freq_axis(0)[:, None, None]
        x2 = self.freq_axis(1)[None, :, None]
        x3 = self.freq_axis(2)[None, None, :]
        return x1, x2, x3

    def xi_h_mod2d(self) -> np.ndarray:
        """|xi_h| as an (N1, N2) array (cached)."""
        key = "_xi_h_mod2d"
        if key not in _GRID_CACHE.setdefault(self._cache_key(), {}):
            x1 = self.freq_axis(0)[:, None]
            x2 = self.freq_axis(1)[None, :]
            _GRID_CACHE[self._cache_key()][key] = np.sqrt(x1**2 + x2**2)
        return _GRID_CACHE[self._cache_key()][key]

    def xi_v_mod1d(self) -> np.ndarray:
        """|xi3| as an (N3,) array (cached)."""
        key = "_xi_v_mod1d"
        if key not in _GRID_CACHE.setdefault(self._cache_key(), {}):
            _GRID_CACHE[self._cache_key()][key] = np.abs(self.freq_axis(2))
        return _GRID_CACHE[self._cache_key()][key]

    def _cache_key(self):
        return (self.dims, self.lengths)

    def xi_h_mod(self) -> np.ndarray:
        """|xi_h| on the lattice, shape dims."""
        return self.xi_h_mod2d()[:, :, None] * np.ones((1, 1, self.dims[2]))

    def xi_v_mod(self) -> np.ndarray:
        """|xi3| on the lattice, shape dims."""
        return np.abs(self.freq_axis(2))[None, None, :] * np.ones(self.dims)

    def xi_mod(self) -> np.ndarray:
        x1, x2, x3 = self.xi()
        return np.sqrt(x1**2 + x2**2 + x3**2)

    def compatible(self, other: "Grid") -> bool:
        return self.dims == other.dims and np.allclose(self.lengths, other.lengths)


def _check_values(grid: Grid, values: np.ndarray, ncomp: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    want = (ncomp,) + grid.dims
    if values.shape == grid.dims and ncomp == 1:
        values = values[None]
    if values.shape != want:
        raise StructureError(f"field values shape {values.shape} != {want}")
    if not np.all(np.isfinite(values)):
        raise DataError("field contains NaN or Inf samples")
    return values


@dataclass(frozen=True)
class Field:
    """Real sampled field on a grid (1 or 3 components).

    `values` has shape (ncomp, N1, N2, N3), component-major and x3-fastest.
    When `mean_free` is set, each component's spatial mean must vanish to
    1e-12 relative to its maximum amplitude; this is the periodic surrogate of
    working modulo constants.
    """

    grid: Grid
    values: np.ndarray
    mean_free: bool = True

    def __post_init__(self):
        ncomp = 1 if self.values.ndim == 3 else int(self.values.shape[0])
        if ncomp not in (1, 3):
            raise StructureError(f"ncomp must be 1 or 3, got {ncomp}")
        vals = _check_values(self.grid, self.values, ncomp)
        object.__setattr__(self, "values", vals)
        if self.mean_free:
            for c in range(ncomp):
                amp = np.max(np.abs(vals[c]))
                if amp > 0 and abs(vals[c].mean()) > MEAN_FREE_RTOL * amp:
                    raise DataError(
                        f"component {c} declared mean-free but mean is "
                        f"{vals[c].mean():.3e} (amplitude {amp:.3e})"
                    )

    @property
    def ncomp(self) -> int:
        return int(self.values.shape[0])

    def component(self, c: int) -> np.ndarray:
        return self.values[c]

    def __add__(self, other: "Field") -> "Field":
        if not self.grid.compatible(other.grid) or self.ncomp != other.ncomp:
            raise StructureError("field addition needs matching grid and ncomp")
        return Field(self.grid, self.values + other.values,
                     mean_free=self.mean_free and other.mean_free)

    def __sub__(self, other: "Field") -> "Field":
        if not self.grid.compatible(other.grid) or self.ncomp != other.ncomp:
            raise StructureError("field subtraction needs matching grid and ncomp")
        return Field(self.grid, self.values - other.values,
                     mean_free=self.mean_free and other.mean_free)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * float(scalar), mean_free=self.mean_free)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a Field on the discrete frequency lattice.

    Coefficients use the forward-normalized convention
    f(x) = sum_m c_m exp(i xi_m . x), so Parseval reads
    ||f||_{L2}^2 = volume * sum |c_m|^2.  Hermitian symmetry (c_{-m} equal to
    conj(c_m)) keeps the inverse transform real.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape == self.grid.dims:
            coeffs = coeffs[None]
        if coeffs.ndim != 4 or coeffs.shape[1:] != self.grid.dims or coeffs.shape[0] not in (1, 3):
            raise StructureError(
                f"spectral coeffs shape {coeffs.shape} incompatible with grid {self.grid.dims}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def ncomp(self) -> int:
        return int(self.coeffs.shape[0])

    def hermitian_defect(self) -> float:
        """Max deviation from Hermitian symmetry, relative to the max coeff."""
        flipped = self.coeffs[
            :,
            (-np.arange(self.grid.dims[0])) % self.grid.dims[0], :, :][
            :, :, (-np.arange(self.grid.dims[1])) % self.grid.dims[1], :][
            :, :, :, (-np.arange(self.grid.dims[2])) % self.grid.dims[2]]
        scale = np.max(np.abs(self.coeffs))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(self.coeffs - np.conj(flipped))) / scale)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if not self.grid.compatible(other.grid) or self.ncomp != other.ncomp:
            raise StructureError("spectral addition needs matching grid and ncomp")
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if not self.grid.compatible(other.grid) or self.ncomp != other.ncomp:
            raise StructureError("spectral subtraction needs matching grid and ncomp")
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def zeros(grid: Grid, ncomp: int = 1) -> Field:
    return Field(grid, np.zeros((ncomp,) + grid.dims))


def spectral_zeros(grid: Grid, ncomp: int = 1) -> SpectralField:
    return SpectralField(grid, np.zeros((ncomp,) + grid.dims, dtype=np.complex128))
