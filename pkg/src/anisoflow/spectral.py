"""Spectral transforms and the frequency-multiplier operator zoo.

Everything here is an exact Fourier multiplier on the periodic lattice:
dyadic Littlewood-Paley blocks (horizontal, vertical, isotropic), the heat
semigroup, the Leray projector, spectral divergence, and the horizontal
Helmholtz split.  All operators are pure functions of immutable inputs and
linear to machine precision.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _fft

from .errors import DomainError, PreconditionError, ShellRangeError, StructureError
from .grid import DEFAULT_CUTOFF, Field, Grid, SpectralField

__all__ = [
    "to_spectral",
    "to_physical",
    "lp_block",
    "iso_block",
    "heat_flow",
    "leray_project",
    "divergence",
    "divergence_defect",
    "horizontal_helmholtz_split",
    "lp_norm",
    "l2_norm",
    "band_mask",
    "band_limit",
]


def to_spectral(f: Field) -> SpectralField:
    """Forward transform of a sampled field.

    Returns coefficients in the convention f(x) = sum_m c_m exp(i xi_m . x);
    round trip with `to_physical` is the identity to 1e-12 relative error.
    """
    coeffs = _fft.fftn(f.values, axes=(1, 2, 3), norm="forward", workers=-1)
    return SpectralField(f.grid, coeffs)


def to_physical(F: SpectralField) -> Field:
    """Inverse transform; drops the (machine-size) imaginary residue."""
    vals = _fft.ifftn(F.coeffs, axes=(1, 2, 3), norm="forward", workers=-1)
    vals = np.real(vals)
    zero_mode = np.max(np.abs(F.coeffs[:, 0, 0, 0])) if F.coeffs.size else 0.0
    scale = np.max(np.abs(F.coeffs))
    mean_free = scale == 0.0 or zero_mode <= 1e-13 * scale
    return Field(F.grid, vals, mean_free=bool(mean_free))


def hermitian_to_physical(F: SpectralField) -> np.ndarray:
    """Inverse transform of Hermitian-symmetric coefficients via the real FFT.

    About twice as fast as `to_physical`; only valid when the coefficients
    came from a real field (all multiplier operators in this module preserve
    that symmetry).
    """
    n3 = F.grid.dims[2]
    half = F.coeffs[..., : n3 // 2 + 1]
    return _fft.irfftn(half, s=F.grid.dims, axes=(1, 2, 3), norm="forward", workers=-1)


def _apply_multiplier(F: SpectralField, mult: np.ndarray) -> SpectralField:
    return SpectralField(F.grid, F.coeffs * mult[None, :, :, :])


def _h_shell_multiplier(grid: Grid, k: int) -> np.ndarray:
    """Cached psi_hat(|xi_h| / 2^k) as an (N1, N2) array."""
    from .grid import _GRID_CACHE

    cache = _GRID_CACHE.setdefault(grid._cache_key(), {})
    key = ("h_shell", k)
    if key not in cache:
        cache[key] = DEFAULT_CUTOFF.psi_hat(grid.xi_h_mod2d() / 2.0**k)
    return cache[key]


def _v_shell_multiplier(grid: Grid, j: int) -> np.ndarray:
    """Cached psi_hat(|xi3| / 2^j) as an (N3,) array."""
    from .grid import _GRID_CACHE

    cache = _GRID_CACHE.setdefault(grid._cache_key(), {})
    key = ("v_shell", j)
    if key not in cache:
        cache[key] = DEFAULT_CUTOFF.psi_hat(grid.xi_v_mod1d() / 2.0**j)
    return cache[key]


def lp_block(F: SpectralField, k: int | None = None, j: int | None = None) -> SpectralField:
    """Dyadic block operator Delta_k^h Delta_j^v as a frequency multiplier.

    Passing only `k` applies the horizontal truncation, only `j` the vertical
    one; passing both composes them.  The output is supported in the annulus
    2^k < |xi_h| < 2^{k+2} (resp. vertical).

    Raises:
        ShellRangeError: index outside the grid's resolvable shell range.
        DomainError: neither index given.
    """
    if k is None and j is None:
        raise DomainError("lp_block needs at least one of k, j")
    grid = F.grid
    out = F.coeffs
    if k is not None:
        lo, hi = grid.shell_range_h
        if not (lo <= k <= hi):
            raise ShellRangeError("horizontal", k, lo, hi)
        out = out * _h_shell_multiplier(grid, k)[None, :, :, None]
    if j is not None:
        lo, hi = grid.shell_range_v
        if not (lo <= j <= hi):
            raise ShellRangeError("vertical", j, lo, hi)
        out = out * _v_shell_multiplier(grid, j)[None, None, None, :]
    return SpectralField(grid, out)


def iso_block(F: SpectralField, ell: int) -> SpectralField:
    """Isotropic dyadic block Delta_ell (multiplier psi_hat(2^-ell |xi|))."""
    lo, hi = F.grid.shell_range_iso
    if not (lo <= ell <= hi):
        raise ShellRangeError("isotropic", ell, lo, hi)
    mult = DEFAULT_CUTOFF.psi_hat(F.grid.xi_mod() / 2.0**ell)
    return _apply_multiplier(F, mult)


def lattice_arrays(grid: Grid) -> dict:
    """Cached 3D lattice arrays: xi components, |xi|^2 and its safe inverse."""
    from .grid import _GRID_CACHE

    cache = _GRID_CACHE.setdefault(grid._cache_key(), {})
    if "lattice" not in cache:
        x1, x2, x3 = grid.xi()
        ones = np.ones(grid.dims)
        xi1 = x1 * ones
        xi2 = x2 * ones
        xi3 = x3 * ones
        modsq = xi1**2 + xi2**2 + xi3**2
        safe = modsq.copy()
        safe[0, 0, 0] = 1.0
        cache["lattice"] = {
            "xi1": xi1, "xi2": xi2, "xi3": xi3,
            "modsq": modsq, "inv_modsq": 1.0 / safe,
        }
    return cache["lattice"]


def heat_flow(F: SpectralField, t: float) -> SpectralField:
    """Heat semigroup e^{t Laplacian}, exact multiplier exp(-t |xi|^2)."""
    if t < 0:
        raise DomainError(f"heat_flow needs t >= 0, got {t}")
    mult = np.exp(-t * lattice_arrays(F.grid)["modsq"])
    return _apply_multiplier(F, mult)


def leray_project(F: SpectralField) -> SpectralField:
    """Leray projector Id - grad laplacian^{-1} div onto divergence-free fields.

    Per mode this is (I - xi xi^T / |xi|^2) applied to the coefficient vector;
    the zero mode passes through unchanged.
    """
    if F.ncomp != 3:
        raise StructureError("leray_project needs a 3-component field")
    lat = lattice_arrays(F.grid)
    xi = (lat["xi1"], lat["xi2"], lat["xi3"])
    dot = (xi[0] * F.coeffs[0] + xi[1] * F.coeffs[1] + xi[2] * F.coeffs[2]) * lat["inv_modsq"]
    out = np.empty_like(F.coeffs)
    for c in range(3):
        out[c] = F.coeffs[c] - xi[c] * dot
    out[:, 0, 0, 0] = F.coeffs[:, 0, 0, 0]
    return SpectralField(F.grid, out)


def divergence(F: SpectralField) -> SpectralField:
    """Exact spectral divergence i xi . u_hat of a 3-component field."""
    if F.ncomp != 3:
        raise StructureError("divergence needs a 3-component field")
    x1, x2, x3 = F.grid.xi()
    out = 1j * (x1 * F.coeffs[0] + x2 * F.coeffs[1] + x3 * F.coeffs[2])
    return SpectralField(F.grid, out[None])


def divergence_defect(F: SpectralField) -> float:
    """max |xi . u_hat| relative to the coefficient scale (0 for div-free)."""
    div = divergence(F)
    scale = np.max(np.abs(F.coeffs))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(div.coeffs)) / scale)


def horizontal_helmholtz_split(F: SpectralField):
    """Split u^h into a horizontal stream part and a compressive part.

    For a divergence-free u the horizontal components decompose as
    u^h = grad_h^perp C + (-grad_h laplacian_h^{-1} d3 u^3); the first part is
    horizontally divergence-free and the second carries all of div_h u^h.
    Modes with xi_h = 0 are assigned to the stream part.  Both returned fields
    are 3-component with zero third component.

    Raises:
        PreconditionError: the input is not divergence-free (defect > 1e-8).
    """
    if F.ncomp != 3:
        raise StructureError("horizontal_helmholtz_split needs 3 components")
    if divergence_defect(F) > 1e-8:
        raise PreconditionError(
            f"input not divergence-free (relative defect {divergence_defect(F):.2e})"
        )
    x1, x2, x3 = F.grid.xi()
    ones = np.ones(F.grid.dims)
    xi1, xi2, xi3 = x1 * ones, x2 * ones, x3 * ones
    modh2 = xi1**2 + xi2**2
    safe = modh2.copy()
    safe[modh2 == 0] = 1.0
    # comp_hat = -(xi_h xi3 / |xi_h|^2) u3_hat  on modes with xi_h != 0
    factor = np.where(modh2 == 0, 0.0, xi3 / safe) * F.coeffs[2]
    comp = np.zeros_like(F.coeffs)
    comp[0] = -xi1 * factor
    comp[1] = -xi2 * factor
    stream = np.zeros_like(F.coeffs)
    stream[0] = F.coeffs[0] - comp[0]
    stream[1] = F.coeffs[1] - comp[1]
    return SpectralField(F.grid, stream), SpectralField(F.grid, comp)


# -- norms and band limiting ----------------------------------------------


def _pointwise_pth(mag: np.ndarray, p: float) -> np.ndarray:
    if p == int(p) and 1 <= p <= 4:
        out = mag
        for _ in range(int(p) - 1):
            out = out * mag
        return out
    return mag**p


def lp_norm(f: Field, p: float) -> float:
    """L^p norm by midpoint quadrature; vector fields use pointwise magnitude."""
    if p < 1 and not np.isinf(p):
        raise DomainError(f"lp_norm needs p >= 1, got {p}")
    if f.ncomp == 1:
        mag = np.abs(f.values[0])
    else:
        mag = np.sqrt(np.sum(f.values**2, axis=0))
    if np.isinf(p):
        return float(np.max(mag))
    dx = f.grid.cell_volume
    return float((np.sum(_pointwise_pth(mag, p)) * dx) ** (1.0 / p))


def lp_norm_values(grid: Grid, values: np.ndarray, p: float) -> float:
    """lp_norm on a raw (ncomp, N1, N2, N3) sample array."""
    if values.ndim == 3:
        values = values[None]
    if values.shape[0] == 1:
        mag = np.abs(values[0])
    else:
        mag = np.sqrt(np.sum(values**2, axis=0))
    if np.isinf(p):
        return float(np.max(mag))
    return float((np.sum(_pointwise_pth(mag, p)) * grid.cell_volume) ** (1.0 / p))


def l2_norm(F: SpectralField) -> float:
    """L^2 norm straight from coefficients (Parseval)."""
    return float(np.sqrt(F.grid.volume * np.sum(np.abs(F.coeffs) ** 2)))


def band_mask(grid: Grid) -> np.ndarray:
    """Boolean lattice mask of the fully resolvable anisotropic band.

    A mode is inside the band when its horizontal and vertical moduli both sit
    where the shell partition of unity sums to exactly one:
    2^{k_lo+1} < |xi_h| <= 2^{k_hi+1} and likewise vertically.  Fields
    supported in the band are reconstructed exactly by the block sum.
    """
    klo, khi = grid.shell_range_h
    jlo, jhi = grid.shell_range_v
    mh = grid.xi_h_mod()
    mv = grid.xi_v_mod()
    eps = 1e-12
    return (
        (mh > 2.0 ** (klo + 1) * (1 + eps))
        & (mh <= 2.0 ** (khi + 1) * (1 + eps))
        & (mv > 2.0 ** (jlo + 1) * (1 + eps))
        & (mv <= 2.0 ** (jhi + 1) * (1 + eps))
    )


def band_limit(F: SpectralField) -> SpectralField:
    """Restrict a spectral field to the fully resolvable band."""
    return _apply_multiplier(F, band_mask(F.grid).astype(np.float64))
