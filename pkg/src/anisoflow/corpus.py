"""Synthetic field generators used by tests, experiments and the CLI.

Everything is deterministic given (grid, parameters, seed): random content
goes through one `numpy.random.default_rng(seed)` per call and all other
constructions are closed-form, so corpus files are bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .besov import scale_translate
from .errors import DomainError, StructureError
from .grid import Field, Grid, SpectralField
from .spectral import band_mask, leray_project, to_physical, to_spectral

__all__ = [
    "octave_window",
    "spectral_packet",
    "stream_packet",
    "band_limited_noise",
    "aniso_gaussian",
    "taylor_green",
    "lambda_family",
    "gate_datum",
    "gate_surrogate_norm",
    "two_atom_sequence",
]


def octave_window(t: np.ndarray, c: int) -> np.ndarray:
    """Smooth bump supported on the octave (2^c, 2^{c+1}) in log2 scale.

    A field built from this window is seen by exactly the two dyadic shells
    {c-1, c}.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    y = np.zeros_like(t)
    y[pos] = (np.log2(t[pos]) - (c + 0.5)) / 0.5
    inside = pos & (np.abs(y) < 1)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
    return out


def _signed_coords(grid: Grid, axis: int) -> np.ndarray:
    x = grid.axis_coords(axis)
    L = grid.lengths[axis]
    return np.where(x < L / 2, x, x - L)


def spectral_packet(
    grid: Grid,
    c_h: int,
    c_v: int,
    amplitude: float = 1.0,
    center=(0.0, 0.0, 0.0),
    seed: int | None = None,
    env_frac: float = 1.0 / 6.0,
) -> Field:
    """Localized scalar wave packet with prescribed dyadic content.

    The spectrum is octave_window(|xi_h|, c_h) * octave_window(|xi3|, c_v)
    (horizontal shells {c_h-1, c_h}, vertical {c_v-1, c_v}), and the kernel is
    damped by a Gaussian envelope of width env_frac * L per axis so the field
    is numerically supported well inside the signed box [-L/2, L/2)^3 (the
    envelope smears the spectrum by ~1-2 lattice cells).  With a seed the
    window is applied to random coefficients instead (band-confined noise, no
    envelope, delocalized).
    """
    wh = octave_window(grid.xi_h_mod2d(), c_h)[:, :, None]
    wv = octave_window(grid.xi_v_mod1d(), c_v)[None, None, :]
    coeffs = (wh * wv).astype(np.complex128)
    # drop the Nyquist planes: they carry no Hermitian partner, so any smear
    # reaching them would break exact symmetry of derived (curl) fields
    for axis, n in enumerate(grid.dims):
        sl = [slice(None)] * 3
        sl[axis] = n // 2
        coeffs[tuple(sl)] = 0.0
    x1, x2, x3 = grid.xi()
    # deterministic symmetry breaker: keeps coefficient magnitudes distinct
    # so rank orders are stable (even under lattice symmetries of the window)
    coeffs = coeffs * (
        1.0
        + 0.30 * np.cos(0.37 * x1 + 0.73 * x2 + 1.19 * x3)
        + 0.21 * np.cos(1.51 * x1 - 0.41 * x2 + 0.67 * x3)
    )
    if seed is not None:
        rng = np.random.default_rng(seed)
        noise = np.fft.fftn(rng.standard_normal(grid.dims), norm="forward")
        coeffs = coeffs * noise
    f = to_physical(SpectralField(grid, coeffs[None]))
    vals = f.values
    if seed is None:
        s1 = _signed_coords(grid, 0)[:, None, None]
        s2 = _signed_coords(grid, 1)[None, :, None]
        s3 = _signed_coords(grid, 2)[None, None, :]
        L1, L2, L3 = grid.lengths
        env = np.exp(
            -(s1**2) / (2 * (env_frac * L1) ** 2)
            - (s2**2) / (2 * (env_frac * L2) ** 2)
            - (s3**2) / (2 * (env_frac * L3) ** 2)
        )
        vals = vals * env[None]
        # place the core
        n = grid.dims
        for axis, (c, Lax) in enumerate(zip(center, grid.lengths)):
            cells = int(round(c / (Lax / n[axis])))
            if cells:
                vals = np.roll(vals, cells, axis=1 + axis)
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals = vals * (amplitude / peak)
    vals = vals - vals.mean(axis=(1, 2, 3), keepdims=True)
    return Field(grid, vals)


def stream_packet(
    grid: Grid,
    c_h: int,
    c_v: int,
    amplitude: float = 1.0,
    center=(0.0, 0.0, 0.0),
    seed: int | None = None,
    scale: tuple | None = None,
) -> Field:
    """Divergence-free 3-component field (d2 psi, -d1 psi, 0) from a packet.

    Exactly divergence-free for any stream function psi, and the dyadic block
    content matches the packet's (the curl multiplier does not move
    frequencies).  `scale = (eps, gamma)` applies the anisotropic rescaling to
    the scalar stream function before taking the curl, so rescaled family
    members stay exactly divergence-free.
    """
    psi = spectral_packet(grid, c_h, c_v, 1.0, center, seed)
    if scale is not None:
        psi, _ = scale_translate(psi, scale[0], scale[1])
    P = to_spectral(psi)
    pc = P.coeffs[0].copy()
    # the stream function must vanish on the Nyquist planes: those modes have
    # no Hermitian partner and their curl would break exact divergence-freeness
    for axis, n in enumerate(grid.dims):
        sl = [slice(None)] * 3
        sl[axis] = n // 2
        pc[tuple(sl)] = 0.0
    x1, x2, _ = grid.xi()
    ones = np.ones(grid.dims)
    coeffs = np.zeros((3,) + grid.dims, dtype=np.complex128)
    coeffs[0] = 1j * (x2 * ones) * pc
    coeffs[1] = -1j * (x1 * ones) * pc
    f = to_physical(SpectralField(grid, coeffs))
    peak = np.max(np.abs(f.values))
    scale = amplitude / peak if peak > 0 else 1.0
    return Field(grid, f.values * scale)


def band_limited_noise(
    grid: Grid, seed: int, ncomp: int = 1, div_free: bool = False
) -> Field:
    """Random field band-limited to the fully resolvable anisotropic band."""
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((ncomp,) + grid.dims)
    F = to_spectral(Field(grid, vals, mean_free=False))
    coeffs = F.coeffs * band_mask(grid)[None]
    G = SpectralField(grid, coeffs)
    if div_free:
        if ncomp != 3:
            raise StructureError("div_free needs ncomp = 3")
        G = leray_project(G)
    return to_physical(G)


def aniso_gaussian(
    grid: Grid, sigma_h: float, sigma_v: float, center=None, ncomp: int = 1
) -> Field:
    """Mean-free periodized anisotropic Gaussian bump."""
    if sigma_h <= 0 or sigma_v <= 0:
        raise DomainError("gaussian widths must be positive")
    if center is None:
        center = tuple(L / 2 for L in grid.lengths)
    X = grid.meshgrid()
    L = grid.lengths
    total = np.zeros(grid.dims)
    # three periodic images per axis cover sigma up to ~L/3
    for a in (-1, 0, 1):
        d1 = X[0] - center[0] + a * L[0]
        for b in (-1, 0, 1):
            d2 = X[1] - center[1] + b * L[1]
            for c in (-1, 0, 1):
                d3 = X[2] - center[2] + c * L[2]
                total += np.exp(
                    -(d1**2 + d2**2) / (2 * sigma_h**2) - d3**2 / (2 * sigma_v**2)
                )
    total -= total.mean()
    vals = np.broadcast_to(total, (ncomp,) + grid.dims).copy()
    return Field(grid, vals)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> Field:
    """Classic Taylor-Green vortex, divergence-free with zero third component."""
    l1, l2, _ = grid.lengths
    if abs(l1 - l2) > 1e-12:
        raise StructureError("taylor_green needs L1 == L2")
    X1, X2, X3 = grid.meshgrid()
    k1 = 2 * math.pi / l1
    k3 = 2 * math.pi / grid.lengths[2]
    u = amplitude * np.sin(k1 * X1) * np.cos(k1 * X2) * np.cos(k3 * X3)
    v = -amplitude * np.cos(k1 * X1) * np.sin(k1 * X2) * np.cos(k3 * X3)
    w = np.zeros(grid.dims)
    return Field(grid, np.stack([u, v, w]))


def lambda_family(
    base: Field,
    alpha: int,
    beta: int,
    window,
    core_point=(0.0, 0.0, 0.0),
    core_slope=(0.0, 0.0, 0.0),
):
    """Rescaled-translated family f_n = Lambda_{2^-an, 2^-bn, x_n} f.

    With alpha = beta this is the isotropically self-similar family; with
    alpha != beta it oscillates anisotropically.  Returns {n: Field}.
    """
    out = {}
    for n in window:
        x = tuple(core_point[i] + n * core_slope[i] for i in range(3))
        f, _ = scale_translate(base, 2.0 ** (-alpha * n), 2.0 ** (-beta * n), x)
        out[n] = f
    return out


def gate_surrogate_norm(f: Field) -> float:
    """Grid surrogate of the isotropic B^{1/2}_{2,1} norm.

    Sums 2^{max(k,j)/2} ||Delta_k^h Delta_j^v f||_{L2} over resolvable blocks;
    max(k, j) tracks the isotropic frequency size of an anisotropic block.
    """
    from .besov import block_lp_table

    ks, js, table = block_lp_table(f, 2.0)
    w = 2.0 ** (np.maximum(ks[:, None], js[None, :]) / 2.0)
    return float(np.sum(w * table))


def gate_datum(grid: Grid, c_h: int, c_v: int, rho: float = 1.0, seed: int | None = None) -> Field:
    """Divergence-free frequency-separated datum normalized to surrogate rho.

    Content sits in shells {c_h-1, c_h} x {c_v-1, c_v}, i.e. j - k within
    (c_v - c_h) +- 1: pick c_v - c_h = -(N0+2) (resp. +(N0+2)) to satisfy the
    separation condition |j - k| >= N0 + 1 strictly.
    """
    u = stream_packet(grid, c_h, c_v, 1.0, seed=seed)
    r = gate_surrogate_norm(u)
    if r == 0:
        raise DomainError("gate datum content fell outside resolvable shells")
    return Field(grid, u.values * (rho / r))


def gate_grid_v0() -> Grid:
    """Box whose shell ranges reach j - k = -8 (horizontal above vertical)."""
    return Grid((64, 64, 64), (math.pi / 8, math.pi / 8, 8 * math.pi))


def gate_grid_w0() -> Grid:
    """Box whose shell ranges reach j - k = +8 (vertical above horizontal)."""
    return Grid((64, 64, 1024), (2 * math.pi, 2 * math.pi, math.pi / 4))


def gate_mode_datum(grid: Grid, k: int, j: int, rho: float = 1.0) -> Field:
    """Single-block divergence-free datum at exact dyadic moduli.

    The stream function is one lattice mode with |xi_h| = 2^{k+1} and
    |xi3| = 2^{j+1}, which sits in the dyadic block (k, j) alone with
    multiplier weight exactly one; the datum is normalized to surrogate rho.
    """
    xi_h = 2.0 ** (k + 1)
    xi_v = 2.0 ** (j + 1)
    m1 = xi_h * grid.lengths[0] / (2 * math.pi)
    m3 = xi_v * grid.lengths[2] / (2 * math.pi)
    if abs(m1 - round(m1)) > 1e-9 or abs(m3 - round(m3)) > 1e-9:
        raise DomainError(f"moduli (2^{k+1}, 2^{j+1}) not on this lattice")
    X1, _, X3 = grid.meshgrid()
    psi = np.cos(xi_h * X1 + 0.3) * np.cos(xi_v * X3 + 0.7)
    u2 = xi_h * np.sin(xi_h * X1 + 0.3) * np.cos(xi_v * X3 + 0.7)  # -d1 psi
    vals = np.stack([np.zeros(grid.dims), u2, np.zeros(grid.dims)])
    f = Field(grid, vals)
    r = gate_surrogate_norm(f)
    return Field(grid, vals * (rho / r))


def gate_family_v0(n0_list, rho: float = 1.0):
    """Family of one-sided data with all content at j - k = -(N0 + 2).

    Single-block exact-modulus construction: the measured B^{0,1/2}_{2,1} norm
    of the low-vertical piece then scales as 2^{-(N0+2)/2} rho exactly.
    Returns (grid, {N0: Field}).
    """
    grid = gate_grid_v0()
    pairs = {2: (4, 0), 3: (4, -1), 4: (4, -2), 5: (4, -3), 6: (5, -3)}
    out = {}
    for n0 in n0_list:
        if n0 not in pairs:
            raise DomainError(f"v0 family supports N0 in {sorted(pairs)}, got {n0}")
        k, j = pairs[n0]
        out[n0] = gate_mode_datum(grid, k, j, rho)
    return grid, out


def gate_family_w0(n0_list, rho: float = 1.0):
    """Family of one-sided data with content centered at j - k = N0 + 2.

    One fixed packet (horizontal octave times vertical octave) is rescaled by
    exact vertical dyadic shrinks, so the L^3 block norms follow the vertical
    concentration scaling 2^{j/6} and the measured B^{0,0}_{3,1} norm decays
    like 2^{-N0/3} at fixed surrogate rho.  Returns (grid, {N0: Field}).
    """
    grid = gate_grid_w0()
    base = stream_packet(grid, c_h=1, c_v=5, amplitude=1.0)
    out = {}
    for n0 in n0_list:
        b = n0 - 2
        if b < 0 or b > 4:
            raise DomainError(f"w0 family supports N0 in [2, 6], got {n0}")
        vals = base.values
        if b > 0:
            scaled, _ = scale_translate(base, 1.0, 2.0 ** (-b))
            vals = scaled.values
        f = Field(grid, vals, mean_free=False)
        r = gate_surrogate_norm(f)
        out[n0] = Field(grid, vals * (rho / r), mean_free=False)
    return grid, out


def _sparse_wavelet_atom(grid: Grid, levels, spots, base_mag, decay, seed):
    """Mean-free field that is an exact finite sum of detail wavelets.

    `spots` lists (level_h, level_v, i1, i2, i3) anchor positions inside the
    detail rings of the Mallat layout; around each anchor a handful of
    coefficients with strictly decreasing magnitudes is planted, so the atom's
    coefficient set is finite, its magnitudes are well gapped, and rank
    matching across a translated family is exact.
    """
    from .hyperwave import WaveletCoeffs, hdwt_inverse

    lh, lv = levels
    rng = np.random.default_rng(seed)
    data = np.zeros((1,) + grid.dims)
    mag = base_mag
    i = 0
    for (i1, i2, i3) in spots:
        for (o1, o2, o3) in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
                             (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)):
            sign = 1.0 if rng.random() < 0.5 else -1.0
            data[0, i1 + o1, i2 + o2, i3 + o3] = sign * mag
            mag *= decay
            i += 1
    c = WaveletCoeffs(grid, lh, lv, data)
    return hdwt_inverse(c)


def two_atom_sequence(
    grid: Grid,
    window,
    kind: str = "core-orthogonal",
    seed: int = 0,
    separation_cells: int = 4,
):
    """Shipped two-atom synthetic sequences with known ground truth.

    kind="core-orthogonal": two fixed-scale wavelet-sum atoms whose cores
    separate by `separation_cells` grid cells per step of n (the translation
    is an exact coefficient shift for the depth-2 transform, so the matched
    coefficients are exactly constant along the window).
    kind="scale-orthogonal": two rescaling families whose vertical scales move
    at different dyadic rates (needs enough vertical levels, e.g. N3 = 512).

    Returns (fields, truth) where fields maps n -> Field and truth records the
    construction.
    """
    n1, _, n3 = grid.dims
    window = list(window)
    dx1 = grid.lengths[0] / n1
    if kind == "core-orthogonal":
        levels = (2, 2)
        # atom A: finest-ring coefficients near the origin corner, moving
        # atom B: level-2 ring coefficients at the far corner, static
        spots_a = [(n1 // 2 + 2, 2, n3 // 2 + 2), (n1 // 2 + 4, 4, 2)]
        spots_b = [(n1 // 4 + 1, n1 // 4 + 2, n3 // 4 + 1), (1, n1 // 4 + 1, n3 // 4 + 2)]
        base_a = _sparse_wavelet_atom(grid, levels, spots_a, 1.0, 0.82, seed=seed + 1)
        base_b = _sparse_wavelet_atom(grid, levels, spots_b, 0.9, 0.78, seed=seed + 2)
        fields = {}
        for n in window:
            fa, _ = scale_translate(base_a, 1.0, 1.0, (n * separation_cells * dx1, 0.0, 0.0))
            fields[n] = fa + base_b
        truth = {
            "atoms": 2,
            "profiles": {"a": base_a, "b": base_b},
            "core_slope_cells": (separation_cells, 0, 0),
            "verdict": "core-orthogonal",
            "levels": levels,
            "coefficients": 32,
        }
        return fields, truth
    if kind == "scale-orthogonal":
        base_a = spectral_packet(grid, c_h=3, c_v=2, amplitude=1.0)
        base_b = spectral_packet(grid, c_h=3, c_v=3, amplitude=0.8)
        fields = {}
        for n in window:
            fa, _ = scale_translate(base_a, 2.0 ** (-n), 2.0 ** (-2 * n), (0.0, 0.0, 0.0))
            fb, _ = scale_translate(base_b, 2.0 ** (-n), 2.0 ** (-3 * n), (0.0, 0.0, 0.0))
            fields[n] = fa + fb
        truth = {
            "atoms": 2,
            "profiles": {"a": base_a, "b": base_b},
            "scale_slopes": ((1, 2), (1, 3)),
            "verdict": "scale-orthogonal",
        }
        return fields, truth
    raise DomainError(f"unknown sequence kind {kind!r}")
