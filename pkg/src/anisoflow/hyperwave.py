"""Hyperbolic (anisotropic tensor-product) discrete wavelet transform.

The basis is the tensor product of a 2D same-scale wavelet multiresolution in
(x1, x2) and an independent 1D multiresolution in x3, so every coefficient is
indexed by lambda = ((j1, k1), (j2, k2)) with independent horizontal and
vertical scales.  The underlying 1D filter is the orthogonal 4-tap pair

    h = ((1+r)/(4 sqrt 2), (3+r)/(4 sqrt 2), (3-r)/(4 sqrt 2), (1-r)/(4 sqrt 2)),
    g[k] = (-1)^k h[3-k],          r = sqrt(3),

applied periodically, which makes the transform exactly orthogonal on the
sample vectors (discrete Parseval holds to machine precision).

Coefficients are stored in the nested Mallat layout: at horizontal level l
(1 = finest) the detail coefficients occupy the L-shaped ring
max(i1, i2) in [N/2^l, N/2^{l-1}) of the (i1, i2) plane (the ring position
encodes both the translation and the detail orientation), and the vertical
transform lays out x3 the same way.  Scale values follow the unit-torus
convention j = log2(N) - level; the approximation band sits one slot below
the coarsest detail scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, StructureError
from .grid import Field, Grid

__all__ = [
    "WaveletIndex",
    "WaveletCoeffs",
    "BestMTermSelection",
    "hdwt_forward",
    "hdwt_inverse",
    "coeff_norm",
    "best_m_term",
    "renormalized_magnitudes",
    "level_maps",
]

_R3 = math.sqrt(3.0)
_H = np.array([1.0 + _R3, 3.0 + _R3, 3.0 - _R3, 1.0 - _R3]) / (4.0 * math.sqrt(2.0))
_G = np.array([_H[3], -_H[2], _H[1], -_H[0]])


def _analyze_last(x: np.ndarray):
    """One periodic analysis step along the last axis (length must be even)."""
    n = x.shape[-1]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(4)[None, :]) % n
    gathered = x[..., idx]
    return gathered @ _H, gathered @ _G


def _synthesize_last(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Inverse of `_analyze_last`."""
    half = a.shape[-1]
    n = 2 * half
    out = np.zeros(a.shape[:-1] + (n,))
    for k in range(4):
        contrib = _H[k] * a + _G[k] * d
        rolled = np.roll(contrib, k // 2, axis=-1)
        out[..., (k % 2)::2] += rolled
    return out


def _analyze_axis(x: np.ndarray, axis: int):
    moved = np.moveaxis(x, axis, -1)
    a, d = _analyze_last(moved)
    packed = np.concatenate([a, d], axis=-1)
    return np.moveaxis(packed, -1, axis)


def _synthesize_axis(x: np.ndarray, axis: int, n: int):
    moved = np.moveaxis(x, axis, -1)
    a, d = moved[..., : n // 2], moved[..., n // 2 : n]
    out = _synthesize_last(a, d)
    merged = np.concatenate([out, moved[..., n:]], axis=-1)
    return np.moveaxis(merged, -1, axis)


@dataclass(frozen=True)
class WaveletIndex:
    """Scale-space index lambda = ((j1, k1), (j2, k2)).

    k1 = (k1a, k1b) is the position in the horizontal Mallat plane at scale
    j1 (the ring position also encodes the detail orientation); k2 is the
    vertical position.  Positions satisfy 0 <= k1 < per-level counts.
    """

    j1: int
    k1: tuple
    j2: int
    k2: int

    def sort_key(self):
        return (self.j1, self.k1[0], self.k1[1], self.j2, self.k2)


@dataclass(frozen=True)
class WaveletCoeffs:
    """Critically sampled hyperbolic wavelet coefficients of one field."""

    grid: Grid
    levels_h: int
    levels_v: int
    data: np.ndarray  # (ncomp, N1, N2, N3) in double-Mallat layout
    normalization: str = "B1q"

    @property
    def ncomp(self) -> int:
        return int(self.data.shape[0])

    def copy_zeroed(self) -> "WaveletCoeffs":
        return WaveletCoeffs(self.grid, self.levels_h, self.levels_v,
                             np.zeros_like(self.data), self.normalization)


@dataclass(frozen=True)
class BestMTermSelection:
    """Nested best-M-term index set with its deterministic tie rule."""

    M: int
    indices: tuple
    tie_rule: str = "lexicographic on (j1, k1a, k1b, j2, k2)"


def _max_levels(n: int) -> int:
    return int(math.log2(n)) - 2


def _validate_levels(grid: Grid, levels_h, levels_v):
    n1, n2, n3 = grid.dims
    if n1 != n2:
        raise ConfigError("hyperbolic transform needs N1 == N2")
    jh = _max_levels(n1) if levels_h is None else int(levels_h)
    jv = _max_levels(n3) if levels_v is None else int(levels_v)
    if not (1 <= jh <= _max_levels(n1)):
        raise ConfigError(f"levels_h={jh} outside [1, {_max_levels(n1)}] for N={n1}")
    if not (1 <= jv <= _max_levels(n3)):
        raise ConfigError(f"levels_v={jv} outside [1, {_max_levels(n3)}] for N={n3}")
    return jh, jv


def hdwt_forward(f: Field, levels_h: int | None = None, levels_v: int | None = None) -> WaveletCoeffs:
    """Forward hyperbolic transform (2D in-plane x tensor 1D vertical)."""
    grid = f.grid
    jh, jv = _validate_levels(grid, levels_h, levels_v)
    data = f.values.copy()
    n1, _, n3 = grid.dims
    for lev in range(jh):
        m = n1 >> lev
        sub = data[:, :m, :m, :]
        sub = _analyze_axis(sub, 1)
        sub = _analyze_axis(sub, 2)
        data[:, :m, :m, :] = sub
    for lev in range(jv):
        m = n3 >> lev
        data[..., :m] = _analyze_axis(data[..., :m], 3)
    return WaveletCoeffs(grid, jh, jv, data)


def hdwt_inverse(c: WaveletCoeffs) -> Field:
    """Inverse transform; perfect reconstruction to ~1e-12 relative error."""
    data = c.data.copy()
    n1, _, n3 = c.grid.dims
    for lev in reversed(range(c.levels_v)):
        m = n3 >> lev
        data[..., :m] = _synthesize_axis(data[..., :m], 3, m)
    for lev in reversed(range(c.levels_h)):
        m = n1 >> lev
        sub = data[:, :m, :m, :]
        sub = _synthesize_axis(sub, 2, m)
        sub = _synthesize_axis(sub, 1, m)
        data[:, :m, :m, :] = sub
    mean_free = bool(np.all(np.abs(data.mean(axis=(1, 2, 3))) <= 1e-12 * (np.max(np.abs(data)) + 1e-300)))
    return Field(c.grid, data, mean_free=mean_free)


# -- level bookkeeping -------------------------------------------------------


def level_maps(grid: Grid, levels_h: int, levels_v: int):
    """Lattice maps from layout position to scale slots and geometry.

    Returns a dict with
        hslot: (N1, N2) int, 0 = approximation band, 1..levels_h detail levels;
        vslot: (N3,) int, same convention vertically;
        j1_of_slot, j2_of_slot: scale value per slot (unit-torus convention);
        geo1a, geo1b: (N1, N2) translation indices within the level;
        geo2: (N3,) vertical translation index;
        orient_h: (N1, N2) in {0..3}; orient_v: (N3,) in {0, 1}.
    """
    n1, _, n3 = grid.dims
    i1 = np.arange(n1)[:, None] * np.ones((1, n1), dtype=int)
    i2 = np.arange(n1)[None, :] * np.ones((n1, 1), dtype=int)
    mx = np.maximum(i1, i2)
    hslot = np.zeros((n1, n1), dtype=int)
    for lev in range(1, levels_h + 1):
        nl = n1 >> lev
        hslot[(mx >= nl) & (mx < 2 * nl)] = lev
    nl_h = np.where(hslot == 0, n1 >> levels_h, n1 >> np.maximum(hslot, 1))
    geo1a = i1 % nl_h
    geo1b = i2 % nl_h
    orient_h = (i1 >= nl_h).astype(int) * 2 + (i2 >= nl_h).astype(int)

    i3 = np.arange(n3)
    vslot = np.zeros(n3, dtype=int)
    for lev in range(1, levels_v + 1):
        nl = n3 >> lev
        vslot[(i3 >= nl) & (i3 < 2 * nl)] = lev
    nl_v = np.where(vslot == 0, n3 >> levels_v, n3 >> np.maximum(vslot, 1))
    geo2 = i3 % nl_v
    orient_v = (i3 >= nl_v).astype(int)

    jmax_h = int(math.log2(n1))
    jmax_v = int(math.log2(n3))
    j1_of_slot = {0: jmax_h - levels_h - 1}
    j1_of_slot.update({lev: jmax_h - lev for lev in range(1, levels_h + 1)})
    j2_of_slot = {0: jmax_v - levels_v - 1}
    j2_of_slot.update({lev: jmax_v - lev for lev in range(1, levels_v + 1)})
    return {
        "hslot": hslot, "vslot": vslot,
        "j1_of_slot": j1_of_slot, "j2_of_slot": j2_of_slot,
        "geo1a": geo1a, "geo1b": geo1b, "geo2": geo2,
        "orient_h": orient_h, "orient_v": orient_v,
    }


def _j_arrays(c: WaveletCoeffs):
    maps = level_maps(c.grid, c.levels_h, c.levels_v)
    j1 = np.vectorize(maps["j1_of_slot"].get)(maps["hslot"])
    j2 = np.vectorize(maps["j2_of_slot"].get)(maps["vslot"])
    return j1, j2, maps


def renormalized_magnitudes(c: WaveletCoeffs) -> np.ndarray:
    """|d_lambda| with coefficients renormalized to the B1q convention.

    The stored transform is discrete-orthonormal; the per-level factor
    2^{j2/2} * sqrt(cell volume) converts to coefficients of wavelets
    normalized in the critical pair of spaces (the same factor serves both,
    since the two spaces share the anisotropic scaling).
    """
    j1, j2, _ = _j_arrays(c)
    mag = np.sqrt(np.sum(c.data**2, axis=0))
    factor = 2.0 ** (j2[None, None, :] / 2.0) * math.sqrt(c.grid.cell_volume)
    return mag * factor


def coeff_norm(c: WaveletCoeffs, space: str, exponent: float) -> float:
    """Sequence-space norm of renormalized coefficients.

    space="Bppp": plain ell^p over all lambda.
    space="B1q":  the nested aggregate
        ( sum_{j1} ( sum_{k1} ( sum_{j2} ( sum_{k2} |d| )^q )^{1/q} )^q )^{1/q}.
    """
    d = renormalized_magnitudes(c)
    if space == "Bppp":
        p = float(exponent)
        if p <= 0:
            raise DomainError("Bppp needs p > 0")
        return float(np.sum(d**p) ** (1.0 / p))
    if space != "B1q":
        raise ConfigError(f"unknown sequence space {space!r}")
    q = float(exponent)
    if q <= 0:
        raise DomainError("B1q needs q > 0")
    j1, j2, maps = _j_arrays(c)
    hslot, vslot = maps["hslot"], maps["vslot"]
    total = 0.0
    for hs in range(0, c.levels_h + 1):
        hmask = hslot == hs
        if not hmask.any():
            continue
        block = d[hmask, :]  # (positions_at_level, N3)
        inner = np.zeros(block.shape[0])
        for vs in range(0, c.levels_v + 1):
            vmask = vslot == vs
            s_k2 = block[:, vmask].sum(axis=1)
            inner += s_k2**q
        per_pos = inner ** (1.0 / q)
        total += per_pos.sum() ** q
    return float(total ** (1.0 / q))


# -- best-M-term projector ---------------------------------------------------


def _flat_order(c: WaveletCoeffs):
    """Deterministic total order: |d| descending, ties lexicographic."""
    d = renormalized_magnitudes(c).ravel()
    j1, j2, maps = _j_arrays(c)
    n1 = c.grid.dims[0]
    n3 = c.grid.dims[2]
    j1f = np.broadcast_to(j1[:, :, None], (n1, n1, n3)).ravel()
    j2f = np.broadcast_to(j2[None, None, :], (n1, n1, n3)).ravel()
    i1 = np.broadcast_to(np.arange(n1)[:, None, None], (n1, n1, n3)).ravel()
    i2 = np.broadcast_to(np.arange(n1)[None, :, None], (n1, n1, n3)).ravel()
    i3 = np.broadcast_to(np.arange(n3)[None, None, :], (n1, n1, n3)).ravel()
    order = np.lexsort((i3, j2f, i2, i1, j1f, -d))
    return order, d, (j1f, i1, i2, j2f, i3)


def coefficient_rows(c: WaveletCoeffs, threshold: float = 0.0):
    """Nonzero coefficients as (j1, k1a, k1b, j2, k2, value) rows.

    For vector fields the value is the Euclidean magnitude across components.
    Rows follow the deterministic (j1, k1a, k1b, j2, k2) order.
    """
    j1, j2, _ = _j_arrays(c)
    n1 = c.grid.dims[0]
    n3 = c.grid.dims[2]
    mag = np.sqrt(np.sum(c.data**2, axis=0))
    rows = []
    for i1 in range(n1):
        for i2 in range(n1):
            for i3 in range(n3):
                v = float(mag[i1, i2, i3])
                if v > threshold:
                    rows.append((int(j1[i1, i2]), i1, i2, int(j2[i3]), i3, v))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    return rows


def selection_rows(sel: BestMTermSelection, c: WaveletCoeffs):
    """Best-M-term selection as (j1, k1a, k1b, j2, k2, value, rank) rows."""
    mag = np.sqrt(np.sum(c.data**2, axis=0))
    rows = []
    for rank, ix in enumerate(sel.indices, start=1):
        rows.append((ix.j1, ix.k1[0], ix.k1[1], ix.j2, ix.k2,
                     float(mag[ix.k1[0], ix.k1[1], ix.k2]), rank))
    return rows


def best_m_term(c: WaveletCoeffs, M: int, target: str = "B1q"):
    """Best-M-term projector: keep the M largest renormalized coefficients.

    Returns (selection, qmf, remainder) with qmf + remainder equal to the
    original field and E_M nested in E_{M+1} by construction.
    """
    if M < 0:
        raise DomainError("M must be >= 0")
    if target not in ("B1q", "Bppp"):
        raise ConfigError(f"unknown target space {target!r}")
    order, _, (j1f, i1, i2, j2f, i3) = _flat_order(c)
    m_eff = min(M, order.size)
    chosen = order[:m_eff]
    indices = tuple(
        WaveletIndex(int(j1f[t]), (int(i1[t]), int(i2[t])), int(j2f[t]), int(i3[t]))
        for t in chosen
    )
    mask = np.zeros(order.size, dtype=bool)
    mask[chosen] = True
    mask3 = mask.reshape(c.grid.dims)
    kept = WaveletCoeffs(c.grid, c.levels_h, c.levels_v,
                         np.where(mask3[None], c.data, 0.0), c.normalization)
    rest = WaveletCoeffs(c.grid, c.levels_h, c.levels_v,
                         np.where(mask3[None], 0.0, c.data), c.normalization)
    qmf = hdwt_inverse(kept)
    remainder = hdwt_inverse(rest)
    sel = BestMTermSelection(M=m_eff, indices=indices)
    return sel, qmf, remainder
