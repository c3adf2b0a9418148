"""Anisotropic Littlewood-Paley / Besov analysis, hyperbolic-wavelet profile
extraction, and small-data Navier-Stokes solvers on periodic grids."""

from .grid import CutoffProfile, Field, Grid, SpectralField
from .spectral import (
    band_limit,
    band_mask,
    divergence,
    divergence_defect,
    heat_flow,
    horizontal_helmholtz_split,
    iso_block,
    l2_norm,
    leray_project,
    lp_block,
    lp_norm,
    to_physical,
    to_spectral,
)
from .besov import (
    BesovSpec,
    OscillationTable,
    ScaleCoreTriplet,
    TimeSpec,
    besov_norm,
    besov_norm_heat,
    chemin_lerner_norm,
    iso_besov_norm,
    oscillation_profile,
    product_law_ratio,
    scale_translate,
    triplets_orthogonal,
)
from .hyperwave import (
    BestMTermSelection,
    WaveletCoeffs,
    WaveletIndex,
    best_m_term,
    coeff_norm,
    coefficient_rows,
    hdwt_forward,
    hdwt_inverse,
    selection_rows,
)
from .profiles import (
    DecompositionReport,
    ProfileAtom,
    SequenceInput,
    classify_pair,
    divergence_diagnostics,
    extract_profiles,
    stability_sum,
)
from .nsolve import (
    GateConfig,
    SolutionTrajectory,
    SolverConfig,
    aniso_gate_run,
    aniso_gate_split,
    blowup_monitor,
    duhamel_bilinear,
    energy_check,
    nsp_solve,
    picard_solve,
    tilde_l2_norm,
    trajectory_x_norm,
    trajectory_y_norm,
)
from .fileio import read_afld, write_afld

__version__ = "0.1.0"
