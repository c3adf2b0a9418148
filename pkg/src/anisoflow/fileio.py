"""On-disk formats: AFLD1 field files, CSV tables, and run manifests.

AFLD1 layout: one ASCII header line

    AFLD1 N1 N2 N3 L1 L2 L3 ncomp\\n

followed by raw little-endian 64-bit floats, component-major with x3 fastest
(C order over (ncomp, N1, N2, N3)).  All CSVs use '\\n' line endings and '.'
decimal separators.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FileFormatError
from .grid import Field, Grid

__all__ = [
    "write_afld",
    "read_afld",
    "write_csv",
    "read_csv",
    "write_manifest",
    "write_trajectory",
    "read_trajectory_manifest",
]


def write_afld(path: str, f: Field) -> None:
    n1, n2, n3 = f.grid.dims
    l1, l2, l3 = f.grid.lengths
    header = f"AFLD1 {n1} {n2} {n3} {l1!r} {l2!r} {l3!r} {f.ncomp}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(f.values.astype("<f8").tobytes())


def read_afld(path: str) -> Field:
    """Parse an AFLD1 file; malformed content reports its byte offset."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FileFormatError(path, 0, "missing header newline")
    header = raw[:nl]
    parts = header.split()
    if not parts or parts[0] != b"AFLD1":
        raise FileFormatError(path, 0, f"bad magic {parts[0][:16]!r}" if parts else "empty header")
    if len(parts) != 8:
        raise FileFormatError(path, 0, f"header needs 8 fields, got {len(parts)}")
    offset = len(header)
    try:
        dims = tuple(int(p) for p in parts[1:4])
        lengths = tuple(float(p) for p in parts[4:7])
        ncomp = int(parts[7])
    except ValueError as exc:
        raise FileFormatError(path, 0, f"unparsable header field: {exc}") from exc
    try:
        grid = Grid(dims, lengths)
    except Exception as exc:
        raise FileFormatError(path, 0, str(exc)) from exc
    body = raw[nl + 1 :]
    want = ncomp * grid.npoints * 8
    if len(body) != want:
        raise FileFormatError(path, nl + 1 + min(len(body), want),
                              f"payload {len(body)} bytes, expected {want}")
    values = np.frombuffer(body, dtype="<f8").reshape((ncomp,) + grid.dims).copy()
    if not np.all(np.isfinite(values)):
        bad = int(np.argmin(np.isfinite(values.ravel())))
        raise FileFormatError(path, nl + 1 + 8 * bad, "non-finite sample")
    return Field(grid, values, mean_free=False)


def write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def read_csv(path: str):
    """(header, rows of strings); no type coercion."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise FileFormatError(path, 0, "empty CSV")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_manifest(path: str, entries: dict) -> None:
    """Flat `key = value` manifest, keys sorted for byte reproducibility."""
    with open(path, "w", newline="\n") as fh:
        for key in sorted(entries):
            fh.write(f"{key} = {entries[key]}\n")


def write_trajectory(outdir: str, prefix: str, traj) -> str:
    """Dump a trajectory as one AFLD1 per sample time plus a manifest.

    Returns the manifest path; the manifest lists `t_i = filename` pairs in
    time order plus the grid line.
    """
    os.makedirs(outdir, exist_ok=True)
    lines = {}
    for i, t in enumerate(traj.times):
        name = f"{prefix}_{i:05d}.afld"
        write_afld(os.path.join(outdir, name), traj.field(i))
        lines[f"t_{i:05d}"] = f"{t!r} {name}"
    manifest = os.path.join(outdir, f"{prefix}_manifest.txt")
    write_manifest(manifest, lines)
    return manifest


def read_trajectory_manifest(path: str):
    """Parse a trajectory manifest into (times, field paths)."""
    base = os.path.dirname(path)
    times, paths = [], []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or "=" not in ln:
                continue
            _, val = ln.split("=", 1)
            parts = val.split()
            if len(parts) != 2:
                raise FileFormatError(path, 0, f"bad manifest entry {ln!r}")
            times.append(float(parts[0]))
            paths.append(os.path.join(base, parts[1]))
    return np.asarray(times), paths
