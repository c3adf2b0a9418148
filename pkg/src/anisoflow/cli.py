"""Batch command-line surface.

Commands (each takes --config PATH --out DIR [--seed N]):

    lp-analyze       block energies + oscillation table of one field
    besov-norm       dyadic or heat-characterization norm of one field
    profile-extract  profile decomposition of a field sequence
    ns-solve         plain / perturbed / gate solver runs
    make-corpus      synthetic field generation

Configs are flat `key = value` files; unknown keys are rejected.  Every run
writes a manifest echoing the fully resolved configuration, so runs are
byte-reproducible given (inputs, seed).

Exit codes: 0 success, 2 usage/configuration, 3 I/O or file format,
4 violated precondition (structure/domain/shell range), 5 numerical/data.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import corpus
from .besov import BesovSpec, besov_norm, besov_norm_heat, oscillation_profile
from .errors import (
    AnisoError,
    ConfigError,
    DataError,
    DomainError,
    FileFormatError,
    PreconditionError,
    ShellRangeError,
    StructureError,
)
from .fileio import (
    read_afld,
    read_trajectory_manifest,
    write_afld,
    write_csv,
    write_manifest,
    write_trajectory,
)
from .grid import Field, Grid
from .nsolve import (
    GateConfig,
    SolutionTrajectory,
    SolverConfig,
    aniso_gate_run,
    aniso_gate_split,
    blowup_monitor,
    nsp_solve,
    picard_solve,
    trajectory_y_norm,
)
from .profiles import SequenceInput, extract_profiles, stability_sum

_COMMAND_KEYS = {
    "lp-analyze": {"field", "p"},
    "besov-norm": {"field", "s", "s_v", "p", "q", "mode"},
    "profile-extract": {"manifest", "m", "l_max", "p", "q", "levels_h", "levels_v"},
    "ns-solve": {
        "field", "t_max", "dt", "mode", "u_manifest", "f_manifest",
        "n0", "n0_list", "rho", "c0", "drift_threshold", "p",
    },
    "make-corpus": {
        "kind", "dims", "lengths", "sigma_h", "sigma_v", "amplitude",
        "alpha", "beta", "window", "separation_cells", "n0_list", "rho",
        "c_h", "c_v", "prefix", "sequence_kind",
    },
}


def load_config(path: str, allowed: set) -> dict:
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, ln in enumerate(fh, 1):
                ln = ln.strip()
                if not ln or ln.startswith("#"):
                    continue
                if "=" not in ln:
                    raise ConfigError(f"{path}:{lineno}: expected `key = value`")
                key, val = (part.strip() for part in ln.split("=", 1))
                if key not in allowed:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                cfg[key] = val
    except OSError as exc:
        raise FileFormatError(path, 0, str(exc)) from exc
    return cfg


def _floats(val: str):
    return tuple(float(x) for x in val.replace(",", " ").split())


def _ints(val: str):
    return tuple(int(x) for x in val.replace(",", " ").split())


def _echo_manifest(outdir, command, cfg, seed):
    entries = {f"config.{k}": v for k, v in cfg.items()}
    entries["command"] = command
    entries["seed"] = seed
    write_manifest(os.path.join(outdir, "run_manifest.txt"), entries)


def cmd_lp_analyze(cfg: dict, outdir: str, seed: int) -> int:
    f = read_afld(cfg["field"])
    p = float(cfg.get("p", 2.0))
    table = oscillation_profile(f, p)
    from .besov import block_lp_table

    ks, js, raw = block_lp_table(f, p)
    rows = [(int(k), int(j), float(raw[a, b]), p)
            for a, k in enumerate(ks) for b, j in enumerate(js)]
    write_csv(os.path.join(outdir, "block_energies.csv"),
              ["k", "j", "energy_Lp", "p"], rows)
    rows2 = [(int(k), int(j), float(table.weighted[a, b]))
             for a, k in enumerate(table.ks) for b, j in enumerate(table.js)]
    write_csv(os.path.join(outdir, "oscillation.csv"),
              ["k", "j", "weighted_norm"], rows2)
    kstar, jstar = table.argmax
    write_csv(os.path.join(outdir, "oscillation_argmax.csv"),
              ["k_star", "j_star", "indicator"],
              [(kstar, jstar, table.indicator)])
    return 0


def cmd_besov_norm(cfg: dict, outdir: str, seed: int) -> int:
    f = read_afld(cfg["field"])
    spec = BesovSpec(float(cfg["s"]), float(cfg["s_v"]), float(cfg["p"]), float(cfg["q"]))
    mode = cfg.get("mode", "dyadic")
    if mode == "dyadic":
        value = besov_norm(f, spec)
    elif mode == "heat":
        value = besov_norm_heat(f, spec)
    else:
        raise ConfigError(f"mode must be dyadic or heat, got {mode!r}")
    print(value)
    write_csv(os.path.join(outdir, "norm.csv"), ["name", "value"],
              [(f"besov_{mode}", value)])
    return 0


def _read_sequence(path: str):
    times, paths = read_trajectory_manifest(path)
    fields = {}
    for n, p in zip(times, paths):
        fields[int(round(n))] = read_afld(p)
    return fields


def cmd_profile_extract(cfg: dict, outdir: str, seed: int) -> int:
    fields = _read_sequence(cfg["manifest"])
    window = tuple(sorted(fields))
    levels_h = int(cfg["levels_h"]) if "levels_h" in cfg else None
    levels_v = int(cfg["levels_v"]) if "levels_v" in cfg else None
    inp = SequenceInput(
        n_window=window,
        fields=fields,
        budget_m=int(cfg.get("m", 256)),
        q=float(cfg.get("q", 1.0)),
        levels_h=levels_h,
        levels_v=levels_v,
    )
    rep = extract_profiles(inp, int(cfg.get("l_max", 4)), float(cfg.get("p", 3.0)))
    rows = [(n, L, v) for (n, L), v in sorted(rep.remainder_norms.items())]
    write_csv(os.path.join(outdir, "remainders.csv"), ["n", "L", "norm"], rows)
    total, ratio = stability_sum(rep, inp)
    with open(os.path.join(outdir, "report.txt"), "w", newline="\n") as fh:
        fh.write(f"atoms {len(rep.atoms)}\n")
        fh.write(f"stability_sum {total!r}\n")
        fh.write(f"stability_ratio {ratio!r}\n")
        fh.write(f"undetermined_components {len(rep.undetermined_components)}\n\n")
        for atom in rep.atoms:
            fh.write(f"[atom {atom.label}]\n")
            fh.write(f"  scale_index {atom.scale_index}\n")
            fh.write(f"  core_index {atom.core_index}\n")
            fh.write(f"  norm {atom.norm!r}\n")
            fh.write(f"  members {len(atom.members)}\n")
            fh.write(f"  undetermined {atom.undetermined}\n")
        fh.write("\n[pairwise]\n")
        for (a, b), verdict in sorted(rep.pairwise.items()):
            fh.write(f"  {a} {b} {verdict}\n")
    for atom in rep.atoms:
        write_afld(os.path.join(outdir, f"profile_{atom.label:02d}.afld"), atom.profile)
    return 0


def cmd_ns_solve(cfg: dict, outdir: str, seed: int) -> int:
    u0 = read_afld(cfg["field"])
    mode = cfg.get("mode", "plain")
    scfg = SolverConfig(
        grid=u0.grid,
        t_max=float(cfg["t_max"]),
        dt=float(cfg["dt"]),
        c0=float(cfg.get("c0", SolverConfig.c0)),
        p=float(cfg.get("p", 2.0)),
        drift_threshold=float(cfg.get("drift_threshold", SolverConfig.drift_threshold)),
    )

    def dump(traj, prefix):
        write_trajectory(outdir, prefix, traj)
        rows = []
        for name in ("l2", "path_besov", "running_tilde_l2", "div_defect"):
            series = traj.monitors[name]
            rows.extend((float(t), name, float(v)) for t, v in zip(traj.times, series))
        write_csv(os.path.join(outdir, f"{prefix}_monitors.csv"),
                  ["t", "name", "value"], rows)

    if mode == "plain":
        traj = picard_solve(u0, scfg)
        dump(traj, "u")
        mon = blowup_monitor(traj, scfg)
        write_csv(os.path.join(outdir, "summary.csv"), ["name", "value"], [
            ("status", traj.status),
            ("data_norm", traj.monitors["data_norm"]),
            ("y_norm", trajectory_y_norm(traj, scfg.p)),
            ("blowup_suspected", mon["blowup_suspected"]),
        ])
        return 0
    if mode == "perturbed":
        def load_traj(key):
            if key not in cfg:
                return None
            times, paths = read_trajectory_manifest(cfg[key])
            states = np.stack([read_afld(p).values for p in paths])
            return SolutionTrajectory(u0.grid, times, states)

        U = load_traj("u_manifest")
        F = load_traj("f_manifest")
        traj = nsp_solve(u0, U, F, scfg)
        dump(traj, "u")
        write_csv(os.path.join(outdir, "summary.csv"), ["name", "value"], [
            ("status", traj.status),
            ("interval_count", traj.monitors["interval_count"]),
            ("smallness_ok", traj.monitors["smallness_ok"]),
        ])
        return 0
    if mode == "gate":
        rho = float(cfg.get("rho", 1.0))
        n0_list = _ints(cfg["n0_list"]) if "n0_list" in cfg else (int(cfg["n0"]),)
        rows = []
        for n0 in n0_list:
            gate = GateConfig(n0=n0, rho=rho)
            if len(n0_list) > 1:
                v0, w0, bounds = aniso_gate_split(u0, gate)
                rows.append((n0, bounds["v0_norm_B0_half_21"],
                             bounds["w0_norm_B00_31"], "", ""))
            else:
                report = aniso_gate_run(u0, gate, scfg)
                dump(report["combined"], "u")
                rows.append((
                    n0,
                    report["bounds"]["v0_norm_B0_half_21"],
                    report["bounds"]["w0_norm_B00_31"],
                    report["completed"],
                    report["final_monitor"],
                ))
        write_csv(os.path.join(outdir, "gate_report.csv"),
                  ["N0", "v0_norm", "w0_norm", "completed", "final_monitor"], rows)
        return 0
    raise ConfigError(f"ns-solve mode must be plain/perturbed/gate, got {mode!r}")


def cmd_make_corpus(cfg: dict, outdir: str, seed: int) -> int:
    kind = cfg.get("kind")
    prefix = cfg.get("prefix", "field")
    dims = _ints(cfg.get("dims", "32 32 32"))
    lengths = _floats(cfg.get("lengths", "6.283185307179586 6.283185307179586 6.283185307179586"))
    grid = Grid(dims, lengths)
    if kind == "aniso-gaussian":
        f = corpus.aniso_gaussian(grid, float(cfg["sigma_h"]), float(cfg["sigma_v"]))
        write_afld(os.path.join(outdir, f"{prefix}.afld"), f)
    elif kind == "taylor-green":
        f = corpus.taylor_green(grid, float(cfg.get("amplitude", 1.0)))
        write_afld(os.path.join(outdir, f"{prefix}.afld"), f)
    elif kind == "band-noise":
        f = corpus.band_limited_noise(grid, seed)
        write_afld(os.path.join(outdir, f"{prefix}.afld"), f)
    elif kind == "lambda-family":
        base = corpus.spectral_packet(grid, int(cfg.get("c_h", 2)), int(cfg.get("c_v", 2)))
        window = _ints(cfg.get("window", "0 1 2 3"))
        fam = corpus.lambda_family(base, int(cfg.get("alpha", 1)),
                                   int(cfg.get("beta", 1)), window)
        entries = {}
        for n, f in fam.items():
            name = f"{prefix}_{n:05d}.afld"
            write_afld(os.path.join(outdir, name), f)
            entries[f"n_{n:05d}"] = f"{float(n)!r} {name}"
        write_manifest(os.path.join(outdir, f"{prefix}_manifest.txt"), entries)
    elif kind == "two-atom":
        window = _ints(cfg.get("window", "0 1 2 3 4 5"))
        fields, truth = corpus.two_atom_sequence(
            grid, window, cfg.get("sequence_kind", "core-orthogonal"), seed,
            int(cfg.get("separation_cells", 4)),
        )
        entries = {}
        for n, f in fields.items():
            name = f"{prefix}_{n:05d}.afld"
            write_afld(os.path.join(outdir, name), f)
            entries[f"n_{n:05d}"] = f"{float(n)!r} {name}"
        write_manifest(os.path.join(outdir, f"{prefix}_manifest.txt"), entries)
    elif kind == "gate-v0":
        _, fam = corpus.gate_family_v0(_ints(cfg.get("n0_list", "2 3 4 5 6")),
                                       float(cfg.get("rho", 1.0)))
        for n0, f in fam.items():
            write_afld(os.path.join(outdir, f"{prefix}_n0_{n0}.afld"), f)
    elif kind == "gate-w0":
        _, fam = corpus.gate_family_w0(_ints(cfg.get("n0_list", "2 3 4 5 6")),
                                       float(cfg.get("rho", 1.0)))
        for n0, f in fam.items():
            write_afld(os.path.join(outdir, f"{prefix}_n0_{n0}.afld"), f)
    else:
        raise ConfigError(f"unknown corpus kind {kind!r}")
    return 0


_DISPATCH = {
    "lp-analyze": cmd_lp_analyze,
    "besov-norm": cmd_besov_norm,
    "profile-extract": cmd_profile_extract,
    "ns-solve": cmd_ns_solve,
    "make-corpus": cmd_make_corpus,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="anisoflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DISPATCH:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _COMMAND_KEYS[args.command])
        os.makedirs(args.out, exist_ok=True)
        rc = _DISPATCH[args.command](cfg, args.out, args.seed)
        _echo_manifest(args.out, args.command, cfg, args.seed)
        return rc
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (FileFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (PreconditionError, StructureError, DomainError, ShellRangeError) as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 4
    except (DataError, AnisoError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
