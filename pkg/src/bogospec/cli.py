"""Command-line front end: compute, enumerate, diagonalize, verify.

Every run echoes its fully resolved configuration into `# bogospec`
header lines, and identical configurations produce byte-identical CSV
output (fixed seeds, deterministic summation and ordering throughout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__, fock_ed, verify
from .bogoliubov import (
    QuadratureSpec,
    bogoliubov_energy,
    coefficients,
    energy_density_limit,
)
from .excitations import classify_for_figure, dispersion, enumerate_below
from .fock_ed import EDConfig, default_max_excited
from .model import LatticeSpec, Potential, lattice_points


class UsageError(ValueError):
    pass


def parse_vhat(text: str, dimension: int) -> Potential:
    """Parse --vhat strings: gaussian:AMP:WIDTH or table:P,V;P,V;..."""
    family, _, rest = text.partition(":")
    try:
        if family == "gaussian":
            amp_s, _, width_s = rest.partition(":")
            return Potential.gaussian(float(amp_s), float(width_s), dimension)
        if family == "table":
            pairs = [
                tuple(float(t) for t in chunk.split(","))
                for chunk in rest.split(";")
                if chunk
            ]
            return Potential.table(pairs, dimension)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--vhat: cannot parse {text!r}: {exc}") from exc
    raise UsageError(f"--vhat: unknown family {family!r} (use gaussian or table)")


def parse_sectors(text: str, dimension: int) -> list[tuple[int, ...]]:
    """Parse --sectors strings: "0;1;-1" (d=1) or "0 0;1 0" (d=2)."""
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        coords = tuple(int(t) for t in chunk.split())
        if len(coords) != dimension:
            raise UsageError(
                f"--sectors: {chunk!r} has {len(coords)} coordinates, expected {dimension}"
            )
        out.append(coords)
    if not out:
        raise UsageError("--sectors: no sectors given")
    return out


def _emit(
    out: str | None,
    command: str,
    config: dict,
    columns: Sequence[str],
    rows: Iterable[Sequence],
) -> None:
    buf = io.StringIO()
    buf.write(f"# bogospec {__version__}\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pot_config(pot: Potential) -> dict:
    if pot.family == "gaussian":
        return {
            "family": "gaussian",
            "amplitude": pot.amplitude,
            "width": pot.width,
            "dimension": pot.dimension,
        }
    return {
        "family": "table",
        "samples": [list(s) for s in pot.samples],
        "dimension": pot.dimension,
    }


def cmd_dispersion(args: argparse.Namespace) -> int:
    lattice = LatticeSpec(args.L, args.dim)
    pot = parse_vhat(args.vhat, args.dim)
    pts = sorted(
        lattice_points(lattice, args.window, include_zero=False),
        key=lambda p: (p.norm2_int, p.n),
    )
    rows = []
    for p in pts:
        co = coefficients(p, pot)
        rows.append(list(p.n) + [p.norm, co.e, co.alpha, co.c, co.s])
    cols = [f"n{i + 1}" for i in range(args.dim)] + ["abs_p", "energy", "alpha", "c", "s"]
    cfg = {
        "L": args.L,
        "dimension": args.dim,
        "window": args.window,
        "potential": _pot_config(pot),
    }
    _emit(args.out, "dispersion", cfg, cols, rows)
    return 0


def cmd_energy(args: argparse.Namespace) -> int:
    lattice = LatticeSpec(args.L, args.dim)
    pot = parse_vhat(args.vhat, args.dim)
    summary = bogoliubov_energy(lattice, pot, tail_tol=args.tail_tol)
    quad = energy_density_limit(pot, QuadratureSpec(step=args.quad_step))
    rows = [
        ["e_bog", summary.e_bog],
        ["e_bog_alt", summary.e_bog_alt],
        ["n_terms", summary.n_terms],
        ["density_finite_L", summary.density_limit],
        ["density_limit", quad.value],
        ["density_limit_error_estimate", quad.error_estimate],
    ]
    cfg = {
        "L": args.L,
        "dimension": args.dim,
        "tail_tol": args.tail_tol,
        "quad_step": args.quad_step,
        "potential": _pot_config(pot),
    }
    _emit(args.out, "energy", cfg, ["quantity", "value"], rows)
    return 0


def _format_constituents(rec) -> str:
    return ";".join(" ".join(str(c) for c in m.n) for m in rec.constituents)


def cmd_enumerate(args: argparse.Namespace) -> int:
    lattice = LatticeSpec(args.L, args.dim)
    pot = parse_vhat(args.vhat, args.dim)
    table = enumerate_below(lattice, pot, args.kappa, args.window)
    rows = []
    for key in sorted(table.sectors, key=lambda k: (sum(c * c for c in k), k)):
        for rec in table.sectors[key]:
            rows.append(
                list(key)
                + [rec.rank, rec.energy, rec.n_quasi, _format_constituents(rec)]
            )
    cols = [f"n{i + 1}" for i in range(args.dim)] + [
        "j",
        "energy",
        "n_quasi",
        "constituents",
    ]
    cfg = {
        "L": args.L,
        "dimension": args.dim,
        "kappa": args.kappa,
        "window": args.window,
        "potential": _pot_config(pot),
    }
    _emit(args.out, "enumerate", cfg, cols, rows)
    return 0


def cmd_figure(args: argparse.Namespace) -> int:
    lattice = LatticeSpec(args.L, args.dim)
    pot = parse_vhat(args.vhat, args.dim)
    table = enumerate_below(lattice, pot, args.kappa, args.window)
    if args.require_complete_1qp and args.kappa > 0.0:
        undetermined = [
            p.n
            for p in lattice_points(lattice, args.window, include_zero=False)
            if dispersion(p, pot) > args.kappa
        ]
        if undetermined:
            raise UsageError(
                "1qp curve unresolved (dispersion above kappa) in sectors: "
                + "; ".join(str(n) for n in undetermined)
            )
    h = lattice.spacing
    rows = []
    for r in classify_for_figure(table):
        coords = [h * c for c in r.sector]
        rows.append(list(r.sector) + coords + [r.energy, r.n_quasi, r.cls])
    cols = (
        [f"n{i + 1}" for i in range(args.dim)]
        + [f"p{i + 1}" for i in range(args.dim)]
        + ["energy", "n_quasi", "class"]
    )
    cfg = {
        "L": args.L,
        "dimension": args.dim,
        "kappa": args.kappa,
        "window": args.window,
        "potential": _pot_config(pot),
    }
    _emit(args.out, "figure", cfg, cols, rows)
    return 0


def _load_config_file(path: str, dimension_default: int) -> dict:
    allowed = {
        "N",
        "L",
        "dimension",
        "mode_radius",
        "max_excited",
        "sectors",
        "count",
        "tol",
        "seed",
        "potential",
        "family",
        "amplitude",
        "width",
        "samples",
    }
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("--config: top level must be an object")
    for key in raw:
        if key not in allowed:
            raise UsageError(f"--config: unknown key {key!r}")
    return raw


def _resolve_ed_config(args: argparse.Namespace) -> tuple[EDConfig, list, int, float, int]:
    raw = _load_config_file(args.config, args.dim) if args.config else {}
    dim = int(raw.get("dimension", args.dim))
    L = float(raw.get("L", args.L))
    n = int(raw["N"] if args.N is None and "N" in raw else (args.N or 0))
    if n < 1:
        raise UsageError("--N (or config key N) is required and must be >= 1")
    lattice = LatticeSpec(L, dim)
    if args.vhat is not None:
        pot = parse_vhat(args.vhat, dim)
    elif "potential" in raw:
        pd = dict(raw["potential"])
        pot = _pot_from_dict(pd, dim)
    elif "family" in raw:
        pot = _pot_from_dict(raw, dim)
    else:
        raise UsageError("a potential is required (--vhat or config)")
    mode_radius = args.mode_radius if args.mode_radius is not None else raw.get("mode_radius")
    if mode_radius is None:
        raise UsageError("--mode-radius (or config key mode_radius) is required")
    if args.max_excited is not None:
        max_excited = args.max_excited
    elif "max_excited" in raw:
        max_excited = raw["max_excited"]
    else:
        max_excited = default_max_excited(n)
    if args.sectors is not None:
        sectors = parse_sectors(args.sectors, dim)
    elif "sectors" in raw:
        sectors = [tuple(int(c) for c in s) for s in raw["sectors"]]
    else:
        sectors = [(0,) * dim]
    count = args.count if args.count is not None else int(raw.get("count", 3))
    tol = args.tol if args.tol is not None else float(raw.get("tol", 1e-9))
    seed = args.seed if args.seed is not None else int(raw.get("seed", fock_ed.DEFAULT_SEED))
    cfg = EDConfig(n, lattice, pot, float(mode_radius), max_excited)
    return cfg, sectors, count, tol, seed


def _pot_from_dict(pd: dict, dimension: int) -> Potential:
    family = pd.get("family")
    dim = int(pd.get("dimension", dimension))
    if family == "gaussian":
        return Potential.gaussian(float(pd["amplitude"]), float(pd["width"]), dim)
    if family == "table":
        return Potential.table(pd["samples"], dim)
    raise UsageError(f"potential config: unknown family {family!r}")


def cmd_ed(args: argparse.Namespace) -> int:
    cfg, sectors, count, tol, seed = _resolve_ed_config(args)
    zero = (0,) * cfg.lattice.d
    if zero not in sectors:
        sectors = [zero] + sectors
    result = fock_ed.many_body_excitations(
        cfg, sectors, count, tol=tol, seed=seed, max_workers=_threads()
    )
    rows = []
    for key in sorted(result.sector_values, key=lambda k: (sum(c * c for c in k), k)):
        vals = result.sector_values[key]
        gaps = result.sector_gaps[key]
        res = result.sector_residuals[key]
        for j, val in enumerate(vals):
            k_val = val - result.e_ground
            rows.append(list(key) + [j + 1, float(val), float(k_val), float(res[j])])
    cols = [f"sector_n{i + 1}" for i in range(cfg.lattice.d)] + [
        "j",
        "eigenvalue",
        "K_N",
        "residual",
    ]
    header = dict(result.config)
    header.update(sectors=[list(s) for s in sectors], count=count, tol=tol, seed=seed)
    _emit(args.out, "ed", header, cols, rows)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    tol = args.tol if args.tol is not None else 1e-9
    seed = args.seed if args.seed is not None else fock_ed.DEFAULT_SEED
    report = verify.run_default_suite(tol=tol, seed=seed, max_workers=_threads())
    csv_text = report.to_csv_text()
    summary = report.summary()
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        out.with_suffix(".txt").write_text(summary)
    else:
        sys.stdout.write(csv_text)
    sys.stderr.write(summary)
    return 0 if report.all_passed else 1


def _threads() -> int:
    raw = os.environ.get("BOGOSPEC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bogospec",
        description="Bogoliubov spectra and truncated-Fock-space diagonalization "
        "of a homogeneous Bose gas on a torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, need_vhat: bool = True) -> None:
        p.add_argument("--vhat", required=need_vhat, default=None,
                       help="potential, e.g. gaussian:0.1:5 or table:0,0.3;0.5,0;8,0")
        p.add_argument("--L", type=float, default=2.0 * math.pi, help="torus side length")
        p.add_argument("--dim", type=int, default=1, help="dimension (1, 2 or 3)")
        p.add_argument("--out", default=None, help="output CSV path (default stdout)")

    p = sub.add_parser("dispersion", help="elementary excitation curve over a window")
    common(p)
    p.add_argument("--window", type=float, required=True, help="momentum window |p| <= window")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("energy", help="Bogoliubov energy and density limit")
    common(p)
    p.add_argument("--tail-tol", type=float, default=None)
    p.add_argument("--quad-step", type=float, default=0.005)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("enumerate", help="all excitations below an energy cutoff")
    common(p)
    p.add_argument("--kappa", type=float, required=True, help="energy cutoff")
    p.add_argument("--window", type=float, required=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("figure", help="classified spectrum data (dots/triangles/squares)")
    common(p)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--window", type=float, required=True)
    p.add_argument("--require-complete-1qp", action="store_true",
                   help="error out if the 1qp curve is not fully below kappa")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("ed", help="exact diagonalization of momentum sectors")
    common(p, need_vhat=False)
    p.add_argument("--config", default=None, help="JSON run configuration")
    p.add_argument("--N", type=int, default=None, help="particle number")
    p.add_argument("--mode-radius", type=float, default=None)
    p.add_argument("--max-excited", type=int, default=None)
    p.add_argument("--sectors", default=None, help='e.g. "0;1;-1" (d=1), "0 0;1 0" (d=2)')
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("verify", help="run the verification suite; exit 0 iff all pass")
    p.add_argument("--out", default=None, help="report CSV path (summary goes to .txt)")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"bogospec: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
