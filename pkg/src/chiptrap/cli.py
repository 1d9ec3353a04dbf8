"""Command-line front end: ``chiptrap <subcommand> [options]``.

Exit status is 0 on success, 1 for invalid input or configuration and 2 when
a numerical step fails.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiment as ex
from . import resonance as rs
from .adiabatic import fgr_decay_estimate
from .eigen import EigenSolverError
from .heff import ConfigError, SolverConfig
from .species import get_species, load_species
from .trapfield import WireBiasField, harmonic_units

THREADS_ENV = "CHIPTRAP_THREADS"
TABLE1_RHO_SQ = (0.2, 0.25, 0.31, 0.4)
TABLE1_GAMMA = (1.0e-3, 4.8e-3, 16.0e-3, 41.8e-3)
TABLE1_SPLIT = (0.15, 0.18, 0.21, 0.25)
TABLE1_TOL = {"Gamma": 0.10, "split": 0.05}

# config-file key -> (namespace attribute, type)
_SOLVER_KEYS = {
    "rho_sq": ("rho_sq", str),
    "m": ("m", str),
    "phi": ("phi", float),
    "phi2": ("phi2", float),
    "dr": ("dr", float),
    "delta_r": ("dr", float),
    "n": ("n", int),
    "h_reg": ("h_reg", float),
    "fd_order": ("fd_order", int),
    "method": ("method", str),
    "threads": ("threads", int),
}
_OUTPUT_KEYS = {"format": ("format", str), "out": ("out", str)}
DEFAULTS = {
    "phi": 0.2,
    "phi2": rs.DEFAULT_PHI2,
    "dr": 0.05,
    "n": 599,
    "h_reg": 0.01,
    "fd_order": 6,
    "method": "dense",
    "format": "csv",
    "out": None,
    "threads": None,
    "species": None,
}


class UsageError(Exception):
    """Bad command line or config; reported in one line with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message} (see --help)")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chiptrap", description="Majorana resonances of a spin-1 atom in a chip trap.")
    parser.add_argument("--config", help="INI file with [solver], [species] and [output] sections")
    sub = parser.add_subparsers(dest="command", metavar="{field,spectrum,scan,table1,lifetime,fgr}", parser_class=_Parser)

    def solver_opts(p, multi=False):
        if multi:
            p.add_argument("--rho-sq", dest="rho_sq", help="comma-separated omega_T/omega_L values")
            p.add_argument("--m", help="comma-separated angular momenta (default 0)")
        else:
            p.add_argument("--rho-sq", dest="rho_sq", help="omega_T/omega_L")
            p.add_argument("--m", help="angular momentum (default 0)")
        p.add_argument("--phi", type=float, help="first rotation angle (default 0.2)")
        p.add_argument("--phi2", type=float, help="second rotation angle (default 0.3)")
        p.add_argument("--dr", type=float, help="radial step (default 0.05)")
        p.add_argument("--n", type=int, help="radial points per channel minus one (default 599, R = 30)")
        p.add_argument("--h-reg", dest="h_reg", type=float, help="saturation of the anti-trapped potential (default 0.01)")
        p.add_argument("--fd-order", dest="fd_order", type=int, help="finite-difference order (default 6)")
        p.add_argument("--method", choices=("dense", "targeted"), help="full spectrum or shift-invert near the low levels")
        p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")

    def output_opts(p):
        p.add_argument("--out", help="write results here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"))

    def unit_opts(p):
        p.add_argument("--species", help="built-in species name (default rb87)")
        p.add_argument("--from-constants", dest="from_constants", action="store_true", default=None,
                       help="derive unit coefficients from physical constants")

    p = sub.add_parser("field", help="trap geometry of a wire + bias configuration")
    p.add_argument("--iw", type=float, required=True, help="wire current (A)")
    p.add_argument("--b0", type=float, required=True, help="planar bias field (Gauss)")
    p.add_argument("--bz", type=float, required=True, help="axial bias field (Gauss)")
    p.add_argument("--species")

    p = sub.add_parser("spectrum", help="trap levels for one (rho^2, m)")
    solver_opts(p)
    p.add_argument("--levels", type=int, default=None, help="keep only the lowest N levels")
    output_opts(p)

    p = sub.add_parser("scan", help="levels over a grid of rho^2 and m")
    solver_opts(p, multi=True)
    p.add_argument("--levels", type=int, default=None)
    output_opts(p)

    p = sub.add_parser("table1", help="ground widths and +-1 splittings at the four reference points")
    solver_opts(p)

    p = sub.add_parser("lifetime", help="lifetime and gradient along a bias sweep")
    solver_opts(p, multi=True)
    p.add_argument("--bz", help="bias value(s) in Gauss (default: 25 log-spaced in 0.01..1)")
    p.add_argument("--input", help="reuse levels from a CSV or JSON file written by spectrum/scan")
    unit_opts(p)
    output_opts(p)

    p = sub.add_parser("fgr", help="computed ground widths against the golden-rule estimate")
    solver_opts(p, multi=True)
    output_opts(p)
    return parser


# -- configuration ------------------------------------------------------------


def read_config(path) -> dict:
    parser = configparser.ConfigParser()
    try:
        if not parser.read(path):
            raise UsageError(f"config file not found: {path}")
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc.message.splitlines()[0]}") from None
    values = {}
    for section, table in (("solver", _SOLVER_KEYS), ("output", _OUTPUT_KEYS)):
        if not parser.has_section(section):
            continue
        for key, raw in parser[section].items():
            if key not in table:
                raise UsageError(f"{path}: unknown key '{key}' in [{section}]")
            attr, kind = table[key]
            try:
                values[attr] = kind(raw)
            except ValueError:
                raise UsageError(f"{path}: [{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None
    if parser.has_section("species"):
        values["species_obj"] = load_species(path)
    return values


def resolve(args: argparse.Namespace, env=None) -> argparse.Namespace:
    """Merge command-line flags over config values over defaults."""
    env = os.environ if env is None else env
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None or key not in merged:
            merged[key] = value
    if merged.get("threads") is None:
        raw = env.get(THREADS_ENV)
        try:
            merged["threads"] = int(raw) if raw else 1
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if merged["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return argparse.Namespace(**merged)


def solver_config(ns, rho_sq: float, m: int = 0) -> SolverConfig:
    return SolverConfig(
        rho_sq=rho_sq, m=m, phi=ns.phi, delta_r=ns.dr, n=ns.n, h_reg=ns.h_reg, fd_order=ns.fd_order
    )


def _rho_list(ns, default=None) -> list[float]:
    if getattr(ns, "rho_sq", None) is None:
        if default is None:
            raise UsageError("--rho-sq is required")
        return list(default)
    values = _float_list(ns.rho_sq)
    if not values:
        raise UsageError("--rho-sq is empty")
    if any(not v > 0 for v in values):
        raise UsageError(f"--rho-sq values must be positive, got {ns.rho_sq}")
    return values


def _m_list(ns) -> list[int]:
    return _int_list(ns.m) if getattr(ns, "m", None) is not None else [0]


def _species(ns):
    """Flag beats the config's [species] section, which beats the rb87 default."""
    if ns.species:
        return get_species(ns.species)
    return getattr(ns, "species_obj", None) or get_species("rb87")


def _coefficients(ns) -> ex.Coefficients:
    if getattr(ns, "from_constants", None):
        return ex.Coefficients.from_species(_species(ns))
    if _species(ns).name.lower() != "rb87":
        raise UsageError("built-in coefficients are for rb87 only; add --from-constants for other species")
    return ex.Coefficients.tabulated()


def _echo(ns) -> dict:
    keys = ("phi", "phi2", "dr", "n", "h_reg", "fd_order", "method")
    return {k: getattr(ns, k) for k in keys}


def _emit(text: str, ns, stdout) -> None:
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_records(records, ns, stdout, extra=None) -> None:
    config = {**_echo(ns), **(extra or {})}
    text = rs.to_json(records, config) if ns.format == "json" else rs.to_csv(records, config)
    _emit(text, ns, stdout)


def _solve_kw(ns) -> dict:
    return {"phi2": ns.phi2, "method": ns.method}


# -- subcommands ------------------------------------------------------------------


def cmd_field(ns, stdout) -> int:
    species = _species(ns)
    field = WireBiasField(I_w=ns.iw, B0=ns.b0 * ex.GAUSS, B_z=ns.bz * ex.GAUSS)
    geo = harmonic_units(field, species)
    rows = {
        "x0_m": geo.minimum[0],
        "y0_m": geo.minimum[1],
        "G_T_per_m": geo.G,
        "nu_T_Hz": geo.nu_T,
        "ell_T_m": geo.ell_T,
        "omega_L_rad_per_s": geo.omega_L,
        "rho_sq": geo.rho_sq,
    }
    for key, value in rows.items():
        stdout.write(f"{key} = {value:.9g}\n")
    return 0


def cmd_spectrum(ns, stdout) -> int:
    rho = _rho_list(ns)
    m = _m_list(ns)
    if len(rho) != 1 or len(m) != 1:
        raise UsageError("spectrum takes a single --rho-sq and --m; use 'scan' for lists")
    cls = rs.solve_point(solver_config(ns, rho[0], m[0]), **_solve_kw(ns))
    levels = cls.trap_levels()[: ns.levels] if ns.levels else cls.trap_levels()
    _emit_records(levels, ns, stdout, {"rho_sq": rho[0], "m": m[0]})
    return 0 if levels else 2


def _run_scan(ns, rho, m, levels=None):
    template = solver_config(ns, rho[0], 0)
    results = rs.scan(rho, m, template, threads=ns.threads, levels=levels, **_solve_kw(ns))
    failures = [r for r in results if r.error]
    for r in failures:
        sys.stderr.write(f"warning: rho_sq={r.rho_sq} m={r.m}: {r.error}\n")
    return results, failures


def cmd_scan(ns, stdout) -> int:
    results, failures = _run_scan(ns, _rho_list(ns), _m_list(ns), ns.levels)
    _emit_records(rs.flatten(results), ns, stdout)
    return 2 if failures and len(failures) == len(results) else 0


def _ground_and_split(results):
    """{rho_sq: (m=0 ground, E(-1) - E(+1))} from scan results."""
    by_key = {(r.rho_sq, r.m): r for r in results}
    out = {}
    for (rho_sq, m), r in by_key.items():
        if m != 0 or not r.levels:
            continue
        plus, minus = by_key.get((rho_sq, 1)), by_key.get((rho_sq, -1))
        split = None
        if plus and minus and plus.levels and minus.levels:
            split = rs.splitting(plus.levels[0], minus.levels[0])
        out[rho_sq] = (r.levels[0], split)
    return out


def cmd_table1(ns, stdout) -> int:
    results, failures = _run_scan(ns, list(TABLE1_RHO_SQ), [0, 1, -1], levels=1)
    table = _ground_and_split(results)
    stdout.write(f"{'rho_sq':>7} {'Gamma_num':>12} {'ref':>9} {'dev':>8} {'dE':>9} {'ref':>6} {'dev':>8}  status\n")
    ok = True
    for rho_sq, gamma_ref, split_ref in zip(TABLE1_RHO_SQ, TABLE1_GAMMA, TABLE1_SPLIT):
        if rho_sq not in table or table[rho_sq][1] is None:
            stdout.write(f"{rho_sq:>7} solve failed\n")
            ok = False
            continue
        ground, split = table[rho_sq]
        dg = ground.Gamma / gamma_ref - 1
        ds = split / split_ref - 1
        good = abs(dg) <= TABLE1_TOL["Gamma"] and abs(ds) <= TABLE1_TOL["split"]
        ok &= good
        stdout.write(
            f"{rho_sq:>7} {ground.Gamma:>12.4e} {gamma_ref:>9.1e} {dg:>+8.2%} "
            f"{split:>9.4f} {split_ref:>6.2f} {ds:>+8.2%}  {'PASS' if good else 'FAIL'}\n"
        )
    stdout.write(f"table1: {'PASS' if ok else 'FAIL'}\n")
    return 2 if failures and len(failures) == len(results) else 0


def _load_levels(path) -> list[rs.Resonance]:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"input file not found: {path}")
    if path.suffix.lower() == ".json":
        return rs.read_json(path)[1]
    return rs.read_csv(path)


def _table_from_levels(records):
    grouped = {}
    for r in records:
        grouped.setdefault((r.rho_sq, r.m), []).append(r)
    results = [rs.ScanResult(k[0], k[1], sorted(v, key=lambda r: r.E)) for k, v in grouped.items()]
    return _ground_and_split(results)


def cmd_lifetime(ns, stdout) -> int:
    coeff = _coefficients(ns)
    bz = _float_list(ns.bz) if ns.bz else ex.bias_values()
    if ns.input:
        table = _table_from_levels(_load_levels(ns.input))
        wanted = _rho_list(ns, default=sorted(table))
    else:
        wanted = _rho_list(ns, default=TABLE1_RHO_SQ)
        results, _ = _run_scan(ns, wanted, [0, 1, -1], levels=1)
        table = _ground_and_split(results)
    rows = []
    for rho_sq in wanted:
        match = [k for k in table if math.isclose(k, rho_sq, rel_tol=1e-9)]
        if not match:
            raise LookupError(f"no ground level for rho_sq={rho_sq}")
        ground, split = table[match[0]]
        for point in ex.bias_scan(ground.rho_sq, ground, bz, split, coeff):
            rows.append({"rho_sq": ground.rho_sq, **vars(point)})
    if ns.format == "json":
        text = json.dumps({"config": {**_echo(ns), "coefficients": coeff.source}, "results": rows}, indent=2)
    else:
        cols = ("rho_sq", "B_z", "G", "nu_T", "omega_ratio", "lifetime", "splitting", "nu_exp", "Gamma_exp")
        lines = [
            "# B_z Gauss, G T/m, nu_T/splitting/nu_exp Hz, lifetime s (inf = stable), Gamma_exp 1/s",
            f"# coefficients = {coeff.source}",
            ",".join(cols),
        ]
        lines += [",".join(f"{row[c]:.9g}" for c in cols) for row in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, ns, stdout)
    return 0


def cmd_fgr(ns, stdout) -> int:
    rho = _rho_list(ns, default=np.round(np.linspace(0.1, 0.3, 9), 6))
    results, failures = _run_scan(ns, rho, [0], levels=1)
    ok = [r for r in results if r.levels and r.levels[0].Gamma > 0]
    lines = ["# Gamma_num: computed ground width; Gamma_fgr = exp(-2 E - 2/rho_sq)", "rho_sq,inv_rho_sq,E,Gamma_num,Gamma_fgr"]
    for r in ok:
        g = r.levels[0]
        lines.append(f"{r.rho_sq:.9g},{1 / r.rho_sq:.9g},{g.E:.9g},{g.Gamma:.9g},{float(fgr_decay_estimate(g.E, r.rho_sq)):.9g}")
    if len(ok) >= 2:
        slope = rs.ln_gamma_slope([r.rho_sq for r in ok], [r.levels[0].Gamma for r in ok])
        lines.append(f"# slope of ln Gamma_num vs omega_L/omega_T = {slope:.6g} (golden rule: -2)")
    _emit("\n".join(lines) + "\n", ns, stdout)
    return 2 if failures and len(failures) == len(results) else 0


COMMANDS = {
    "field": cmd_field,
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "table1": cmd_table1,
    "lifetime": cmd_lifetime,
    "fgr": cmd_fgr,
}


def main(argv=None, env=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(stdout)
            return 1
        ns = resolve(args, env)
        return COMMANDS[args.command](ns, stdout)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError, LookupError, argparse.ArgumentTypeError, configparser.Error) as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except ValueError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except (EigenSolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
