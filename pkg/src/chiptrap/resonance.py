"""Sorting complex-rotated spectra into bound states, continua and resonances.

Under ``r -> e^{i phi} r`` resonance poles stay put while each continuum swings
to the ray ``arg(E - E_branch) = -2 phi``. Two solves at different angles
therefore separate the two: resonances are the eigenvalues that match across
angles and do not lie on a ray.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .eigen import EigenSolverError, Spectrum, eig_near, solve
from .heff import SolverConfig, assemble

EPS_MATCH = 1e-4
EPS_REAL = 1e-8
WIDTH_FLOOR = 1e-12
RAY_TOLERANCE = 0.05  # relative, on the angle 2 phi
DEFAULT_PHI2 = 0.3
CSV_COLUMNS = ("rho_sq", "m", "label", "E", "Gamma", "stability")


def eps_match(E: complex, scale: float = EPS_MATCH) -> float:
    return scale * max(1.0, abs(E))


@dataclass
class Resonance:
    """A classified pole. ``E`` and ``Gamma`` are in units of hbar omega_T."""

    E: float
    Gamma: float
    m: int
    stability: float
    label: int = -1
    rho_sq: float = float("nan")
    kind: str = "resonance"  # or "bound"

    @property
    def eigenvalue(self) -> complex:
        return complex(self.E, -self.Gamma / 2)

    @property
    def below_floor(self) -> bool:
        return self.Gamma < WIDTH_FLOOR


@dataclass
class ContinuumRay:
    branch_point: complex
    angle: float
    members: list[complex] = field(default_factory=list)

    @property
    def fitted_angle(self) -> float:
        """Median argument of ``E - branch_point`` over the members."""
        if not self.members:
            return float("nan")
        return float(np.median(np.angle(np.asarray(self.members) - self.branch_point)))

    def contains(self, E: complex, tol: float = RAY_TOLERANCE) -> bool:
        z = E - self.branch_point
        if abs(z) == 0:
            return True
        return abs(np.angle(z) - self.angle) <= tol * abs(self.angle)


@dataclass
class Classification:
    resonances: list[Resonance]
    bound: list[Resonance]
    continua: list[ContinuumRay]
    ambiguous: list[complex]
    unphysical: list[complex]
    config: SolverConfig | None = None

    def trap_levels(self) -> list[Resonance]:
        """Bound states and resonances above the untrapped threshold, ranked by E."""
        floor = branch_points(self.config)["0"].real if self.config else -np.inf
        levels = [r for r in self.bound + self.resonances if r.E > floor]
        return sorted(levels, key=lambda r: r.E)

    def ground(self) -> Resonance:
        levels = self.trap_levels()
        if not levels:
            raise LookupError("no trap level found")
        return levels[0]


def branch_points(config: SolverConfig) -> dict[str, complex]:
    """Thresholds of the untrapped (0) and anti-trapped (-) channels."""
    shift = config.energy_shift
    return {"0": complex(shift), "-": complex(-1 / (config.h_reg * config.rho) + shift)}


def classify(
    spec1: Spectrum,
    spec2: Spectrum,
    *,
    match_scale: float = EPS_MATCH,
    eps_real: float = EPS_REAL,
    ray_tol: float = RAY_TOLERANCE,
) -> Classification:
    """Pair the eigenvalues of two spectra taken at different rotation angles."""
    c1, c2 = spec1.config, spec2.config
    if c1 is None or c2 is None:
        raise ValueError("spectra must carry their solver configs")
    if c1.with_(phi=0.0) != c2.with_(phi=0.0):
        raise ValueError("spectra differ in more than the rotation angle")
    if c1.phi == c2.phi:
        raise ValueError("spectra must use two different rotation angles")

    ev1 = np.asarray(spec1.eigenvalues)
    ev2 = np.asarray(spec2.eigenvalues)
    rays = [ContinuumRay(bp, -2 * c1.phi) for bp in branch_points(c1).values()]
    resonances, bound, ambiguous, unphysical = [], [], [], []
    for E in ev1:
        d = np.abs(ev2 - E)
        tol = eps_match(E, match_scale)
        close = np.flatnonzero(d <= tol)
        if len(close) > 1:
            ambiguous.append(complex(E))
            continue
        if len(close) == 1:
            record = Resonance(E=float(E.real), Gamma=float(-2 * E.imag), m=c1.m, stability=float(d[close[0]]), rho_sq=c1.rho_sq)
            if abs(E.imag) < eps_real:
                record.kind = "bound"
                record.Gamma = max(record.Gamma, 0.0)
                bound.append(record)
                continue
            if not any(ray.contains(E, ray_tol) for ray in rays):
                if E.imag > eps_real:
                    unphysical.append(complex(E))
                else:
                    resonances.append(record)
                continue
        # continuum: attach to the ray whose angle fits best
        best = min(rays, key=lambda ray: abs(np.angle(E - ray.branch_point) - ray.angle))
        best.members.append(complex(E))

    _assign_labels(resonances, bound, c1)
    return Classification(resonances, bound, rays, ambiguous, unphysical, config=c1)


def _assign_labels(resonances, bound, config):
    threshold = branch_points(config)["0"].real
    levels = sorted((r for r in resonances + bound if r.E > threshold), key=lambda r: r.E)
    for rank, r in enumerate(levels):
        r.label = rank


def solve_point(
    config: SolverConfig,
    phi2: float = DEFAULT_PHI2,
    method: str = "dense",
    sigma: complex | None = None,
    k: int = 8,
) -> Classification:
    """Solve one (rho, m) point at ``config.phi`` and ``phi2`` and classify.

    ``method="dense"`` computes full spectra; ``"targeted"`` only the ``k``
    eigenvalues nearest ``sigma`` (default: the oscillator ground level
    ``|m| + 1``), which is enough for the low trap levels.
    """
    configs = (config, config.with_(phi=phi2))
    if method == "dense":
        spectra = [solve(assemble(c)) for c in configs]
    elif method == "targeted":
        if sigma is None:
            sigma = abs(config.m) + 1.0
        spectra = [eig_near(assemble(c), sigma, k=k) for c in configs]
    else:
        raise ValueError(f"unknown method {method!r}")
    return classify(*spectra)


def ground_resonance(config: SolverConfig, **kw) -> Resonance:
    return solve_point(config, **kw).ground()


def splitting(res_plus: Resonance, res_minus: Resonance) -> float:
    """``E(m=-1) - E(m=+1)`` for two states of the same principal label."""
    if res_plus.m != 1 or res_minus.m != -1:
        raise ValueError(f"expected m=+1 and m=-1, got m={res_plus.m} and m={res_minus.m}")
    if res_plus.label != res_minus.label:
        raise ValueError(f"label mismatch: {res_plus.label} vs {res_minus.label}")
    return res_minus.E - res_plus.E


# -- scans ------------------------------------------------------------------


@dataclass
class ScanResult:
    rho_sq: float
    m: int
    levels: list[Resonance] = field(default_factory=list)
    error: str | None = None


def scan(
    rho_sq_list,
    m_list,
    template: SolverConfig | None = None,
    *,
    threads: int = 1,
    levels: int | None = None,
    **solve_kw,
) -> list[ScanResult]:
    """Solve every (rho_sq, m) pair; results ordered by (rho_sq, m) as given.

    Failures are recorded on the result and do not stop the scan. ``template``
    supplies everything but ``rho_sq`` and ``m``.
    """
    template = template or SolverConfig(rho_sq=1.0)
    jobs = [(float(r), int(m)) for r in rho_sq_list for m in m_list]

    def work(job):
        rho_sq, m = job
        try:
            result = solve_point(template.with_(rho_sq=rho_sq, m=m), **solve_kw)
            found = result.trap_levels()
            return ScanResult(rho_sq, m, found[:levels] if levels else found)
        except (EigenSolverError, ValueError, LookupError, np.linalg.LinAlgError) as exc:
            return ScanResult(rho_sq, m, error=f"{type(exc).__name__}: {exc}")

    if threads <= 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, jobs))


def flatten(results) -> list[Resonance]:
    return [lvl for res in results for lvl in res.levels]


# -- emitters ---------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def to_csv(records, config: dict | None = None, path: str | Path | None = None) -> str:
    """CSV text with ``#`` comments for units and configuration."""
    buf = io.StringIO()
    buf.write("# energies and widths in units of hbar*omega_T; E = 0 at the trap bottom\n")
    for key, value in (config or {}).items():
        buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(r.rho_sq), _fmt(r.m), _fmt(r.label), _fmt(r.E), _fmt(r.Gamma), _fmt(r.stability)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path: str | Path) -> list[Resonance]:
    return parse_csv(Path(path).read_text())


def parse_csv(text: str) -> list[Resonance]:
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [
        Resonance(
            E=float(row["E"]),
            Gamma=float(row["Gamma"]),
            m=int(row["m"]),
            stability=float(row["stability"]),
            label=int(row["label"]),
            rho_sq=float(row["rho_sq"]),
        )
        for row in rows
    ]


def to_json(records, config: dict | None = None, path: str | Path | None = None) -> str:
    payload = {"config": config or {}, "results": [asdict(r) for r in records]}
    text = json.dumps(payload, indent=2, allow_nan=True)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_json(path: str | Path) -> tuple[dict, list[Resonance]]:
    return parse_json(Path(path).read_text())


def parse_json(text: str) -> tuple[dict, list[Resonance]]:
    payload = json.loads(text)
    return payload["config"], [Resonance(**r) for r in payload["results"]]


def linear_fit(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


def ln_gamma_slope(rho_sq_list, widths) -> float:
    """Slope of ln Gamma against omega_L / omega_T = 1 / rho^2."""
    widths = np.asarray(widths, float)
    if np.any(widths <= 0) or any(math.isnan(w) for w in widths):
        raise ValueError("widths must be positive to take logarithms")
    return linear_fit(1 / np.asarray(rho_sq_list, float), np.log(widths))[0]
