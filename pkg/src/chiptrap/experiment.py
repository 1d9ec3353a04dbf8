"""Mapping dimensionless results onto laboratory units.

At fixed species the trap is fixed by the gradient ``G`` (T/m) and the bias
``B_z`` (Gauss) through

    omega_T / omega_L = c_ratio * G / B_z**1.5
    nu_T             = c_nu * G / sqrt(B_z)

Frequencies scale as ``nu = nu_T * E`` and rates as ``Gamma_exp = 2 pi nu_T Gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .resonance import Resonance
from .species import RB87, SpeciesConstants

GAUSS = 1e-4  # T

# collapsed Rb-87 coefficients (three significant digits in the ratio)
RB87_RATIO_COEFF = 9.25e-5
RB87_NU_COEFF = 129.47
RB87_OMEGA_COEFF = 813.5


@dataclass(frozen=True)
class Coefficients:
    """``ratio``: omega_T/omega_L per (T/m) Gauss^-1.5; ``nu``: Hz per (T/m) Gauss^-0.5."""

    ratio: float
    nu: float
    source: str = "tabulated"

    @property
    def omega(self) -> float:
        return 2 * np.pi * self.nu

    @classmethod
    def tabulated(cls) -> "Coefficients":
        return cls(RB87_RATIO_COEFF, RB87_NU_COEFF, "tabulated")

    @classmethod
    def from_species(cls, species: SpeciesConstants = RB87) -> "Coefficients":
        """First-principles coefficients from mass, moment and hbar."""
        mu, M, hbar = species.moment, species.mass, species.hbar
        omega = np.sqrt(mu / (M * GAUSS))  # omega_T = omega * G / sqrt(B_z[G])
        ratio = omega * hbar / (mu * GAUSS)
        return cls(float(ratio), float(omega / (2 * np.pi)), f"constants:{species.name}")


@dataclass(frozen=True)
class ExperimentalPoint:
    B_z: float  # Gauss
    G: float  # T/m
    nu_T: float  # Hz
    omega_ratio: float
    lifetime: float  # s; inf when stable
    splitting: float  # Hz; nan if not supplied
    nu_exp: float  # Hz
    Gamma_exp: float  # 1/s

    @property
    def stable(self) -> bool:
        return np.isinf(self.lifetime)

    def lifetime_text(self) -> str:
        return "stable" if self.stable else f"{self.lifetime * 1e3:.4g} ms"


def _check_bz(B_z):
    B_z = np.asarray(B_z, dtype=float)
    if np.any(~(B_z > 0)):
        raise ValueError("bias field B_z must be positive (Gauss)")
    return B_z


def gradient_for(rho_sq: float, B_z: float, coeff: Coefficients | None = None) -> float:
    """Gradient G (T/m) giving ``omega_T/omega_L = rho_sq`` at bias ``B_z`` (Gauss)."""
    coeff = coeff or Coefficients.tabulated()
    B_z = float(_check_bz(B_z))
    if not rho_sq > 0:
        raise ValueError("rho_sq must be positive")
    return rho_sq * B_z**1.5 / coeff.ratio


def trap_frequency(G: float, B_z: float, coeff: Coefficients | None = None) -> float:
    coeff = coeff or Coefficients.tabulated()
    return coeff.nu * G / np.sqrt(float(_check_bz(B_z)))


def omega_ratio(G: float, B_z: float, coeff: Coefficients | None = None) -> float:
    coeff = coeff or Coefficients.tabulated()
    return coeff.ratio * G / float(_check_bz(B_z)) ** 1.5


def to_experimental(
    res: Resonance,
    rho_sq: float,
    B_z: float,
    splitting: float | None = None,
    coeff: Coefficients | None = None,
) -> ExperimentalPoint:
    """Lab-unit view of one resonance at bias ``B_z`` (Gauss)."""
    if not np.isnan(res.rho_sq) and not np.isclose(res.rho_sq, rho_sq, rtol=1e-12):
        raise ValueError(f"resonance was computed at rho_sq={res.rho_sq}, not {rho_sq}")
    coeff = coeff or Coefficients.tabulated()
    G = gradient_for(rho_sq, B_z, coeff)
    nu_T = trap_frequency(G, B_z, coeff)
    Gamma = max(res.Gamma, 0.0)
    lifetime = np.inf if Gamma == 0 else 1 / (nu_T * Gamma)
    return ExperimentalPoint(
        B_z=float(B_z),
        G=float(G),
        nu_T=float(nu_T),
        omega_ratio=float(omega_ratio(G, B_z, coeff)),
        lifetime=float(lifetime),
        splitting=float("nan") if splitting is None else float(nu_T * splitting),
        nu_exp=float(nu_T * res.E),
        Gamma_exp=float(2 * np.pi * nu_T * Gamma),
    )


def from_experimental(point: ExperimentalPoint, coeff: Coefficients | None = None) -> tuple[float, float]:
    """Recover ``(rho_sq, Gamma_num)`` from a lab point."""
    rho_sq = omega_ratio(point.G, point.B_z, coeff)
    nu_T = trap_frequency(point.G, point.B_z, coeff)
    Gamma = 0.0 if np.isinf(point.lifetime) else 1 / (nu_T * point.lifetime)
    return float(rho_sq), float(Gamma)


def bias_values(B_min: float = 0.01, B_max: float = 1.0, points: int = 25) -> np.ndarray:
    """Log-spaced bias fields in Gauss."""
    _check_bz([B_min, B_max])
    if B_max <= B_min or points < 2:
        raise ValueError("need B_min < B_max and at least two points")
    return np.geomspace(B_min, B_max, points)


def bias_scan(
    rho_sq: float,
    resonance: Resonance | None,
    B_z_values=None,
    splitting: float | None = None,
    coeff: Coefficients | None = None,
) -> list[ExperimentalPoint]:
    """Lifetime and gradient along a bias sweep at fixed omega_T/omega_L.

    The dimensionless width does not depend on ``B_z`` at fixed rho; only the
    unit mapping changes, so ``lifetime * B_z`` is constant.
    """
    if resonance is None:
        raise LookupError(f"no resonance data for rho_sq={rho_sq}")
    values = bias_values() if B_z_values is None else _check_bz(B_z_values)
    return [to_experimental(resonance, rho_sq, float(b), splitting, coeff) for b in values]


def panels(data: dict, B_z_values=None, coeff: Coefficients | None = None) -> dict[float, list[ExperimentalPoint]]:
    """Bias scans for several rho_sq; ``data[rho_sq] = (ground, splitting)``."""
    return {rs: bias_scan(rs, res, B_z_values, split, coeff) for rs, (res, split) in data.items()}
