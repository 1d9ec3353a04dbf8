"""Wire + bias field of the chip trap and its reduction to harmonic units.

A thin wire along z carrying ``I_w`` is superimposed with a homogeneous bias
``(B0/sqrt2, -B0/sqrt2, B_z)``. The planar field vanishes on the diagonal at
``x0 = y0 = xi / (sqrt2 B0)`` with ``xi = mu0 I_w / 2pi``; around that point the
field is linear, ``(G x, -G y, B_z)`` with ``G = B0**2 / xi``.

In harmonic units (length ``ell_T``, energy ``hbar omega_T``) everything depends
on the single ratio ``rho**2 = omega_T / omega_L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as sc

from .species import SpeciesConstants

MU0 = sc.mu_0
SQRT2 = np.sqrt(2.0)


class NoMinimumError(ValueError):
    """The field configuration has no planar field minimum."""


@dataclass(frozen=True)
class WireBiasField:
    I_w: float  # A
    B0: float  # T
    B_z: float  # T
    mu0: float = MU0

    def __post_init__(self):
        if self.I_w < 0:
            raise ValueError("wire current must be non-negative")
        if not self.B0 > 0 or not self.B_z > 0:
            raise ValueError("bias fields B0 and B_z must be positive")

    @property
    def xi(self) -> float:
        """mu0 I_w / (2 pi), in T m."""
        return self.mu0 * self.I_w / (2 * np.pi)


@dataclass(frozen=True)
class TrapGeometry:
    minimum: tuple[float, float]  # m
    G: float  # T/m
    omega_T: float  # rad/s
    ell_T: float  # m
    omega_L: float  # rad/s
    rho: float

    @property
    def rho_sq(self) -> float:
        return self.rho**2

    @property
    def nu_T(self) -> float:
        return self.omega_T / (2 * np.pi)


@dataclass(frozen=True)
class FieldAngles:
    alpha: float
    beta: float
    B_mag: float


def total_field(field: WireBiasField, x, y):
    """Cartesian field (T) of wire + bias at (x, y); shape ``(3,) + shape(x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x**2 + y**2
    if np.any(r2 == 0):
        raise ZeroDivisionError("field is singular on the wire at (0, 0)")
    bx = field.B0 / SQRT2 - field.xi * y / r2
    by = -field.B0 / SQRT2 + field.xi * x / r2
    bz = np.broadcast_to(field.B_z, bx.shape)
    return np.array([bx, by, bz])


def field_magnitude(field: WireBiasField, x, y):
    return np.linalg.norm(total_field(field, x, y), axis=0)


def trap_minimum(field: WireBiasField, check: bool = True) -> tuple[float, float]:
    """Position of the field minimum, ``x0 = y0 = xi / (sqrt2 B0)``."""
    if field.xi == 0:
        raise NoMinimumError("no wire current: uniform field has no minimum")
    x0 = field.xi / (SQRT2 * field.B0)
    if check:
        # cheap local-minimum test on a small cross around the point
        d = 1e-4 * x0
        b0 = field_magnitude(field, x0, x0)
        probes = field_magnitude(field, x0 + np.array([d, -d, 0, 0]), x0 + np.array([0, 0, d, -d]))
        if np.any(probes < b0):
            raise NoMinimumError("analytic point is not a local minimum of |B|")
    return x0, x0


def gradient(field: WireBiasField) -> float:
    """In-plane gradient G = B0**2 / xi (T/m) at the trap minimum."""
    if field.xi == 0:
        raise NoMinimumError("no wire current: gradient undefined")
    return field.B0**2 / field.xi


def linearized_field(field: WireBiasField, dx, dy):
    """First-order field ``(G dx, -G dy, B_z)`` around the minimum."""
    G = gradient(field)
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    return np.array([G * dx, -G * dy, np.broadcast_to(field.B_z, np.shape(dx))])


def angles_of(B) -> FieldAngles:
    """Polar tilt and azimuth of a field vector."""
    bx, by, bz = (float(c) for c in B)
    mag = float(np.sqrt(bx * bx + by * by + bz * bz))
    return FieldAngles(alpha=float(np.arctan2(np.hypot(bx, by), bz)), beta=float(np.arctan2(by, bx)), B_mag=mag)


def field_angles(rho: float, x: float, y: float) -> FieldAngles:
    """Angles of the linearized field at scaled position (x, y).

    ``tan(alpha) = rho r`` and ``beta = atan2(-y, x)``, i.e. ``beta = -theta``
    with the branch cut on the negative x axis. ``B_mag`` is the potential V.
    """
    r = float(np.hypot(x, y))
    return FieldAngles(
        alpha=float(np.arctan(rho * r)),
        beta=float(np.arctan2(-y, x)),
        B_mag=float(dimensionless_potential(rho, r)),
    )


def dimensionless_potential(rho: float, r):
    """V(r) = sqrt(1 + rho^2 r^2) / rho^2; complex r uses the principal branch."""
    r = np.asarray(r)
    return np.sqrt(1 + rho**2 * r**2) / rho**2


def regularized_potential(rho: float, h_reg: float, r):
    """Saturating stand-in for V in the anti-trapped channel.

    ``V_scatt = sqrt(1 + rho^2 r^2 / (1 + h^2 r^2)) / rho^2`` tends to
    ``1 / (h rho)`` at large r instead of growing linearly.
    """
    if not h_reg > 0:
        raise ValueError("h_reg must be positive")
    r = np.asarray(r)
    r2 = r**2
    return np.sqrt(1 + rho**2 * r2 / (1 + h_reg**2 * r2)) / rho**2


def harmonic_units(field: WireBiasField, species: SpeciesConstants) -> TrapGeometry:
    """Trap frequency, harmonic length, Larmor frequency and rho for a field."""
    G = gradient(field)
    mu = species.moment
    omega_T = np.sqrt(mu * field.B_z / species.mass) * G / field.B_z
    ell_T = np.sqrt(species.hbar / (species.mass * omega_T))
    omega_L = mu * field.B_z / species.hbar
    return TrapGeometry(
        minimum=trap_minimum(field),
        G=float(G),
        omega_T=float(omega_T),
        ell_T=float(ell_T),
        omega_L=float(omega_L),
        rho=float(np.sqrt(omega_T / omega_L)),
    )


def invert_harmonic_units(omega_T: float, omega_L: float, species: SpeciesConstants) -> tuple[float, float]:
    """Recover (G [T/m], B_z [T]) from the trap and Larmor frequencies."""
    mu = species.moment
    B_z = species.hbar * omega_L / mu
    G = omega_T * B_z / np.sqrt(mu * B_z / species.mass)
    return float(G), float(B_z)
