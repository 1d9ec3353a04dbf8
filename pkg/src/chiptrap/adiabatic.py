"""Local spin-1 eigenbasis and the geometric potentials it induces.

The spin part of the Hamiltonian in the Zeeman basis ``(|1>, |0>, |-1>)`` is
``V * J.n(alpha, beta)``. Its eigenvectors carry the phases ``e^{i beta}`` and
``e^{2 i beta}`` on the ``|0>`` and ``|-1>`` components; this fixes the gauge
in which the vector potentials below are quoted.

Conventions: ``beta = -theta`` on the linearized trap field, vector potentials
are ``A_j = i <chi_j | grad chi_j>`` so that the diagonal blocks read
``(p - A_j)^2 / 2 + Phi_j``, and ``A_j`` is stored as the coefficient ``a_j``
of ``e_theta / r``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

SQRT2 = np.sqrt(2.0)
CHANNELS = ("+", "0", "-")


def spin_matrix(alpha: float, beta: float, V: float = 1.0) -> np.ndarray:
    """``V J.n`` for spin 1 in the basis (|1>, |0>, |-1>)."""
    if V < 0:
        raise ValueError("V must be non-negative")
    c = np.cos(alpha)
    s = np.sin(alpha) / SQRT2
    em = np.exp(-1j * beta)
    ep = np.exp(1j * beta)
    return V * np.array(
        [
            [c, em * s, 0.0],
            [ep * s, 0.0, em * s],
            [0.0, ep * s, -c],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class SpinEigensystem:
    chi_plus: np.ndarray
    chi_zero: np.ndarray
    chi_minus: np.ndarray
    eigenvalues: tuple[float, float, float]  # (+V, 0, -V)

    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, ordered (+, 0, -)."""
        return np.column_stack([self.chi_plus, self.chi_zero, self.chi_minus])


def spin_eigensystem(alpha: float, beta: float, V: float = 1.0) -> SpinEigensystem:
    """Closed-form eigenvectors of :func:`spin_matrix`."""
    c2 = np.cos(alpha / 2) ** 2
    s2 = np.sin(alpha / 2) ** 2
    s = np.sin(alpha) / SQRT2
    e1 = np.exp(1j * beta)
    e2 = np.exp(2j * beta)
    chi_plus = np.array([c2, s * e1, s2 * e2], dtype=complex)
    chi_zero = np.array([-s, np.cos(alpha) * e1, s * e2], dtype=complex)
    chi_minus = np.array([s2, -s * e1, c2 * e2], dtype=complex)
    return SpinEigensystem(chi_plus, chi_zero, chi_minus, (V, 0.0, -V))


def gamma(rho: float, r):
    """gamma(r) = sqrt(1 + rho^2 r^2); complex r allowed."""
    return np.sqrt(1 + rho**2 * np.asarray(r) ** 2)


@dataclass(frozen=True)
class GaugeFields:
    """Berry and Born-Huang potentials of the three adiabatic channels at one point.

    ``A_*`` are the azimuthal coefficients (``A_theta * r``); ``A_radial`` holds
    radial components, zero in the canonical gauge.
    """

    r: float
    gamma: float
    A_plus: float
    A_zero: float
    A_minus: float
    Phi_plus: float
    Phi_zero: float
    Phi_minus: float
    theta: float = 0.0
    A_radial: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def A(self) -> tuple[float, float, float]:
        return (self.A_plus, self.A_zero, self.A_minus)

    @property
    def Phi(self) -> tuple[float, float, float]:
        return (self.Phi_plus, self.Phi_zero, self.Phi_minus)


def vector_potential_coefficients(rho: float, r):
    """Azimuthal Berry coefficients ``(1 - 1/g, 1, 1 + 1/g)``; complex r allowed."""
    g = gamma(rho, r)
    return 1 - 1 / g, np.ones_like(g), 1 + 1 / g


def born_huang(rho: float, r):
    """Born-Huang potentials ``(Phi_+, Phi_0, Phi_-)``.

    ``Phi_+ = Phi_- = rho^2 (1 + g^2) / (4 g^4)`` and ``Phi_0 = 2 Phi_+``.
    """
    g = gamma(rho, r)
    phi_pm = rho**2 * (1 + g**2) / (4 * g**4)
    return phi_pm, 2 * phi_pm, phi_pm


def gauge_fields(rho: float, r: float, theta: float = 0.0) -> GaugeFields:
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not r > 0:
        raise ValueError("gauge fields are singular at r = 0; use the Taylor forms")
    g = float(gamma(rho, r))
    a = vector_potential_coefficients(rho, r)
    phi = born_huang(rho, r)
    return GaugeFields(
        r=float(r),
        gamma=g,
        A_plus=float(a[0]),
        A_zero=float(a[1]),
        A_minus=float(a[2]),
        Phi_plus=float(phi[0]),
        Phi_zero=float(phi[1]),
        Phi_minus=float(phi[2]),
        theta=float(theta),
    )


def _polar_gradient(f: Callable[[float, float], float], r: float, theta: float, step: float = 1e-6):
    dr = (f(r + step, theta) - f(r - step, theta)) / (2 * step)
    dth = (f(r, theta + step) - f(r, theta - step)) / (2 * step)
    return dr, dth


def gauge_transform(fields: GaugeFields, f: Callable[[float, float], float], grad=None) -> GaugeFields:
    """Shift every A_j by grad f at the fields' point; Phi_j unchanged.

    ``f(r, theta)`` is a scalar gauge function. ``grad``, if given, is
    ``(df/dr, df/dtheta)`` and bypasses the central-difference gradient. Under
    the ``A = i<chi|grad chi>`` convention this corresponds to re-phasing the
    eigenvectors as ``chi_j -> exp(-i f) chi_j``.
    """
    if grad is None:
        grad = _polar_gradient(f, fields.r, fields.theta)
    df_dr, df_dth = grad
    return replace(
        fields,
        A_plus=fields.A_plus + df_dth,
        A_zero=fields.A_zero + df_dth,
        A_minus=fields.A_minus + df_dth,
        A_radial=tuple(a + df_dr for a in fields.A_radial),
    )


# -- radial h++ analysis ----------------------------------------------------


def hpp_gauge_term(rho: float, m: int, r):
    """Cross term of (p - A_+)^2 / 2 at fixed m: ``-m (1 - 1/g) / r^2``."""
    g = gamma(rho, r)
    return -m * (1 - 1 / g) / np.asarray(r) ** 2


def hpp_scalar_term(rho: float, r):
    """``A_+^2 / 2 + Phi_+ = (3g^4 - 4g^3 + 2g^2 - 1) / (4 r^2 g^4)``."""
    g = gamma(rho, r)
    return (3 * g**4 - 4 * g**3 + 2 * g**2 - 1) / (4 * np.asarray(r) ** 2 * g**4)


def perturbative_hpp(rho: float, m: int, r):
    """Correction to the bare radial kinetic operator in the trapped channel.

    The bare operator is taken to include the ``m^2 / 2r^2`` centrifugal term;
    what remains is the gauge cross term plus ``A_+^2/2 + Phi_+``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if np.any(np.asarray(r) <= 0):
        raise ValueError("r must be positive")
    return hpp_gauge_term(rho, m, r) + hpp_scalar_term(rho, r)


def hpp_gauge_taylor(rho: float, m: int, r):
    """Small-(rho r) form ``-m (rho^2/2 - 3 rho^4 r^2 / 8)``."""
    return -m * (rho**2 / 2 - 3 * rho**4 * np.asarray(r) ** 2 / 8)


def hpp_scalar_taylor(rho: float, r):
    """Small-(rho r) form ``rho^2/2 - 5 rho^4 r^2 / 8``."""
    return rho**2 / 2 - 5 * rho**4 * np.asarray(r) ** 2 / 8


def hpp_centrifugal_limit(m: int, r):
    """Large-(rho r) limit ``(3/4 - m) / r^2``, independent of rho."""
    return (0.75 - m) / np.asarray(r) ** 2


def fgr_decay_estimate(E_n, rho):
    """Golden-rule width ``exp(-2 E_n - 2 / rho^2)``.

    Order-of-magnitude estimate for the adiabatic regime: the trapped Gaussian
    is projected on an untrapped plane wave with ``k^2 / 2 = E_n + 1/rho^2``.
    """
    E_n = np.asarray(E_n, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(E_n + 1 / rho**2 <= 0):
        raise ValueError("E_n + 1/rho^2 must be positive")
    return np.exp(-2 * E_n - 2 / rho**2)
