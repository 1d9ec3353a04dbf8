"""Discretized, complex-rotated three-channel radial Hamiltonian.

For angular quantum number ``m`` the effective Hamiltonian acts on
``(psi_+, psi_0, psi_-)(r)``. Every block is a radial differential operator
``c2(r) d^2/dr^2 + c1(r) d/dr + c0(r)``. The equation ``r H psi = E r psi`` is
collocated on the half-integer grid ``r_n = (n + 1/2) dr``, giving the pair
``A x = E B x`` with ``B = diag(r_n dr)``.

Near the origin the stencils need values at negative radii; those are taken
from the channel's parity under ``r -> -r``. Channel ``+, 0, -`` connects to
the Zeeman component with orbital momentum ``m, m - 1, m - 2``, hence parity
``(-1)^m, (-1)^(m-1), (-1)^m``. A hard wall sits at ``r_{N+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .adiabatic import CHANNELS, born_huang, gamma, vector_potential_coefficients
from .trapfield import dimensionless_potential, regularized_potential

SQRT2 = np.sqrt(2.0)
LABELS = ("++", "+0", "+-", "0+", "00", "0-", "-+", "-0", "--")
# orbital momentum offset of each channel's Zeeman partner
_L_OFFSET = {"+": 0, "0": -1, "-": -2}
SYMMETRY_GUARD = 0.1  # C in |A - A^T| / |A| <= C dr^2 before symmetrizing (order 2)


class ConfigError(ValueError):
    """Invalid solver configuration."""


@dataclass(frozen=True)
class SolverConfig:
    """Dimensionless run parameters.

    ``rho_sq`` is omega_T / omega_L. The grid has ``n + 1`` points per channel,
    the wall sits at ``(n + 3/2) delta_r``.
    """

    rho_sq: float
    m: int = 0
    phi: float = 0.2
    delta_r: float = 0.05
    n: int = 600
    h_reg: float = 0.01
    shift_to_trap_bottom: bool = True
    fd_order: int = 6
    couple: bool = True

    def __post_init__(self):
        if not self.rho_sq > 0:
            raise ConfigError(f"rho_sq must be positive, got {self.rho_sq}")
        if int(self.m) != self.m:
            raise ConfigError(f"m must be an integer, got {self.m}")
        if not 0 <= self.phi < np.pi / 4:
            raise ConfigError(f"rotation angle phi must lie in [0, pi/4), got {self.phi}")
        if not self.delta_r > 0:
            raise ConfigError(f"delta_r must be positive, got {self.delta_r}")
        if self.n < 50:
            raise ConfigError(f"need at least 50 radial points, got n={self.n}")
        if not self.h_reg > 0:
            raise ConfigError(f"h_reg must be positive, got {self.h_reg}")
        if self.fd_order not in _STENCIL_ORDERS:
            raise ConfigError(f"fd_order must be one of {_STENCIL_ORDERS}, got {self.fd_order}")

    @property
    def rho(self) -> float:
        return float(np.sqrt(self.rho_sq))

    @property
    def radius(self) -> float:
        return (self.n + 1.5) * self.delta_r

    @property
    def points(self) -> int:
        return self.n + 1

    @property
    def dim(self) -> int:
        return 3 * self.points

    @property
    def energy_shift(self) -> float:
        return -1 / self.rho_sq if self.shift_to_trap_bottom else 0.0

    def grid(self) -> np.ndarray:
        return (np.arange(self.points) + 0.5) * self.delta_r

    def parity(self, channel: str) -> int:
        return -1 if (self.m + _L_OFFSET[channel]) % 2 else 1

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    @classmethod
    def for_radius(cls, rho_sq: float, radius: float = 30.0, delta_r: float = 0.05, **kw) -> "SolverConfig":
        """Config whose wall sits at ``radius`` or less than one step beyond it."""
        n = int(np.ceil(radius / delta_r - 1.5 - 1e-9))
        return cls(rho_sq=rho_sq, delta_r=delta_r, n=n, **kw)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# -- operator blocks --------------------------------------------------------

Coefficient = Callable[[np.ndarray], np.ndarray]


def _zero(r):
    return np.zeros(np.shape(r), dtype=complex)


@dataclass(frozen=True)
class ChannelOperator:
    """One block ``c2 d^2/dr^2 + c1 d/dr + c0`` of the effective Hamiltonian."""

    label: str
    second: Coefficient = _zero
    first: Coefficient = _zero
    potential: Coefficient = _zero
    phi: float = 0.0

    @property
    def row(self) -> str:
        return self.label[0]

    @property
    def col(self) -> str:
        return self.label[1]

    def has_second(self) -> bool:
        return self.second is not _zero

    def has_first(self) -> bool:
        return self.first is not _zero


def channel_operators(config: SolverConfig) -> dict[str, ChannelOperator]:
    """The nine unrotated blocks for ``config.m`` (d/dtheta replaced by i m).

    Diagonal potentials are ``+V``, ``0`` and ``-V_scatt``; the global energy
    shift is left to :func:`assemble`.
    """
    rho = config.rho
    m = config.m
    h = config.h_reg

    def kinetic_second(r):
        return np.full(np.shape(r), -0.5, dtype=complex)

    def kinetic_first(r):
        return -0.5 / r

    channel_potential = {
        "+": lambda r: dimensionless_potential(rho, r),
        "0": lambda r: np.zeros(np.shape(r), dtype=complex),
        "-": lambda r: -regularized_potential(rho, h, r),
    }

    def diagonal(idx, ch):
        def potential(r):
            a = vector_potential_coefficients(rho, r)[idx]
            return (m - a) ** 2 / (2 * r**2) + born_huang(rho, r)[idx] + channel_potential[ch](r)

        return ChannelOperator(ch + ch, kinetic_second, kinetic_first, potential)

    ops = {ch + ch: diagonal(i, ch) for i, ch in enumerate(CHANNELS)}

    # -iγ ∂θ -> -iγ (i m) = m γ
    def prefactor(r):
        return SQRT2 * rho / (r * gamma(rho, r) ** 2)

    def offdiag(label, radial_sign, angular_sign, numerator):
        # -(1/2) [ s_r P (r d/dr) + s_a P (m γ) - P numerator(γ) / γ^2 ]
        def first(r):
            return -0.5 * radial_sign * prefactor(r) * r

        def potential(r):
            g = gamma(rho, r)
            return -0.5 * (angular_sign * prefactor(r) * m * g - prefactor(r) * numerator(g) / g**2)

        return ChannelOperator(label, _zero, first, potential)

    ops["+0"] = offdiag("+0", -1, 1, lambda g: g**3 - g**2 + 1)
    ops["0+"] = offdiag("0+", 1, 1, lambda g: g**3 - 1)
    # -(√2ρ/rγ²)(r∂r + iγ∂θ) -> radial sign -1, angular term -(√2ρ/rγ²)(-mγ)
    ops["0-"] = offdiag("0-", -1, 1, lambda g: g**3 + 1)
    ops["-0"] = offdiag("-0", 1, 1, lambda g: g**3 + g**2 - 1)

    def flip(r):
        g = gamma(rho, r)
        return r**2 * rho**4 / (4 * g**4)

    ops["+-"] = ChannelOperator("+-", potential=flip)
    ops["-+"] = ChannelOperator("-+", potential=flip)
    return {label: ops[label] for label in LABELS}


def rotate(op: ChannelOperator, phi: float) -> ChannelOperator:
    """Complex rotation ``r -> e^{i phi} r``, ``d/dr -> e^{-i phi} d/dr``."""
    if not 0 <= phi < np.pi / 4:
        raise ValueError(f"rotation angle must lie in [0, pi/4), got {phi}")
    if phi == 0:
        return op
    z = np.exp(1j * phi)
    second, first, potential = op.second, op.first, op.potential
    return ChannelOperator(
        op.label,
        second=(lambda r: z**-2 * second(z * r)) if op.has_second() else _zero,
        first=(lambda r: z**-1 * first(z * r)) if op.has_first() else _zero,
        potential=lambda r: potential(z * r),
        phi=op.phi + phi,
    )


# -- finite differences -----------------------------------------------------

_STENCIL_ORDERS = (2, 4, 6, 8)


def central_weights(order: int, derivative: int) -> np.ndarray:
    """Central finite-difference weights on offsets ``-order/2 .. order/2``."""
    half = order // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[derivative] = float(np.prod(np.arange(1, derivative + 1)))
    return np.linalg.solve(vander, rhs)


def derivative_matrices(points: int, dr: float, parity: int, order: int):
    """Sparse first and second derivative matrices on the half-integer grid.

    Ghost values at ``r_{-1-n}`` equal ``parity * psi_n``; values beyond the
    last point are zero.
    """
    half = order // 2
    w1 = central_weights(order, 1) / dr
    w2 = central_weights(order, 2) / dr**2
    rows, cols, v1, v2 = [], [], [], []
    i = np.arange(points)
    for k, off in enumerate(range(-half, half + 1)):
        j = i + off
        sign = np.ones(points)
        ghost = j < 0
        j = np.where(ghost, -1 - j, j)
        sign[ghost] = parity
        keep = j < points
        rows.append(i[keep])
        cols.append(j[keep])
        v1.append(sign[keep] * w1[k])
        v2.append(sign[keep] * w2[k])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    shape = (points, points)
    D1 = sps.coo_matrix((np.concatenate(v1), (rows, cols)), shape=shape).tocsr()
    D2 = sps.coo_matrix((np.concatenate(v2), (rows, cols)), shape=shape).tocsr()
    return D1, D2


# -- assembly ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Matrix pair of ``A x = E B x``; B is stored as its diagonal ``b``."""

    A: sps.csr_matrix
    b: np.ndarray
    config: SolverConfig
    asymmetry: float = 0.0
    symmetrized: bool = False
    r: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def B(self) -> sps.dia_matrix:
        return sps.diags(self.b)

    def dense(self) -> np.ndarray:
        return self.A.toarray()


def _block_matrix(op: ChannelOperator, r, D1, D2):
    points = len(r)
    mat = sps.diags(r * op.potential(r))
    if op.has_first():
        mat = mat + sps.diags(r * op.first(r)) @ D1
    if op.has_second():
        mat = mat + sps.diags(r * op.second(r)) @ D2
    return sps.csr_matrix(mat, shape=(points, points), dtype=complex)


def _coupling_block(op: ChannelOperator, partner: ChannelOperator, r, D_col, D_flip):
    """Skew-split off-diagonal block ``r (c d/dr + f)``.

    With ``W = r c`` the block is written ``(W d/dr + d/dr W) / 2`` plus the
    average of ``r f`` over the block and its transpose partner. ``d/dr W``
    acts on ``W psi``, whose parity is opposite to ``psi``'s, so it uses the
    flipped-parity matrix ``D_flip``. Away from the origin the pair of blocks
    is then exactly transposed; the analytic identity
    ``f_jk - f_kj = (r c)' / r`` keeps it consistent.
    """
    points = len(r)
    mat = sps.diags(0.5 * r * (op.potential(r) + partner.potential(r)))
    if op.has_first():
        W = sps.diags(r * op.first(r))
        mat = mat + 0.5 * (W @ D_col + D_flip @ W)
    return sps.csr_matrix(mat, shape=(points, points), dtype=complex)


def assemble(config: SolverConfig) -> DiscreteProblem:
    """Build ``(A, B)`` for ``r H_m psi = E r psi`` at the configured rotation.

    Kinetic stencils with the ``b_k = k a_k / 2`` relation between first and
    second derivative weights make ``r (d^2 + d/r)`` exactly symmetric in the
    interior, and the coupling blocks are skew-split (see
    :func:`_coupling_block`). What remains unsymmetric is a corner of
    reflected entries at the origin. Second order is then symmetrized after a
    consistency check; higher orders keep the corner, because averaging it
    with the transpose spoils the reflected stencils.
    """
    r = config.grid()
    dr = config.delta_r
    by_parity = {p: derivative_matrices(config.points, dr, p, config.fd_order) for p in (1, -1)}
    mats = {ch: by_parity[config.parity(ch)] for ch in CHANNELS}
    ops = channel_operators(config)
    blocks = []
    for row in CHANNELS:
        line = []
        for col in CHANNELS:
            label = row + col
            if row != col and not config.couple:
                line.append(None)
                continue
            op = rotate(ops[label], config.phi)
            D1, D2 = mats[col]
            if row == col:
                blk = _block_matrix(op, r, D1, D2)
                if config.shift_to_trap_bottom:
                    blk = blk + sps.diags(r * config.energy_shift)
            else:
                partner = rotate(ops[col + row], config.phi)
                blk = _coupling_block(op, partner, r, D1, by_parity[-config.parity(col)][0])
            line.append(blk)
        blocks.append(line)
    A = sps.bmat(blocks, format="csr", dtype=complex)
    asym = float(spla.norm(A - A.T) / spla.norm(A))
    symmetrized = False
    if config.fd_order == 2:
        if asym > SYMMETRY_GUARD * dr**2:
            raise AssertionError(f"assembled matrix asymmetry {asym:.3e} exceeds {SYMMETRY_GUARD} * dr^2")
        A = ((A + A.T) * 0.5).tocsr()
        symmetrized = True
    A = (A * dr).tocsr()
    b = np.tile(r * dr, 3)
    return DiscreteProblem(A=A, b=b, config=config, asymmetry=asym, symmetrized=symmetrized, r=r)


def apply(problem: DiscreteProblem, state) -> np.ndarray:
    """``A @ state`` for a full three-channel vector (or a stack of columns)."""
    state = np.asarray(state)
    if state.shape[0] != problem.dim:
        raise ValueError(f"state has leading dimension {state.shape[0]}, expected {problem.dim}")
    return problem.A @ state


def split_channels(vector, config: SolverConfig) -> dict[str, np.ndarray]:
    vector = np.asarray(vector)
    p = config.points
    return {ch: vector[i * p : (i + 1) * p] for i, ch in enumerate(CHANNELS)}


def channel_weights(vector, problem: DiscreteProblem) -> dict[str, float]:
    """Fraction of ``sum |psi|^2 r dr`` carried by each channel."""
    parts = split_channels(np.abs(vector) ** 2 * problem.b, problem.config)
    total = sum(float(v.sum()) for v in parts.values())
    return {ch: float(v.sum()) / total for ch, v in parts.items()}


def dump_triplets(problem: DiscreteProblem, path: str | Path, which: str = "A") -> int:
    """Write the non-zeros of A (or B) as ``row col re im`` lines; returns count."""
    mat = problem.A if which == "A" else sps.csr_matrix(problem.B)
    coo = mat.tocoo()
    data = np.column_stack([coo.row, coo.col, coo.data.real, coo.data.imag])
    header = f"{which} {mat.shape[0]} {mat.shape[1]} nnz={coo.nnz} " + " ".join(
        f"{k}={v}" for k, v in problem.config.as_dict().items()
    )
    np.savetxt(path, data, fmt=["%d", "%d", "%.17g", "%.17g"], header=header)
    return int(coo.nnz)


def load_triplets(path: str | Path) -> sps.csr_matrix:
    with open(path) as fh:
        head = fh.readline().lstrip("# ").split()
    shape = (int(head[1]), int(head[2]))
    data = np.loadtxt(path, ndmin=2)
    return sps.coo_matrix(
        (data[:, 2] + 1j * data[:, 3], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=shape
    ).tocsr()
