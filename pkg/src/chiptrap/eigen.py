"""Eigenvalues of the generalized pair ``A x = E B x`` with diagonal ``B > 0``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .heff import DiscreteProblem, SolverConfig

DEFAULT_MAX_DIM = 4000
RESIDUAL_TOL = 1e-8
CLUSTER_TOL = 1e-8


class EigenSolverError(RuntimeError):
    """Eigensolver failed to converge."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


@dataclass
class Spectrum:
    """Unsorted eigenvalues with stable indices."""

    eigenvalues: np.ndarray
    config: SolverConfig | None = None
    residuals: dict[int, float] = field(default_factory=dict)
    complete: bool = True

    def __len__(self):
        return len(self.eigenvalues)

    def verified(self, tol: float = RESIDUAL_TOL) -> list[int]:
        return [i for i, res in self.residuals.items() if res <= tol]


def _check_b(b):
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0):
        raise ValueError("B must be strictly positive on its diagonal")
    return b


def reduce(problem: DiscreteProblem) -> np.ndarray:
    """Dense ``C = B^{-1/2} A B^{-1/2}``, isospectral to the pair (A, B)."""
    return reduce_pair(problem.dense(), problem.b)


def reduce_pair(A, b) -> np.ndarray:
    d = 1 / np.sqrt(_check_b(b))
    A = A.toarray() if sps.issparse(A) else np.asarray(A)
    return A * d[:, None] * d[None, :]


# -- reference Hessenberg + shifted QR -------------------------------------


def hessenberg(C) -> np.ndarray:
    """Upper Hessenberg form of C by Householder reflections."""
    H = np.array(C, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2 * np.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0
    return H


def _givens(a, b):
    r = np.hypot(abs(a), abs(b))
    if r == 0:
        return 1.0, 0.0
    return a / r, b / r


def qr_eigenvalues(C, max_sweeps_per_eig: int = 30) -> np.ndarray:
    """All eigenvalues of a complex matrix by Wilkinson-shifted QR on its Hessenberg form."""
    H = hessenberg(C)
    n = H.shape[0]
    eig = np.zeros(n, dtype=complex)
    hi = n - 1
    iterations = 0
    cap = max_sweeps_per_eig * max(n, 1)
    scale = np.linalg.norm(H) or 1.0
    while hi >= 0:
        if hi == 0:
            eig[0] = H[0, 0]
            break
        # locate active block [lo, hi]
        lo = hi
        while lo > 0 and abs(H[lo, lo - 1]) > np.finfo(float).eps * (abs(H[lo, lo]) + abs(H[lo - 1, lo - 1]) or scale):
            lo -= 1
        if lo == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            continue
        iterations += 1
        if iterations > cap:
            raise EigenSolverError("QR iteration did not converge", failed=range(hi + 1))
        a, b, c, d = H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
        tr, det = a + d, a * d - b * c
        disc = np.sqrt(tr * tr / 4 - det)
        mu1, mu2 = tr / 2 + disc, tr / 2 - disc
        shift = mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2
        if iterations % 11 == 0:  # exceptional shift breaks cycles
            shift = d + abs(H[hi, hi - 1])
        # implicit single-shift sweep on the active block via Givens rotations
        x, y = H[lo, lo] - shift, H[lo + 1, lo]
        for k in range(lo, hi):
            cs, sn = _givens(x, y)
            G = np.array([[np.conj(cs), np.conj(sn)], [-sn, cs]])
            cols = slice(max(lo, k - 1), n)
            H[k : k + 2, cols] = G @ H[k : k + 2, cols]
            rows = slice(0, min(k + 3, hi + 1))
            H[rows, k : k + 2] = H[rows, k : k + 2] @ G.conj().T
            if k < hi - 1:
                x, y = H[k + 1, k], H[k + 2, k]
    return eig


# -- public solvers ---------------------------------------------------------


def eig_dense(C, method: str = "lapack", max_dim: int = DEFAULT_MAX_DIM, config: SolverConfig | None = None) -> Spectrum:
    """All eigenvalues of a square complex matrix.

    ``method="lapack"`` calls LAPACK's Hessenberg + shifted QR driver;
    ``method="qr"`` runs the pure-numpy reference iteration (small matrices).
    """
    C = np.asarray(C)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    if C.shape[0] > max_dim:
        raise ValueError(f"matrix dimension {C.shape[0]} exceeds cap {max_dim}")
    if method == "lapack":
        try:
            ev = sla.eigvals(C, check_finite=True, overwrite_a=False)
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(str(exc)) from exc
    elif method == "qr":
        ev = qr_eigenvalues(C)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum(eigenvalues=np.asarray(ev, dtype=complex), config=config)


def eig_near(problem: DiscreteProblem, sigma: complex, k: int = 6) -> Spectrum:
    """The ``k`` eigenvalues closest to ``sigma`` by sparse shift-invert."""
    d = sps.diags(1 / np.sqrt(_check_b(problem.b)))
    C = (d @ problem.A @ d).tocsc()
    k = min(k, problem.dim - 2)
    try:
        ev = spla.eigs(C, k=k, sigma=sigma, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise EigenSolverError(str(exc)) from exc
    return Spectrum(eigenvalues=np.asarray(ev), config=problem.config, complete=False)


def solve(problem: DiscreteProblem, method: str = "lapack") -> Spectrum:
    return eig_dense(reduce(problem), method=method, config=problem.config)


def eigenvector(C, E, *, b=None, tol: float = RESIDUAL_TOL, maxiter: int = 50, seed: int = 0, spectrum=None):
    """Inverse iteration for the eigenvector of C nearest ``E``.

    Returns ``(vector, residual)``. With ``b`` the vector is mapped back to the
    original basis, ``x = B^{-1/2} y``, and the residual is
    ``|A x - E B x| / |x|`` of the pair. The vector is normalised to unit
    2-norm with its largest component real. If ``spectrum`` is given, a
    warning is issued when other eigenvalues cluster around ``E``.
    """
    if spectrum is not None:
        others = np.asarray(getattr(spectrum, "eigenvalues", spectrum))
        if np.count_nonzero(np.abs(others - E) <= CLUSTER_TOL * max(1.0, abs(E))) > 1:
            warnings.warn(f"eigenvalue {E:.6g} is clustered; the vector may mix neighbours", RuntimeWarning, stacklevel=2)
    sparse = sps.issparse(C)
    n = C.shape[0]
    shift = E + 1e-12 * max(1.0, abs(E))  # keep the factorization regular
    if sparse:
        lu = spla.splu((C - shift * sps.identity(n, format="csc")).tocsc())
        solve_ = lu.solve
    else:
        lu = sla.lu_factor(np.asarray(C) - shift * np.eye(n))
        solve_ = lambda v: sla.lu_solve(lu, v)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y /= np.linalg.norm(y)
    res = np.inf
    for _ in range(maxiter):
        y = solve_(y)
        y /= np.linalg.norm(y)
        lam = np.vdot(y, C @ y)
        res = np.linalg.norm(C @ y - lam * y)
        if res <= tol * max(1.0, abs(lam)):
            break
    else:
        raise EigenSolverError(f"inverse iteration stalled at residual {res:.2e}")
    if b is not None:
        d = 1 / np.sqrt(_check_b(b))
        x = y * d
        x /= np.linalg.norm(x)
        y = x
        Ax = (C @ (x / d)) / d  # A = B^{1/2} C B^{1/2}
        res = np.linalg.norm(Ax - lam * np.asarray(b) * x)
    big = np.argmax(np.abs(y))
    y = y * (abs(y[big]) / y[big])
    return y, float(res)


def verify(spectrum: Spectrum, problem: DiscreteProblem, indices) -> Spectrum:
    """Fill ``spectrum.residuals`` for the given indices by inverse iteration."""
    C = reduce(problem)
    for i in indices:
        E = spectrum.eigenvalues[i]
        try:
            x, _ = eigenvector(C, E, b=problem.b)
        except EigenSolverError:
            spectrum.residuals[int(i)] = float("inf")
            continue
        spectrum.residuals[int(i)] = residual(problem, x, E)
    return spectrum


def residual(problem: DiscreteProblem, x, E) -> float:
    """``|A x - E B x| / |x|`` for the generalized pair."""
    x = np.asarray(x)
    return float(np.linalg.norm(problem.A @ x - E * problem.b * x) / np.linalg.norm(x))
