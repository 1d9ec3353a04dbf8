import numpy as np
import pytest

from chiptrap.eigen import (
    EigenSolverError,
    eig_dense,
    eig_near,
    eigenvector,
    hessenberg,
    qr_eigenvalues,
    reduce,
    reduce_pair,
    residual,
    solve,
    verify,
)
from chiptrap.heff import SolverConfig, assemble, channel_weights

from oracles import generalized_eigvals, power_deflation


def sorted_c(z):
    z = np.asarray(z)
    return z[np.lexsort((np.round(z.imag, 8), np.round(z.real, 8)))]


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_reduce_identity_and_diagonal():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert np.array_equal(reduce_pair(A, np.ones(2)), A)
    ev = eig_dense(reduce_pair(np.diag([2.0, 3.0]), np.array([1.0, 4.0]))).eigenvalues
    assert np.allclose(sorted(ev.real), [0.75, 2.0])


def test_reduce_rejects_nonpositive_b():
    with pytest.raises(ValueError):
        reduce_pair(np.eye(2), np.array([1.0, 0.0]))


@pytest.mark.parametrize("n", [3, 5, 6])
def test_reduce_against_characteristic_polynomial(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = A + A.conj().T
    b = rng.uniform(0.3, 3.0, n)
    ours = eig_dense(reduce_pair(A, b)).eigenvalues
    oracle = generalized_eigvals(A, np.diag(b))
    assert np.allclose(sorted_c(ours), sorted_c(oracle), atol=1e-10)


@pytest.mark.parametrize("method", ["lapack", "qr"])
def test_triangular_gives_diagonal(rng, method):
    T = np.triu(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    ev = eig_dense(T, method=method).eigenvalues
    assert np.allclose(sorted_c(ev), sorted_c(np.diag(T)), atol=1e-13)


@pytest.mark.parametrize("method", ["lapack", "qr"])
def test_companion_cube_roots(method):
    C = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
    ev = eig_dense(C, method=method).eigenvalues
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    assert np.allclose(sorted_c(ev), sorted_c(roots), atol=1e-10)


def test_complex_symmetric_200_against_power_iteration(rng):
    n = 200
    C = np.diag(np.r_[[10.0, 9.0, 8.0, 7.0, 6.0], rng.uniform(-5, 5, n - 5)]).astype(complex)
    noise = 0.02 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    C += noise + noise.T
    ev = eig_dense(C).eigenvalues
    top = ev[np.argsort(-np.abs(ev))][:5]
    oracle = power_deflation(C, count=5)
    assert np.allclose(top, oracle, rtol=1e-3)


def test_reference_qr_matches_lapack(rng):
    C = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
    assert np.allclose(sorted_c(qr_eigenvalues(C)), sorted_c(eig_dense(C).eigenvalues), atol=1e-9)
    H = hessenberg(C)
    assert np.allclose(np.tril(H, -2), 0)


def test_qr_iteration_cap_reports_indices(rng):
    C = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    with pytest.raises(EigenSolverError) as err:
        qr_eigenvalues(C, max_sweeps_per_eig=0)
    assert len(err.value.failed) > 0


def test_similarity_and_trace(rng):
    n = 80
    C = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    P = np.diag(rng.uniform(0.5, 2.0, n))
    a = eig_dense(C).eigenvalues
    b = eig_dense(P @ C @ np.linalg.inv(P)).eigenvalues
    assert np.allclose(sorted_c(a), sorted_c(b), atol=1e-8)
    assert abs(a.sum() - np.trace(C)) <= 1e-6 * abs(np.trace(C))


def test_determinism(rng):
    C = rng.standard_normal((60, 60)) + 1j * rng.standard_normal((60, 60))
    assert np.array_equal(eig_dense(C).eigenvalues, eig_dense(C.copy()).eigenvalues)
    v1, _ = eigenvector(C, eig_dense(C).eigenvalues[0])
    v2, _ = eigenvector(C, eig_dense(C).eigenvalues[0])
    assert np.array_equal(v1, v2)


def test_input_checks():
    with pytest.raises(ValueError):
        eig_dense(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        eig_dense(np.eye(5), max_dim=4)
    with pytest.raises(ValueError):
        eig_dense(np.eye(2), method="jacobi")


def test_eigenvector_of_diagonal():
    C = np.diag([1.0, 2.0, 3.0]).astype(complex)
    v, res = eigenvector(C, 2.0 + 1e-3)
    assert np.allclose(np.abs(v), [0, 1, 0], atol=1e-7)
    assert res <= 1e-8 * 2


def test_clustered_eigenvalue_warns():
    C = np.diag([1.0, 1.0 + 1e-12, 3.0]).astype(complex)
    with pytest.warns(RuntimeWarning):
        eigenvector(C, 1.0 + 5e-9, spectrum=np.diag(C))


def small_problem(**kw):
    return assemble(SolverConfig(**{"rho_sq": 0.2, "n": 150, "delta_r": 0.1, **kw}))


def test_residual_contract_on_solver_output():
    p = small_problem()
    C = reduce(p)
    spectrum = solve(p)
    E = min(spectrum.eigenvalues, key=lambda e: abs(e - 1.05))
    x, res = eigenvector(C, E, b=p.b)
    assert residual(p, x, E) <= 1e-8
    assert res == pytest.approx(residual(p, x, E), rel=1e-6, abs=1e-12)
    idx = np.argsort(np.abs(spectrum.eigenvalues - 1.05))[:3]
    verify(spectrum, p, idx)
    assert sorted(spectrum.verified()) == sorted(int(i) for i in idx)


def test_shift_invert_matches_dense():
    p = small_problem(phi=0.2)
    dense = solve(p).eigenvalues
    near = eig_near(p, 1.0, k=4).eigenvalues
    for e in near:
        assert np.min(np.abs(dense - e)) < 1e-8
    assert not eig_near(p, 1.0, k=2).complete


def test_unrotated_second_order_spectrum_is_real():
    ev = solve(small_problem(phi=0.0, fd_order=2)).eigenvalues
    assert np.max(np.abs(ev.imag)) <= 1e-10


def test_spectrum_has_full_count():
    p = small_problem()
    assert len(solve(p)) == p.dim


def test_deep_adiabatic_ground_state_is_trapped_channel():
    p = assemble(SolverConfig.for_radius(0.04, radius=15.0, delta_r=0.05, phi=0.2))
    E = min(eig_near(p, 1.0, k=4).eigenvalues, key=lambda e: abs(e - 1.0))
    x, _ = eigenvector(reduce(p), E, b=p.b)
    assert channel_weights(x, p)["+"] > 0.99
