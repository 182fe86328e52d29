"""
Test script for the linear-algebra kernel (sparse solves, Jacobi eigensolver, URM1 files)
Run: python test_linalg.py   (or pytest test_linalg.py)
"""
import sys
import traceback

import numpy as np
import pytest
import scipy.sparse as sp

from src.linalg.dense_ops import condition_number, dense_lu_solve, matmul, transpose_matmul, triple_product
from src.linalg.eigen import round_robin_pairs, sym_eig
from src.linalg.matrix_io import read_matrix, read_vector, write_matrix
from src.linalg.sparse_solvers import lu_solve, pcg, solve_sparse
from src.utils.errors import InvalidArgumentError, RankDeficientError, SolverFailureError


def _random_spd(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    return M.T @ M + np.eye(n)


def _laplace_1d(n: int) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()


def test_trivial_solves():
    b = np.array([1.0, -2.0, 3.0, 0.5, 7.0])
    assert np.allclose(solve_sparse(sp.identity(5), b, symmetric=True), b)
    assert np.allclose(solve_sparse(sp.diags([2.0, 4.0]), np.array([2.0, 8.0])), [1.0, 2.0])


def test_spd_matches_dense_oracle():
    A = _random_spd(50, seed=3)
    b = np.random.default_rng(4).standard_normal(50)
    oracle = np.linalg.solve(A, b)
    for symmetric in (True, False):
        x = solve_sparse(sp.csr_matrix(A), b, symmetric=symmetric)
        assert np.abs(x - oracle).max() < 1e-8
        assert np.linalg.norm(A @ x - b) <= 1e-10 * max(1.0, np.linalg.norm(b))


def test_cg_history():
    A = _laplace_1d(60)
    b = np.linspace(-1.0, 1.0, 60)
    x, iterations, history = pcg(A, b)
    assert iterations == len(history) - 1
    assert iterations <= 2 * 60
    assert history[-1] < history[0]
    assert np.allclose(x, np.linalg.solve(A.toarray(), b))


def test_cg_cap_raises_with_residual():
    A = _laplace_1d(200)
    with pytest.raises(SolverFailureError) as info:
        pcg(A, np.ones(200), max_iter=3)
    assert info.value.residual > 0.0


def test_singular_lu_raises():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SolverFailureError):
        lu_solve(A, np.array([1.0, 1.0]))


def test_cg_failure_falls_back_to_lu():
    # symmetric but indefinite: CG breaks down, LU solves it
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    b = np.array([3.0, -1.0])
    with pytest.warns(UserWarning):
        x = solve_sparse(A, b, symmetric=True)
    assert np.allclose(x, [-5.0 / 3.0, 7.0 / 3.0])


def test_shape_errors():
    with pytest.raises(InvalidArgumentError):
        solve_sparse(sp.identity(3), np.ones(4))
    with pytest.raises(InvalidArgumentError):
        solve_sparse(sp.csr_matrix(np.ones((2, 3))), np.ones(2))


def test_sym_eig_small_cases():
    lam, Q = sym_eig(np.diag([1.0, 3.0]))
    assert np.allclose(lam, [3.0, 1.0])
    assert np.allclose(np.abs(Q), [[0.0, 1.0], [1.0, 0.0]])

    lam, Q = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(lam, [3.0, 1.0])
    s = 1.0 / np.sqrt(2.0)
    assert np.allclose(np.abs(Q[:, 0]), [s, s])
    assert np.allclose(Q[:, 1] * np.sign(Q[0, 1]), [s, -s])


def test_sym_eig_random():
    rng = np.random.default_rng(11)
    M = rng.standard_normal((30, 30))
    C = M + M.T
    for method in ('jacobi', 'lapack'):
        _check_eig(C, *sym_eig(C, method=method))


def _check_eig(C, lam, Q):
    norm = np.linalg.norm(C)
    assert np.linalg.norm(Q @ np.diag(lam) @ Q.T - C) < 1e-10 * norm
    assert np.abs(Q.T @ Q - np.eye(30)).max() < 1e-10
    assert np.all(np.diff(lam) <= 0.0)
    assert abs(lam.sum() - np.trace(C)) < 1e-10 * max(1.0, abs(np.trace(C)))
    assert np.allclose(lam, np.sort(np.linalg.eigvalsh(C))[::-1])


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(InvalidArgumentError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidArgumentError):
        sym_eig(np.eye(2), method='power')


def test_round_robin_covers_all_pairs():
    for n in (2, 5, 8):
        seen = set()
        for left, right in round_robin_pairs(n):
            for p, q in zip(left, right):
                seen.add((min(p, q), max(p, q)))
        assert seen == {(p, q) for p in range(n) for q in range(p + 1, n)}


def test_dense_products():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(matmul(A, B), [[2.0, 1.0], [4.0, 3.0]])
    assert np.allclose(matmul(np.eye(2), A), A)

    rng = np.random.default_rng(5)
    L = rng.standard_normal((7, 3))
    K = sp.csr_matrix(rng.standard_normal((7, 7)))
    naive = np.zeros((3, 3))
    Kd = K.toarray()
    for i in range(3):
        for j in range(3):
            naive[i, j] = sum(L[a, i] * Kd[a, b] * L[b, j] for a in range(7) for b in range(7))
    assert np.abs(triple_product(L, K, L) - naive).max() < 1e-12
    assert np.allclose(transpose_matmul(L, L), L.T @ L)
    with pytest.raises(InvalidArgumentError):
        matmul(A, np.ones((3, 1)))


def test_dense_lu_and_condition():
    x = dense_lu_solve(np.array([[4.0, 1.0], [1.0, 3.0]]), np.array([1.0, 2.0]))
    assert np.allclose(x, np.linalg.solve([[4.0, 1.0], [1.0, 3.0]], [1.0, 2.0]))
    with pytest.raises(RankDeficientError) as info:
        dense_lu_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))
    assert info.value.condition is not None
    assert condition_number(np.diag([10.0, 0.1])) == pytest.approx(100.0)


def test_urm1_files(tmp_path):
    dense = np.arange(6, dtype=float).reshape(2, 3)
    path = write_matrix(tmp_path / 'dense.urm', dense)
    raw = path.read_bytes()
    assert raw[:4] == b"URM1"
    assert int.from_bytes(raw[4:12], 'little') == 2
    assert int.from_bytes(raw[12:20], 'little') == 3
    assert np.array_equal(read_matrix(path, kind='dense'), dense)

    sparse = sp.csr_matrix(np.array([[0.0, 1.5, 0.0], [2.0, 0.0, -1.0]]))
    back = read_matrix(write_matrix(tmp_path / 'sparse.urm', sparse), kind='sparse')
    assert (back != sparse).nnz == 0

    vec = np.array([1.0, -2.0, 3.5])
    assert np.array_equal(read_vector(write_matrix(tmp_path / 'vec.urm', vec)), vec)

    (tmp_path / 'junk.urm').write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(InvalidArgumentError):
        read_matrix(tmp_path / 'junk.urm')
    with pytest.raises(FileNotFoundError):
        read_matrix(tmp_path / 'missing.urm')


if __name__ == "__main__":
    import inspect
    import tempfile
    from pathlib import Path

    print("=" * 70)
    print("Testing Linear Algebra Kernel")
    print("=" * 70)

    failures = 0
    checks = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith('test_')]
    for i, (name, fn) in enumerate(checks, 1):
        print(f"\n{i}. {name}...")
        try:
            if 'tmp_path' in inspect.signature(fn).parameters:
                with tempfile.TemporaryDirectory() as tmp:
                    fn(Path(tmp))
            else:
                fn()
            print("✅ PASS")
        except Exception as e:
            failures += 1
            print(f"❌ FAIL: {e}")
            traceback.print_exc()

    print("\n" + "=" * 70)
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    print("=" * 70)
    sys.exit(1 if failures else 0)
