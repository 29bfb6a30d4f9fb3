"""Sparse symmetric assembly helpers, SPD solvers, and condition-number
estimation for the assembled systems."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import cho_factor, cho_solve


class NotSpdError(RuntimeError):
    """Raised when a matrix expected to be SPD shows negative curvature."""


class ConvergenceError(RuntimeError):
    def __init__(self, msg, iterations):
        super().__init__(msg)
        self.iterations = iterations


class SparseSym:
    """COO accumulator for a symmetric matrix; finalize() checks symmetry
    and drops explicit zeros."""

    def __init__(self, n):
        self.n = n
        self._rows = []
        self._cols = []
        self._vals = []

    def add(self, i, j, v):
        self._rows.append(np.asarray(i, dtype=np.int64).ravel())
        self._cols.append(np.asarray(j, dtype=np.int64).ravel())
        self._vals.append(np.asarray(v, dtype=float).ravel())

    def finalize(self):
        A = sp.coo_matrix(
            (np.concatenate(self._vals),
             (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(self.n, self.n)).tocsr()
        A.sum_duplicates()
        A.eliminate_zeros()
        d = abs(A - A.T)
        if d.nnz and d.max() > 1e-13 * max(abs(A).max(), 1.0):
            raise ValueError("assembled matrix is not symmetric")
        return A


def solve_cg(A, b, tol=1e-12, max_iter=None, preconditioner="none"):
    """Conjugate gradients with explicit negative-curvature detection.

    Returns (x, iterations); raises NotSpdError on negative curvature and
    ConvergenceError when the relative residual stays above tol.
    """
    n = A.shape[0]
    if max_iter is None:
        max_iter = 20 * n
    if preconditioner == "jacobi":
        d = A.diagonal()
        if np.any(d <= 0):
            raise NotSpdError("non-positive diagonal entry")
        minv = 1.0 / d
    elif preconditioner == "none":
        minv = None
    else:
        raise ValueError(f"unknown preconditioner {preconditioner!r}")

    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    x = np.zeros(n)
    r = b.copy()
    z = r * minv if minv is not None else r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotSpdError(
                f"negative curvature p^T A p = {pAp:.3e} at iteration {it}")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it
        z = r * minv if minv is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"CG did not reach tol {tol:g} in {max_iter} iterations "
        f"(relative residual {np.linalg.norm(r) / bnorm:.3e})", max_iter)


def solve_dense_cholesky(A, b):
    """Dense Cholesky solve; factorization failure signals non-SPD."""
    if sp.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    if A.shape[0] > 5000:
        raise ValueError("dense Cholesky limited to dimension 5000")
    try:
        c = cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise NotSpdError(f"Cholesky factorization failed: {exc}") from exc
    return cho_solve(c, np.asarray(b, dtype=float))


def solve_spd(A, b, method="direct", tol=1e-12):
    """Default solve path for assembled systems."""
    if method == "direct":
        lu = spla.splu(A.tocsc())
        return lu.solve(np.asarray(b, dtype=float))
    if method == "cg":
        x, _ = solve_cg(A, b, tol=tol, preconditioner="jacobi")
        return x
    if method == "dense":
        return solve_dense_cholesky(A, b)
    raise ValueError(f"unknown solver {method!r}")


def _lanczos_lambda_max(A, max_iter=200, tol=1e-10):
    """Largest eigenvalue by plain Lanczos with the deterministic
    all-ones start vector."""
    n = A.shape[0]
    q = np.ones(n) / np.sqrt(n)
    alphas, betas = [], []
    q_prev = np.zeros(n)
    beta = 0.0
    est_prev = -np.inf
    for it in range(min(max_iter, n)):
        w = A @ q - beta * q_prev
        alpha = float(q @ w)
        w -= alpha * q
        alphas.append(alpha)
        beta = float(np.linalg.norm(w))
        Tm = np.diag(alphas)
        if len(betas):
            off = np.array(betas)
            Tm += np.diag(off, 1) + np.diag(off, -1)
        est = float(np.linalg.eigvalsh(Tm)[-1])
        if it >= 10 and abs(est - est_prev) <= tol * abs(est):
            return est
        est_prev = est
        if beta == 0.0:
            return est
        betas.append(beta)
        q_prev, q = q, w / beta
    return est


def _lambda_min_inverse_iteration(A, max_iter=200, tol=1e-8):
    """Smallest eigenvalue by inverse iteration with direct inner solves."""
    n = A.shape[0]
    if sp.issparse(A):
        solve = spla.factorized(A.tocsc())
    else:
        c = cho_factor(np.asarray(A, dtype=float))
        solve = lambda v: cho_solve(c, v)
    x = np.ones(n) / np.sqrt(n)
    lam_prev = None
    for _ in range(max_iter):
        y = solve(x)
        ny = np.linalg.norm(y)
        x = y / ny
        lam = float(x @ (A @ x))
        if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
            return lam
        lam_prev = lam
    return lam


def estimate_condition_2(A):
    """kappa_2 = lambda_max / lambda_min of an SPD matrix."""
    n = A.shape[0]
    if n == 1:
        v = (A @ np.ones(1))[0] if sp.issparse(A) else float(A[0, 0])
        return 1.0 if v != 0 else np.inf
    lam_max = _lanczos_lambda_max(A)
    lam_min = _lambda_min_inverse_iteration(A)
    if lam_min <= 0:
        raise NotSpdError(f"nonpositive smallest eigenvalue {lam_min:.3e}")
    return lam_max / lam_min


def export_matrix_market(A, path):
    from scipy.io import mmwrite
    mmwrite(path, sp.coo_matrix(A))
