"""Symmetric positive definite factorizations used for log-determinants,
solves and Gaussian sampling."""
from __future__ import annotations


import numba as nb
import numpy as np
import scipy.sparse as sp
from scipy import linalg
from scipy.sparse.linalg import splu

__all__ = ["SPDFactor", "DENSE_LIMIT"]

DENSE_LIMIT = 2000


@nb.njit(cache=True, nogil=True)
def _unit_upper_solve(indptr, indices, data, diag, rhs):
    # rows of U = D L^T in CSR; solve (D^{-1} U) w = rhs in place, all columns at once
    n, k = rhs.shape
    for i in range(n - 1, -1, -1):
        inv = 1.0 / diag[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j <= i:
                continue
            f = data[p] * inv
            for c in range(k):
                rhs[i, c] -= f * rhs[j, c]


class SPDFactor:
    """A = P^T L D L^T P for a sparse symmetric positive definite A.

    Up to DENSE_LIMIT rows a dense Cholesky factor is used; above it SuperLU
    with a symmetric ordering and no pivoting, whose U factor is D L^T.
    """

    def __init__(self, A):
        A = sp.csc_matrix(A)
        self.n = A.shape[0]
        self.dense = self.n <= DENSE_LIMIT
        if self.dense:
            self._chol = linalg.cholesky(A.toarray(), lower=True)
            self.logdet = 2.0 * float(np.sum(np.log(np.diag(self._chol))))
        else:
            lu = splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                      options=dict(SymmetricMode=True))
            if not np.array_equal(lu.perm_r, lu.perm_c):
                raise ArithmeticError("factorization pivoted; the matrix is not usable as SPD")
            U = lu.U.tocsr()
            d = U.diagonal()
            if np.any(d <= 0):
                raise ArithmeticError("matrix is not positive definite")
            self._lu = lu
            self._U = (U.indptr.astype(np.int64), U.indices.astype(np.int64), U.data.copy())
            self._d = d
            self._perm = lu.perm_c.copy()
            self.logdet = float(np.sum(np.log(d)))

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.dense:
            return linalg.cho_solve((self._chol, True), b)
        return self._lu.solve(np.asarray(b, dtype=float))

    def correlate(self, z: np.ndarray) -> np.ndarray:
        """Map iid standard normals (n, k) to columns with covariance A^{-1}."""
        if self.dense:
            return linalg.solve_triangular(self._chol, z, lower=True, trans="T", check_finite=False)
        w = np.ascontiguousarray(z / np.sqrt(self._d)[:, None])
        _unit_upper_solve(*self._U, self._d, w)
        return w[self._perm]
