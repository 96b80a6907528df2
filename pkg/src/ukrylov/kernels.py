"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba (``*_nb``)
and a vectorized numpy version (``*_np``).  The public name points at one
of them according to :data:`ukrylov._accel.USE_NUMBA`.  Both versions are
kept importable so tests and the benchmark can compare them directly.
"""
import numpy as np
from scipy.linalg import solve_triangular

from ._accel import njit, select

# status codes returned by the Cholesky kernels
CHOL_OK = 0
CHOL_NEGATIVE = 1


# ---------------------------------------------------------------------------
# Cholesky factorization of a Hermitian Toeplitz Gram matrix G[s, t] = S[t - s]
# ---------------------------------------------------------------------------

@njit(cache=True)
def toeplitz_cholesky_nb(S, tol):
    n = S.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        d = S[0].real
        for k in range(j):
            d -= L[j, k].real * L[j, k].real + L[j, k].imag * L[j, k].imag
        if d < -tol:
            return L, j, CHOL_NEGATIVE
        if d < tol:
            return L, j, CHOL_OK
        ljj = np.sqrt(d)
        L[j, j] = ljj
        for i in range(j + 1, n):
            acc = np.conj(S[i - j])
            for k in range(j):
                acc -= L[i, k] * np.conj(L[j, k])
            L[i, j] = acc / ljj
    return L, n, CHOL_OK


def toeplitz_cholesky_np(S, tol):
    S = np.asarray(S, dtype=np.complex128)
    n = S.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    col = np.conj(S)
    for j in range(n):
        row = L[j, :j]
        d = S[0].real - np.sum(row.real ** 2 + row.imag ** 2)
        if d < -tol:
            return L, j, CHOL_NEGATIVE
        if d < tol:
            return L, j, CHOL_OK
        ljj = np.sqrt(d)
        L[j, j] = ljj
        L[j + 1:, j] = (col[1:n - j] - L[j + 1:, :j] @ np.conj(row)) / ljj
    return L, n, CHOL_OK


toeplitz_cholesky = select(toeplitz_cholesky_nb, toeplitz_cholesky_np)


# ---------------------------------------------------------------------------
# inverse of a lower-triangular matrix
# ---------------------------------------------------------------------------

@njit(cache=True)
def lower_inverse_nb(L):
    n = L.shape[0]
    A = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        A[i, i] = 1.0 / L[i, i]
        for j in range(i - 1, -1, -1):
            acc = 0j
            for k in range(j, i):
                acc += L[i, k] * A[k, j]
            A[i, j] = -acc / L[i, i]
    return A


def lower_inverse_np(L):
    L = np.asarray(L, dtype=np.complex128)
    n = L.shape[0]
    return solve_triangular(L, np.eye(n, dtype=np.complex128), lower=True)


lower_inverse = select(lower_inverse_nb, lower_inverse_np)


# ---------------------------------------------------------------------------
# Hessenberg coefficients a_n, b_n, c_n by direct bilinear sums
#   U_mn = sum_{s<=m, t<=n} conj(alpha[m, s]) alpha[n, t] S[t + 1 - s]
# ---------------------------------------------------------------------------

@njit(cache=True)
def _moment(S, k):
    if k >= 0:
        return S[k]
    return np.conj(S[-k])


@njit(cache=True)
def hessenberg_coefficients_nb(alpha, S):
    R = alpha.shape[0]
    T = S.shape[0] - 1
    na = min(R, T)
    nb = min(R, T + 1)
    a = np.zeros(na, dtype=np.complex128)
    c = np.zeros(na, dtype=np.complex128)
    b = np.full(nb, np.nan + 0j)
    for n in range(na):
        acc = 0j
        for t in range(n + 1):
            acc += alpha[n, t] * S[t + 1]
        c[n] = acc
        acc = 0j
        for s in range(n + 1):
            inner = 0j
            for t in range(n + 1):
                inner += alpha[n, t] * _moment(S, t + 1 - s)
            acc += np.conj(alpha[n, s]) * inner
        a[n] = acc
    for n in range(1, nb):
        acc = 0j
        for s in range(n + 1):
            inner = 0j
            for t in range(n):
                inner += alpha[n - 1, t] * _moment(S, t + 1 - s)
            acc += np.conj(alpha[n, s]) * inner
        b[n] = acc
    return a, b, c


def shifted_gram(S, size):
    """Matrix M[s, t] = S[t + 1 - s] for s, t < size; unavailable moments are 0."""
    S = np.asarray(S, dtype=np.complex128)
    T = S.shape[0] - 1
    k = np.arange(size)[None, :] + 1 - np.arange(size)[:, None]
    M = np.zeros((size, size), dtype=np.complex128)
    pos = (k >= 0) & (k <= T)
    M[pos] = S[k[pos]]
    neg = k < 0
    M[neg] = np.conj(S[-k[neg]])
    return M


def hessenberg_coefficients_np(alpha, S):
    alpha = np.asarray(alpha, dtype=np.complex128)
    R = alpha.shape[0]
    T = len(S) - 1
    U = np.conj(alpha) @ shifted_gram(S, R) @ alpha.T
    na = min(R, T)
    nb = min(R, T + 1)
    a = np.diagonal(U)[:na].copy()
    c = U[0, :na].copy()
    b = np.full(nb, np.nan + 0j)
    idx = np.arange(1, nb)
    b[1:] = U[idx, idx - 1]
    return a, b, c


hessenberg_coefficients = select(hessenberg_coefficients_nb, hessenberg_coefficients_np)


# ---------------------------------------------------------------------------
# momentum sums (1/N) sum_k T_t(x_k) via the Chebyshev recurrence
# ---------------------------------------------------------------------------

@njit(cache=True)
def chebyshev_mean_nb(x, T):
    N = x.shape[0]
    out = np.zeros(T + 1)
    for k in range(N):
        xk = x[k]
        prev = 1.0
        cur = xk
        out[0] += 1.0
        if T >= 1:
            out[1] += cur
        for t in range(2, T + 1):
            nxt = 2.0 * xk * cur - prev
            prev = cur
            cur = nxt
            out[t] += cur
    return out / N


def chebyshev_mean_np(x, T):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(T + 1)
    prev = np.ones_like(x)
    out[0] = 1.0
    if T >= 1:
        cur = x.copy()
        out[1] = cur.mean()
        for t in range(2, T + 1):
            prev, cur = cur, 2.0 * x * cur - prev
            out[t] = cur.mean()
    return out


chebyshev_mean = select(chebyshev_mean_nb, chebyshev_mean_np)


# ---------------------------------------------------------------------------
# Pauli-string propagation through a Clifford brickwork
#
# A string is (x bits, z bits, e) meaning i^e prod_j X_j^x_j Z_j^z_j.
# A two-site gate is a lookup table tab[idx] = (out_idx, dphase) with
# idx = x_i | z_i << 1 | x_j << 2 | z_j << 3.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _apply_layer_nb(x, z, e, bonds, tables):
    for g in range(bonds.shape[0]):
        i = bonds[g, 0]
        j = bonds[g, 1]
        idx = x[i] | (z[i] << 1) | (x[j] << 2) | (z[j] << 3)
        out = tables[g, idx, 0]
        e += tables[g, idx, 1]
        x[i] = out & 1
        z[i] = (out >> 1) & 1
        x[j] = (out >> 2) & 1
        z[j] = (out >> 3) & 1
    return e % 4


@njit(cache=True)
def clifford_evolve_nb(x0, z0, e0, bonds_first, tables_first, bonds_second, tables_second, tmax):
    L = x0.shape[0]
    X = np.zeros((tmax + 1, L), dtype=np.int64)
    Z = np.zeros((tmax + 1, L), dtype=np.int64)
    E = np.zeros(tmax + 1, dtype=np.int64)
    x = x0.astype(np.int64).copy()
    z = z0.astype(np.int64).copy()
    e = e0 % 4
    X[0] = x
    Z[0] = z
    E[0] = e
    for t in range(1, tmax + 1):
        e = _apply_layer_nb(x, z, e, bonds_first, tables_first)
        e = _apply_layer_nb(x, z, e, bonds_second, tables_second)
        X[t] = x
        Z[t] = z
        E[t] = e
    return X, Z, E


def _apply_layer_np(x, z, e, bonds, tables):
    if len(bonds) == 0:
        return e
    i, j = bonds[:, 0], bonds[:, 1]
    idx = x[i] | (z[i] << 1) | (x[j] << 2) | (z[j] << 3)
    g = np.arange(len(bonds))
    out = tables[g, idx, 0]
    e = (e + int(tables[g, idx, 1].sum())) % 4
    x[i] = out & 1
    z[i] = (out >> 1) & 1
    x[j] = (out >> 2) & 1
    z[j] = (out >> 3) & 1
    return e


def clifford_evolve_np(x0, z0, e0, bonds_first, tables_first, bonds_second, tables_second, tmax):
    L = len(x0)
    X = np.zeros((tmax + 1, L), dtype=np.int64)
    Z = np.zeros((tmax + 1, L), dtype=np.int64)
    E = np.zeros(tmax + 1, dtype=np.int64)
    x = np.asarray(x0, dtype=np.int64).copy()
    z = np.asarray(z0, dtype=np.int64).copy()
    e = int(e0) % 4
    X[0], Z[0], E[0] = x, z, e
    for t in range(1, tmax + 1):
        e = _apply_layer_np(x, z, e, bonds_first, tables_first)
        e = _apply_layer_np(x, z, e, bonds_second, tables_second)
        X[t], Z[t], E[t] = x, z, e
    return X, Z, E


clifford_evolve = select(clifford_evolve_nb, clifford_evolve_np)
