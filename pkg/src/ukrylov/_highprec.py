"""Arbitrary-precision Toeplitz factorizations with mpmath.

All routines take the moments as a list of mpmath numbers (``mpf`` when
the sequence is real, ``mpc`` otherwise) and must be called inside a
``mpmath.workdps`` context of the desired precision.
"""
import mpmath as mp

from .errors import PrecisionExhausted


def _conj(x):
    return x.conjugate() if isinstance(x, mp.mpc) else x


def _abs2(x):
    if isinstance(x, mp.mpc):
        return x.real * x.real + x.imag * x.imag
    return x * x


def moment(S, k):
    return S[k] if k >= 0 else _conj(S[-k])


def cholesky(S, tol, size=None):
    """Lower Cholesky factor of the Gram matrix G[s, t] = S[t - s].

    Returns ``(L, rank)`` where ``L`` is a list of rows of length ``rank``.
    Stops at the first pivot below ``tol``; a pivot below ``-tol`` raises
    :class:`PrecisionExhausted`.
    """
    n = len(S) if size is None else size
    L = []
    for j in range(n):
        row_j = [mp.mpf(0)] * (j + 1)
        for k in range(j):
            acc = _conj(moment(S, j - k))
            rk = L[k]
            acc -= mp.fsum(row_j[m] * _conj(rk[m]) for m in range(k))
            row_j[k] = acc / rk[k]
        d = S[0].real if isinstance(S[0], mp.mpc) else S[0]
        d -= mp.fsum(_abs2(row_j[m]) for m in range(j))
        if d < -tol:
            raise PrecisionExhausted(
                f"negative Cholesky pivot {mp.nstr(d, 5)} at n={j}; raise the precision")
        if d < tol:
            return L, j
        row_j[j] = mp.sqrt(d)
        L.append(row_j)
    return L, n


def lower_inverse(L):
    """Inverse of a lower-triangular matrix given as a list of rows."""
    n = len(L)
    A = [[mp.mpf(0)] * (i + 1) for i in range(n)]
    for i in range(n):
        Li = L[i]
        inv_d = 1 / Li[i]
        A[i][i] = inv_d
        for j in range(i - 1, -1, -1):
            acc = mp.fsum(Li[k] * A[k][j] for k in range(j, i))
            A[i][j] = -acc * inv_d
    return A


def structured_coefficients(alpha, L, S):
    """Hessenberg coefficients from the structural identities.

    ``c_n = sum_t alpha[n][t] S[t+1]``, ``a_n = conj(alpha[n][0]) c_n``,
    ``b_n = L[n][n] / L[n-1][n-1]``, with ``alpha`` the conjugated inverse
    of ``L`` (rows of the Krylov-from-evolved transform).
    """
    r = len(alpha)
    T = len(S) - 1
    na = min(r, T)
    c = [mp.fsum(alpha[n][t] * S[t + 1] for t in range(n + 1)) for n in range(na)]
    a = [_conj(alpha[n][0]) * c[n] for n in range(na)]
    b = [None] + [L[n][n] / L[n - 1][n - 1] for n in range(1, min(r, T + 1))]
    return a, b, c


def szego(S, tol, size=None):
    """Szego recursion for the monic orthogonal polynomials of the moments.

    Returns a dict with the Verblunsky-type coefficients ``gamma`` (the
    conjugate Verblunsky coefficient at each step), the squared norms
    ``E``, the monic coefficient rows ``phi`` and the detected ``rank``.
    """
    n = len(S) if size is None else size
    T = len(S) - 1
    E0 = S[0].real if isinstance(S[0], mp.mpc) else S[0]
    phi = [[mp.mpf(1)]]
    E = [E0]
    gamma = []
    rank = 1 if E0 >= tol else 0
    if rank == 0:
        return {"gamma": gamma, "E": E, "phi": [], "rank": 0}
    while rank < n and rank <= T:
        m = rank - 1
        p = phi[m]
        g = mp.fsum(p[t] * S[t + 1] for t in range(m + 1)) / E[m]
        En = E[m] * (1 - _abs2(g))
        gamma.append(g)
        if En < -tol:
            raise PrecisionExhausted(
                f"norm {mp.nstr(En, 5)} < 0 at n={m + 1}; raise the precision")
        if En < tol:
            break
        # Phi_{m+1} = z Phi_m - g Phi_m^*
        new = [mp.mpf(0)] + list(p)
        for t in range(m + 1):
            new[t] -= g * _conj(p[m - t])
        phi.append(new)
        E.append(En)
        rank += 1
    if rank <= T and len(gamma) < rank:
        # one more coefficient keeps a_{rank-1} and c_{rank-1} available
        m = rank - 1
        p = phi[m]
        gamma.append(mp.fsum(p[t] * S[t + 1] for t in range(m + 1)) / E[m])
    return {"gamma": gamma, "E": E, "phi": phi, "rank": rank}


def szego_coefficients(res, T):
    """Hessenberg (a, b, c) from the Szego recursion output."""
    gamma, E, r = res["gamma"], res["E"], res["rank"]
    na = min(r, T)
    sqrtE = [mp.sqrt(e) for e in E]
    a, c = [], []
    for n in range(na):
        if n == 0:
            a.append(gamma[0])
        else:
            a.append(-gamma[n] * _conj(gamma[n - 1]))
        c.append(gamma[n] * sqrtE[n])
    b = [None] + [sqrtE[n] / sqrtE[n - 1] for n in range(1, min(r, T + 1))]
    return a, b, c


def szego_alpha(res):
    """Orthonormal coefficient rows ``phi_n / sqrt(E_n)``."""
    return [[x / mp.sqrt(e) for x in p] for p, e in zip(res["phi"], res["E"])]
