"""Krylov decompositions of unitary operator dynamics.

Two independent routes produce the same data:

* the moment route, which only needs the autocorrelation S_t and factorizes
  the Hermitian Toeplitz Gram matrix ``G[s, t] = S[t - s]``;
* the explicit route, which runs Gram-Schmidt on the evolved operators of a
  dense circuit.

Notation: ``O_n`` (Krylov operators) = ``sum_t alpha[n, t] O_t`` (evolved
operators), ``O_t = sum_n beta[t, n] O_n``, and the superoperator in the
Krylov basis is upper Hessenberg with diagonal ``a``, subdiagonal ``b`` and
first row ``c``.  ``b[0]`` is undefined and stored as nan.
"""
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np
from scipy.linalg import schur

from . import _highprec as hp
from . import kernels
from .circuits import (apply_two_site, assemble_brickwork, check_dense_limit, inner,
                       operator_from_config)
from .errors import NonNormalizedOperator, PrecisionExhausted, RankDeficient

DEFAULT_DIGITS = 16


def default_rank_tol(digits):
    """1e-10 at double precision, ``10**(6 - digits)`` in general."""
    return 10.0 ** (6 - max(int(digits), DEFAULT_DIGITS))


@dataclass
class MomentSequence:
    """Autocorrelation values S_0..S_T.

    ``values`` always holds a complex128 copy; ``exact`` optionally holds
    mpmath numbers carrying ``precision_digits`` significant digits.
    """

    values: np.ndarray
    precision_digits: int = DEFAULT_DIGITS
    exact: Optional[list] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)

    def __len__(self):
        return len(self.values)

    @property
    def T(self):
        return len(self.values) - 1

    def check(self, tol=1e-10):
        """Check S_0 = 1 and |S_t| <= 1 within ``tol``."""
        S = self.values
        return bool(abs(S[0] - 1) <= tol and np.all(np.abs(S) <= 1 + tol))


@dataclass
class KrylovDecomposition:
    """Transforms between evolved and Krylov operators plus Hessenberg data.

    ``alpha`` is rank x rank, ``beta`` has one row per available time step
    (rows beyond ``rank`` express the late evolved operators in the finite
    Krylov space).  ``a`` and ``c`` are indexed by n, ``b[n]`` is the
    element (n, n-1).  ``exact`` keeps the mpmath values when the moment
    route ran above double precision.
    """

    alpha: Optional[np.ndarray]
    beta: Optional[np.ndarray]
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    rank: int
    precision_digits: int = DEFAULT_DIGITS
    moments: Optional[np.ndarray] = None
    hessenberg: Optional[np.ndarray] = None
    exact: Optional[dict] = field(default=None, repr=False)

    @property
    def size(self):
        return len(self.a)


@dataclass
class ComplexityCurve:
    """K(t) together with the weights |beta[t, n]|^2."""

    K: np.ndarray
    weights: np.ndarray


@dataclass
class RegimeReport:
    """Onset of the pure-shift regime and the decay rate of |a_n| before it."""

    onset: Optional[int]
    decay_rate: float
    threshold: float
    window: int


# --------------------------------------------------------------------------
# autocorrelations from dense circuits
# --------------------------------------------------------------------------

def _normalized(O):
    n = inner(O, O).real
    if abs(n - 1) > 1e-10:
        raise NonNormalizedOperator(f"(O|O) = {n:.3e}, expected 1")
    return O


def eigen_atoms(U, O):
    """Phases and weights of the operator spectral measure.

    Returns ``(theta, W)`` where ``theta[p]`` are the eigenphases of U and
    ``W[p, q] = |<p|O|q>|^2 / D``; then ``S_t = sum_pq W_pq e^{i(th_q - th_p) t}``.
    """
    Tm, Z = schur(U, output="complex")
    theta = np.angle(np.diag(Tm))
    Ot = Z.conj().T @ O @ Z
    W = np.abs(Ot) ** 2 / U.shape[0]
    return theta, W


def atom_moments_mp(theta, W, T, digits):
    """S_t = sum_pq W_pq e^{i (theta_q - theta_p) t} evaluated in mpmath.

    The double-precision phases and weights are taken as exact, so the
    result is the moment sequence of that discrete measure to ``digits``.
    """
    with mp.workdps(digits + 10):
        z = [mp.expjpi(mp.mpf(float(th)) / mp.pi) for th in theta]
        Wm = [[mp.mpf(float(w)) for w in row] for row in W]
        zt = [mp.mpc(1)] * len(z)
        out = []
        for t in range(T + 1):
            acc = mp.mpc(0)
            for p, row in enumerate(Wm):
                acc += zt[p].conjugate() * mp.fdot(row, zt)
            out.append(acc)
            zt = [a * b for a, b in zip(zt, z)]
    with mp.workdps(digits):
        return [+x for x in out]


def autocorrelation_ed(circuit, operator, T, method="eig", digits=DEFAULT_DIGITS):
    """S_t = Tr[O^dag U^dag^t O U^t] / D for t = 0..T on a dense circuit.

    ``method`` is ``"eig"`` (Schur eigenbasis) or ``"conjugate"`` (repeated
    conjugation of the operator).  With ``digits > 16`` the eigenbasis sums
    are carried out in mpmath and the exact values are attached, which keeps
    the moment route well conditioned for larger n.
    """
    L = circuit.num_sites
    check_dense_limit(L)
    O = _normalized(operator_from_config(L, operator))
    U = assemble_brickwork(circuit)
    if digits > DEFAULT_DIGITS:
        theta, W = eigen_atoms(U, O)
        ex = atom_moments_mp(theta, W, T, digits)
        return MomentSequence(_to_complex_array(ex), digits, ex)
    if method == "eig":
        theta, W = eigen_atoms(U, O)
        ph = np.exp(1j * theta)
        # S_t = sum_pq W_pq conj(ph_p)^t ph_q^t
        S = np.empty(T + 1, dtype=complex)
        lp, lq = np.ones_like(ph), np.ones_like(ph)
        for t in range(T + 1):
            S[t] = lp.conj() @ W @ lq
            lp, lq = lp * ph, lq * ph
    elif method == "conjugate":
        S = np.empty(T + 1, dtype=complex)
        Ot = O.copy()
        Ud = U.conj().T
        for t in range(T + 1):
            S[t] = inner(O, Ot)
            Ot = Ud @ Ot @ U
    else:
        raise ValueError(f"unknown method {method!r}")
    return MomentSequence(S)


# --------------------------------------------------------------------------
# moment route
# --------------------------------------------------------------------------

def _to_complex_array(xs):
    return np.array([complex(x) for x in xs], dtype=np.complex128)


def _to_complex_matrix(rows, n):
    M = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        M[i, :len(row)] = [complex(x) for x in row]
    return M


def _toeplitz_rows(S, rows, cols):
    """Matrix M[t, s] = S[t - s] for the given row/column index ranges."""
    k = np.asarray(rows)[:, None] - np.asarray(cols)[None, :]
    return np.where(k >= 0, S[np.abs(k)], np.conj(S[np.abs(k)]))


def _extend_beta(beta_top, alpha, S):
    """Rows t >= rank of beta: beta[t, n] = (O_n|O_t) = sum_s conj(alpha[n, s]) S[t - s]."""
    r = alpha.shape[0]
    T = len(S) - 1
    if T + 1 <= r:
        return beta_top[:T + 1]
    extra = _toeplitz_rows(S, np.arange(r, T + 1), np.arange(r)) @ alpha.conj().T
    return np.vstack([beta_top, extra])


def _float_route(S, tol, size, method):
    if method == "cholesky":
        L, r, status = kernels.toeplitz_cholesky(S[:size], tol)
        if status == kernels.CHOL_NEGATIVE:
            raise PrecisionExhausted(
                f"negative Cholesky pivot at n={r}; raise the precision")
        L = L[:r, :r]
        beta = np.conj(L)
        alpha = np.conj(kernels.lower_inverse(L)) if r else np.zeros((0, 0), complex)
        a, b, c = kernels.hessenberg_coefficients(alpha, S)
        return alpha, beta, a, b.copy(), c
    if method == "szego":
        with mp.workdps(20):
            res = hp.szego([mp.mpc(x) for x in S], tol, size)
            a, b, c = hp.szego_coefficients(res, len(S) - 1)
            alpha = _to_complex_matrix(hp.szego_alpha(res), res["rank"])
        b = np.array([np.nan] + [complex(x) for x in b[1:]], dtype=complex)
        return alpha, None, _to_complex_array(a), b, _to_complex_array(c)
    raise ValueError(f"unknown method {method!r}")


def _exact_route(S_exact, tol, size, method, digits, keep_matrices):
    T = len(S_exact) - 1
    out = {}
    with mp.workdps(digits):
        S = list(S_exact)
        if method == "cholesky":
            L, r = hp.cholesky(S, tol, size)
            Ainv = hp.lower_inverse(L)
            alpha_rows = [[hp._conj(x) for x in row] for row in Ainv]
            a, b, c = hp.structured_coefficients(alpha_rows, L, S)
            beta = _to_complex_matrix([[hp._conj(x) for x in row] for row in L], r)
            alpha = _to_complex_matrix(alpha_rows, r)
        elif method == "szego":
            res = hp.szego(S, tol, size)
            r = res["rank"]
            a, b, c = hp.szego_coefficients(res, T)
            beta = None
            alpha = _to_complex_matrix(hp.szego_alpha(res), r) if keep_matrices else None
        else:
            raise ValueError(f"unknown method {method!r}")
        out = {"a": a, "b": b, "c": c}
        b_arr = np.array([np.nan] + [complex(x) for x in b[1:]], dtype=complex)
        return alpha, beta, _to_complex_array(a), b_arr, _to_complex_array(c), r, out


def krylov_from_moments(m, rank_tol=None, method="cholesky", nmax=None, keep_matrices=True):
    """Krylov decomposition from the autocorrelation alone.

    Parameters
    ----------
    m : MomentSequence
        S_0..S_T.  When ``m.exact`` is set the factorization runs in mpmath
        at ``m.precision_digits`` digits, otherwise in double precision.
    rank_tol : float, optional
        Pivot threshold that terminates the basis; defaults to
        ``default_rank_tol(m.precision_digits)``.
    method : {"cholesky", "szego"}
        Cholesky factorization (authoritative) or the O(T^2) Szego
        recursion.  ``"szego"`` does not build beta.
    nmax : int, optional
        Largest Krylov index to construct; defaults to T.
    """
    digits = m.precision_digits
    tol = default_rank_tol(digits) if rank_tol is None else rank_tol
    T = m.T
    size = T + 1 if nmax is None else min(nmax + 1, T + 1)
    S = m.values
    if m.exact is not None and digits > DEFAULT_DIGITS:
        alpha, beta, a, b, c, r, exact = _exact_route(
            m.exact, tol, size, method, digits, keep_matrices)
    else:
        alpha, beta, a, b, c = _float_route(S, tol, size, method)
        r = alpha.shape[0]
        exact = None
    if beta is not None and alpha is not None:
        beta = _extend_beta(beta, alpha, S)
    return KrylovDecomposition(alpha, beta, a, b, c, r, digits, moments=S.copy(), exact=exact)


def hessenberg_matrix(d):
    """Full superoperator matrix U_mn in the Krylov basis from the moments.

    Columns n <= T - 1 are reliable; later columns need unavailable moments.
    """
    if d.hessenberg is not None:
        return d.hessenberg
    alpha = d.alpha
    U = np.conj(alpha) @ kernels.shifted_gram(d.moments, alpha.shape[0]) @ alpha.T
    ncol = min(alpha.shape[0], len(d.moments) - 1)
    return U[:, :ncol]


# --------------------------------------------------------------------------
# explicit route
# --------------------------------------------------------------------------

def krylov_explicit(circuit, operator, nmax, rank_tol=1e-10):
    """Gram-Schmidt on the evolved operators of a dense circuit.

    Returns ``(decomposition, ops)`` with ``ops[n]`` the Krylov operator
    matrices for n = 0..nmax.  Each step orthogonalizes twice against all
    previous Krylov operators.
    """
    L = circuit.num_sites
    check_dense_limit(L)
    O0 = _normalized(operator_from_config(L, operator))
    U = assemble_brickwork(circuit)
    Ud = U.conj().T
    D = U.shape[0]
    n_ops = nmax + 1
    ops = np.zeros((n_ops, D, D), dtype=complex)
    beta = np.zeros((n_ops, n_ops), dtype=complex)
    Ot = O0.copy()
    S = np.empty(n_ops, dtype=complex)
    for t in range(n_ops):
        S[t] = inner(O0, Ot)
        resid = Ot.copy()
        for _ in range(2):
            if t == 0:
                break
            proj = np.einsum("nij,ij->n", ops[:t].conj(), resid) / D
            beta[t, :t] += proj
            resid -= np.einsum("n,nij->ij", proj, ops[:t])
        nrm = np.sqrt(inner(resid, resid).real)
        if nrm < rank_tol:
            raise RankDeficient(f"Krylov space closes at n={t} (residual {nrm:.2e})")
        beta[t, t] = nrm
        ops[t] = resid / nrm
        Ot = Ud @ Ot @ U
    alpha = kernels.lower_inverse_np(beta)
    # superoperator elements H[m, n] = (O_m | U^dag O_n U)
    evolved = Ud @ ops @ U
    H = np.einsum("mij,nij->mn", ops.conj(), evolved) / D
    a = np.diagonal(H).copy()
    c = H[0].copy()
    b = np.full(n_ops, np.nan + 0j)
    b[1:] = H[np.arange(1, n_ops), np.arange(n_ops - 1)]
    d = KrylovDecomposition(alpha, beta, a, b, c, n_ops, DEFAULT_DIGITS, moments=S, hessenberg=H)
    return d, ops


# --------------------------------------------------------------------------
# derived quantities
# --------------------------------------------------------------------------

def krylov_complexity(d):
    """K(t) = sum_n n |beta[t, n]|^2 for every row of beta."""
    if d.beta is None:
        raise ValueError("decomposition was built without beta; use method='cholesky'")
    w = np.abs(d.beta) ** 2
    K = w @ np.arange(w.shape[1])
    return ComplexityCurve(K, w)


def decay_rate(a, stop=None):
    """Least-squares slope nu of -log|a_n| over n < stop (all n when None).

    Returns inf when every |a_n| vanishes and nan with fewer than two usable
    points.
    """
    mag = np.abs(np.asarray(a))
    if stop is not None:
        mag = mag[:stop]
    n = np.arange(len(mag))
    keep = mag > 1e-300
    if len(mag) and not keep.any():
        return np.inf
    if keep.sum() < 2:
        return np.nan
    slope = np.polyfit(n[keep], np.log(mag[keep]), 1)[0]
    return float(-slope)


def classify_regime(d, eps=1e-3, window=10):
    """Onset of the maximally ergodic (pure shift) regime.

    The onset is the smallest n such that column m of the Hessenberg matrix
    is a pure shift, ``|a_m| <= eps`` and ``|1 - |b_{m+1}|| <= eps``, for
    every m in [n, n + window).  The decay rate is fitted on |a_n| before the
    onset (on all n when there is none).
    """
    a = np.abs(d.a)
    b = np.abs(d.b)
    nmax = min(len(a), len(b) - 1)
    ok = (a[:nmax] <= eps) & (np.abs(1 - b[1:nmax + 1]) <= eps)
    onset = None
    run = 0
    for m in range(nmax):
        run = run + 1 if ok[m] else 0
        if run >= window:
            onset = m - window + 1
            break
    if onset is not None and onset < 2:
        # the regime is reached after at most one step: no decay to fit
        nu = np.inf
    else:
        nu = decay_rate(d.a, onset)
    return RegimeReport(onset, nu, eps, window)


def lanczos_liouvillian(h, L_sites, operator, nmax, boundary="open"):
    """Hermitian Lanczos coefficients of the Liouvillian ``O -> [H, O]``.

    Returns an array ``bt`` with ``bt[0] = nan`` and ``bt[n]`` for
    n = 1..nmax; the recursion stops early (the array is shorter) when a
    coefficient vanishes below 1e-10, which happens for invariant operators.
    """
    check_dense_limit(L_sites)
    h2 = h.matrix()
    D = 2 ** L_sites
    bonds = [(j, j + 1) for j in range(L_sites - 1)]
    if boundary == "periodic":
        bonds.append((L_sites - 1, 0))
    H = np.zeros((D, D), dtype=complex)
    for i, j in bonds:
        H += _embed(h2, i, j, L_sites)
    O = _normalized(operator_from_config(L_sites, operator))
    basis = [O]
    bt = [np.nan]
    prev = np.zeros_like(O)
    for n in range(1, nmax + 1):
        A = H @ basis[-1] - basis[-1] @ H
        if n > 1:
            A = A - bt[-1] * prev
        for _ in range(2):
            for Q in basis:
                A = A - inner(Q, A) * Q
        bn = np.sqrt(inner(A, A).real)
        bt.append(bn)
        if bn < 1e-10:
            break
        prev = basis[-1]
        basis.append(A / bn)
    return np.array(bt)


def _embed(h2, i, j, L):
    """Dense 2^L matrix of a two-site operator on sites (i, j)."""
    return apply_two_site(np.eye(2 ** L, dtype=complex), h2, i, j, L)
