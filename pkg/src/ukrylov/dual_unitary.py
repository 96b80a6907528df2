"""Exact results for dual-unitary brickworks.

Correlations of single-site operators in dual-unitary circuits live on the
light-cone edge, where the dynamics reduces to a single-site quantum
channel.  Eigenoperators of that channel give the closed-form
"eigenmode" Krylov data used as golden references.
"""
from dataclasses import dataclass

import numpy as np

from .circuits import PAULI, TwoSiteGate
from .errors import DefectiveChannel, DomainError
from .krylov import ComplexityCurve, KrylovDecomposition, MomentSequence

# normalized Pauli basis {1, X, Y, Z}/sqrt(2)
_BASIS = [PAULI[k] / np.sqrt(2) for k in "ixyz"]


@dataclass
class TransferChannel:
    """Channel matrix in the normalized Pauli basis with its eigendecomposition.

    ``right[:, a]`` and ``left[a, :]`` are the right and left eigenvectors,
    normalized so that ``left @ right = 1``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray

    def apply(self, sigma):
        """Apply the channel to a 2x2 operator."""
        v = to_pauli_vector(sigma)
        w = self.matrix @ v
        return sum(c * B for c, B in zip(w, _BASIS))


def to_pauli_vector(sigma):
    return np.array([np.trace(B.conj().T @ sigma) for B in _BASIS])


def _partial_trace_first(X):
    return np.einsum("ijik->jk", X.reshape(2, 2, 2, 2))


def transfer_channel(g, sublattice="odd", cond_limit=1e12):
    """Single-site channel ``M(s) = Tr_1[V^dag (s x 1) V] / 2``.

    ``V`` is the gate for ``sublattice="odd"`` and its adjoint for
    ``"even"``: with one period ``U_odd U_even`` these describe sums of
    operators on odd or even sites respectively.
    """
    M = g.matrix if isinstance(g, TwoSiteGate) else np.asarray(g)
    V = M if sublattice == "odd" else M.conj().T
    if sublattice not in ("odd", "even"):
        raise ValueError("sublattice must be 'odd' or 'even'")
    Ch = np.zeros((4, 4), dtype=complex)
    for b, B in enumerate(_BASIS):
        out = _partial_trace_first(V.conj().T @ np.kron(B, np.eye(2)) @ V) / 2
        Ch[:, b] = to_pauli_vector(out)
    lam, R = np.linalg.eig(Ch)
    if np.linalg.cond(R) > cond_limit:
        raise DefectiveChannel("channel eigenvectors are numerically dependent")
    return TransferChannel(Ch, lam, R, np.linalg.inv(R))


def channel_autocorrelation(ch, sigma, T):
    """S_t = sum_a lambda_a^{2t} (s|r_a)(l_a|s) for a traceless unit-norm s."""
    v = to_pauli_vector(sigma) / np.sqrt(2)  # (B|s) with (A|B) = Tr[A^dag B]/2
    # in the orthonormal basis: S_t = v^dag R diag(lam^{2t}) L v
    left = ch.left @ v
    right = v.conj() @ ch.right
    t = np.arange(T + 1)
    S = (ch.eigenvalues[None, :] ** (2 * t[:, None])) @ (right * left)
    return MomentSequence(S)


def channel_autocorrelation_iterated(ch, sigma, T):
    """Same as :func:`channel_autocorrelation` by repeated application."""
    v = to_pauli_vector(sigma) / np.sqrt(2)
    M2 = ch.matrix @ ch.matrix
    out = np.empty(T + 1, dtype=complex)
    w = v.copy()
    for t in range(T + 1):
        out[t] = np.vdot(v, w)
        w = M2 @ w
    return MomentSequence(out)


def eigenmode_moments(lam, T):
    """S_t = lambda^{2t}."""
    return MomentSequence(np.asarray(lam, dtype=float) ** (2 * np.arange(T + 1)))


def eigenmode_complexity(lam, t):
    """K(t) = t - lam^4 (lam^{4t} - 1)/(lam^4 - 1)."""
    t = np.asarray(t, dtype=float)
    l4 = lam ** 4
    return t - l4 * (l4 ** t - 1) / (l4 - 1)


def eigenmode_krylov(lam, nmax=30):
    """Closed-form Krylov data for S_t = lambda^{2t} with real |lambda| < 1.

    ``O_0`` is the eigenoperator itself and every later Krylov operator is
    ``(O_n - lambda^2 O_{n-1}) / sqrt(1 - lambda^4)``.
    """
    if not np.isreal(lam) or abs(lam) >= 1:
        raise DomainError("eigenmode requires a real |lambda| < 1")
    lam = float(np.real(lam))
    l2, r = lam ** 2, np.sqrt(1 - lam ** 4)
    n = nmax + 1
    alpha = np.zeros((n, n), dtype=complex)
    alpha[0, 0] = 1
    for k in range(1, n):
        alpha[k, k] = 1 / r
        alpha[k, k - 1] = -l2 / r
    beta = np.linalg.inv(alpha)
    a = np.zeros(n, dtype=complex)
    a[0] = l2
    c = np.zeros(n, dtype=complex)
    c[0] = l2
    b = np.ones(n, dtype=complex)
    b[0] = np.nan
    if n > 1:
        b[1] = r
    d = KrylovDecomposition(alpha, beta, a, b, c, n, moments=eigenmode_moments(lam, nmax).values)
    K = eigenmode_complexity(lam, np.arange(n))
    return d, ComplexityCurve(K, np.abs(beta) ** 2)


def eigenmode_spectral(gamma, w):
    """Density ``sinh(g) / (2 pi (cosh(g) - cos w))`` of S_t = e^{-g t}."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    w = np.asarray(w, dtype=float)
    return np.sinh(gamma) / (2 * np.pi * (np.cosh(gamma) - np.cos(w)))
