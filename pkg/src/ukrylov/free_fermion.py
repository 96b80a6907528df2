"""Analytic backend for the Trotterized XX chain.

After a Jordan-Wigner transformation the brickwork of XX gates is a
free-fermion Floquet circuit.  Momentum modes decouple into 2x2 blocks
with quasienergies ``+-w_k``, ``cos w_k = 1 - 2 sin^2(2 dt) cos^2(k/2)``.
Single-site autocorrelations follow from the momentum sum
``C_t = (1/N) sum_k cos(w_k t)``, evaluated here as a mean of Chebyshev
polynomials ``T_t(cos w_k)``, which is exact for every t.
"""
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import kernels
from .errors import DomainError, PrecisionExhausted, SingularEdge
from .krylov import MomentSequence, classify_regime, krylov_from_moments

Z2 = np.diag([1.0, -1.0])


@dataclass
class MomentumSuperoperator:
    """2x2 block of the Floquet operator at momentum k."""

    k: float
    dt: float
    matrix: np.ndarray

    def eigenphases(self):
        return np.angle(np.linalg.eigvals(self.matrix))


@dataclass
class DispersionProfile:
    """Support of the s-particle spectrum and the pi-mode gap."""

    dt: float
    s: int
    edge: float
    gapped: bool
    critical_dt: float

    @property
    def gap(self):
        """Width of the empty region around w = pi (0 when gapless)."""
        return max(0.0, 2 * (np.pi - self.edge))


def uk_matrix(k, dt):
    """Floquet block ``1 - sin(2dt) [[s(1+e^{ik}), ic(1+e^{ik})], [ic(1+e^{-ik}), s(1+e^{-ik})]]``."""
    s, c = np.sin(2 * dt), np.cos(2 * dt)
    e = np.exp(1j * k)
    M = np.eye(2) - s * np.array([[s * (1 + e), 1j * c * (1 + e)],
                                  [1j * c * (1 + np.conj(e)), s * (1 + np.conj(e))]])
    return MomentumSuperoperator(float(k), float(dt), M)


def layer_matrices(k, dt):
    """The two single-layer blocks: intra-cell hopping, then inter-cell hopping."""
    s, c = np.sin(2 * dt), np.cos(2 * dt)
    L1 = np.array([[c, -1j * s], [-1j * s, c]])
    L2 = np.array([[c, -1j * s * np.exp(-1j * k)], [-1j * s * np.exp(1j * k), c]])
    return L1, L2


def uk_from_layers(k, dt):
    """Rebuild the Floquet block as a layer product.

    The block equals ``Z conj(L2 L1) Z`` with ``Z = diag(1, -1)``; the
    conjugation and sublattice sign only change conventions, not the
    spectrum.
    """
    L1, L2 = layer_matrices(k, dt)
    return Z2 @ np.conj(L2 @ L1) @ Z2


def dispersion(k, dt):
    """Quasienergy ``w_k`` in [0, pi]."""
    x = 1 - 2 * np.sin(2 * dt) ** 2 * np.cos(np.asarray(k) / 2) ** 2
    return np.arccos(np.clip(x, -1.0, 1.0))


def momenta(N):
    return 2 * np.pi * np.arange(N) / N


def _chebyshev_nodes(dt, N):
    return 1 - 2 * np.sin(2 * dt) ** 2 * np.cos(momenta(N) / 2) ** 2


def fermion_autocorrelations(dt, T, N):
    """C_t = (1/N) sum_k cos(w_k t) for t = 0..T in double precision."""
    if N < 2:
        raise DomainError("N must be at least 2")
    return kernels.chebyshev_mean(_chebyshev_nodes(dt, N), int(T))


def fermion_autocorrelation(dt, t, N):
    """Single value C_t."""
    return float(fermion_autocorrelations(dt, t, N)[t])


def fermion_autocorrelations_mp(dt, T, N, digits):
    """C_t for t = 0..T as mpmath numbers at ``digits`` precision."""
    if N < 2:
        raise DomainError("N must be at least 2")
    with mp.workdps(digits + 10):
        dt = mp.mpf(dt)
        s2 = mp.sin(2 * dt) ** 2
        acc = [mp.mpf(0)] * (T + 1)
        for n in range(N):
            x = 1 - 2 * s2 * mp.cos(mp.pi * n / N) ** 2
            prev, cur = mp.mpf(1), x
            acc[0] += prev
            if T >= 1:
                acc[1] += cur
            for t in range(2, T + 1):
                prev, cur = cur, 2 * x * cur - prev
                acc[t] += cur
        out = [v / N for v in acc]
    with mp.workdps(digits):
        return [+v for v in out]


def spin_moment_sequence(dt, T, N, s, digits=16, absolute=False):
    """Moments S_t = C_t^s of the s-fermion operator.

    For s = 2 this is the single-site sigma^z autocorrelation.  By default
    the signed power is used (``absolute=True`` gives |C_t|^s; both agree
    for even s).  Above 16 digits the exact mpmath values are attached.
    """
    if s < 1:
        raise DomainError("s must be >= 1")
    if digits <= 16:
        C = fermion_autocorrelations(dt, T, N)
        S = np.abs(C) ** s if absolute else C ** s
        return MomentSequence(S.astype(complex))
    C = fermion_autocorrelations_mp(dt, T, N, digits)
    with mp.workdps(digits):
        S = [abs(c) ** s if absolute else c ** s for c in C]
    return MomentSequence(np.array([float(v) for v in S], dtype=complex), digits, S)


def spectral_gap(dt, s):
    """Support edge ``min(4 s dt, pi)`` and the gap around w = pi."""
    if s < 1:
        raise DomainError("s must be >= 1")
    if not 0 < dt <= np.pi / 4:
        raise DomainError("dt must lie in (0, pi/4]")
    edge = min(4 * s * dt, np.pi)
    return DispersionProfile(float(dt), int(s), float(edge), bool(4 * s * dt < np.pi),
                             float(np.pi / (4 * s)))


def fermion_spectral_function(dt, w, edge_tol=1e-6):
    """Single-particle density ``cos(w/2)/sqrt(cos^2(w/2) - cos^2(2dt))`` on |w| < 4dt.

    Zero outside the support; raises :class:`SingularEdge` within
    ``edge_tol`` of |w| = 4 dt.  Integrates to 2 pi.
    """
    w = np.asarray(w, dtype=float)
    wr = np.abs((w + np.pi) % (2 * np.pi) - np.pi)
    if np.any(np.abs(wr - 4 * dt) < edge_tol):
        raise SingularEdge("evaluation point within the inverse-square-root edge")
    inside = wr < 4 * dt
    out = np.zeros_like(wr)
    cw = np.cos(wr[inside] / 2)
    out[inside] = cw / np.sqrt(cw ** 2 - np.cos(2 * dt) ** 2)
    return out if out.ndim else float(out)


def spin_spectral_density(dt, num_bins=1000):
    """Normalized sigma^z density on [0, 2 pi) as a circular self-convolution.

    The single-particle density is sampled at bin centers (never on the
    edge for generic dt), scaled by 1/(2 pi) to unit mass, and convolved
    with itself by FFT.  Returns ``(centers, density)``.
    """
    dw = 2 * np.pi / num_bins
    centers = (np.arange(num_bins) + 0.5) * dw
    # the circular convolution of two center-sampled grids lives on the
    # integer grid; shift the first factor by half a bin to land on centers
    grid = np.arange(num_bins) * dw
    f1 = fermion_spectral_function(dt, grid, edge_tol=0.0) / (2 * np.pi)
    f2 = fermion_spectral_function(dt, centers, edge_tol=0.0) / (2 * np.pi)
    f1 /= f1.sum() * dw
    f2 /= f2.sum() * dw
    conv = np.real(np.fft.ifft(np.fft.fft(f1) * np.fft.fft(f2))) * dw
    return centers, np.maximum(conv, 0.0)


# --------------------------------------------------------------------------
# real-space single-particle picture (open chain)
# --------------------------------------------------------------------------

def single_particle_floquet(L, dt):
    """L x L one-period propagator of the open chain: odd layer after even."""
    s, c = np.sin(2 * dt), np.cos(2 * dt)
    blk = np.array([[c, -1j * s], [-1j * s, c]])

    def layer(start):
        W = np.eye(L, dtype=complex)
        for j in range(start, L - 1, 2):
            W[j:j + 2, j:j + 2] = blk
        return W

    return layer(1) @ layer(0)


def sz_autocorrelation_open(L, dt, T, site=0):
    """sigma^z autocorrelation of one site on the open chain: |(W^t)_jj|^2."""
    W = single_particle_floquet(L, dt)
    out = np.empty(T + 1)
    P = np.eye(L, dtype=complex)
    for t in range(T + 1):
        out[t] = abs(P[site, site]) ** 2
        P = W @ P
    return out


# --------------------------------------------------------------------------
# transition scans
# --------------------------------------------------------------------------

def window_mean(b, lo=None, hi=None):
    """Mean of |b_n| over n in [lo, hi); defaults to the last quarter."""
    mag = np.abs(np.asarray(b))
    n = len(mag)
    lo = 3 * n // 4 if lo is None else lo
    hi = n if hi is None else hi
    seg = mag[max(lo, 1):hi]
    return float(np.mean(seg)) if len(seg) else np.nan


def transition_point(dt, s, N=200, nmax=200, digits=60, window=None, method="szego",
                     max_digits=1200, eps=1e-3, classifier_window=10, agree_tol=1e-10):
    """Krylov data of the s-fermion operator at one Trotter step.

    Near the transition the Toeplitz factorization loses digits silently,
    so the precision is doubled (up to ``max_digits``) until two successive
    precisions give the same rank and |b_n| agreeing to ``agree_tol``.  A
    negative pivot also triggers a doubling.  Returns a dict with the
    windowed mean of |b_n|, the classifier onset and the precision used.
    """
    lo, hi = window if window is not None else (None, None)
    cur, prev, d = digits, None, None
    while True:
        m = spin_moment_sequence(dt, nmax, N, s, digits=cur)
        try:
            d = krylov_from_moments(m, method=method, keep_matrices=False)
        except PrecisionExhausted:
            if cur >= max_digits:
                raise
            d = None
        if d is not None and prev is not None and _agree(prev, d, agree_tol):
            break
        if cur >= max_digits:
            if d is None:
                raise PrecisionExhausted(f"no stable factorization up to {max_digits} digits")
            break
        prev = d
        cur = min(2 * cur, max_digits)
    rep = classify_regime(d, eps, classifier_window)
    gap = spectral_gap(dt, s) if 0 < dt <= np.pi / 4 else None
    return {
        "dt": float(dt),
        "s": int(s),
        "b_inf_mean": window_mean(d.b, lo, hi),
        "onset_present": rep.onset is not None,
        "onset": rep.onset,
        "gap": gap.gap if gap else np.nan,
        "rank": d.rank,
        "digits": cur,
        "decomposition": d,
    }


def _agree(d1, d2, tol):
    if d1.rank != d2.rank or len(d1.b) != len(d2.b):
        return False
    return bool(np.nanmax(np.abs(np.abs(d1.b[1:]) - np.abs(d2.b[1:]))) <= tol)


def transition_scan(dts, s, N=200, nmax=200, digits=60, window=None, method="szego",
                    max_digits=1200):
    """Scan ``transition_point`` over a grid of Trotter steps (in grid order)."""
    return [transition_point(dt, s, N, nmax, digits, window, method, max_digits)
            for dt in dts]


def knee(dts, bbar, threshold=1e-3):
    """First grid point where the windowed mean reaches ``1 - threshold``."""
    for dt, v in zip(dts, bbar):
        if v >= 1 - threshold:
            return float(dt)
    return None


def is_monotone(values, slack=1e-3):
    """Non-decreasing up to ``slack``."""
    v = np.asarray(values)
    return bool(np.all(np.diff(v) >= -slack))
