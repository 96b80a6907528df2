"""Spectral functions on the unit circle and their orthonormal polynomials.

A :class:`SpectralFunction` is a binned density on [0, 2 pi).  When it
comes from exact diagonalization it also keeps the underlying point masses
(``atoms``), so Fourier modes and products with polynomials can be
evaluated without binning error; the bins are then only for display.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuits import assemble_brickwork, check_dense_limit, operator_from_config
from .errors import NormalizationViolation
from .krylov import MomentSequence, _normalized, eigen_atoms, krylov_from_moments

TWO_PI = 2 * np.pi


@dataclass
class SpectralFunction:
    """Density ``|f(w)|^2`` on ``num_bins`` uniform bins over [0, 2 pi).

    ``atoms`` is an optional pair ``(omega, weight)`` of point masses that
    the bins were built from.
    """

    bins: np.ndarray
    atoms: Optional[tuple] = None

    @property
    def num_bins(self):
        return len(self.bins)

    @property
    def dw(self):
        return TWO_PI / self.num_bins

    @property
    def centers(self):
        return (np.arange(self.num_bins) + 0.5) * self.dw

    @property
    def mass(self):
        if self.atoms is not None:
            return float(np.sum(self.atoms[1]))
        return float(np.sum(self.bins) * self.dw)

    def flatness(self):
        """max_w | density - 1/(2 pi) |."""
        return float(np.max(np.abs(self.bins - 1 / TWO_PI)))


@dataclass
class UnitCirclePolynomial:
    """``p(w) = sum_t coefficients[t] e^{i w t}``."""

    coefficients: np.ndarray

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, w):
        z = np.exp(1j * np.asarray(w, dtype=float))
        # Horner in z
        out = np.zeros_like(z)
        for c in self.coefficients[::-1]:
            out = out * z + c
        return out


def histogram(omega, weight, num_bins):
    """Bin point masses on [0, 2 pi) into a density."""
    omega = np.mod(omega, TWO_PI)
    omega[omega > TWO_PI - 1e-12] = 0.0
    dw = TWO_PI / num_bins
    idx = np.minimum((omega / dw).astype(np.int64), num_bins - 1)
    dens = np.bincount(idx, weights=weight, minlength=num_bins) / dw
    return dens


def from_atoms(omega, weight, num_bins=1000):
    omega = np.mod(np.ravel(omega), TWO_PI)
    weight = np.ravel(weight)
    omega[omega > TWO_PI - 1e-12] = 0.0
    return SpectralFunction(histogram(omega.copy(), weight, num_bins), (omega, weight))


def from_density(fn, num_bins=1000):
    """Sample a continuous density at the bin centers."""
    centers = (np.arange(num_bins) + 0.5) * TWO_PI / num_bins
    return SpectralFunction(np.asarray(fn(centers), dtype=float))


def spectral_function_ed(circuit, operator, num_bins=1000):
    """Spectral function of an operator under a dense brickwork circuit.

    Point masses ``|<p|O|q>|^2 / D`` sit at ``theta_q - theta_p mod 2 pi``.
    """
    L = circuit.num_sites
    check_dense_limit(L)
    O = _normalized(operator_from_config(L, operator))
    theta, W = eigen_atoms(assemble_brickwork(circuit), O)
    omega = theta[None, :] - theta[:, None]
    return from_atoms(omega, W, num_bins)


def fourier_modes(f, tmax, exact=True):
    """``S_t = int |f|^2 e^{i w t} dw`` for t = 0..tmax.

    Uses the point masses when available and ``exact`` is set, otherwise
    the midpoint rule on the bins.
    """
    t = np.arange(tmax + 1)
    if exact and f.atoms is not None:
        w, m = f.atoms
        out = np.empty(tmax + 1, dtype=complex)
        z = np.exp(1j * w)
        zt = np.ones_like(z)
        for k in t:
            out[k] = np.dot(m, zt)
            zt = zt * z
        return out
    return np.exp(1j * np.outer(t, f.centers)) @ f.bins * f.dw


def szego_polynomials(m, nmax, method="cholesky", rank_tol=None):
    """Orthonormal polynomials p_0..p_nmax of the moment sequence.

    The coefficients are the rows of alpha from the moment route.
    """
    d = krylov_from_moments(m, rank_tol=rank_tol, method=method, nmax=nmax)
    A = d.alpha
    return [UnitCirclePolynomial(A[n, :n + 1].copy()) for n in range(min(nmax + 1, A.shape[0]))]


def toeplitz(S, n):
    """(n+1)x(n+1) Gram matrix G[s, t] = S[t - s]."""
    S = np.asarray(S, dtype=complex)
    k = np.arange(n + 1)[None, :] - np.arange(n + 1)[:, None]
    return np.where(k >= 0, S[np.abs(k)], np.conj(S[np.abs(k)]))


def determinant_polynomial(S, n):
    """Orthonormal p_n from Toeplitz determinants.

    The monic polynomial is the determinant of the Gram matrix with its last
    row replaced by (1, z, ..., z^n); its coefficients are the cofactors of
    that row, and the normalization is ``1/sqrt(det T_n det T_{n-1})``.
    """
    G = toeplitz(S, n)
    if n == 0:
        return UnitCirclePolynomial(np.array([1 / np.sqrt(G[0, 0].real)], dtype=complex))
    top = G[:n]
    coef = np.empty(n + 1, dtype=complex)
    for t in range(n + 1):
        minor = np.delete(top, t, axis=1)
        coef[t] = (-1) ** (n + t) * np.linalg.det(minor)
    det_n = np.linalg.det(G).real
    det_prev = np.linalg.det(G[:n, :n]).real
    return UnitCirclePolynomial(coef / np.sqrt(det_n * det_prev))


def krylov_spectral_function(f, p, tol=1e-6):
    """Spectral function of the Krylov operator: ``|f|^2 |p|^2``.

    The product is not renormalized; a mass off by more than ``tol`` raises
    :class:`NormalizationViolation`.
    """
    if f.atoms is not None:
        w, m = f.atoms
        out = from_atoms(w, m * np.abs(p(w)) ** 2, f.num_bins)
    else:
        out = SpectralFunction(f.bins * np.abs(p(f.centers)) ** 2)
    if abs(out.mass - 1) > tol:
        raise NormalizationViolation(f"Krylov spectral function has mass {out.mass:.8f}")
    return out


def verify_szego_moment_matching(p, m, grid=2 ** 14):
    """Max error between Fourier modes of ``|p_n|^{-2}/(2 pi)`` and S_k, |k| <= n.

    Returns inf when |p_n| comes within 1e-12 of zero on the grid.
    """
    S = m.values if isinstance(m, MomentSequence) else np.asarray(m, dtype=complex)
    n = p.degree
    w = np.arange(grid) * TWO_PI / grid
    mag2 = np.abs(p(w)) ** 2
    if mag2.min() < 1e-24:
        return np.inf
    g = 1 / (TWO_PI * mag2)
    # F_k = int g e^{i w k} dw by the (spectrally accurate) periodic trapezoid rule
    F = np.fft.ifft(g) * TWO_PI
    err = 0.0
    for k in range(-n, n + 1):
        target = S[k] if k >= 0 else np.conj(S[-k])
        err = max(err, abs(F[k % grid] - target))
    return float(err)


def first_mode_sequence(f, polys):
    """``S_1^(n)``: first Fourier mode of each Krylov spectral function."""
    out = []
    for p in polys:
        fn = krylov_spectral_function(f, p, tol=np.inf)
        out.append(fourier_modes(fn, 1)[1])
    return np.array(out)


def smoothed_flatness(f, K=8, grid=512):
    """max_w |F_K(w) - 1/(2 pi)| for the Fejer mean F_K of the density.

    F_K keeps the Fourier modes |t| <= K with weights 1 - |t|/(K+1), so the
    measure is insensitive to the atom-level noise of small systems.
    """
    S = fourier_modes(f, K)
    t = np.arange(1, K + 1)
    w = np.arange(grid) * TWO_PI / grid
    fe = 1 - t / (K + 1)
    dens = (S[0].real + 2 * np.real(np.exp(-1j * np.outer(w, t)) @ (fe * S[1:]))) / TWO_PI
    return float(np.max(np.abs(dens - 1 / TWO_PI)))
