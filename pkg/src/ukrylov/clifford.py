"""Exact Pauli-string propagation through Clifford brickworks.

A Pauli string on L sites is stored as bit vectors ``x``, ``z`` and an
exponent ``e`` (mod 4) meaning ``i^e prod_j X_j^{x_j} Z_j^{z_j}``.  Its
Hermitian form has ``e = #(x & z) mod 2``.  A two-qubit Clifford is kept
as a 16-entry table of its Heisenberg action ``P -> V^dag P V`` on the
patterns ``x_i | z_i << 1 | x_j << 2 | z_j << 3``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConfigError
from .krylov import ComplexityCurve, KrylovDecomposition, MomentSequence

NUM_CLIFFORD = 11520


@dataclass
class PauliString:
    """``i^phase prod_j X^x_j Z^z_j`` on ``len(x)`` sites."""

    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int64) & 1
        self.z = np.asarray(self.z, dtype=np.int64) & 1
        self.phase = int(self.phase) % 4

    @property
    def bits(self):
        return (self.x.tobytes(), self.z.tobytes())

    @property
    def weight(self):
        return int(np.count_nonzero(self.x | self.z))

    def overlap(self, other):
        """``(P|Q) = Tr[P^dag Q]/D``: a power of i, or 0 for different strings."""
        if self.bits != other.bits:
            return 0
        return 1j ** ((other.phase - self.phase) % 4)

    def __str__(self):
        return format_pauli(self)


def pauli_from_letters(s):
    """Parse ``"XIZY"`` (optionally prefixed by +, -, +i, -i) into a PauliString."""
    sign = 0
    for pre, e in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
        if s.startswith(pre):
            sign, s = e, s[len(pre):]
            break
    s = s.upper()
    x = np.array([c in "XY" for c in s], dtype=np.int64)
    z = np.array([c in "ZY" for c in s], dtype=np.int64)
    # Y = i X Z
    return PauliString(x, z, sign + int(np.sum(x & z)))


def format_pauli(p):
    """Letters with a leading phase among +, -, +i, -i."""
    letters = "".join("IXZY"[a | (b << 1)] for a, b in zip(p.x, p.z))
    e = (p.phase - int(np.sum(p.x & p.z))) % 4
    return ["+", "+i", "-", "-i"][e] + letters


def single_site_pauli(L, site, letter="Z"):
    s = ["I"] * L
    s[site] = letter
    return pauli_from_letters("".join(s))


def pauli_dense(p):
    """Dense matrix of a PauliString (site 0 most significant)."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    out = np.ones((1, 1), dtype=complex)
    for a, b in zip(p.x, p.z):
        f = np.eye(2, dtype=complex)
        if a:
            f = f @ X
        if b:
            f = f @ Z
        out = np.kron(out, f)
    return (1j ** p.phase) * out


# --------------------------------------------------------------------------
# two-qubit Clifford group
# --------------------------------------------------------------------------

def _symp(u, v):
    """Symplectic product of two 4-bit patterns (x_i, z_i, x_j, z_j)."""
    return (((u & 1) & (v >> 1)) ^ ((u >> 1) & (v & 1)) ^
            ((u >> 2) & (v >> 3)) ^ ((u >> 3) & (v >> 2))) & 1


_GENERATORS = (0b0001, 0b0010, 0b0100, 0b1000)  # X_i, Z_i, X_j, Z_j


@lru_cache(maxsize=1)
def symplectic_group():
    """All 720 images of (X_i, Z_i, X_j, Z_j) that preserve commutation."""
    out = []
    for cols in product(range(1, 16), repeat=4):
        if all(_symp(cols[a], cols[b]) == _symp(_GENERATORS[a], _GENERATORS[b])
               for a in range(4) for b in range(a + 1, 4)):
            out.append(cols)
    return tuple(out)


def _mul(e1, p1, e2, p2):
    """Product of i^e1 P(p1) and i^e2 P(p2) on two sites."""
    z1 = ((p1 >> 1) & 1) | (((p1 >> 3) & 1) << 1)
    x2 = (p2 & 1) | (((p2 >> 2) & 1) << 1)
    return (e1 + e2 + 2 * bin(z1 & x2).count("1")) % 4, p1 ^ p2


def _herm_phase(p):
    return ((p & 1) & (p >> 1) & 1) + (((p >> 2) & 1) & ((p >> 3) & 1))


@dataclass
class CliffordGate:
    """Heisenberg action of a two-qubit Clifford as a lookup table.

    ``table[idx] = (out_idx, dphase)``: the string with pattern idx and
    exponent e maps to pattern out_idx with exponent e + dphase.
    """

    table: np.ndarray
    images: tuple = field(default=())
    signs: tuple = field(default=())

    def apply(self, idx, e=0):
        out, d = self.table[idx]
        return int(out), (e + int(d)) % 4

    def preserves_symplectic_form(self):
        T = self.table[:, 0]
        return all(_symp(int(T[u]), int(T[v])) == _symp(u, v)
                   for u in range(16) for v in range(16))


def clifford_from_images(images, signs):
    """Table from generator images and sign bits (0 for +, 1 for -)."""
    gen = [((_herm_phase(im) + 2 * s) % 4, im) for im, s in zip(images, signs)]
    table = np.zeros((16, 2), dtype=np.int64)
    for idx in range(16):
        e, p = 0, 0
        for k in range(4):
            if (idx >> k) & 1:
                e, p = _mul(e, p, *gen[k])
        table[idx] = (p, e)
    return CliffordGate(table, tuple(images), tuple(signs))


def clifford_from_index(k):
    """Deterministic enumeration of the 11520 group elements (mod phase)."""
    if not 0 <= k < NUM_CLIFFORD:
        raise ConfigError("Clifford index out of range")
    images = symplectic_group()[k // 16]
    signs = tuple((k >> b) & 1 for b in range(4))
    return clifford_from_images(images, signs)


def sample_two_qubit_clifford(seed):
    """Uniformly random two-qubit Clifford; also returns its index."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(NUM_CLIFFORD))
    return clifford_from_index(k), k


def clifford_from_unitary(V, tol=1e-10):
    """Table of ``P -> V^dag P V`` for a dense 4x4 Clifford unitary."""
    table = np.zeros((16, 2), dtype=np.int64)
    Vd = V.conj().T
    dense = {}
    for idx in range(16):
        p = PauliString([idx & 1, (idx >> 2) & 1], [(idx >> 1) & 1, (idx >> 3) & 1])
        dense[idx] = pauli_dense(p)
    for idx in range(16):
        img = Vd @ dense[idx] @ V
        for out in range(16):
            ov = np.trace(dense[out].conj().T @ img) / 4
            if abs(abs(ov) - 1) < tol:
                e = int(round(np.angle(ov) / (np.pi / 2))) % 4
                table[idx] = (out, e)
                break
        else:
            raise ConfigError("matrix is not a Clifford unitary")
    return CliffordGate(table)


# --------------------------------------------------------------------------
# brickwork propagation
# --------------------------------------------------------------------------

@dataclass
class CliffordCircuit:
    """Brickwork with one Clifford per bond, repeated every period."""

    num_sites: int
    even_gates: list
    odd_gates: list
    boundary: str = "periodic"
    gate_indices: Optional[list] = None

    def bonds(self):
        L = self.num_sites
        even = [(2 * j, 2 * j + 1) for j in range(L // 2)]
        odd = [(2 * j - 1, 2 * j) for j in range(1, L // 2)]
        if self.boundary == "periodic":
            odd.append((L - 1, 0))
        return even, odd

    def arrays(self):
        even, odd = self.bonds()
        if len(even) != len(self.even_gates) or len(odd) != len(self.odd_gates):
            raise ConfigError("number of gates does not match the bonds")

        def pack(bonds, gates):
            b = np.array(bonds, dtype=np.int64).reshape(-1, 2)
            t = np.array([g.table for g in gates], dtype=np.int64).reshape(-1, 16, 2)
            return b, t

        return pack(even, self.even_gates), pack(odd, self.odd_gates)


def clifford_brickwork(L, gate, boundary="periodic"):
    """Brickwork with the same gate on every bond."""
    if L < 2 or L % 2:
        raise ConfigError("num_sites must be an even integer >= 2")
    n_odd = L // 2 - 1 + (boundary == "periodic")
    return CliffordCircuit(L, [gate] * (L // 2), [gate] * n_odd, boundary)


def random_clifford_brickwork(L, seed, boundary="periodic", uniform=False):
    """Random Clifford per bond (or one shared gate when ``uniform``)."""
    rng = np.random.default_rng(seed)
    n_odd = L // 2 - 1 + (boundary == "periodic")
    n = 1 if uniform else L // 2 + n_odd
    idx = [int(k) for k in rng.integers(NUM_CLIFFORD, size=n)]
    gates = [clifford_from_index(k) for k in idx]
    if uniform:
        gates = gates * (L // 2 + n_odd)
        idx = idx * (L // 2 + n_odd)
    circ = CliffordCircuit(L, gates[:L // 2], gates[L // 2:], boundary, idx)
    return circ


def propagate_pauli(circuit, p0, tmax):
    """O_0..O_tmax with ``O_{t+1} = U^dag O_t U`` and ``U = U_odd U_even``.

    The odd layer is conjugated first, then the even layer.
    """
    if not (np.any(p0.x) or np.any(p0.z)):
        raise ConfigError("initial string must not be the identity")
    (be, te), (bo, to) = circuit.arrays()
    X, Z, E = kernels.clifford_evolve(p0.x.astype(np.int64), p0.z.astype(np.int64),
                                      int(p0.phase), bo, to, be, te, int(tmax))
    return [PauliString(X[t], Z[t], E[t]) for t in range(tmax + 1)]


@dataclass
class CliffordKrylov:
    """Exact Krylov data of a Pauli-string orbit."""

    decomposition: KrylovDecomposition
    complexity: np.ndarray
    period_bits: Optional[int]
    period_full: Optional[int]
    moments: MomentSequence


def clifford_krylov(seq):
    """Krylov basis, integer complexity and periods of a Pauli-string orbit.

    Distinct strings are orthonormal, so the Krylov operators are the
    strings in order of first appearance.  The orbit of an invertible map
    first revisits its starting string, so K(t) = t mod P with P the bit
    period.
    """
    p0 = seq[0]
    first = {p0.bits: 0}
    period_bits = None
    period_full = None
    for t in range(1, len(seq)):
        if seq[t].bits == p0.bits:
            if period_bits is None:
                period_bits = t
            if seq[t].phase == p0.phase:
                period_full = t
                break
        elif period_bits is None:
            if seq[t].bits in first:  # pragma: no cover - impossible for bijections
                raise RuntimeError("orbit re-entered a non-initial string")
            first[seq[t].bits] = t
    T = len(seq) - 1
    P = period_bits if period_bits is not None else T + 1
    S = np.array([p0.overlap(q) for q in seq], dtype=complex)
    n_idx = np.arange(T + 1) % P
    K = n_idx.astype(np.int64)
    beta = np.zeros((T + 1, P), dtype=complex)
    for t in range(T + 1):
        beta[t, n_idx[t]] = seq[n_idx[t]].overlap(seq[t])
    alpha = np.eye(P, dtype=complex)
    # U O_n = O_{n+1}; the last column wraps back with the recurrence phase
    ncoef = min(P, T)
    a = np.zeros(ncoef, dtype=complex)
    c = np.zeros(ncoef, dtype=complex)
    b = np.ones(min(P, T + 1), dtype=complex)
    b[0] = np.nan
    if period_bits is not None and P - 1 < ncoef:
        ph = seq[0].overlap(seq[P])
        if P == 1:
            a[0] = ph
        c[P - 1] = ph
    d = KrylovDecomposition(alpha, beta, a, b, c, P, moments=S)
    return CliffordKrylov(d, K, period_bits, period_full, MomentSequence(S))


def clifford_complexity_curve(ck):
    w = np.abs(ck.decomposition.beta) ** 2
    return ComplexityCurve(ck.complexity.astype(float), w)


def find_recurrent_realization(L, tmax, seeds, boundary="periodic", site=0, uniform=False):
    """First seed whose random brickwork returns O_0 = Z_site within tmax."""
    p0 = single_site_pauli(L, site, "Z")
    for seed in seeds:
        circ = random_clifford_brickwork(L, seed, boundary, uniform)
        ck = clifford_krylov(propagate_pauli(circ, p0, tmax))
        if ck.period_bits is not None:
            return seed, circ, ck
    return None
