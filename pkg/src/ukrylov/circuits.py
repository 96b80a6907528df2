"""Two-site gates, brickwork assembly and operator helpers for small chains.

Conventions
-----------
* Site 0 is the most significant tensor factor of the 2^L Hilbert space.
* A two-site gate on the bond (i, j) uses the basis index 2*s_i + s_j.
* One Floquet period is ``U = U_odd @ U_even``; operators evolve as
  ``O -> U^dag O U``.
"""
from dataclasses import dataclass, field
import json

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from .errors import ConfigError, DenseLimitExceeded

DENSE_LIMIT = 12

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass
class HamiltonianSpec:
    """Two-site Hamiltonian family: ``"GUE"``, ``"XXZ"`` or ``"XX"``."""

    family: str
    anisotropy: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.family = self.family.upper()
        if self.family not in ("GUE", "XXZ", "XX"):
            raise ConfigError(f"unknown Hamiltonian family {self.family!r}")
        if not np.isfinite(self.anisotropy):
            raise ConfigError("anisotropy must be finite")

    def matrix(self):
        """The 4x4 bond Hamiltonian."""
        if self.family == "GUE":
            return sample_gue_hamiltonian(self.seed)
        delta = self.anisotropy if self.family == "XXZ" else 0.0
        X, Y, Z = PAULI["x"], PAULI["y"], PAULI["z"]
        return np.kron(X, X) + np.kron(Y, Y) + delta * np.kron(Z, Z)


@dataclass
class TwoSiteGate:
    """A 4x4 unitary with a family label and its defining parameters."""

    matrix: np.ndarray
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ConfigError("a two-site gate must be 4x4")

    def is_unitary(self, tol=1e-12):
        M = self.matrix
        return np.max(np.abs(M.conj().T @ M - np.eye(4))) <= tol


@dataclass
class CircuitSpec:
    """Brickwork of identical two-site gates on ``num_sites`` qubits."""

    gate: TwoSiteGate
    num_sites: int
    boundary: str = "open"
    seed: int = 0

    def __post_init__(self):
        if self.num_sites < 2 or self.num_sites % 2:
            raise ConfigError("num_sites must be an even integer >= 2")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError("boundary must be 'open' or 'periodic'")

    @property
    def dim(self):
        return 2 ** self.num_sites

    def even_bonds(self):
        return [(2 * j, 2 * j + 1) for j in range(self.num_sites // 2)]

    def odd_bonds(self):
        L = self.num_sites
        bonds = [(2 * j - 1, 2 * j) for j in range(1, L // 2)]
        if self.boundary == "periodic":
            bonds.append((L - 1, 0))
        return bonds


# --------------------------------------------------------------------------
# gates
# --------------------------------------------------------------------------

def sample_gue_hamiltonian(seed):
    """4x4 GUE matrix ``(A + A^dag)/2``; entries of A have Re, Im ~ N(0, 1/2)."""
    rng = np.random.default_rng(seed)
    A = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
    return (A + A.conj().T) / 2


def build_trotter_gate(h, dt):
    """``exp(-i H dt)`` through the Hermitian eigendecomposition of H."""
    if not np.isfinite(dt):
        raise ConfigError("dt must be finite")
    H = h.matrix()
    w, V = np.linalg.eigh(H)
    M = (V * np.exp(-1j * w * dt)) @ V.conj().T
    params = {"dt": float(dt), "anisotropy": float(h.anisotropy), "seed": int(h.seed)}
    return TwoSiteGate(M, label=f"trotter-{h.family}", params=params)


def dual_unitary_core(J):
    """``exp[-i (pi/4)(XX + YY) - i J ZZ]``."""
    X, Y, Z = PAULI["x"], PAULI["y"], PAULI["z"]
    G = (np.pi / 4) * (np.kron(X, X) + np.kron(Y, Y)) + J * np.kron(Z, Z)
    return expm(-1j * G)


def build_dual_unitary_gate(J=None, haar_seed=0, dressed=True):
    """Dual-unitary gate ``(u1 x u2) V(J) (u3 x u4)`` with Haar single-qubit u's.

    When ``J`` is None it is drawn uniformly from [0, 2 pi) with the same
    generator as the dressing.  ``dressed=False`` returns the bare core.
    """
    rng = np.random.default_rng(haar_seed)
    if J is None:
        J = rng.uniform(0, 2 * np.pi)
    V = dual_unitary_core(J)
    if dressed:
        u = [unitary_group.rvs(2, random_state=rng) for _ in range(4)]
        V = np.kron(u[0], u[1]) @ V @ np.kron(u[2], u[3])
    return TwoSiteGate(V, label="dual-unitary", params={"J": float(J), "seed": int(haar_seed)})


def reshuffle(M):
    """Space-time rotated gate: ``W[(k,l),(i,j)] = M[(j,l),(i,k)]``."""
    T = np.asarray(M).reshape(2, 2, 2, 2)
    return np.einsum("jlik->klij", T).reshape(4, 4)


def check_dual_unitarity(g, tol=1e-10):
    """True when the reshuffled gate is unitary within ``tol``."""
    M = g.matrix if isinstance(g, TwoSiteGate) else np.asarray(g)
    W = reshuffle(M)
    return bool(np.max(np.abs(W.conj().T @ W - np.eye(4))) <= tol)


# --------------------------------------------------------------------------
# dense brickwork
# --------------------------------------------------------------------------

def apply_two_site(psi, gate, i, j, L):
    """Apply a 4x4 gate on sites (i, j) to the leading L axes of ``psi``.

    ``psi`` has shape (2**L, ...); the trailing axes are untouched.
    """
    rest = psi.shape[1:]
    T = psi.reshape((2,) * L + rest)
    G = gate.reshape(2, 2, 2, 2)
    T = np.tensordot(G, T, axes=([2, 3], [i, j]))
    T = np.moveaxis(T, [0, 1], [i, j])
    return T.reshape(psi.shape)


def check_dense_limit(L, limit=DENSE_LIMIT):
    if L > limit:
        raise DenseLimitExceeded(f"{L} sites exceed the dense limit of {limit}")


def layer_unitary(gate, bonds, L):
    U = np.eye(2 ** L, dtype=complex)
    for i, j in bonds:
        U = apply_two_site(U, gate, i, j, L)
    return U


def assemble_brickwork(spec, limit=DENSE_LIMIT):
    """Dense Floquet unitary ``U_odd @ U_even`` of the brickwork."""
    L = spec.num_sites
    check_dense_limit(L, limit)
    M = spec.gate.matrix
    U = layer_unitary(M, spec.even_bonds(), L)
    for i, j in spec.odd_bonds():
        U = apply_two_site(U, M, i, j, L)
    return U


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------

def site_operator(L, site, pauli="z"):
    """Pauli matrix on one site, identity elsewhere (unit norm)."""
    return pauli_string(L, {site: pauli})


def pauli_string(L, letters):
    """Dense Pauli string from a ``{site: letter}`` mapping."""
    out = np.ones((1, 1), dtype=complex)
    for s in range(L):
        out = np.kron(out, PAULI[letters.get(s, "i").lower()])
    return out


def operator_from_config(L, desc):
    """Build a normalized operator from ``{"pauli": "z", "sites": [0, 2]}``.

    Multiple sites give the normalized sum of single-site Paulis.
    """
    if isinstance(desc, np.ndarray):
        return desc
    pauli = desc.get("pauli", "z")
    sites = desc.get("sites", [0])
    if not sites or any(not 0 <= s < L for s in sites):
        raise ConfigError(f"operator sites {sites} out of range for L={L}")
    O = sum(site_operator(L, s, pauli) for s in sites)
    return O / np.sqrt(len(sites))


def inner(A, B):
    """``Tr[A^dag B] / D``."""
    return np.vdot(A, B) / A.shape[0]


# --------------------------------------------------------------------------
# JSON round trip
# --------------------------------------------------------------------------

def gate_from_config(cfg):
    """Build a gate from ``{"family": ..., "params": {...}, "seed": ...}``."""
    family = str(cfg.get("family", "")).lower()
    p = cfg.get("params", {})
    seed = int(cfg.get("seed", 0))
    if family in ("gue", "xxz", "xx"):
        if "dt" not in p:
            raise ConfigError("Trotter gates need params.dt")
        h = HamiltonianSpec(family, anisotropy=float(p.get("anisotropy", 0.0)), seed=seed)
        return build_trotter_gate(h, float(p["dt"]))
    if family == "dual-unitary":
        J = p.get("J")
        return build_dual_unitary_gate(None if J is None else float(J), seed,
                                       dressed=bool(p.get("dressed", True)))
    if family == "iswap":
        return TwoSiteGate(ISWAP, label="iswap")
    if family == "swap":
        return TwoSiteGate(SWAP, label="swap")
    if family == "identity":
        return TwoSiteGate(np.eye(4), label="identity")
    raise ConfigError(f"unknown gate family {family!r}")


def circuit_from_config(cfg):
    """``{family, params, seed, num_sites, boundary}`` -> CircuitSpec."""
    if "num_sites" not in cfg:
        raise ConfigError("circuit config needs num_sites")
    return CircuitSpec(gate_from_config(cfg), int(cfg["num_sites"]),
                       cfg.get("boundary", "open"), int(cfg.get("seed", 0)))


def circuit_to_json(spec, family=None):
    cfg = {
        "family": family or spec.gate.label,
        "params": spec.gate.params,
        "seed": spec.seed,
        "num_sites": spec.num_sites,
        "boundary": spec.boundary,
    }
    return json.dumps(cfg, sort_keys=True)
