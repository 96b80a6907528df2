import numpy as np
import pytest

from ukrylov.circuits import (ISWAP, PAULI, SWAP, CircuitSpec, build_dual_unitary_gate,
                              operator_from_config)
from ukrylov.dual_unitary import (TransferChannel, channel_autocorrelation,
                                  channel_autocorrelation_iterated, eigenmode_complexity,
                                  eigenmode_krylov, eigenmode_moments, eigenmode_spectral,
                                  to_pauli_vector, transfer_channel)
from ukrylov.errors import DomainError
from ukrylov.krylov import (autocorrelation_ed, krylov_complexity, krylov_explicit,
                            krylov_from_moments)


def test_swap_channel_is_identity():
    # SWAP carries the operator onto the kept site unchanged
    ch = transfer_channel(SWAP)
    assert np.allclose(ch.matrix, np.eye(4), atol=1e-14)
    assert np.allclose(ch.eigenvalues, 1)


def test_identity_gate_channel_depolarizes():
    # with no gate the operator stays on the traced site
    ch = transfer_channel(np.eye(4))
    assert np.allclose(ch.matrix, np.diag([1, 0, 0, 0]), atol=1e-14)


def test_iswap_channel_direct_trace():
    ch = transfer_channel(ISWAP)
    for k in "xyz":
        s = PAULI[k]
        V = ISWAP
        direct = np.einsum("ijik->jk", (V.conj().T @ np.kron(s, np.eye(2)) @ V).reshape(2, 2, 2, 2)) / 2
        assert np.allclose(ch.apply(s), direct, atol=1e-14)
    # Z passes to the kept site, X and Y leave a Z string on the traced one
    assert np.allclose(np.sort(np.abs(ch.eigenvalues)), [0, 0, 1, 1], atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_random_channel_spectrum_and_unitality(seed):
    for sub in ("odd", "even"):
        ch = transfer_channel(build_dual_unitary_gate(haar_seed=seed), sublattice=sub)
        assert np.allclose(ch.apply(np.eye(2)), np.eye(2), atol=1e-12)
        lam = ch.eigenvalues
        assert np.min(np.abs(lam - 1)) < 1e-12
        traceless = np.sort(np.abs(lam))[:3]
        assert np.all(traceless <= 1 + 1e-12)


def test_eigenoperator_autocorrelation():
    # a channel acting diagonally on the Pauli basis
    lam = np.array([1, 0.6, -0.3, 0.2])
    ch = TransferChannel(np.diag(lam).astype(complex), lam.astype(complex), np.eye(4), np.eye(4))
    S = channel_autocorrelation(ch, PAULI["x"], 6).values
    assert np.allclose(S, 0.6 ** (2 * np.arange(7)))
    zero = TransferChannel(np.diag([1, 0, 0, 0]).astype(complex), np.array([1, 0, 0, 0], complex),
                           np.eye(4), np.eye(4))
    S0 = channel_autocorrelation(zero, PAULI["z"], 5).values
    assert abs(S0[0] - 1) < 1e-14 and np.all(S0[1:] == 0)


def test_spectral_and_iterated_forms_agree():
    ch = transfer_channel(build_dual_unitary_gate(haar_seed=5))
    a = channel_autocorrelation(ch, PAULI["z"], 15).values
    b = channel_autocorrelation_iterated(ch, PAULI["z"], 15).values
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1])
def test_channel_matches_ed_sum_operator(seed):
    L = 10
    g = build_dual_unitary_gate(haar_seed=seed)
    circ = CircuitSpec(g, L, "periodic")
    for sub, sites in (("even", list(range(0, L, 2))), ("odd", list(range(1, L, 2)))):
        S_ed = autocorrelation_ed(circ, {"pauli": "z", "sites": sites}, 2).values
        S_ch = channel_autocorrelation(transfer_channel(g, sub), PAULI["z"], 2).values
        assert np.max(np.abs(S_ed - S_ch)) <= 1e-10


def test_eigenmode_closed_form_vs_engine():
    lam = 0.8
    d_cf, cc_cf = eigenmode_krylov(lam, 20)
    d = krylov_from_moments(eigenmode_moments(lam, 20))
    n = 20
    assert np.max(np.abs(d.a[:n] - d_cf.a[:n])) <= 1e-12
    assert np.max(np.abs(d.b[1:n] - d_cf.b[1:n])) <= 1e-12
    assert np.max(np.abs(d.c[:n] - d_cf.c[:n])) <= 1e-12
    assert np.max(np.abs(d.alpha[:n, :n] - d_cf.alpha[:n, :n])) <= 1e-12
    assert np.max(np.abs(krylov_complexity(d).K - cc_cf.K)) <= 1e-10


def test_eigenmode_zero_is_shift():
    d, cc = eigenmode_krylov(0.0, 8)
    assert np.all(d.a == 0) and np.allclose(d.b[1:], 1)
    assert np.allclose(cc.K, np.arange(9))


def test_eigenmode_linear_asymptote():
    lam = 0.8
    t = np.array([200.0])
    assert abs(eigenmode_complexity(lam, t) - (t + lam ** 4 / (lam ** 4 - 1)))[0] < 1e-12


def test_eigenmode_domain():
    with pytest.raises(DomainError):
        eigenmode_krylov(1.0)
    with pytest.raises(DomainError):
        eigenmode_spectral(0.0, 1.0)


def test_explicit_eigenmode_operator_on_light_cone():
    # operators of the dual-unitary sum stay orthonormal only within the light cone
    g = build_dual_unitary_gate(haar_seed=0)
    circ = CircuitSpec(g, 8, "open")
    d, ops = krylov_explicit(circ, {"pauli": "z", "sites": [0]}, 3)
    assert np.max(np.abs(d.a)) <= 1e-10
    assert np.max(np.abs(d.b[1:3] - 1)) <= 1e-10


def test_pauli_vector_roundtrip():
    s = 0.3 * PAULI["x"] - 0.2j * PAULI["y"] + PAULI["z"]
    v = to_pauli_vector(s)
    ch = transfer_channel(SWAP)
    assert np.allclose(ch.apply(s), s)
    assert np.isclose(np.vdot(v, v), np.trace(s.conj().T @ s))


def test_operator_sum_normalized():
    O = operator_from_config(6, {"pauli": "z", "sites": [0, 2, 4]})
    assert np.isclose(np.vdot(O, O).real / 64, 1)
