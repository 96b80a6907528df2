import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import du_circuit, gue_circuit
from ukrylov.circuits import (ISWAP, PAULI, SWAP, CircuitSpec, HamiltonianSpec, TwoSiteGate,
                              assemble_brickwork, build_dual_unitary_gate, build_trotter_gate,
                              check_dual_unitarity, circuit_from_config, circuit_to_json,
                              dual_unitary_core, gate_from_config, operator_from_config,
                              pauli_string, reshuffle, sample_gue_hamiltonian)
from ukrylov.errors import ConfigError, DenseLimitExceeded


def test_gue_deterministic_and_hermitian():
    a, b = sample_gue_hamiltonian(5), sample_gue_hamiltonian(5)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a - a.conj().T)) == 0


def test_gue_ensemble_mean_diagonal():
    diag = np.array([np.diag(sample_gue_hamiltonian(s)).real for s in range(1, 1001)])
    assert np.all(np.abs(diag.mean(axis=0)) < 0.1)


def test_trotter_dt_zero_is_identity():
    g = build_trotter_gate(HamiltonianSpec("GUE", seed=2), 0.0)
    assert np.allclose(g.matrix, np.eye(4), atol=1e-14)


def test_xx_trotter_at_quarter_pi_is_iswap_up_to_conjugation():
    g = build_trotter_gate(HamiltonianSpec("XX"), np.pi / 4).matrix
    # exp(-i (pi/4)(XX+YY)) has -i on the hopping block; its adjoint action
    # equals that of the conjugate gate, and it is dual-unitary like iSWAP
    assert np.allclose(g, ISWAP.conj(), atol=1e-12)
    assert check_dual_unitarity(g)


def test_xxz_eigenphases():
    h = HamiltonianSpec("XXZ", anisotropy=3.0)
    g = build_trotter_gate(h, 0.1).matrix
    w = np.linalg.eigvalsh(h.matrix())
    phases = np.sort(np.angle(np.linalg.eigvals(g)))
    assert np.allclose(phases, np.sort(-0.1 * w), atol=1e-12)


@pytest.mark.parametrize("family", ["GUE", "XXZ", "XX"])
def test_trotter_commutes_with_generator(family):
    h = HamiltonianSpec(family, anisotropy=0.7, seed=4)
    g = build_trotter_gate(h, 0.37).matrix
    H = h.matrix()
    assert np.max(np.abs(g @ H - H @ g)) <= 1e-10


def test_xx_gate_adjoint_periodicity():
    h = HamiltonianSpec("XX")
    sup = lambda g: np.kron(g.conj(), g)  # noqa: E731
    g1 = build_trotter_gate(h, 0.23).matrix
    # a single gate repeats after dt -> dt + pi (2 dt -> 2 dt + 2 pi)
    assert np.allclose(sup(g1), sup(build_trotter_gate(h, 0.23 + np.pi).matrix), atol=1e-12)
    # a shift by pi/2 multiplies each gate by ZZ, which cancels on a periodic brickwork
    g2 = build_trotter_gate(h, 0.23 + np.pi / 2).matrix
    assert np.allclose(g2, g1 @ np.kron(PAULI["z"], PAULI["z"]), atol=1e-12)
    U1 = assemble_brickwork(CircuitSpec(TwoSiteGate(g1), 6, "periodic"))
    U2 = assemble_brickwork(CircuitSpec(TwoSiteGate(g2), 6, "periodic"))
    k = np.vdot(U1, U2) / 64
    assert abs(abs(k) - 1) < 1e-12 and np.allclose(U2, k * U1, atol=1e-12)


def test_dual_unitary_gates():
    assert check_dual_unitarity(dual_unitary_core(0.0))
    assert check_dual_unitarity(ISWAP)
    assert not check_dual_unitarity(np.eye(4))
    assert not check_dual_unitarity(build_trotter_gate(HamiltonianSpec("XX"), 0.1))
    a, b = build_dual_unitary_gate(haar_seed=1), build_dual_unitary_gate(haar_seed=2)
    assert not np.allclose(a.matrix, b.matrix)
    assert check_dual_unitarity(a) and check_dual_unitarity(b)
    assert a.is_unitary() and b.is_unitary()


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(0, 10 ** 6), st.booleans())
def test_dual_unitarity_property(J, seed, dressed):
    g = build_dual_unitary_gate(J, seed, dressed)
    assert g.is_unitary(1e-12) and check_dual_unitarity(g)


def test_reshuffle_involution_structure():
    M = build_dual_unitary_gate(haar_seed=3).matrix
    # reshuffling four times is the identity (a rotation by 2 pi)
    assert np.allclose(reshuffle(reshuffle(reshuffle(reshuffle(M)))), M)


def test_identity_brickwork():
    U = assemble_brickwork(CircuitSpec(TwoSiteGate(np.eye(4)), 6, "periodic"))
    assert np.array_equal(U, np.eye(64))


def test_l2_open_is_single_gate():
    g = build_dual_unitary_gate(haar_seed=0)
    assert np.allclose(assemble_brickwork(CircuitSpec(g, 2, "open")), g.matrix)


def test_swap_brickwork_translates():
    L = 4
    U = assemble_brickwork(CircuitSpec(TwoSiteGate(SWAP), L, "periodic"))
    assert np.allclose(np.linalg.matrix_power(U, L // 2), np.eye(2 ** L))
    # single period moves Z from site 0 by two sites
    O = pauli_string(L, {0: "z"})
    assert np.allclose(U.conj().T @ O @ U, pauli_string(L, {2: "z"}))


@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_brickwork_unitary(boundary):
    for spec in (gue_circuit(L=6, boundary=boundary), du_circuit(L=6, boundary=boundary)):
        U = assemble_brickwork(spec)
        assert np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= 1e-10


def test_layer_order_and_site_convention():
    # a gate acting as X on its first qubit only, on bond (0,1) of L=2
    g = np.kron(PAULI["x"], np.eye(2))
    U = assemble_brickwork(CircuitSpec(TwoSiteGate(g), 2, "open"))
    assert np.allclose(U, np.kron(PAULI["x"], np.eye(2)))


def test_dense_limit():
    with pytest.raises(DenseLimitExceeded):
        assemble_brickwork(CircuitSpec(TwoSiteGate(np.eye(4)), 14, "open"))


def test_invalid_specs():
    with pytest.raises(ConfigError):
        CircuitSpec(TwoSiteGate(np.eye(4)), 5)
    with pytest.raises(ConfigError):
        CircuitSpec(TwoSiteGate(np.eye(4)), 4, "twisted")
    with pytest.raises(ConfigError):
        HamiltonianSpec("ISING")
    with pytest.raises(ConfigError):
        gate_from_config({"family": "gue"})


def test_operator_from_config_normalized():
    O = operator_from_config(4, {"pauli": "z", "sites": [0, 2]})
    assert np.isclose(np.vdot(O, O).real / 16, 1.0)
    with pytest.raises(ConfigError):
        operator_from_config(4, {"pauli": "z", "sites": [7]})


def test_json_round_trip():
    spec = circuit_from_config({"family": "gue", "seed": 3, "params": {"dt": 0.2},
                                "num_sites": 4, "boundary": "periodic"})
    cfg = json.loads(circuit_to_json(spec, family="gue"))
    again = circuit_from_config(cfg)
    assert np.array_equal(again.gate.matrix, spec.gate.matrix)
    assert again.num_sites == 4 and again.boundary == "periodic"

