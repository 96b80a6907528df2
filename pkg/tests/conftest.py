import numpy as np
import pytest

from ukrylov.circuits import CircuitSpec, HamiltonianSpec, build_dual_unitary_gate, build_trotter_gate

TESTBED_DT = 10 ** -0.8


def gue_circuit(L=8, seed=0, dt=TESTBED_DT, boundary="open"):
    gate = build_trotter_gate(HamiltonianSpec("GUE", seed=seed), dt)
    return CircuitSpec(gate, L, boundary, seed)


def du_circuit(L=6, seed=0, boundary="periodic"):
    return CircuitSpec(build_dual_unitary_gate(haar_seed=seed), L, boundary, seed)


@pytest.fixture(scope="session")
def testbed():
    """Chaotic reference circuit: GUE gate, L=8, open chain."""
    return gue_circuit()


@pytest.fixture(scope="session")
def small_gue():
    return gue_circuit(L=6, seed=3, dt=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
