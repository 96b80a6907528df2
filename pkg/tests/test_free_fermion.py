import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ukrylov.circuits import CircuitSpec, HamiltonianSpec, build_trotter_gate
from ukrylov.errors import DomainError, SingularEdge
from ukrylov.free_fermion import (dispersion, fermion_autocorrelation, fermion_autocorrelations,
                                  fermion_autocorrelations_mp, fermion_spectral_function, is_monotone,
                                  knee, momenta, spectral_gap, spin_moment_sequence,
                                  spin_spectral_density, sz_autocorrelation_open, transition_point,
                                  uk_from_layers, uk_matrix, window_mean)
from ukrylov.krylov import autocorrelation_ed, classify_regime, krylov_from_moments


def test_uk_identity_at_zero():
    assert np.allclose(uk_matrix(1.3, 0.0).matrix, np.eye(2))


@pytest.mark.parametrize("k", [0.0, 0.4, 2.0, 5.5])
def test_uk_at_quarter_pi(k):
    ph = np.sort(np.mod(uk_matrix(k, np.pi / 4).eigenphases(), 2 * np.pi))
    ref = np.sort(np.mod([k + np.pi, -(k + np.pi)], 2 * np.pi))
    d = np.abs(np.exp(1j * ph) - np.exp(1j * ref))
    assert np.max(d) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi / 4))
def test_uk_layers_unitary_and_dispersion(k, dt):
    M = uk_matrix(k, dt).matrix
    assert np.max(np.abs(M - uk_from_layers(k, dt))) <= 1e-12
    assert np.max(np.abs(M.conj().T @ M - np.eye(2))) <= 1e-12
    w = dispersion(k, dt)
    ph = np.abs(uk_matrix(k, dt).eigenphases())
    assert np.allclose(np.sort(ph), [w, w], atol=1e-7)


def test_dispersion_values():
    assert abs(dispersion(0.0, 0.01) - 0.04) <= 1e-5
    # at dt = pi/8 the single-particle edge is pi/2, so the two-particle edge reaches pi
    assert dispersion(0.0, np.pi / 8) == pytest.approx(np.pi / 2)
    assert 2 * dispersion(0.0, np.pi / 8) == pytest.approx(np.pi)
    assert dispersion(0.0, np.pi / 4) == pytest.approx(np.pi)


def test_small_dt_dispersion_limit():
    k = momenta(400)
    for dt in (0.05, 0.02, 0.01):
        dev = np.max(np.abs(dispersion(k, dt) - 4 * dt * np.abs(np.cos(k / 2))))
        assert dev <= 1.0 * dt ** 2


def test_autocorrelation_values():
    assert fermion_autocorrelation(0.2, 0, 50) == 1.0
    C = fermion_autocorrelations(np.pi / 4, 20, 200)
    assert np.max(np.abs(C[1:])) < 1e-12
    assert abs(fermion_autocorrelation(0.1, 3, 200) - fermion_autocorrelation(0.1, 3, 2000)) < 1e-3


def test_mp_autocorrelations_match_double():
    a = fermion_autocorrelations(0.33, 30, 64)
    b = np.array([float(x) for x in fermion_autocorrelations_mp(0.33, 30, 64, 40)])
    assert np.max(np.abs(a - b)) < 1e-12


def test_spin_moments_signed_and_absolute():
    m = spin_moment_sequence(0.2, 10, 50, 3)
    C = fermion_autocorrelations(0.2, 10, 50)
    assert np.allclose(m.values, C ** 3)
    assert np.allclose(spin_moment_sequence(0.2, 10, 50, 3, absolute=True).values, np.abs(C) ** 3)
    m1 = spin_moment_sequence(np.pi / 4, 10, 200, 1)
    assert abs(m1.values[0] - 1) < 1e-14 and np.max(np.abs(m1.values[1:])) < 1e-12


def test_open_chain_ed_crosscheck():
    L, dt = 8, 0.2
    gate = build_trotter_gate(HamiltonianSpec("XX"), dt)
    S_ed = autocorrelation_ed(CircuitSpec(gate, L, "open"), {"pauli": "z", "sites": [0]}, 20)
    S_ff = sz_autocorrelation_open(L, dt, 20, site=0)
    assert np.max(np.abs(S_ed.values - S_ff)) <= 1e-8


def test_gapped_phase_has_no_onset():
    d = krylov_from_moments(spin_moment_sequence(0.3, 120, 200, 2, digits=60), method="szego")
    assert classify_regime(d).onset is None


def test_spectral_gap_examples():
    assert spectral_gap(0.3, 2).gapped
    g = spectral_gap(np.pi / 8, 2)
    assert not g.gapped and g.gap == pytest.approx(0.0, abs=1e-15)
    assert not spectral_gap(0.25, 4).gapped
    assert spectral_gap(0.1, 2).critical_dt == pytest.approx(np.pi / 8)
    with pytest.raises(DomainError):
        spectral_gap(1.0, 2)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, np.pi / 4), st.integers(1, 8))
def test_gapped_iff_below_critical(dt, s):
    assert spectral_gap(dt, s).gapped == (dt < np.pi / (4 * s))


def test_single_particle_density():
    assert fermion_spectral_function(0.1, 1.0) == 0.0
    assert fermion_spectral_function(0.1, 0.0) == pytest.approx(1 / abs(np.sin(0.2)), rel=1e-12)
    assert fermion_spectral_function(0.1, 0.0) == pytest.approx(5.0335, abs=1e-4)
    with pytest.raises(SingularEdge):
        fermion_spectral_function(0.1, 0.4)


def test_spin_density_mass():
    w, dens = spin_spectral_density(0.2, 2000)
    assert np.sum(dens) * (w[1] - w[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.all(dens >= 0)
    # two-particle support ends at 8 dt
    far = (w > 8 * 0.2 + 0.05) & (w < 2 * np.pi - 8 * 0.2 - 0.05)
    assert np.max(dens[far]) < 1e-12


def test_scan_helpers():
    assert window_mean(np.array([np.nan, 1, 2, 3, 4, 5, 6, 7])) == 6.5
    assert window_mean(np.arange(10.0), 2, 4) == 2.5
    assert knee([0.1, 0.2, 0.3], [0.5, 0.9995, 1.0]) == 0.2
    assert knee([0.1], [0.5]) is None
    assert is_monotone([0.1, 0.2, 0.2, 0.5]) and not is_monotone([0.3, 0.1])


@pytest.mark.parametrize("s", [1, 2])
def test_transition_sharpness(s):
    below = transition_point(0.9 * np.pi / (4 * s), s, 200, 200, 60, (150, 200))
    above = transition_point(1.2 * np.pi / (4 * s), s, 200, 200, 60, (150, 200))
    assert below["b_inf_mean"] < 1 - 1e-3
    assert above["b_inf_mean"] >= 1 - 1e-3


def test_precision_escalation_deep_in_gap():
    r = transition_point(0.1, 2, 200, 200, 60)
    assert r["rank"] == 201 and r["digits"] > 60
    assert not r["onset_present"]
