import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbc.qcore import (
    DensityOp,
    GreatCircle,
    Ket,
    MeasurementBasis,
    QuantumError,
    bb84_states,
    bloch_ket,
    bloch_vector,
    born_probabilities,
    circle_state,
    density_from_json,
    density_to_json,
    fidelity,
    haar_ket,
    haar_unitary,
    is_unitary,
    ket_from_json,
    ket_to_json,
    measure_sample,
    partial_trace,
    permute_subsystems,
    polar_unitary,
    psd_sqrt,
    random_density,
    rotation,
    tensor,
    trace_norm,
)


def test_ket_rejects_unnormalized():
    with pytest.raises(QuantumError):
        Ket(np.array([1.0, 1.0]))


def test_density_rejects_non_hermitian():
    with pytest.raises(QuantumError):
        DensityOp(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_density_rejects_negative():
    with pytest.raises(QuantumError):
        DensityOp(np.diag([1.5, -0.5]))


def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    a, b = random_density(2, rng), random_density(3, rng)
    ab = tensor([a, b])
    assert np.allclose(partial_trace(ab, [0]).matrix, a.matrix, atol=1e-12)
    assert np.allclose(partial_trace(ab, [1]).matrix, b.matrix, atol=1e-12)


def test_partial_trace_of_bell_state_is_mixed():
    bell = Ket.normalized(np.array([1, 0, 0, 1]), (2, 2))
    assert np.allclose(partial_trace(bell, [1]).matrix, np.eye(2) / 2)


def test_permute_subsystems_swaps_factors():
    rng = np.random.default_rng(1)
    a, b = random_density(2, rng).matrix, random_density(3, rng).matrix
    swapped = permute_subsystems(np.kron(a, b), (2, 3), [1, 0])
    assert np.allclose(swapped, np.kron(b, a))


def test_polar_unitary_identity():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u, p = polar_unitary(m)
    assert is_unitary(u, 1e-12)
    assert np.allclose(m @ u, p, atol=1e-12)
    assert np.allclose(p, p.conj().T)
    assert np.all(np.linalg.eigvalsh(p) > -1e-12)


def test_polar_unitary_rank_deficient():
    m = np.outer([1, 2, 0], [0, 1, 1j]).astype(complex)
    u, p = polar_unitary(m)
    assert is_unitary(u, 1e-12)
    assert np.allclose(m @ u, p, atol=1e-12)


def test_psd_sqrt_squares_back():
    rho = random_density(4, np.random.default_rng(3)).matrix
    r = psd_sqrt(rho)
    assert np.allclose(r @ r, rho, atol=1e-12)


def test_fidelity_pure_states_is_overlap():
    rng = np.random.default_rng(4)
    a, b = haar_ket(3, rng), haar_ket(3, rng)
    assert fidelity(a.density(), b.density()) == pytest.approx(abs(a.inner(b)), abs=1e-9)


def test_fidelity_with_itself_is_one():
    rho = random_density(3, np.random.default_rng(5))
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)


def test_trace_norm_orthogonal_states():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)


def test_haar_unitary_batch():
    us = haar_unitary(3, np.random.default_rng(6), size=5)
    assert us.shape == (5, 3, 3)
    assert all(is_unitary(u, 1e-12) for u in us)


def test_born_probabilities_sum_to_one():
    rng = np.random.default_rng(7)
    k = haar_ket(4, rng, dims=(2, 2))
    basis = MeasurementBasis.computational(2)
    p = born_probabilities(k, basis, subsystem=1)
    assert p.sum() == pytest.approx(1.0)


def test_measure_sample_deterministic_state():
    rng = np.random.default_rng(8)
    k = Ket.basis(1, 2)
    assert all(measure_sample(k, MeasurementBasis.computational(2), rng) == 1 for _ in range(20))


def test_standard_circle_states():
    c = GreatCircle.standard()
    for a in (0.0, 0.3, 1.7, math.pi):
        assert np.allclose(circle_state(c, a).amplitudes, [math.cos(a / 2), math.sin(a / 2)], atol=1e-12)


def test_half_turn_gives_orthogonal_partner():
    c = GreatCircle((0.0, 0.6, 0.8), 0.4)
    u1 = rotation(c, math.pi)
    for a in np.linspace(0, 2 * math.pi, 7):
        psi = circle_state(c, a)
        assert abs(np.vdot(psi.amplitudes, u1 @ psi.amplitudes)) < 1e-12


def test_bb84_states_pairwise():
    s = bb84_states()
    assert abs(s[0].inner(s[1])) < 1e-12
    assert abs(s[2].inner(s[3])) < 1e-12
    assert abs(s[0].inner(s[2])) ** 2 == pytest.approx(0.5)


def test_bloch_round_trip():
    v = np.array([0.3, -0.4, math.sqrt(1 - 0.25)])
    assert np.allclose(bloch_vector(bloch_ket(v)), v, atol=1e-12)


def test_circle_axis_must_be_unit():
    with pytest.raises(QuantumError):
        GreatCircle((1.0, 1.0, 0.0))


def test_json_round_trip():
    rng = np.random.default_rng(9)
    k = haar_ket(4, rng, dims=(2, 2))
    assert np.array_equal(ket_from_json(ket_to_json(k)).amplitudes, k.amplitudes)
    rho = random_density(3, rng)
    assert np.array_equal(density_from_json(density_to_json(rho)).matrix, rho.matrix)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=4))
def test_fidelity_symmetric_and_bounded(seed, dim):
    rng = np.random.default_rng(seed)
    a, b = random_density(dim, rng), random_density(dim, rng)
    f = fidelity(a, b)
    assert -1e-12 <= f <= 1 + 1e-9
    assert f == pytest.approx(fidelity(b, a), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_fuchs_van_de_graaf(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(3, rng), random_density(3, rng)
    f = fidelity(a, b)
    d = 0.5 * trace_norm(a.matrix - b.matrix)
    assert 1 - f <= d + 1e-9
    assert d <= math.sqrt(max(0.0, 1 - f * f)) + 1e-9
