import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbc import cheat
from qbc.cheat import (
    Ensemble,
    InvariantError,
    brute_force_cheat_oracle,
    build_lambda,
    cheat_success,
    collapse,
    commit_purify,
    distance_family,
    fixed_cheat_scan,
    helstrom,
    kraus_freedom,
    optimal_overlap_cheat,
    permutation_fixture,
    random_ensemble,
    schmidt_switch,
    uniform_concealing_scan,
)
from qbc.qcore import Ket, QuantumError, fidelity, haar_unitary, partial_trace, tensor, trace_norm

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
S = np.diag([1.0, 1j])


def test_ensemble_probability_invariant():
    with pytest.raises(InvariantError) as err:
        Ensemble(np.array([0.5, 0.4]), (Ket.basis(0, 2), Ket.basis(1, 2)))
    assert err.value.invariant == "ensemble.prob_sum"


def test_ensemble_dims_invariant():
    with pytest.raises(InvariantError):
        Ensemble.uniform([Ket.basis(0, 2), Ket.basis(0, 3)])


def test_purification_reduces_to_average():
    rng = np.random.default_rng(0)
    e = random_ensemble(3, 2, rng)
    com = commit_purify(e)
    assert np.allclose(com.babe_state().matrix, e.density().matrix, atol=1e-12)


def test_collapse_recovers_members():
    e = random_ensemble(3, 3, np.random.default_rng(1))
    for (p, k), p0, s in zip(collapse(commit_purify(e)), e.probs, e.states):
        assert p == pytest.approx(p0)
        assert abs(k.inner(s)) == pytest.approx(1.0)


def test_lambda_entries():
    e0, e1 = random_ensemble(2, 2, np.random.default_rng(2)), random_ensemble(3, 2, np.random.default_rng(3))
    lam = build_lambda(e0, e1)
    i, j = 2, 1
    expect = math.sqrt(e1.probs[i] * e0.probs[j]) * e1.states[i].inner(e0.states[j])
    assert lam[i, j] == pytest.approx(expect)


def test_permutation_fixture_is_perfect():
    sol = optimal_overlap_cheat(*permutation_fixture())
    assert sol.p_cheat == pytest.approx(1.0, abs=1e-9)
    assert sol.fidelity == pytest.approx(1.0, abs=1e-9)


def test_diagonal_formula_is_reported_not_used():
    sol = optimal_overlap_cheat(*permutation_fixture())
    assert sol.p_diag_formula == pytest.approx(0.5)
    assert sol.p_cheat > sol.p_diag_formula


def test_identical_ensembles():
    e = random_ensemble(3, 2, np.random.default_rng(4))
    sol = optimal_overlap_cheat(e, e)
    assert sol.p_cheat == pytest.approx(1.0, abs=1e-9)


def test_polar_overlap_matches_fidelity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        e0, e1 = random_ensemble(3, 3, rng), random_ensemble(2, 3, rng)
        sol = optimal_overlap_cheat(e0, e1)
        assert abs(np.trace(sol.lambda_matrix @ sol.cheat_unitary)) == pytest.approx(sol.fidelity, abs=1e-9)
        assert sol.fidelity == pytest.approx(fidelity(e0.density(), e1.density()), abs=1e-8)


def test_steered_weights_sum_to_one():
    sol = optimal_overlap_cheat(*distance_family(0.3))
    assert sol.tilde_probs.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("delta", [0.2, 0.1, 0.05])
def test_distance_family_meets_bound(delta):
    e0, e1 = distance_family(delta)
    assert trace_norm(e0.density().matrix - e1.density().matrix) == pytest.approx(delta)
    sol = optimal_overlap_cheat(e0, e1)
    assert sol.p_cheat >= (1 - delta / 2) ** 2 - 1e-9


def test_distance_family_increases_as_distance_shrinks():
    values = [optimal_overlap_cheat(*distance_family(d)).p_cheat for d in (0.2, 0.1, 0.05)]
    assert values[0] < values[1] < values[2]


def test_oracle_does_not_beat_overlap_bound():
    rng = np.random.default_rng(6)
    e0, e1 = random_ensemble(2, 2, rng), random_ensemble(2, 2, rng)
    sol = optimal_overlap_cheat(e0, e1)
    _, best = brute_force_cheat_oracle(e0, e1, 400, rng)
    # the polar solution is within reach of direct search
    assert best >= sol.fidelity**2 - 1e-9


def test_oracle_size_cap():
    e = random_ensemble(7, 2, np.random.default_rng(7))
    with pytest.raises(QuantumError):
        brute_force_cheat_oracle(e, e, 10, np.random.default_rng(0))


def test_cheat_success_rejects_non_unitary():
    e0, e1 = permutation_fixture()
    with pytest.raises(InvariantError):
        cheat_success(e0, e1, np.ones((2, 2)))


def test_helstrom_orthogonal():
    k0, k1 = Ket.basis(0, 2), Ket.basis(1, 2)
    assert helstrom(k0.density(), k1.density()) == pytest.approx(1.0)
    assert helstrom(k0.density(), k0.density()) == pytest.approx(0.5)


def test_schmidt_switch_maps_purifications():
    e0, e1 = permutation_fixture(3)
    p0, p1 = commit_purify(e0), commit_purify(e1)
    u = schmidt_switch(p0, p1)
    moved = np.kron(u, np.eye(3)) @ p0.phi.amplitudes
    assert abs(np.vdot(p1.phi.amplitudes, moved)) == pytest.approx(1.0, abs=1e-12)


def test_schmidt_switch_needs_equal_reduced_states():
    e0, e1 = distance_family(0.5)
    e0p = Ensemble(np.array([0.5, 0.5, 0.0]), e0.states + (Ket.basis(0, 2),))
    with pytest.raises(InvariantError):
        schmidt_switch(commit_purify(e0p), commit_purify(e1))


def pauli_ops():
    return [(0.25, np.eye(2, dtype=complex)), (0.25, X), (0.25, Y), (0.25, Z)]


def test_kraus_freedom_depolarizing_absorbs_unitary():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    ops1 = [(0.25, u @ h) for _, u in pauli_ops()]
    res = kraus_freedom(pauli_ops(), ops1)
    assert res.equal
    assert res.residual <= 1e-7


def test_kraus_freedom_unequal_pair():
    res = kraus_freedom([(1.0, np.eye(2))], [(1.0, X)])
    assert not res.equal
    assert res.mixing is None


def test_kraus_freedom_phase_pair():
    ops0 = [(0.5, np.eye(2, dtype=complex)), (0.5, Z)]
    ops1 = [(0.5, S), (0.5, S.conj().T)]
    res = kraus_freedom(ops0, ops1, rng=np.random.default_rng(8))
    assert res.equal
    assert res.residual <= 1e-7


def test_kraus_freedom_rejects_bad_probabilities():
    with pytest.raises(InvariantError):
        kraus_freedom([(0.3, np.eye(2))], [(1.0, np.eye(2))])


def test_fixed_cheat_scan_with_mixing_unitary():
    ops0 = [(0.5, np.eye(2, dtype=complex)), (0.5, Z)]
    ops1 = [(0.5, S), (0.5, S.conj().T)]
    res = kraus_freedom(ops0, ops1)
    lo, mean = fixed_cheat_scan(ops0, ops1, res.mixing, 30, np.random.default_rng(9))
    assert lo == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(1.0, abs=1e-9)


def test_concealing_scan_finds_distinguishable_input():
    ops0 = [(1.0, np.eye(2, dtype=complex))]
    ops1 = [(1.0, X)]
    worst, _ = uniform_concealing_scan(ops0, ops1, 20, np.random.default_rng(10), refine=100)
    assert worst == pytest.approx(2.0, abs=1e-3)


def test_appendix_b_fixture_checks():
    c = cheat.appendix_b_fixture().checks
    assert c["bc_trace_distance"] <= 1e-12
    assert c["restricted_maps_equal"]
    assert c["adam_cheat_fixed_mixing"] == pytest.approx(1.0, abs=1e-9)
    assert c["adam_cheat_overlap_optimal"] == pytest.approx(1.0, abs=1e-9)
    assert c["babe_helstrom_on_aa"] == pytest.approx(1.0, abs=1e-12)
    assert not c["full_maps_equal"]


def test_appendix_b_entangled_scan_reaches_two():
    fx = cheat.appendix_b_fixture()
    aa = tensor([Ket.basis(0, 2), Ket.basis(0, 2)])
    worst, _ = uniform_concealing_scan(fx.ops0, fx.ops1, 10, np.random.default_rng(11), candidates=[aa])
    assert worst == pytest.approx(2.0, abs=1e-12)


def test_ensemble_json_round_trip():
    e = random_ensemble(3, 2, np.random.default_rng(12))
    back = cheat.ensemble_from_json(json.loads(json.dumps(cheat.ensemble_to_json(e))))
    assert np.array_equal(back.probs, e.probs)
    assert all(np.array_equal(a.amplitudes, b.amplitudes) for a, b in zip(back.states, e.states))


def test_ensemble_json_rejects_unnormalized_state():
    data = {"probs": [1.0], "states": [{"amplitudes": [[1, 0], [1, 0]], "dims": [2]}]}
    with pytest.raises(InvariantError):
        cheat.ensemble_from_json(data)


def test_cheat_report_is_stable():
    e0, e1 = distance_family(0.2)
    assert json.dumps(cheat.cheat_report(e0, e1)) == json.dumps(cheat.cheat_report(e0, e1))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_jensen_bound_property(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 5))
    e0, e1 = random_ensemble(int(rng.integers(1, 5)), dim, rng), random_ensemble(int(rng.integers(1, 5)), dim, rng)
    sol = optimal_overlap_cheat(e0, e1)
    assert sol.p_cheat >= sol.fidelity**2 - 1e-9
    assert sol.p_cheat <= 1 + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_unitaries_do_not_beat_polar_overlap(seed):
    rng = np.random.default_rng(seed)
    e0, e1 = random_ensemble(3, 2, rng), random_ensemble(3, 2, rng)
    lam = build_lambda(e0, e1)
    f = optimal_overlap_cheat(e0, e1).fidelity
    us = haar_unitary(3, rng, size=200)
    assert np.max(np.abs(np.einsum("ij,nji->n", lam, us))) <= f + 1e-9


def test_reduced_state_of_purification_matches():
    e0, e1 = permutation_fixture()
    rho = partial_trace(commit_purify(e1).phi, [1])
    assert np.allclose(rho.matrix, e0.density().matrix)
