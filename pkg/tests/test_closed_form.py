import math
from fractions import Fraction

import pytest

from qbc.protocols.closed_form import (
    central_identity_holds,
    concealing_bounds,
    concealing_closed_form,
    decoy_trace_distance,
    guess_one_position,
    majority_vote_exact,
    majority_vote_pbc,
    miss_probability,
    weighted_binomial_sum,
)


def test_single_position_is_perfectly_distinguishable():
    r = concealing_closed_form(1)
    assert r.exact == 1
    assert r.lower_bound is None


def test_three_positions():
    r = concealing_closed_form(3)
    assert r.exact == Fraction(3, 4)
    assert weighted_binomial_sum(3) == 12
    assert r.trace_distance == 1


def test_five_positions():
    assert concealing_closed_form(5).exact == Fraction(11, 16)


def test_even_n_rejected():
    with pytest.raises(ValueError):
        concealing_closed_form(4)


def test_lambda_plus_scales_advantage():
    full = concealing_closed_form(7)
    half = concealing_closed_form(7, Fraction(1, 2))
    assert half.exact - Fraction(1, 2) == (full.exact - Fraction(1, 2)) / 2


def test_float_lambda_plus():
    r = concealing_closed_form(5, 0.9)
    assert r.exact is None
    assert r.closed_form == pytest.approx(0.5 + 0.9 * 6 / 32)


def test_lambda_plus_out_of_range():
    with pytest.raises(ValueError):
        concealing_closed_form(3, 0)


@pytest.mark.parametrize("ell", range(16))
def test_binomial_identity(ell):
    assert central_identity_holds(ell)


def test_bounds_values():
    lo, hi = concealing_bounds(1)
    assert lo == pytest.approx(0.25)
    assert hi == pytest.approx(0.28209479, abs=1e-8)
    lo, hi = concealing_bounds(2)
    assert (lo, hi) == (pytest.approx(0.1767767, abs=1e-7), pytest.approx(0.1994711, abs=1e-7))


def test_bounds_reject_zero():
    with pytest.raises(ValueError):
        concealing_bounds(0)


def test_boundary_at_ell_one():
    r = concealing_closed_form(3)
    assert r.advantage == pytest.approx(r.lower_bound)
    assert not r.inside_bounds


@pytest.mark.parametrize("ell", range(2, 13))
def test_strictly_inside_bounds(ell):
    assert concealing_closed_form(2 * ell + 1).inside_bounds


def test_advantage_decreases():
    adv = [concealing_closed_form(2 * ell + 1).advantage for ell in range(20)]
    assert all(a > b for a, b in zip(adv, adv[1:]))
    assert adv[-1] < 0.07


def test_trace_distance_by_counting_matches_helstrom_route():
    for n in (1, 3, 5, 9):
        assert (2 + decoy_trace_distance(n)) / 4 == concealing_closed_form(n).exact


def test_majority_vote_examples():
    assert majority_vote_pbc(1, 0.7) == pytest.approx(0.7)
    assert majority_vote_pbc(3, 0.75) == pytest.approx(0.84375)
    assert majority_vote_pbc(5, 0.5) == pytest.approx(0.5)
    assert majority_vote_pbc(1, 1.0) == 1.0


def test_majority_vote_even_m():
    with pytest.raises(ValueError):
        majority_vote_pbc(2, 0.7)


def test_majority_vote_exact_agrees_with_float():
    p = Fraction(11, 16)
    assert float(majority_vote_exact(5, p)) == pytest.approx(majority_vote_pbc(5, float(p)))


def test_majority_vote_tends_to_half():
    vals = [majority_vote_pbc(5, 0.5 + d) - 0.5 for d in (0.1, 0.01, 0.001)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_miss_probability():
    assert miss_probability(10, 3) == Fraction(729, 1000)
    assert miss_probability(1, 1) == 0


def test_guess_one_position():
    assert guess_one_position(3) == pytest.approx(2 / 3)
    assert guess_one_position(1) == 1.0


def test_large_n_uses_integer_binomials():
    r = concealing_closed_form(201)
    assert r.exact == Fraction(1, 2) + Fraction(math.comb(200, 100), 2**201)
