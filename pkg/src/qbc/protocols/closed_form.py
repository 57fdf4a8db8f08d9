"""Closed-form concealing quantities for the decoy protocols.

All binomial arithmetic is exact (``math.comb`` and ``Fraction``); floats are
derived from the exact values only at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ConcealingReport:
    n: int
    ell: int
    lambda_plus: float
    closed_form: float
    exact: Fraction | None
    lower_bound: float | None
    upper_bound: float | None
    trace_distance: float

    @property
    def advantage(self) -> float:
        """Babe's optimal success minus one half."""
        return self.closed_form - 0.5

    @property
    def inside_bounds(self) -> bool | None:
        if self.lower_bound is None:
            return None
        return self.lower_bound < self.advantage < self.upper_bound


def _check_odd(n: int, name: str = "n") -> int:
    if int(n) != n or n < 1 or n % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {n}")
    return int(n)


def weighted_binomial_sum(n: int) -> int:
    """``sum_k C(n, k) |n - 2k|``."""
    return sum(math.comb(n, k) * abs(n - 2 * k) for k in range(n + 1))


def central_identity_holds(ell: int) -> bool:
    """``sum_k C(2l+1, k)|2l+1-2k| == 2(2l+1) C(2l, l)``, in integers."""
    n = 2 * ell + 1
    return weighted_binomial_sum(n) == 2 * n * math.comb(2 * ell, ell)


def decoy_trace_distance(n: int, lambda_plus=1) -> Fraction | float:
    """Trace distance between the two committed sequences, by direct counting."""
    value = Fraction(weighted_binomial_sum(n), n * 2 ** (n - 1))
    if isinstance(lambda_plus, (int, Fraction)):
        return Fraction(lambda_plus) * value
    return float(lambda_plus) * float(value)


def concealing_closed_form(n: int, lambda_plus=1) -> ConcealingReport:
    """Babe's optimal guessing probability for ``n = 2l + 1`` positions.

    ``P - 1/2 = lambda_plus * C(2l, l) / 2**n``. ``lambda_plus`` may be an int
    or ``Fraction`` for an exact result.
    """
    n = _check_odd(n)
    if not 0 < lambda_plus <= 1:
        raise ValueError("lambda_plus must lie in (0, 1]")
    ell = (n - 1) // 2
    if not central_identity_holds(ell):
        raise ArithmeticError(f"binomial identity failed at l={ell}")
    exact_input = isinstance(lambda_plus, (int, Fraction))
    advantage = Fraction(math.comb(2 * ell, ell), 2**n)
    if exact_input:
        exact = Fraction(1, 2) + Fraction(lambda_plus) * advantage
        value = float(exact)
    else:
        exact = None
        value = 0.5 + float(lambda_plus) * float(advantage)
    td = decoy_trace_distance(n, lambda_plus)
    # consistency with the Helstrom route: P = (2 + distance) / 4
    if abs((2 + float(td)) / 4 - value) > 1e-12:
        raise ArithmeticError("counting sum and closed form disagree")
    lower, upper = concealing_bounds(ell) if ell >= 1 else (None, None)
    return ConcealingReport(n, ell, float(lambda_plus), value, exact, lower, upper, float(td))


def concealing_bounds(ell: int) -> tuple[float, float]:
    """``(1/(4 sqrt l), 1/(2 sqrt(pi l)))`` around Babe's advantage."""
    if ell < 1:
        raise ValueError("bounds need l >= 1")
    return 1.0 / (4.0 * math.sqrt(ell)), 1.0 / (2.0 * math.sqrt(math.pi * ell))


def majority_vote_pbc(m: int, p: float) -> float:
    """Probability that a majority of ``m`` independent votes, each right with probability ``p``, is right."""
    m = _check_odd(m, "m")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return sum(math.comb(m, k) * (1 - p) ** k * p ** (m - k) for k in range((m - 1) // 2 + 1))


def majority_vote_exact(m: int, p: Fraction) -> Fraction:
    m = _check_odd(m, "m")
    p = Fraction(p)
    return sum((math.comb(m, k) * (1 - p) ** k * p ** (m - k) for k in range((m - 1) // 2 + 1)), Fraction(0))


def miss_probability(N: int, m: int) -> Fraction:
    """Probability that none of ``m`` attached ancillas lands on the right one of ``N`` positions."""
    if N < 1 or m < 0:
        raise ValueError("need N >= 1 and m >= 0")
    return (1 - Fraction(1, N)) ** m


def guess_one_position(n: int) -> float:
    """Success of guessing which position is real and deciding on it alone."""
    return 0.5 * (1 + 1 / n)
