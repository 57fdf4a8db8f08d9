"""Adam's and Babe's strategies for the decoy protocols.

Adam never sees Babe's anonymous qubit. A strategy only chooses an isometry
``W: C^2 -> C^anc x (C^2)^lanes`` that the protocol engine applies to each
anonymous qubit; the output qubits ("lanes") are placed at distinct positions
and the ancilla stays with Adam. At opening he measures the ancilla in its
computational basis and picks which lane to point at and which bit to announce.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..cheat import search_unitary
from ..qcore import GreatCircle, bb84_states
from .states import circle_discretization, clone_criterion, isometry_output, modulation, on_circle

_BB84_ANGLES = (0.0, math.pi, math.pi / 2, 3 * math.pi / 2)


@dataclass(frozen=True)
class QubitPlan:
    isometry: np.ndarray  # shape (anc_dim * 2**lanes, 2), ancilla index slowest
    anc_dim: int
    lanes: int


class AdamStrategy:
    name = "abstract"
    lanes = 1
    cheating = True

    def __init__(self, **params):
        if params:
            raise ValueError(f"{self.name} takes no parameters, got {sorted(params)}")

    def plan(self, bit: int, circle: GreatCircle, stream) -> QubitPlan:
        raise NotImplementedError

    def claim(self, target: int, anc_outcomes: Sequence[int | None], bit: int) -> tuple[int, int]:
        """Lane to reveal and bit to announce."""
        return target, target

    def params(self) -> dict:
        return {}


class Honest(AdamStrategy):
    name = "honest"
    cheating = False

    def plan(self, bit, circle, stream):
        return QubitPlan(modulation(circle, bit), 1, 1)

    def claim(self, target, anc_outcomes, bit):
        return 0, target


class MeasureResend(AdamStrategy):
    """Measure the anonymous qubit, resend the estimate and its rotated partner."""

    name = "measure_resend"
    lanes = 2

    def __init__(self, basis: str = "random"):
        if basis not in ("random", "fixed"):
            raise ValueError("basis must be 'random' or 'fixed'")
        self.basis = basis

    def params(self):
        return {"basis": self.basis}

    def plan(self, bit, circle, stream):
        offset = 0.0
        if self.basis == "random" and stream.integers(2):
            offset = math.pi / 2
        u1 = modulation(circle, 1)
        w = np.zeros((8, 2), dtype=complex)
        for k, angle in enumerate((offset, offset + math.pi)):
            beta = on_circle(circle, angle)
            out = np.kron(np.eye(2)[k], np.kron(beta, u1 @ beta))
            w += np.outer(out, beta.conj())
        return QubitPlan(w, 2, 2)


class EntangleDelay(AdamStrategy):
    """Keep an ancilla entangled with both modulations and decide later."""

    name = "entangle_delay"

    def __init__(self, lambda0: float = 1 / math.sqrt(2), mode: str = "target"):
        if not 0 <= lambda0 <= 1:
            raise ValueError("lambda0 must lie in [0, 1]")
        if mode not in ("target", "follow"):
            raise ValueError("mode must be 'target' or 'follow'")
        self.lambda0 = float(lambda0)
        self.mode = mode

    @property
    def lambda1(self) -> float:
        return math.sqrt(max(0.0, 1 - self.lambda0**2))

    def params(self):
        return {"lambda0": self.lambda0, "mode": self.mode}

    def plan(self, bit, circle, stream):
        e0, e1 = np.eye(2)
        w = self.lambda0 * np.kron(e0[:, None], modulation(circle, 0)) + self.lambda1 * np.kron(
            e1[:, None], modulation(circle, 1)
        )
        return QubitPlan(w, 2, 1)

    def claim(self, target, anc_outcomes, bit):
        if self.mode == "follow":
            return 0, int(anc_outcomes[0])
        return 0, target


class SplitPair(AdamStrategy):
    """Send the honest qubit at one position and a guessed state at another."""

    name = "split_pair"
    lanes = 2

    def __init__(self, guess: str = "circle"):
        if guess not in ("circle", "bb84"):
            raise ValueError("guess must be 'circle' or 'bb84'")
        self.guess = guess

    def params(self):
        return {"guess": self.guess}

    def plan(self, bit, circle, stream):
        if self.guess == "circle":
            g = on_circle(circle, stream.angle())
        else:
            g = on_circle(circle, _BB84_ANGLES[stream.integers(4)])
        g = g[:, None]
        u = modulation(circle, bit)
        w = np.kron(u, g) if bit == 0 else np.kron(g, u)
        return QubitPlan(w, 1, 2)


class NumericCloner(AdamStrategy):
    """Two-qubit cloner found by direct search over the cloning criterion."""

    name = "numeric_cloner"
    lanes = 2

    def __init__(self, state_set: str = "bb84", budget: int = 3000, seed: int = 7):
        if state_set not in ("bb84", "circle"):
            raise ValueError("state_set must be 'bb84' or 'circle'")
        self.state_set = state_set
        self.budget = int(budget)
        self.seed = int(seed)

    def params(self):
        return {"state_set": self.state_set, "budget": self.budget, "seed": self.seed}

    def isometry(self, circle: GreatCircle) -> tuple[np.ndarray, float]:
        return _search_cloner(circle.axis, circle.phase_origin, self.state_set, self.budget, self.seed)

    def plan(self, bit, circle, stream):
        w, _ = self.isometry(circle)
        return QubitPlan(w, 1, 2)


@functools.lru_cache(maxsize=16)
def _search_cloner(axis, phase_origin, state_set, budget, seed):
    circle = GreatCircle(axis, phase_origin)
    psi_set = bb84_states(circle) if state_set == "bb84" else circle_discretization(circle, 12)

    def criterion(u: np.ndarray) -> float:
        w = u[:, [0, 2]]  # input |x>|0>
        return clone_criterion(lambda psi: isometry_output(w, psi), psi_set, circle)

    u, value = search_unitary(criterion, 4, budget, np.random.default_rng(seed), restarts=3)
    w = u[:, [0, 2]]
    w.setflags(write=False)
    return w, value


ADAM_STRATEGIES = {
    cls.name: cls for cls in (Honest, MeasureResend, EntangleDelay, SplitPair, NumericCloner)
}


def make_adam(name: str, params: dict | None = None) -> AdamStrategy:
    try:
        cls = ADAM_STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown Adam strategy {name!r}; known: {sorted(ADAM_STRATEGIES)}") from None
    return _build(cls, params)


class BabeStrategy:
    """Babe always measures as the protocol prescribes; strategies differ in how she guesses the bit."""

    name = "majority_vote"

    def __init__(self, **params):
        if params:
            raise ValueError(f"{self.name} takes no parameters, got {sorted(params)}")

    def params(self) -> dict:
        return {}

    def guess(self, config, outcomes: Sequence[int], stream) -> int:
        kind = config.kind
        if kind.name == "QBC3m2":
            votes = [_majority(outcomes[j * config.N : (j + 1) * config.N]) for j in range(config.m)]
            return _majority(votes)
        if kind.name == "QBC3m1":
            m = config.m
            patterns = [tuple(outcomes[q * m : (q + 1) * m]) for q in range(config.N)]
            zeros = sum(p == (0,) * m for p in patterns)
            ones = sum(p == (1,) * m for p in patterns)
            if zeros == ones:
                return stream.integers(2)
            return int(ones > zeros)
        return _majority(outcomes)


class SinglePosition(BabeStrategy):
    """Guess which position is hers and decide on that outcome alone."""

    name = "single_position"

    def guess(self, config, outcomes, stream):
        return int(outcomes[stream.integers(len(outcomes))])


def _majority(bits: Sequence[int]) -> int:
    return int(2 * sum(bits) > len(bits))


BABE_STRATEGIES = {"majority_vote": BabeStrategy, "honest": BabeStrategy, "single_position": SinglePosition}


def make_babe(name: str, params: dict | None = None) -> BabeStrategy:
    try:
        cls = BABE_STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown Babe strategy {name!r}; known: {sorted(BABE_STRATEGIES)}") from None
    return _build(cls, params)


def _build(cls, params):
    try:
        return cls(**(params or {}))
    except TypeError as exc:
        raise ValueError(f"bad parameters for {cls.name}: {exc}") from None

