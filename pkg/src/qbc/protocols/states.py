"""Explicit density operators for the decoy protocols (desk scale only)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..qcore import (
    DensityOp,
    GreatCircle,
    Ket,
    QuantumError,
    circle_state,
    partial_trace,
    permute_subsystems,
    rotation,
    trace_norm,
)
from .closed_form import miss_probability

MAX_QUBITS = 12
_HALF_I = np.eye(2, dtype=complex) / 2


@dataclass
class InequalityRecord:
    lhs: float
    rhs: float
    detail: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


@functools.lru_cache(maxsize=32)
def _frame(axis: tuple, phase_origin: float):
    circle = GreatCircle(axis, phase_origin)
    ref = circle_state(circle, 0.0).amplitudes
    u1 = rotation(circle, math.pi)
    out = (ref, u1 @ ref, u1, np.eye(2, dtype=complex))
    for arr in out:
        arr.setflags(write=False)
    return out


def circle_frame(circle: GreatCircle) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reference state, its half-turn partner and the half-turn, cached per circle.

    ``R(a)|ref> = cos(a/2)|ref> + sin(a/2) R(pi)|ref>``, so any circle state is a
    real combination of the first two.
    """
    ref, partner, u1, _ = _frame(circle.axis, circle.phase_origin)
    return ref, partner, u1


def on_circle(circle: GreatCircle, angle: float) -> np.ndarray:
    ref, partner, _, _ = _frame(circle.axis, circle.phase_origin)
    return math.cos(angle / 2) * ref + math.sin(angle / 2) * partner


def modulation(circle: GreatCircle, bit: int) -> np.ndarray:
    """Identity for bit 0, the half-turn on the circle for bit 1."""
    _, _, u1, eye = _frame(circle.axis, circle.phase_origin)
    return eye if bit == 0 else u1


def _cap(qubits: int):
    if qubits > MAX_QUBITS:
        raise QuantumError(f"{qubits} qubits exceeds the explicit-matrix cap of {MAX_QUBITS}")


def _mixed(k: int) -> np.ndarray:
    return np.eye(2**k, dtype=complex) / 2**k


def decoy_mixture(n: int, sigma: np.ndarray) -> np.ndarray:
    """``(1/n) sum_i I/2 x ... x sigma (slot i) x ... x I/2``."""
    _cap(n)
    total = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        total += np.kron(np.kron(_mixed(i), sigma), _mixed(n - i - 1))
    return total / n


def qbcp3m_rho(n: int, psi: Ket | DensityOp, bit: int, circle: GreatCircle | None = None) -> DensityOp:
    """Babe's state for the single-qubit decoy protocol when she sent ``psi``."""
    circle = circle or GreatCircle.standard()
    sigma = psi.density().matrix if isinstance(psi, Ket) else psi.matrix
    u = modulation(circle, bit)
    return DensityOp(decoy_mixture(n, u @ sigma @ u.conj().T), (2,) * n)


def placed_with_ancilla(n: int, slot: int, pair: np.ndarray) -> np.ndarray:
    """``n`` positions plus Babe's ancilla (last); ``pair`` on (slot, ancilla), I/2 elsewhere."""
    _cap(n + 1)
    mat = np.kron(pair, _mixed(n - 1))
    # current factor order: [slot, ancilla, the other n - 1 positions]
    others = iter(range(2, n + 1))
    order = [0 if p == slot else next(others) for p in range(n)] + [1]
    return permute_subsystems(mat, (2,) * (n + 1), order)


def _modulated_pair(pair: DensityOp, circle: GreatCircle, bit: int) -> np.ndarray:
    u = np.kron(modulation(circle, bit), np.eye(2))
    return u @ pair.matrix @ u.conj().T


def mismatch_bound_sequence(n: int, pair: DensityOp, circle: GreatCircle | None = None, attach: int = 0) -> InequalityRecord:
    """Triangle bound when Babe entangles her qubit with a kept ancilla.

    Checks ``n ||rho0 - rho1|| <= 2 + ||rho_bar0 - rho_bar1||`` where ``rho_bar``
    is the sum of the terms in which the modulated qubit is not at ``attach``.
    """
    circle = circle or GreatCircle.standard()
    if pair.dims != (2, 2):
        raise QuantumError("pair must be a two-qubit state on (qubit, ancilla)")
    terms = [[placed_with_ancilla(n, i, _modulated_pair(pair, circle, b)) for i in range(n)] for b in (0, 1)]
    diff = sum(terms[0]) - sum(terms[1])
    diff_bar = sum(terms[0][i] - terms[1][i] for i in range(n) if i != attach)
    match = terms[0][attach] - terms[1][attach]
    lhs = trace_norm(diff)
    rhs = 2.0 + (trace_norm(diff_bar) if n > 1 else 0.0)
    return InequalityRecord(lhs, rhs, {"matched_term": trace_norm(match), "n": n})


def mismatch_bound_segments(N: int, m: int, pairs: Sequence[DensityOp], circle: GreatCircle | None = None) -> InequalityRecord:
    """Bound for ``m`` segments of ``N`` positions, each with its own entangled ancilla.

    Ancilla ``j`` is attached to position 0 of segment ``j``; the no-match
    states ``rho_bar`` average over placements avoiding every attached position.
    """
    circle = circle or GreatCircle.standard()
    if len(pairs) != m:
        raise ValueError("need one two-qubit pair per segment")
    _cap(m * (N + 1))
    p_miss = miss_probability(N, m)

    def segment(j: int, b: int, slots) -> np.ndarray:
        mod = _modulated_pair(pairs[j], circle, b)
        return sum(placed_with_ancilla(N, k, mod) for k in slots) / len(slots)

    def joint(b: int, miss_only: bool) -> np.ndarray:
        slots = range(1, N) if miss_only else range(N)
        mat = np.ones((1, 1), dtype=complex)
        for j in range(m):
            mat = np.kron(mat, segment(j, b, list(slots)))
        # reorder [seg_1.., C_1, seg_2.., C_2, ...] -> [all positions, C_1..C_m]
        block = N + 1
        order = [j * block + k for j in range(m) for k in range(N)] + [j * block + N for j in range(m)]
        return permute_subsystems(mat, (2,) * (m * block), order)

    lhs = trace_norm(joint(0, False) - joint(1, False))
    bar = trace_norm(joint(0, True) - joint(1, True)) if N > 1 else 0.0
    rhs = float(1 - p_miss) * 2.0 + float(p_miss) * bar
    return InequalityRecord(lhs, rhs, {"p_miss": p_miss, "bar_distance": bar, "N": N, "m": m})


def product_distance_identity(rho: DensityOp, rho_p: DensityOp, sigma: DensityOp) -> tuple[float, float]:
    """``(||(rho - rho') x sigma||_1, ||rho - rho'||_1)``, equal for any density ``sigma``."""
    diff = rho.matrix - rho_p.matrix
    return trace_norm(np.kron(diff, sigma.matrix)), trace_norm(diff)


def circle_discretization(circle: GreatCircle, points: int) -> list[Ket]:
    return [circle_state(circle, 2 * math.pi * k / points) for k in range(points)]


def clone_criterion(strategy: Callable[[Ket], DensityOp], psi_set: Sequence[Ket], circle: GreatCircle | None = None) -> float:
    """Average of the first copy's fidelity with ``psi`` and the second's with the rotated ``psi``."""
    circle = circle or GreatCircle.standard()
    u1 = rotation(circle, math.pi)
    total_a = total_b = 0.0
    for psi in psi_set:
        out = strategy(psi)
        if not isinstance(out, DensityOp) or out.dims != (2, 2):
            raise QuantumError("cloning strategy must return a two-qubit density operator with dims (2, 2)")
        rho_a = partial_trace(out, [0]).matrix
        rho_b = partial_trace(out, [1]).matrix
        v = psi.amplitudes
        target = u1 @ v
        total_a += np.vdot(v, rho_a @ v).real
        total_b += np.vdot(target, rho_b @ target).real
    k = len(psi_set)
    return 0.5 * total_a / k + 0.5 * total_b / k


def isometry_output(w: np.ndarray, psi: Ket, anc_dim: int = 1) -> DensityOp:
    """Two-qubit output of an isometry ``C^2 -> anc x C^2 x C^2`` with the ancilla traced out."""
    out = (w @ psi.amplitudes).reshape(anc_dim, 4)
    return DensityOp(out.T @ out.conj(), (2, 2))


