"""Entanglement (EPR) cheating machinery for purified commitments.

Adam commits to ``b`` by preparing ``sum_i sqrt(p_i) |e_i>|phi_i>`` and
keeping the first factor. Measuring a rotated basis on his side lets him
steer Babe's share to unitary mixtures of the committed states; the functions
here build those commitments, find the overlap-optimal steering unitary from
the cross-Gram matrix, and evaluate how often the steered states pass Babe's
check for the other bit.

Index convention: with ``V`` a unitary of the ensemble size, the steered
(unnormalized) states are ``t_i = sum_j sqrt(p_j) V[j, i] phi_j`` and the
cheating probability is ``sum_i |<phi'_i|t_i>|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qcore import (
    DensityOp,
    Ket,
    MeasurementBasis,
    QuantumError,
    VALIDATION_TOL,
    complex_to_json,
    fidelity,
    haar_ket,
    haar_unitary,
    is_unitary,
    ket_from_json,
    ket_to_json,
    partial_trace,
    polar_unitary,
    tensor,
    trace_norm,
)

ORACLE_MAX_SIZE = 6


class InvariantError(ValueError):
    """An input violates a named invariant (probabilities, unitarity, ...)."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probabilities and states ``{p_i, |phi_i>}`` on Babe's space."""

    probs: np.ndarray
    states: tuple[Ket, ...]

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        states = tuple(self.states)
        if probs.size != len(states) or not states:
            raise InvariantError("ensemble.shape", "need one probability per state")
        if np.any(probs < 0) or np.any(probs > 1):
            raise InvariantError("ensemble.prob_range", "probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > VALIDATION_TOL:
            raise InvariantError("ensemble.prob_sum", f"probabilities sum to {float(probs.sum())!r}, not 1")
        dims = states[0].dims
        if any(s.dims != dims for s in states):
            raise InvariantError("ensemble.dims", "all states must share the same dims")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)

    @classmethod
    def of(cls, entries: Sequence[tuple[float, Ket]]) -> "Ensemble":
        return cls(np.array([p for p, _ in entries]), tuple(k for _, k in entries))

    @classmethod
    def uniform(cls, states: Sequence[Ket]) -> "Ensemble":
        return cls(np.full(len(states), 1.0 / len(states)), tuple(states))

    def __len__(self):
        return len(self.states)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.states[0].dims

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def state_matrix(self) -> np.ndarray:
        """States as columns."""
        return np.column_stack([s.amplitudes for s in self.states])

    def weighted_matrix(self, size: int | None = None) -> np.ndarray:
        """Columns ``sqrt(p_i) phi_i``, zero-padded to ``size`` columns."""
        size = len(self) if size is None else size
        out = np.zeros((self.dim, size), dtype=complex)
        out[:, : len(self)] = self.state_matrix() * np.sqrt(self.probs)
        return out

    def density(self) -> DensityOp:
        b = self.weighted_matrix()
        return DensityOp(b @ b.conj().T, self.dims)


@dataclass(frozen=True, eq=False)
class PurifiedCommitment:
    """``|Phi> = sum_i sqrt(p_i) |e_i>|phi_i>`` on Adam's space times Babe's."""

    phi: Ket
    keep_basis: MeasurementBasis
    ensemble: Ensemble

    def babe_state(self) -> DensityOp:
        return partial_trace(self.phi, range(1, len(self.phi.dims)))


@dataclass(frozen=True, eq=False)
class CheatSolution:
    lambda_matrix: np.ndarray
    abs_lambda: np.ndarray
    cheat_unitary: np.ndarray
    steering: np.ndarray
    orientation: str
    fidelity: float
    p_cheat: float
    p_diag_formula: float
    tilde_probs: np.ndarray
    tilde_states: tuple[Ket | None, ...]


@dataclass(frozen=True, eq=False)
class KrausFreedomResult:
    equal: bool
    mixing: np.ndarray | None
    choi_distance: float
    residual: float | None = None


def _pad_size(e0: Ensemble, e1: Ensemble) -> int:
    if e0.dims != e1.dims:
        raise QuantumError(f"ensembles live on different spaces {e0.dims} vs {e1.dims}")
    return max(len(e0), len(e1))


def commit_purify(ensemble: Ensemble, keep_basis: MeasurementBasis | None = None) -> PurifiedCommitment:
    """Entangled commitment ``sum_i sqrt(p_i) |e_i>|phi_i>`` (Adam's factor first)."""
    if keep_basis is None:
        keep_basis = MeasurementBasis.computational(len(ensemble))
    if len(keep_basis.vectors) < len(ensemble):
        raise InvariantError("commit.basis_size", "Adam's basis is smaller than the ensemble")
    amps = sum(
        math.sqrt(p) * np.kron(e.amplitudes, s.amplitudes)
        for p, e, s in zip(ensemble.probs, keep_basis.vectors, ensemble.states)
    )
    phi = Ket(amps, (keep_basis.dim,) + ensemble.dims)
    return PurifiedCommitment(phi, keep_basis, ensemble)


def collapse(commitment: PurifiedCommitment) -> list[tuple[float, Ket | None]]:
    """Babe's conditional states after Adam measures his kept basis."""
    dim_a = commitment.keep_basis.dim
    mat = commitment.phi.amplitudes.reshape(dim_a, -1)
    out = []
    for e in commitment.keep_basis.vectors:
        v = e.amplitudes.conj() @ mat
        p = float(np.vdot(v, v).real)
        out.append((p, Ket.normalized(v, commitment.ensemble.dims) if p > 1e-15 else None))
    return out


def build_lambda(e0: Ensemble, e1: Ensemble) -> np.ndarray:
    """Cross-Gram matrix ``L[i, j] = sqrt(p'_i p_j) <phi'_i|phi_j>`` (rows from ``e1``)."""
    size = _pad_size(e0, e1)
    return e1.weighted_matrix(size).conj().T @ e0.weighted_matrix(size)


def steered_states(e0: Ensemble, v: np.ndarray) -> np.ndarray:
    """Unnormalized steered states ``t_i`` as columns."""
    return e0.weighted_matrix(v.shape[0]) @ v


def cheat_success(e0: Ensemble, e1: Ensemble, v: np.ndarray) -> float:
    """Probability that the states steered by ``v`` pass Babe's checks for ``e1``."""
    size = _pad_size(e0, e1)
    v = np.asarray(v, dtype=complex)
    if v.shape != (size, size):
        raise QuantumError(f"steering matrix must be {size}x{size}, got {v.shape}")
    if not is_unitary(v, 1e-6):
        raise InvariantError("cheat.unitary", "steering matrix is not unitary")
    t = steered_states(e0, v)
    targets = np.zeros((e0.dim, size), dtype=complex)
    targets[:, : len(e1)] = e1.state_matrix()
    overlaps = np.einsum("ki,ki->i", targets.conj(), t)
    return float(np.sum(np.abs(overlaps) ** 2))


def _orientations(u: np.ndarray) -> dict[str, np.ndarray]:
    return {"U": u, "U^T": u.T, "U*": u.conj(), "U^dagger": u.conj().T}


def optimal_overlap_cheat(e0: Ensemble, e1: Ensemble) -> CheatSolution:
    """Overlap-optimal EPR cheat from the polar decomposition of the cross-Gram matrix."""
    lam = build_lambda(e0, e1)
    u, abs_lam = polar_unitary(lam)
    if np.max(np.abs(lam @ u - abs_lam)) > VALIDATION_TOL:
        raise ArithmeticError("polar factor does not satisfy L U = |L|")
    # The unitary as written acts on Adam's basis; which transpose/conjugate of
    # it plays the role of the steering matrix depends on index conventions,
    # so keep whichever orientation gives the best cheating probability.
    scores = {name: cheat_success(e0, e1, cand) for name, cand in _orientations(u).items()}
    orientation = max(scores, key=lambda k: (scores[k], k == "U"))
    steering = _orientations(u)[orientation]
    t = steered_states(e0, steering)
    tilde_probs = np.einsum("ki,ki->i", t.conj(), t).real
    tilde_states = tuple(
        Ket.normalized(t[:, i], e0.dims) if tilde_probs[i] > 1e-15 else None for i in range(t.shape[1])
    )
    return CheatSolution(
        lambda_matrix=lam,
        abs_lambda=abs_lam,
        cheat_unitary=u,
        steering=steering,
        orientation=orientation,
        fidelity=float(np.trace(abs_lam).real),
        p_cheat=scores[orientation],
        p_diag_formula=float(np.sum(np.diag(abs_lam).real ** 2)),
        tilde_probs=tilde_probs,
        tilde_states=tilde_states,
    )


def helstrom(rho0: DensityOp, rho1: DensityOp) -> float:
    """Optimal probability of telling two equiprobable states apart."""
    if rho0.dim != rho1.dim:
        raise QuantumError(f"dimension mismatch {rho0.dim} vs {rho1.dim}")
    return 0.25 * (2.0 + trace_norm(rho0.matrix - rho1.matrix))


# ---------------------------------------------------------------------------
# unitary search (independent oracle, desk scale)


def _hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def _expi(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def search_unitary(
    objective: Callable[[np.ndarray], float],
    dim: int,
    budget: int,
    rng: np.random.Generator,
    restarts: int = 4,
    start: Sequence[np.ndarray] = (),
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` over ``dim x dim`` unitaries by random-restart hill climbing.

    Each step multiplies the incumbent by ``exp(i eps H)`` for a random Hermitian
    ``H``; the step size grows on success and shrinks on failure.
    """
    starts = list(start) + [haar_unitary(dim, rng) for _ in range(restarts)]
    per_start = max(1, budget // len(starts))
    best_v, best_p = None, -math.inf
    for v in starts:
        p = objective(v)
        eps = 0.5
        for _ in range(per_start):
            cand = v @ _expi(eps * _hermitian(dim, rng) / math.sqrt(dim))
            q = objective(cand)
            if q > p:
                v, p = cand, q
                eps = min(1.0, eps * 1.5)
            else:
                eps = max(1e-4, eps * 0.9)
        if p > best_p:
            best_v, best_p = v, p
    return best_v, best_p


def brute_force_cheat_oracle(
    e0: Ensemble, e1: Ensemble, budget: int, rng: np.random.Generator, restarts: int = 4
) -> tuple[np.ndarray, float]:
    """Best cheating probability found by direct search over steering unitaries."""
    size = _pad_size(e0, e1)
    if size > ORACLE_MAX_SIZE:
        raise QuantumError(f"oracle is limited to ensembles of size <= {ORACLE_MAX_SIZE}")
    return search_unitary(lambda v: cheat_success(e0, e1, v), size, budget, rng, restarts=restarts, start=[np.eye(size)])


# ---------------------------------------------------------------------------
# Schmidt switching for equal reduced states


def schmidt_switch(phi0: PurifiedCommitment | Ket, phi1: PurifiedCommitment | Ket) -> np.ndarray:
    """Unitary on Adam's factor taking ``phi0`` to ``phi1`` when Babe's reduced states agree."""
    k0 = phi0.phi if isinstance(phi0, PurifiedCommitment) else phi0
    k1 = phi1.phi if isinstance(phi1, PurifiedCommitment) else phi1
    if k0.dims != k1.dims:
        raise QuantumError("purifications live on different spaces")
    dim_a = k0.dims[0]
    x0 = k0.amplitudes.reshape(dim_a, -1)
    x1 = k1.amplitudes.reshape(dim_a, -1)
    rho0, rho1 = x0.T @ x0.conj(), x1.T @ x1.conj()
    if np.max(np.abs(rho0 - rho1)) > VALIDATION_TOL:
        raise InvariantError("schmidt.reduced_equal", "Babe's reduced states differ")
    # <Phi1|(U x I)|Phi0> = tr(U x0 x1^dagger); its maximizer aligns degenerate
    # Schmidt blocks automatically.
    u, _ = polar_unitary(x0 @ x1.conj().T)
    return u


# ---------------------------------------------------------------------------
# operator (CP-map) freedom


def _kraus_columns(ops: Sequence[tuple[float, np.ndarray]], size: int, support: np.ndarray | None) -> np.ndarray:
    cols = []
    for p, u in ops:
        k = np.asarray(u, dtype=complex)
        if support is not None:
            k = k @ support
        cols.append(math.sqrt(p) * k.reshape(-1))
    mat = np.zeros((cols[0].size, size), dtype=complex)
    mat[:, : len(cols)] = np.column_stack(cols)
    return mat


def _check_ops(ops) -> int:
    if not ops:
        raise InvariantError("kraus.empty", "operation list is empty")
    probs = np.array([p for p, _ in ops], dtype=float)
    if abs(probs.sum() - 1.0) > VALIDATION_TOL or np.any(probs < 0):
        raise InvariantError("kraus.prob_sum", f"probabilities sum to {probs.sum()!r}")
    dim = np.asarray(ops[0][1]).shape[0]
    for _, u in ops:
        if np.asarray(u).shape != (dim, dim) or not is_unitary(u, 1e-9):
            raise InvariantError("kraus.unitary", "operations must be unitaries of equal size")
    return dim


def kraus_freedom(
    ops0: Sequence[tuple[float, np.ndarray]],
    ops1: Sequence[tuple[float, np.ndarray]],
    support: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    checks: int = 50,
) -> KrausFreedomResult:
    """Decide whether two random-unitary channels coincide and find their mixing unitary.

    Equality is tested on process (Choi-style) matrices. When equal, the
    unitary ``V`` with ``sqrt(p'_i) U1_i = sum_j sqrt(p_j) V[j, i] U0_j`` is found
    by orthogonal Procrustes and checked on ``checks`` random input states.
    ``support`` (orthonormal columns) restricts both channels to a subspace.
    """
    dim = _check_ops(ops0)
    if _check_ops(ops1) != dim:
        raise QuantumError("operations act on different spaces")
    size = max(len(ops0), len(ops1))
    a0 = _kraus_columns(ops0, size, support)
    a1 = _kraus_columns(ops1, size, support)
    choi0, choi1 = a0 @ a0.conj().T, a1 @ a1.conj().T
    in_dim = dim if support is None else support.shape[1]
    distance = float(np.max(np.abs(choi0 - choi1)))
    if distance > VALIDATION_TOL * dim * in_dim:
        return KrausFreedomResult(False, None, distance)
    v, _ = polar_unitary(a1.conj().T @ a0)
    residual = float(np.linalg.norm(a0 @ v - a1))
    if residual > 1e-7:
        return KrausFreedomResult(False, None, distance, residual)
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(checks):
        psi = haar_ket(in_dim, rng).amplitudes
        lhs = a1.reshape(dim, in_dim, size).transpose(2, 0, 1) @ psi
        rhs = (a0.reshape(dim, in_dim, size).transpose(2, 0, 1) @ psi).T @ v
        if np.max(np.abs(lhs.T - rhs)) > VALIDATION_TOL:
            raise ArithmeticError("mixing unitary fails the state relation")
    return KrausFreedomResult(True, v, distance, residual)


def channel_output(ops: Sequence[tuple[float, np.ndarray]], state: Ket, extra_dim: int = 1) -> DensityOp:
    """``sum_i p_i (U_i x I) |s><s| (U_i x I)^dagger``, identity on a trailing factor of ``extra_dim``."""
    rho = np.zeros((state.dim, state.dim), dtype=complex)
    for p, u in ops:
        w = np.kron(np.asarray(u), np.eye(extra_dim)) @ state.amplitudes
        rho += p * np.outer(w, w.conj())
    return DensityOp(rho, state.dims)


def anonymous_ensembles(ops0, ops1, psi: Ket, extra_dim: int = 1) -> tuple[Ensemble, Ensemble]:
    """Committed and target ensembles generated from Babe's anonymous state."""

    def make(ops):
        return Ensemble(
            np.array([p for p, _ in ops]),
            tuple(Ket(np.kron(np.asarray(u), np.eye(extra_dim)) @ psi.amplitudes, psi.dims) for _, u in ops),
        )

    return make(ops0), make(ops1)


def uniform_concealing_scan(
    ops0,
    ops1,
    samples: int,
    rng: np.random.Generator,
    entangled: bool = False,
    candidates: Sequence[Ket] = (),
    refine: int = 0,
) -> tuple[float, Ket]:
    """Worst trace distance between the two committed states over Babe's inputs.

    Inputs are Haar samples (on Babe's space, or on Babe's space times an
    equal-sized ancilla she keeps when ``entangled``) plus explicit
    ``candidates``; ``refine`` hill-climbing steps polish the worst sample.
    """
    dim = _check_ops(ops0)
    extra = dim if entangled else 1
    dims = (dim, extra) if entangled else (dim,)

    def distance(state: Ket) -> float:
        return trace_norm(channel_output(ops0, state, extra).matrix - channel_output(ops1, state, extra).matrix)

    inputs = list(candidates) + [haar_ket(dim * extra, rng, dims) for _ in range(samples)]
    scored = [(distance(s), s) for s in inputs]
    worst_d, worst = max(scored, key=lambda t: t[0])
    step = 0.3
    for _ in range(refine):
        z = rng.standard_normal(dim * extra) + 1j * rng.standard_normal(dim * extra)
        cand = Ket.normalized(worst.amplitudes + step * z / np.linalg.norm(z), dims)
        d = distance(cand)
        if d > worst_d:
            worst_d, worst = d, cand
        else:
            step = max(1e-4, step * 0.95)
    return worst_d, worst


def fixed_cheat_scan(
    ops0,
    ops1,
    candidate_v: np.ndarray,
    samples: int,
    rng: np.random.Generator,
    psi_set: Sequence[Ket] | None = None,
) -> tuple[float, float]:
    """Minimum and mean cheating probability of one fixed steering unitary over Babe's inputs.

    With ``psi_set`` every listed input is evaluated; otherwise ``samples``
    Haar-random inputs are drawn.
    """
    dim = _check_ops(ops0)
    if not is_unitary(candidate_v, 1e-6):
        raise InvariantError("cheat.unitary", "candidate steering matrix is not unitary")
    inputs = list(psi_set) if psi_set is not None else [haar_ket(dim, rng) for _ in range(samples)]
    values = [cheat_success(*anonymous_ensembles(ops0, ops1, psi), candidate_v) for psi in inputs]
    return float(min(values)), float(np.mean(values))


# ---------------------------------------------------------------------------
# fixtures


def permutation_fixture(dim: int = 2) -> tuple[Ensemble, Ensemble]:
    """Equal reduced states: uniform over a basis, listed in shifted order."""
    basis = [Ket.basis(i, dim) for i in range(dim)]
    return Ensemble.uniform(basis), Ensemble.uniform(basis[1:] + basis[:1])


def distance_family(delta: float) -> tuple[Ensemble, Ensemble]:
    """Qubit ensembles whose averaged states sit at trace distance ``delta``.

    Uses non-orthogonal pure states so the cheat is not a pure relabeling.
    """
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    plus = Ket(np.array([1, 1]) / math.sqrt(2))
    minus = Ket(np.array([1, -1]) / math.sqrt(2))
    zero, one = Ket.basis(0, 2), Ket.basis(1, 2)
    e0 = Ensemble.uniform([zero, one])
    # rho1 = diag(1/2 + delta/2, 1/2 - delta/2) written in the +/- and 0/1 states
    q = delta
    e1 = Ensemble(np.array([q, (1 - q) / 2, (1 - q) / 2]), (zero, plus, minus))
    return e0, e1


def random_ensemble(size: int, dim: int, rng: np.random.Generator) -> Ensemble:
    probs = rng.dirichlet(np.ones(size))
    probs = probs / probs.sum()
    return Ensemble(probs, tuple(haar_ket(dim, rng) for _ in range(size)))


@dataclass
class AppendixBFixture:
    psi: Ket
    ops0: list
    ops1: list
    support: np.ndarray
    checks: dict = field(default_factory=dict)


def appendix_b_fixture() -> AppendixBFixture:
    """Two-qubit example where a fixed entangled input makes the bits look identical.

    Babe's input is ``(|a a'>|f1> + |a' a>|f2>)/sqrt(2)``; the b = 0 operations
    are the identity and the qubit swap, the b = 1 operations a flip of both
    qubits and flip-after-swap. The returned checks are (a) the two committed
    states coincide on that input, (b) Adam then cheats perfectly with a fixed
    mixing unitary, (c) the input ``|a a>`` lets Babe read the bit perfectly.
    """
    a, a_p = Ket.basis(0, 2), Ket.basis(1, 2)
    f1, f2 = Ket.basis(0, 2), Ket.basis(1, 2)
    psi = Ket.normalized(tensor([a, a_p, f1]).amplitudes + tensor([a_p, a, f2]).amplitudes, (2, 2, 2))
    swap = np.eye(4)[[0, 2, 1, 3]]
    flip = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]]).astype(complex)
    ops0 = [(0.5, np.eye(4, dtype=complex)), (0.5, swap.astype(complex))]
    ops1 = [(0.5, flip), (0.5, flip @ swap)]
    support = np.column_stack([tensor([a, a_p]).amplitudes, tensor([a_p, a]).amplitudes])

    rho0 = channel_output(ops0, psi, 2)
    rho1 = channel_output(ops1, psi, 2)
    dist_bc = trace_norm(rho0.matrix - rho1.matrix)

    restricted = kraus_freedom(ops0, ops1, support=support)
    e0, e1 = anonymous_ensembles(ops0, ops1, psi, 2)
    p_fixed = cheat_success(e0, e1, restricted.mixing) if restricted.equal else 0.0
    solution = optimal_overlap_cheat(e0, e1)

    aa = tensor([a, a])
    babe = helstrom(channel_output(ops0, aa), channel_output(ops1, aa))
    full = kraus_freedom(ops0, ops1)

    fixture = AppendixBFixture(psi, ops0, ops1, support)
    fixture.checks = {
        "bc_trace_distance": dist_bc,
        "restricted_maps_equal": restricted.equal,
        "adam_cheat_fixed_mixing": p_fixed,
        "adam_cheat_overlap_optimal": solution.p_cheat,
        "babe_helstrom_on_aa": babe,
        "full_maps_equal": full.equal,
    }
    return fixture


# ---------------------------------------------------------------------------
# serialization


def ensemble_to_json(e: Ensemble) -> dict:
    return {"probs": [float(p) for p in e.probs], "states": [ket_to_json(k) for k in e.states]}


def ensemble_from_json(data: dict) -> Ensemble:
    if not isinstance(data, dict) or set(data) != {"probs", "states"}:
        raise ValueError("an ensemble needs exactly the fields 'probs' and 'states'")
    states = []
    for i, entry in enumerate(data["states"]):
        try:
            states.append(ket_from_json(entry))
        except QuantumError as exc:
            raise InvariantError("ensemble.state_norm", f"state {i}: {exc}") from None
    return Ensemble(np.asarray(data["probs"], dtype=float), tuple(states))


def load_ensemble_pair(data: dict) -> tuple[Ensemble, Ensemble]:
    extra = set(data) - {"ensemble0", "ensemble1", "seed", "note"}
    if extra or "ensemble0" not in data or "ensemble1" not in data:
        raise ValueError("expected fields 'ensemble0' and 'ensemble1'")
    return ensemble_from_json(data["ensemble0"]), ensemble_from_json(data["ensemble1"])


def _rounded(x, digits: int):
    if isinstance(x, float):
        return round(x, digits) + 0.0 if math.isfinite(x) else x
    if isinstance(x, list):
        return [_rounded(v, digits) for v in x]
    if isinstance(x, dict):
        return {k: _rounded(v, digits) for k, v in x.items()}
    return x


def cheat_report(e0: Ensemble, e1: Ensemble, digits: int = 12) -> dict:
    """Numbers a cheat analysis reports, rounded to ``digits`` decimal places.

    Only basis-independent quantities are included, so the report is stable
    across linear algebra backends.
    """
    sol = optimal_overlap_cheat(e0, e1)
    f_direct = fidelity(e0.density(), e1.density())
    overlap = abs(np.trace(sol.lambda_matrix @ sol.cheat_unitary))
    report = {
        "fidelity": sol.fidelity,
        "fidelity_direct": f_direct,
        "trace_overlap": float(overlap),
        "p_cheat": sol.p_cheat,
        "p_diag_formula": sol.p_diag_formula,
        "fidelity_squared": sol.fidelity**2,
        "bound_holds": bool(sol.p_cheat >= sol.fidelity**2 - 1e-9),
        "helstrom": helstrom(e0.density(), e1.density()),
        "lambda": complex_to_json(sol.lambda_matrix),
        "abs_lambda": complex_to_json(sol.abs_lambda),
        "orientation": sol.orientation,
        "sizes": [len(e0), len(e1)],
        "dim": e0.dim,
    }
    return _rounded(report, digits)
