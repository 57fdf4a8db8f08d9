"""Dense linear algebra for small finite-dimensional quantum systems.

States are plain numpy arrays wrapped in light frozen dataclasses that carry
the subsystem dimensions. Everything here is a pure function of its inputs;
random sampling takes an explicit stream (anything with a ``random()`` method
returning a float in [0, 1), e.g. ``numpy.random.Generator``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

VALIDATION_TOL = 1e-9
MAX_DIM = 2**12

# Eigenvalues of a PSD matrix below this (relative to the largest) are zeroed
# before square roots, otherwise roundoff of 1e-17 turns into 3e-9 errors.
_PSD_CUTOFF = 1e-14
_RANK_CUTOFF = 1e-10


class QuantumError(ValueError):
    """Raised for malformed states, operators or incompatible dimensions."""


def _as_dims(dims, size: int) -> tuple[int, ...]:
    if dims is None:
        return (size,)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != size:
        raise QuantumError(f"dims {dims} do not multiply to {size}")
    return dims


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", _as_dims(self.dims, amps.size))
        if amps.size > MAX_DIM:
            raise QuantumError(f"dimension {amps.size} exceeds cap {MAX_DIM}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > VALIDATION_TOL:
            raise QuantumError(f"ket norm {norm!r} differs from 1")

    @classmethod
    def normalized(cls, amplitudes, dims=None) -> "Ket":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise QuantumError("cannot normalize the zero vector")
        return cls(amps / norm, dims)

    @classmethod
    def basis(cls, index: int, dim: int) -> "Ket":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOp":
        return DensityOp(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def inner(self, other: "Ket") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def apply(self, unitary: np.ndarray) -> "Ket":
        return Ket.normalized(np.asarray(unitary) @ self.amplitudes, self.dims)


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise QuantumError(f"density matrix must be square, got {mat.shape}")
        if mat.shape[0] > MAX_DIM:
            raise QuantumError(f"dimension {mat.shape[0]} exceeds cap {MAX_DIM}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", _as_dims(self.dims, mat.shape[0]))
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > VALIDATION_TOL:
            raise QuantumError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > VALIDATION_TOL:
            raise QuantumError(f"density matrix trace {np.trace(mat).real!r} differs from 1")
        if np.linalg.eigvalsh(mat)[0] < -VALIDATION_TOL:
            raise QuantumError("density matrix has a negative eigenvalue")

    @classmethod
    def maximally_mixed(cls, dim: int = 2) -> "DensityOp":
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def conjugate_by(self, unitary: np.ndarray) -> "DensityOp":
        u = np.asarray(unitary)
        return DensityOp(u @ self.matrix @ u.conj().T, self.dims)


@dataclass(frozen=True, eq=False)
class GreatCircle:
    """A great circle on the qubit Bloch sphere.

    ``axis`` is the normal of the circle's plane; ``phase_origin`` rotates the
    reference point (angle 0) around that axis.
    """

    axis: tuple[float, float, float] = (0.0, 1.0, 0.0)
    phase_origin: float = 0.0

    def __post_init__(self):
        axis = tuple(float(x) for x in self.axis)
        if len(axis) != 3:
            raise QuantumError("circle axis must be a 3-vector")
        if abs(math.sqrt(sum(x * x for x in axis)) - 1.0) > 1e-12:
            raise QuantumError(f"circle axis {axis} is not a unit vector")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "phase_origin", float(self.phase_origin))

    @classmethod
    def standard(cls) -> "GreatCircle":
        """The real-amplitude circle through the four BB84 states."""
        return cls()

    def reference_vector(self) -> np.ndarray:
        n = np.array(self.axis)
        z = np.array([0.0, 0.0, 1.0])
        u = z - np.dot(z, n) * n
        if np.linalg.norm(u) < 1e-8:
            u = np.array([1.0, 0.0, 0.0]) - n[0] * n
        u /= np.linalg.norm(u)
        # Rodrigues rotation of u about n by phase_origin (u is orthogonal to n)
        a = self.phase_origin
        return math.cos(a) * u + math.sin(a) * np.cross(n, u)


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    vectors: tuple[Ket, ...]

    def __post_init__(self):
        vecs = tuple(self.vectors)
        if not vecs:
            raise QuantumError("measurement basis is empty")
        dim = vecs[0].dim
        if any(v.dim != dim for v in vecs):
            raise QuantumError("basis vectors have different dimensions")
        if len(vecs) > dim:
            raise QuantumError("more basis vectors than the dimension")
        gram = np.array([[a.inner(b) for b in vecs] for a in vecs])
        if np.max(np.abs(gram - np.eye(len(vecs)))) > VALIDATION_TOL:
            raise QuantumError("basis vectors are not orthonormal")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def computational(cls, dim: int) -> "MeasurementBasis":
        return cls(tuple(Ket.basis(i, dim) for i in range(dim)))

    @classmethod
    def from_matrix(cls, columns: np.ndarray) -> "MeasurementBasis":
        cols = np.asarray(columns)
        return cls(tuple(Ket(cols[:, k]) for k in range(cols.shape[1])))

    @property
    def dim(self) -> int:
        return self.vectors[0].dim

    def matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return np.column_stack([v.amplitudes for v in self.vectors])


# ---------------------------------------------------------------------------
# structure


def tensor(parts: Sequence[Ket] | Sequence[DensityOp]):
    """Kronecker product of kets or of density operators, dims concatenated."""
    parts = list(parts)
    if not parts:
        raise QuantumError("tensor of an empty list")
    if all(isinstance(p, Ket) for p in parts):
        amps = parts[0].amplitudes
        for p in parts[1:]:
            amps = np.kron(amps, p.amplitudes)
        return Ket(amps, sum((p.dims for p in parts), ()))
    if all(isinstance(p, DensityOp) for p in parts):
        mat = parts[0].matrix
        for p in parts[1:]:
            mat = np.kron(mat, p.matrix)
        return DensityOp(mat, sum((p.dims for p in parts), ()))
    raise QuantumError("tensor parts must be all kets or all density operators")


def partial_trace_matrix(matrix: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a raw (not necessarily unit-trace) operator."""
    dims = tuple(dims)
    keep = sorted(set(keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise QuantumError(f"keep indices {keep} out of range for {n} subsystems")
    drop = [k for k in range(n) if k not in keep]
    t = np.asarray(matrix).reshape(dims + dims)
    # contract dropped subsystems pairwise (ket index i with bra index n + i)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise QuantumError("too many subsystems")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for d in drop:
        col[d] = row[d]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    kept = math.prod(dims[k] for k in keep) if keep else 1
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(kept, kept)


def partial_trace(rho: DensityOp | Ket, keep: Iterable[int]) -> DensityOp:
    """Reduced density operator on the subsystems listed in ``keep``."""
    if isinstance(rho, Ket):
        rho = rho.density()
    keep = sorted(set(keep))
    mat = partial_trace_matrix(rho.matrix, rho.dims, keep)
    dims = tuple(rho.dims[k] for k in keep) or (1,)
    return DensityOp(mat, dims)


def permute_subsystems(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator: new factor k is old factor ``order[k]``."""
    dims = tuple(dims)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise QuantumError(f"{order} is not a permutation of {n} subsystems")
    t = np.asarray(matrix).reshape(dims + dims)
    t = t.transpose(list(order) + [n + k for k in order])
    size = math.prod(dims)
    return t.reshape(size, size)


# ---------------------------------------------------------------------------
# spectral tools


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix."""
    w, v = np.linalg.eigh(matrix)
    w = np.where(w > _PSD_CUTOFF * max(1.0, w[-1]), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def _square(op) -> np.ndarray:
    mat = op.matrix if isinstance(op, DensityOp) else np.asarray(op)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise QuantumError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def trace_norm(op) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(_square(op), compute_uv=False)))


def fidelity(rho0: DensityOp, rho1: DensityOp) -> float:
    """``tr sqrt(sqrt(rho0) rho1 sqrt(rho0))``, the square-root fidelity."""
    if rho0.dim != rho1.dim:
        raise QuantumError(f"dimension mismatch {rho0.dim} vs {rho1.dim}")
    s0 = psd_sqrt(rho0.matrix)
    inner = s0 @ rho1.matrix @ s0
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    w = np.where(w > _PSD_CUTOFF * max(1.0, w[-1]), w, 0.0)
    return float(min(1.0, np.sum(np.sqrt(w))))


def polar_unitary(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition ``L = |L| U^dagger`` with ``|L| = (L L^dagger)^(1/2)``.

    Returns ``(U, |L|)``; ``L @ U`` equals ``|L|`` and ``tr(L U)`` is the
    trace norm of ``L``, the maximum of ``|tr(L V)|`` over unitaries ``V``.
    For singular ``L`` the unitary is completed arbitrarily on the null space.
    """
    L = _square(L)
    w, s, xh = np.linalg.svd(L)
    s = np.where(s > _RANK_CUTOFF * max(s[0], 0.0), s, 0.0) if s.size else s
    abs_l = (w * s) @ w.conj().T
    abs_l = (abs_l + abs_l.conj().T) / 2
    unitary = xh.conj().T @ w.conj().T
    return unitary, abs_l


def is_unitary(u: np.ndarray, tol: float = 1e-6) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))) <= tol


def haar_ket(dim: int, rng: np.random.Generator, dims=None) -> Ket:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Ket.normalized(z, dims)


def haar_unitary(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitary (or a stack of ``size`` of them) via phase-fixed QR."""
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOp:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityOp(m / np.trace(m).real)


# ---------------------------------------------------------------------------
# measurement


def born_probabilities(state: Ket | DensityOp, basis: MeasurementBasis, subsystem: int | None = None) -> np.ndarray:
    """Outcome probabilities of a projective measurement, optionally on one subsystem."""
    if subsystem is None:
        if basis.dim != state.dim:
            raise QuantumError(f"basis dimension {basis.dim} does not match state dimension {state.dim}")
        if isinstance(state, Ket):
            probs = np.abs(basis.matrix().conj().T @ state.amplitudes) ** 2
        else:
            b = basis.matrix()
            probs = np.einsum("ik,ij,jk->k", b.conj(), state.matrix, b).real
    else:
        if not 0 <= subsystem < len(state.dims):
            raise QuantumError(f"no subsystem {subsystem} in dims {state.dims}")
        if basis.dim != state.dims[subsystem]:
            raise QuantumError("basis does not match the measured subsystem")
        reduced = partial_trace(state, [subsystem])
        return born_probabilities(reduced, basis)
    return np.clip(probs, 0.0, None)


def measure_sample(state: Ket | DensityOp, basis: MeasurementBasis, rng, subsystem: int | None = None) -> int:
    """Sample an outcome index with Born-rule probabilities.

    Incomplete bases get an extra implicit outcome ``len(basis.vectors)``
    for the orthogonal complement.
    """
    probs = born_probabilities(state, basis, subsystem)
    u = rng.random()
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    return len(probs) if acc < 1.0 - VALIDATION_TOL else len(probs) - 1


# ---------------------------------------------------------------------------
# great-circle geometry

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bloch_ket(vector) -> Ket:
    """Pure qubit state with the given Bloch vector."""
    x, y, z = (float(c) for c in vector)
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x)
    return Ket(np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)]))


def bloch_vector(state: Ket | DensityOp) -> np.ndarray:
    rho = state.density().matrix if isinstance(state, Ket) else state.matrix
    return np.array([np.trace(rho @ p).real for p in _PAULI])


def rotation(circle: GreatCircle, theta: float) -> np.ndarray:
    """``exp(-i theta n.sigma / 2)``: rotates Bloch vectors by ``theta`` about the circle axis."""
    n_sigma = sum(a * p for a, p in zip(circle.axis, _PAULI))
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * n_sigma


def rotate(circle: GreatCircle, theta: float, k: Ket) -> Ket:
    return Ket(rotation(circle, theta) @ k.amplitudes, k.dims)


def circle_state(circle: GreatCircle, angle: float) -> Ket:
    """State at Bloch angle ``angle`` along the circle, measured from its reference point.

    On the standard circle this is ``cos(a/2)|0> + sin(a/2)|1>``.
    """
    ref = bloch_ket(circle.reference_vector())
    return rotate(circle, angle, ref)


def bb84_states(circle: GreatCircle | None = None) -> list[Ket]:
    """Vertical, horizontal and the two diagonal states on the circle."""
    circle = circle or GreatCircle.standard()
    return [circle_state(circle, a) for a in (0.0, math.pi, math.pi / 2, 3 * math.pi / 2)]


# ---------------------------------------------------------------------------
# serialization: complex numbers as [re, im] pairs, matrices row-major


def complex_to_json(values) -> list:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [complex_to_json(v) for v in arr]


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise QuantumError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def ket_to_json(k: Ket) -> dict:
    return {"amplitudes": complex_to_json(k.amplitudes), "dims": list(k.dims)}


def ket_from_json(data) -> Ket:
    if isinstance(data, dict):
        return Ket(complex_from_json(data["amplitudes"]), data.get("dims"))
    return Ket(complex_from_json(data))


def density_to_json(rho: DensityOp) -> dict:
    return {"matrix": complex_to_json(rho.matrix), "dims": list(rho.dims)}


def density_from_json(data) -> DensityOp:
    return DensityOp(complex_from_json(data["matrix"]), data.get("dims"))
