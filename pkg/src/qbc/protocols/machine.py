"""Commit / open / verify state machines for the decoy protocols.

Positions in transcripts are 1-based. Internally a returned sequence is a list
of groups: each group is a pure state over an optional Adam ancilla (first
axis) and one or more of the qubits sent to Babe. Decoys are single-qubit
groups. Groups are sampled independently, which is exact because they share
no entanglement.
"""

from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..qcore import GreatCircle
from ..streams import as_streams
from .states import circle_frame
from .strategies import AdamStrategy, BabeStrategy, Honest, make_adam, make_babe


class ProtocolError(RuntimeError):
    """Protocol phases were invoked out of order."""


class Kind(str, enum.Enum):
    QBCp3m = "QBCp3m"
    QBCp3u = "QBCp3u"
    QBC3m1 = "QBC3m1"
    QBC3m2 = "QBC3m2"


STATE_SETS = ("greatCircle", "BB84")
DECOY_SETS = ("uniformSphere", "greatCircle", "BB84", "twoOrthogonal")
_DEFAULTS = {
    Kind.QBCp3m: ("greatCircle", "greatCircle"),
    Kind.QBCp3u: ("BB84", "twoOrthogonal"),
    Kind.QBC3m1: ("BB84", "BB84"),
    Kind.QBC3m2: ("greatCircle", "greatCircle"),
}
_BB84_ANGLES = (0.0, math.pi, math.pi / 2, 3 * math.pi / 2)
MEASURE_BEFORE_OPEN = (Kind.QBCp3m, Kind.QBC3m1, Kind.QBC3m2)


@dataclass(frozen=True)
class ProtocolConfig:
    kind: Kind
    n: int = 3
    m: int = 1
    N: int = 5
    babe_state_set: str | None = None
    decoy_set: str | None = None
    circle: GreatCircle = field(default_factory=GreatCircle.standard)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        babe_default, decoy_default = _DEFAULTS[kind]
        if self.babe_state_set is None:
            object.__setattr__(self, "babe_state_set", babe_default)
        if self.decoy_set is None:
            object.__setattr__(self, "decoy_set", decoy_default)
        if self.babe_state_set not in STATE_SETS:
            raise ValueError(f"babe_state_set must be one of {STATE_SETS}")
        if self.decoy_set not in DECOY_SETS:
            raise ValueError(f"decoy_set must be one of {DECOY_SETS}")
        if kind in (Kind.QBCp3m, Kind.QBCp3u):
            if self.n < 1:
                raise ValueError("n must be at least 1")
            object.__setattr__(self, "m", 1)
        else:
            if self.m < 1 or self.N < 2:
                raise ValueError("need m >= 1 and N >= 2")
        if kind is Kind.QBCp3u and (self.babe_state_set, self.decoy_set) != ("BB84", "twoOrthogonal"):
            raise ValueError("QBCp3u uses BB84 anonymous states and two orthogonal decoy states")

    @property
    def positions(self) -> int:
        if self.kind in (Kind.QBCp3m, Kind.QBCp3u):
            return self.n
        return self.m * self.N

    def basis_index(self, pos: int) -> int:
        """Which anonymous qubit's basis Babe uses at ``pos`` (0-based)."""
        if self.kind is Kind.QBC3m1:
            return pos % self.m
        if self.kind is Kind.QBC3m2:
            return pos // self.N
        return 0

    def allocate(self, lanes: int, stream) -> list[list[int]]:
        """Distinct positions for each lane of each anonymous qubit: ``alloc[j][lane]``."""
        if self.kind is Kind.QBC3m1:
            modes = stream.sample_without_replacement(self.N, lanes)
            return [[q * self.m + j for q in modes] for j in range(self.m)]
        if self.kind is Kind.QBC3m2:
            return [[j * self.N + k for k in stream.sample_without_replacement(self.N, lanes)] for j in range(self.m)]
        return [stream.sample_without_replacement(self.n, lanes)]

    def claim_valid(self, positions: Sequence[int]) -> bool:
        if len(positions) != self.m:
            return False
        if any(not 0 <= p < self.positions for p in positions):
            return False
        if len(set(positions)) != len(positions):
            return False
        if any(self.basis_index(p) != j for j, p in enumerate(positions)):
            return False
        if self.kind is Kind.QBC3m1 and len({p // self.m for p in positions}) != 1:
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "m": self.m,
            "N": self.N,
            "babe_state_set": self.babe_state_set,
            "decoy_set": self.decoy_set,
            "circle": {"axis": list(self.circle.axis), "phase_origin": self.circle.phase_origin},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolConfig":
        allowed = {"kind", "n", "m", "N", "babe_state_set", "decoy_set", "circle"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown protocol config fields: {sorted(unknown)}")
        if "kind" not in data:
            raise ValueError("protocol config needs a 'kind'")
        kwargs = {k: v for k, v in data.items() if k != "circle"}
        for key in ("n", "m", "N"):
            if key in kwargs and (not isinstance(kwargs[key], int) or isinstance(kwargs[key], bool)):
                raise ValueError(f"{key} must be an integer")
        if "circle" in data:
            c = data["circle"]
            extra = set(c) - {"axis", "phase_origin"}
            if extra:
                raise ValueError(f"unknown circle fields: {sorted(extra)}")
            kwargs["circle"] = GreatCircle(tuple(c.get("axis", (0.0, 1.0, 0.0))), c.get("phase_origin", 0.0))
        return cls(**kwargs)

    def label(self) -> str:
        if self.kind in (Kind.QBCp3m, Kind.QBCp3u):
            return f"n={self.n}"
        return f"m={self.m};N={self.N}"


@dataclass
class Commitment:
    """Adam's private record of what he sent."""

    bit: int
    positions: list[list[int]]
    decoy_record: dict[int, Any]


@dataclass
class Transcript:
    messages: list[dict] = field(default_factory=list)
    phase: str | None = None
    verdict: bool | None = None
    private: dict = field(default_factory=dict)

    _ORDER = (None, "committed", "opened", "verified")

    def advance(self, phase: str):
        if self._ORDER.index(phase) != self._ORDER.index(self.phase) + 1:
            raise ProtocolError(f"cannot move from phase {self.phase!r} to {phase!r}")
        self.phase = phase

    def send(self, sender: str, kind: str, payload):
        self.messages.append({"sender": sender, "kind": kind, "phase": self.phase, "payload": payload})

    def to_dict(self) -> dict:
        return {"messages": self.messages, "phase": self.phase, "verdict": self.verdict, "private": self.private}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class _Group:
    __slots__ = ("slots", "state", "anc_dim", "anc_state")

    def __init__(self, slots, state, anc_dim):
        self.slots = list(slots)
        self.state = state  # flat amplitudes: ancilla slowest, then slots in order
        self.anc_dim = anc_dim
        self.anc_state = None


def _sample(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, probs.size - 1)


def _project(group: _Group, bases: Sequence[np.ndarray]) -> np.ndarray:
    """Amplitudes in the product of the slots' measurement bases: shape (anc, 2**slots)."""
    full = bases[0]
    for b in bases[1:]:
        full = np.kron(full, b)
    return group.state.reshape(group.anc_dim, -1) @ full.conj()


class Session:
    """One protocol run. Phases must be called in order: commit, open, verify."""

    def __init__(self, config: ProtocolConfig, adam: AdamStrategy | None = None, babe: BabeStrategy | None = None, rng=0):
        self.config = config
        self.adam = adam or Honest()
        self.babe = babe or BabeStrategy()
        self.streams = as_streams(rng)
        self.transcript = Transcript()
        c = config.circle
        self._ref, self._partner, self.u1 = circle_frame(c)
        self.commitment: Commitment | None = None
        self.groups: list[_Group] = []
        self.outcomes: list[int] | None = None
        self.babe_states: list[np.ndarray] = []
        self.opening: dict | None = None

    # -- Babe's and Adam's state preparation ---------------------------------

    def _on_circle(self, angle: float) -> np.ndarray:
        return math.cos(angle / 2) * self._ref + math.sin(angle / 2) * self._partner

    def _babe_state(self, stream) -> tuple[np.ndarray, Any]:
        if self.config.babe_state_set == "BB84":
            k = stream.integers(4)
            return self._on_circle(_BB84_ANGLES[k]), {"bb84": k}
        a = stream.angle()
        return self._on_circle(a), {"angle": a}

    def _decoy(self, stream) -> tuple[np.ndarray, Any]:
        kind = self.config.decoy_set
        if kind == "uniformSphere":
            # uniform Bloch vector: z uniform in [-1, 1], azimuth uniform
            z = 2 * stream.random() - 1
            phi = stream.angle()
            theta = math.acos(z)
            amps = np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)])
            return amps, {"z": z, "phi": phi}
        if kind == "greatCircle":
            a = stream.angle()
            return self._on_circle(a), {"angle": a}
        if kind == "BB84":
            k = stream.integers(4)
            return self._on_circle(_BB84_ANGLES[k]), {"bb84": k}
        k = stream.integers(2)
        return self._on_circle(math.pi * k), {"label": k}

    # -- phases ----------------------------------------------------------------

    def commit(self, bit: int) -> Transcript:
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        cfg, st = self.config, self.streams
        self.transcript.advance("committed")
        babe_stream = st("babe.psi")
        for _ in range(cfg.m):
            amps, _ = self._babe_state(babe_stream)
            self.babe_states.append(amps)
        self.transcript.send("babe", "anonymous_qubits", {"count": cfg.m})

        lanes = self.adam.lanes
        alloc = cfg.allocate(lanes, st("adam.place"))
        strat_stream = st("adam.strategy")
        for j in range(cfg.m):
            plan = self.adam.plan(bit, cfg.circle, strat_stream)
            if plan.lanes != lanes:
                raise ValueError("strategy plan lane count disagrees with the strategy")
            self.groups.append(_Group(alloc[j], plan.isometry @ self.babe_states[j], plan.anc_dim))
        used = {p for row in alloc for p in row}
        decoy_stream = st("adam.decoy")
        record = {}
        for pos in range(cfg.positions):
            if pos in used:
                continue
            amps, rec = self._decoy(decoy_stream)
            record[pos] = rec
            self.groups.append(_Group([pos], amps, 1))
        self.commitment = Commitment(bit, alloc, record)
        self.transcript.send("adam", "sequence", {"positions": cfg.positions})

        if cfg.kind in MEASURE_BEFORE_OPEN:
            self.outcomes = self._babe_measure()
            guess = self.babe.guess(cfg, self.outcomes, st("babe.guess"))
            self.transcript.private["babe"] = {"outcomes": self.outcomes, "guess": guess}
        self.transcript.private["adam"] = {"bit": bit, "positions": [[p + 1 for p in row] for row in alloc]}
        return self.transcript

    def _bases(self, slots) -> list[np.ndarray]:
        out = []
        for pos in slots:
            psi = self.babe_states[self.config.basis_index(pos)]
            out.append(np.column_stack([psi, self.u1 @ psi]))
        return out

    def _babe_measure(self) -> list[int]:
        outcomes = [0] * self.config.positions
        stream = self.streams("babe.measure")
        for g in self.groups:
            u = stream.random()
            if g.anc_dim == 1 and len(g.slots) == 1:
                psi = self.babe_states[self.config.basis_index(g.slots[0])]
                amp = psi[0].conjugate() * g.state[0] + psi[1].conjugate() * g.state[1]
                p0 = amp.real**2 + amp.imag**2
                outcomes[g.slots[0]] = 0 if u < p0 else 1
                continue
            t = _project(g, self._bases(g.slots))
            probs = np.sum(np.abs(t) ** 2, axis=0).reshape(-1)
            idx = _sample(probs, u)
            bits = [(idx >> (len(g.slots) - 1 - s)) & 1 for s in range(len(g.slots))]
            for pos, b in zip(g.slots, bits):
                outcomes[pos] = b
            anc = t.reshape(g.anc_dim, -1)[:, idx]
            g.anc_state = anc / np.linalg.norm(anc)
        return outcomes

    def _adam_measure(self) -> list[int | None]:
        stream = self.streams.fresh("adam.measure")
        result = []
        for g in self.groups[: self.config.m]:
            if g.anc_dim == 1:
                result.append(None)
                continue
            u = stream.random()
            if g.anc_state is not None:
                probs = np.abs(g.anc_state) ** 2
            else:
                probs = np.sum(np.abs(g.state.reshape(g.anc_dim, -1)) ** 2, axis=1)
            result.append(_sample(probs, u))
        return result

    def branch(self) -> "Session":
        """An independent copy of a committed session, so several openings can be tried."""
        if self.transcript.phase != "committed":
            raise ProtocolError("only a freshly committed session can be branched")
        twin = copy.copy(self)
        private = {k: dict(v) for k, v in self.transcript.private.items()}
        twin.transcript = Transcript(list(self.transcript.messages), "committed", None, private)
        twin.opening = None
        return twin

    def open(self, target: int | None = None, claim: tuple[Sequence[int], int] | None = None) -> Transcript:
        """Adam reveals positions and a bit.

        ``target`` is the bit Adam tries to open (default: the committed one);
        ``claim`` overrides his strategy with explicit 1-based positions and bit.
        """
        self.transcript.advance("opened")
        cfg = self.config
        anc = self._adam_measure()
        if claim is not None:
            positions = [p - 1 for p in claim[0]]
            bit = int(claim[1])
        else:
            target = self.commitment.bit if target is None else target
            lane, bit = self.adam.claim(target, anc, self.commitment.bit)
            positions = [row[lane] for row in self.commitment.positions]
        self.opening = {"positions": positions, "bit": bit, "ancilla": anc}
        payload = {"positions": [p + 1 for p in positions], "bit": bit}
        if cfg.kind is Kind.QBCp3u:
            # reveal every decoy; positions Adam filled himself are declared as label 0
            labels = {}
            for pos in range(cfg.positions):
                if pos in positions:
                    continue
                rec = self.commitment.decoy_record.get(pos, {"label": 0})
                labels[pos + 1] = rec.get("label", 0)
            payload["decoys"] = labels
            self.opening["decoys"] = {k - 1: v for k, v in labels.items()}
        self.transcript.send("adam", "opening", payload)
        return self.transcript

    def verify(self) -> bool:
        self.transcript.advance("verified")
        cfg = self.config
        positions, bit = self.opening["positions"], self.opening["bit"]
        if not cfg.claim_valid(positions) or bit not in (0, 1):
            verdict = False
        elif cfg.kind in MEASURE_BEFORE_OPEN:
            verdict = all(self.outcomes[p] == bit for p in positions)
        else:
            verdict = self._projective_checks(positions, bit)
        self.transcript.verdict = verdict
        self.transcript.send("babe", "verdict", {"accept": verdict})
        return verdict

    def _projective_checks(self, positions, bit) -> bool:
        """Babe projects every qubit onto the state Adam declared for it."""
        cfg = self.config
        expected = {}
        for j, pos in enumerate(positions):
            psi = self.babe_states[j]
            expected[pos] = psi if bit == 0 else self.u1 @ psi
        for pos, label in self.opening["decoys"].items():
            expected[pos] = self._on_circle(math.pi * label)
        stream = self.streams.fresh("babe.verify")
        anc = self.opening["ancilla"]
        accept = True
        for gi, g in enumerate(self.groups):
            u = stream.random()
            state = g.state.reshape(g.anc_dim, -1)
            if g.anc_dim > 1 and gi < cfg.m and anc[gi] is not None:
                state = state[anc[gi] : anc[gi] + 1]
            bases = []
            for pos in g.slots:
                e = expected[pos]
                bases.append(np.column_stack([e, np.array([-e[1].conjugate(), e[0].conjugate()])]))
            t = _project(_Group(g.slots, state.reshape(-1), state.shape[0]), bases)
            probs = np.sum(np.abs(t) ** 2, axis=0).reshape(-1)
            if _sample(probs, u) != 0:
                accept = False
        return accept


def protocol_commit(config: ProtocolConfig, adam=None, babe=None, rng=0, bit: int = 0) -> Session:
    if isinstance(adam, str):
        adam = make_adam(adam)
    if isinstance(babe, str):
        babe = make_babe(babe)
    session = Session(config, adam, babe, rng)
    session.commit(bit)
    return session


def protocol_open(session: Session, target: int | None = None, claim=None) -> Transcript:
    return session.open(target, claim)


def protocol_verify(session: Session) -> Transcript:
    session.verify()
    return session.transcript
