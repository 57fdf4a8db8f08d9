"""Seeded Monte Carlo experiments over protocol runs.

Trial ``t`` draws all of its randomness from streams keyed by
``(master_seed, t, tag)``, and only integer success counts are aggregated, so
a run is reproducible bit for bit whether it is sharded or not.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy.stats import beta

from .protocols.closed_form import concealing_closed_form, guess_one_position, majority_vote_pbc
from .protocols.machine import MEASURE_BEFORE_OPEN, Kind, ProtocolConfig, Session
from .protocols.strategies import ADAM_STRATEGIES, BABE_STRATEGIES, make_adam, make_babe
from .streams import TrialStreams

REPORT_SCHEMA = "qbc.report/1"
CHECKPOINT_SCHEMA = "qbc.sweep-checkpoint/1"
DEFAULT_TRIALS = 10**5
MAX_TRIALS = 10**8
METRICS = ("babe_guess", "accept", "bit_change", "wrong_position")
CSV_COLUMNS = ("protocol", "params", "metric", "estimate", "stderr", "prediction", "z")


@dataclass(frozen=True)
class ExperimentSpec:
    protocol: ProtocolConfig
    adam: str = "honest"
    adam_params: dict = field(default_factory=dict)
    babe: str = "majority_vote"
    babe_params: dict = field(default_factory=dict)
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    outputs: tuple[str, ...] = ("babe_guess", "accept")

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or not 1 <= self.trials <= MAX_TRIALS:
            raise ValueError(f"trials must be an integer in [1, {MAX_TRIALS}]")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.adam not in ADAM_STRATEGIES:
            raise KeyError(f"unknown Adam strategy {self.adam!r}")
        if self.babe not in BABE_STRATEGIES:
            raise KeyError(f"unknown Babe strategy {self.babe!r}")
        object.__setattr__(self, "outputs", tuple(self.outputs))
        for metric in self.outputs:
            if metric not in METRICS:
                raise ValueError(f"unknown metric {metric!r}; known: {METRICS}")
        if "babe_guess" in self.outputs and self.protocol.kind not in MEASURE_BEFORE_OPEN:
            raise ValueError("babe_guess needs a protocol where Babe measures at commit time")
        # fail early on bad strategy parameters
        make_adam(self.adam, self.adam_params)
        make_babe(self.babe, self.babe_params)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.to_dict(),
            "adam": {"id": self.adam, "params": dict(self.adam_params)},
            "babe": {"id": self.babe, "params": dict(self.babe_params)},
            "trials": self.trials,
            "master_seed": self.master_seed,
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        allowed = {"protocol", "adam", "babe", "trials", "master_seed", "outputs"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        if "protocol" not in data:
            raise ValueError("experiment needs a 'protocol'")
        kwargs = {"protocol": ProtocolConfig.from_dict(data["protocol"])}
        for role in ("adam", "babe"):
            if role in data:
                entry = data[role]
                if isinstance(entry, str):
                    entry = {"id": entry}
                extra = set(entry) - {"id", "params"}
                if extra:
                    raise ValueError(f"unknown {role} fields: {sorted(extra)}")
                kwargs[role] = entry["id"]
                kwargs[f"{role}_params"] = dict(entry.get("params", {}))
        for key in ("trials", "master_seed", "outputs"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.from_dict(json.loads(text))

    def with_overrides(self, **changes) -> "ExperimentSpec":
        data = self.to_dict()
        data.update(changes)
        return ExperimentSpec.from_dict(data)

    def params_label(self) -> str:
        parts = [self.protocol.label(), f"adam={self.adam}", f"babe={self.babe}"]
        parts += [f"{k}={v}" for k, v in sorted(self.adam_params.items())]
        return ";".join(parts)


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int

    @property
    def mean(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        """Sample standard deviation over ``sqrt(trials)``."""
        n, k = self.trials, self.successes
        if n < 2:
            return 0.0
        var = k * (n - k) / (n * (n - 1))
        return math.sqrt(var / n)

    def clopper_pearson(self, level: float = 0.95) -> tuple[float, float]:
        a = (1 - level) / 2
        n, k = self.trials, self.successes
        lo = 0.0 if k == 0 else float(beta.ppf(a, k, n - k + 1))
        hi = 1.0 if k == n else float(beta.ppf(1 - a, k + 1, n - k))
        return lo, hi

    def to_dict(self) -> dict:
        lo, hi = self.clopper_pearson()
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
            "successes": self.successes,
            "ci95": [lo, hi],
        }


@dataclass(frozen=True)
class Prediction:
    value: float
    tag: str


def z_score(est: Estimate, pred: Prediction) -> float:
    diff = est.mean - pred.value
    se = est.stderr
    if se > 0:
        return diff / se
    if diff == 0:
        return 0.0
    return math.copysign(math.inf, diff)


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    estimates: dict
    predictions: dict

    @property
    def agreement(self) -> dict:
        return {m: z_score(self.estimates[m], self.predictions[m]) for m in self.estimates if m in self.predictions}

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "spec": self.spec.to_dict(),
            "estimates": {m: e.to_dict() for m, e in self.estimates.items()},
            "predictions": {m: {"value": p.value, "tag": p.tag} for m, p in self.predictions.items()},
            "agreement": self.agreement,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def rows(self) -> list[dict]:
        out = []
        z = self.agreement
        for metric in sorted(set(self.estimates) | set(self.predictions)):
            est = self.estimates.get(metric)
            pred = self.predictions.get(metric)
            out.append(
                {
                    "protocol": self.spec.protocol.kind.value,
                    "params": self.spec.params_label(),
                    "metric": metric,
                    "estimate": "" if est is None else repr(est.mean),
                    "stderr": "" if est is None else repr(est.stderr),
                    "prediction": "" if pred is None else repr(pred.value),
                    "z": repr(z[metric]) if metric in z else "",
                }
            )
        return out


def reports_to_csv(reports: Iterable[ExperimentReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerows(report.rows())
    return buf.getvalue()


# -- predictions -----------------------------------------------------------------


def predictions_for(spec: ExperimentSpec) -> dict[str, Prediction]:
    """Closed-form values for the metrics that have one under this spec."""
    cfg, adam = spec.protocol, make_adam(spec.adam, spec.adam_params)
    m = cfg.m
    mbo = cfg.kind in MEASURE_BEFORE_OPEN
    out: dict[str, Prediction] = {}
    honest = adam.name == "honest"

    if honest and spec.babe in ("majority_vote", "honest"):
        if cfg.kind is Kind.QBCp3m and cfg.n % 2 == 1:
            out["babe_guess"] = Prediction(concealing_closed_form(cfg.n).closed_form, "closed form C(2l,l)/2^n")
        elif cfg.kind is Kind.QBC3m2 and cfg.N % 2 == 1 and m % 2 == 1:
            p = concealing_closed_form(cfg.N).closed_form
            out["babe_guess"] = Prediction(majority_vote_pbc(m, p), "majority vote over segments")
    if honest and spec.babe == "single_position" and cfg.kind is Kind.QBCp3m:
        out["babe_guess"] = Prediction(guess_one_position(cfg.n), "single position guess")

    if honest:
        out["accept"] = Prediction(1.0, "honest verification")
        out["bit_change"] = Prediction(0.0, "honest verification")
        if mbo:
            out["wrong_position"] = Prediction(0.5**m, "decoy Born statistics")
    elif mbo:
        if adam.name == "measure_resend":
            out["accept"] = out["bit_change"] = Prediction(0.75**m, "measure and resend overlap")
        elif adam.name == "entangle_delay":
            if adam.mode == "follow":
                out["accept"] = Prediction(1.0, "follow measured bit")
            else:
                l0, l1 = adam.lambda0**2, adam.lambda1**2
                value = 0.5 * (l0**m + l1**m)
                out["accept"] = out["bit_change"] = Prediction(value, "entangled ancilla Born weights")
        elif adam.name == "split_pair":
            out["accept"] = Prediction(1.0, "honest lane")
            out["bit_change"] = Prediction(0.5**m, "guessed lane overlap")
    if not spec.outputs:
        return out
    return {k: v for k, v in out.items() if k in spec.outputs}


# -- running ---------------------------------------------------------------------


def _wrong_claim(cfg: ProtocolConfig, session: Session, streams: TrialStreams) -> list[int]:
    """A valid-looking claim that avoids every position Adam actually filled (1-based)."""
    used = {p for row in session.commitment.positions for p in row}
    stream = streams("adam.wrong")
    if cfg.kind is Kind.QBC3m1:
        modes = [q for q in range(cfg.N) if all(q * cfg.m + j not in used for j in range(cfg.m))]
        q = modes[stream.integers(len(modes))]
        return [q * cfg.m + j + 1 for j in range(cfg.m)]
    claim = []
    for j in range(cfg.m):
        base, width = (j * cfg.N, cfg.N) if cfg.kind is Kind.QBC3m2 else (0, cfg.positions)
        free = [base + k for k in range(width) if base + k not in used]
        claim.append(free[stream.integers(len(free))] + 1)
    return claim


def run_trial(spec: ExperimentSpec, trial: int, adam=None, babe=None) -> dict[str, bool]:
    cfg = spec.protocol
    adam = adam or make_adam(spec.adam, spec.adam_params)
    babe = babe or make_babe(spec.babe, spec.babe_params)
    streams = TrialStreams(spec.master_seed, trial)
    bit = streams("bit").integers(2)
    session = Session(cfg, adam, babe, streams)
    session.commit(bit)
    result = {}
    for metric in spec.outputs:
        if metric == "babe_guess":
            result[metric] = session.transcript.private["babe"]["guess"] == bit
            continue
        branch = session.branch()
        if metric == "accept":
            branch.open(bit)
        elif metric == "bit_change":
            branch.open(1 - bit)
        else:
            branch.open(claim=(_wrong_claim(cfg, session, streams), bit))
        result[metric] = branch.verify()
    return result


def _run_range(spec: ExperimentSpec, start: int, stop: int) -> dict[str, int]:
    adam = make_adam(spec.adam, spec.adam_params)
    babe = make_babe(spec.babe, spec.babe_params)
    counts = dict.fromkeys(spec.outputs, 0)
    for t in range(start, stop):
        for metric, ok in run_trial(spec, t, adam, babe).items():
            counts[metric] += bool(ok)
    return counts


def _shards(trials: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, trials))
    edges = [trials * k // parts for k in range(parts + 1)]
    return [(edges[k], edges[k + 1]) for k in range(parts)]


def count_successes(spec: ExperimentSpec, threads: int = 1) -> dict[str, int]:
    if threads <= 1:
        return _run_range(spec, 0, spec.trials)
    counts = dict.fromkeys(spec.outputs, 0)
    shards = _shards(spec.trials, threads * 4)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_range, spec, a, b) for a, b in shards]
        for fut in futures:
            for metric, k in fut.result().items():
                counts[metric] += k
    return counts


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentReport:
    counts = count_successes(spec, threads) if spec.outputs else {}
    estimates = {m: Estimate(k, spec.trials) for m, k in counts.items()}
    return ExperimentReport(spec, estimates, predictions_for(spec))


def estimate_adam_cheat(spec: ExperimentSpec, ns: Sequence[int] = (3, 5, 7), threads: int = 1) -> dict[int, Estimate]:
    """Bit-change success per sequence length, to expose (in)dependence on ``n``."""
    out = {}
    for n in ns:
        proto = spec.protocol.to_dict()
        proto["n"] = n
        sub = spec.with_overrides(protocol=proto, outputs=["bit_change"])
        out[n] = Estimate(count_successes(sub, threads)["bit_change"], sub.trials)
    return out


# -- sweeps ----------------------------------------------------------------------


def _set_path(data: dict, path: str, value):
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def grid_points(grid: dict[str, Sequence]) -> list[dict]:
    """Cartesian product in the grid's key order, last key varying fastest."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be nonempty")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sweep(template: ExperimentSpec, grid: dict[str, Sequence], checkpoint: str | os.PathLike | None = None, threads: int = 1) -> list[ExperimentReport]:
    """One report per grid point; ``grid`` maps dotted spec paths (``protocol.n``) to values."""
    points = grid_points(grid)
    header = {"schema": CHECKPOINT_SCHEMA, "template": template.to_dict(), "grid": {k: list(v) for k, v in grid.items()}}
    done: dict[str, dict] = {}
    if checkpoint is not None and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            saved = json.load(fh)
        if saved.get("schema") != CHECKPOINT_SCHEMA:
            raise ValueError(f"checkpoint schema {saved.get('schema')!r} is not {CHECKPOINT_SCHEMA}")
        if saved["template"] != header["template"] or saved["grid"] != header["grid"]:
            raise ValueError("checkpoint belongs to a different sweep")
        done = saved["done"]

    reports = []
    for idx, point in enumerate(points):
        data = template.to_dict()
        for path, value in point.items():
            _set_path(data, path, value)
        spec = ExperimentSpec.from_dict(data)
        key = str(idx)
        if key in done:
            counts = done[key]["counts"]
        else:
            counts = count_successes(spec, threads) if spec.outputs else {}
            done[key] = {"point": point, "counts": counts}
            if checkpoint is not None:
                tmp = f"{checkpoint}.tmp"
                with open(tmp, "w") as fh:
                    json.dump({**header, "done": done}, fh, sort_keys=True)
                os.replace(tmp, checkpoint)
        estimates = {m: Estimate(k, spec.trials) for m, k in counts.items()}
        reports.append(ExperimentReport(spec, estimates, predictions_for(spec)))
    return reports
