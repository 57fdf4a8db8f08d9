"""Desk-scale property suites behind ``qbc verify``.

Each suite returns a list of ``(check name, passed, detail)``. Fixtures are read
from a directory so a damaged file surfaces as an input error.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import cheat, qcore
from .harness import ExperimentSpec, Estimate, run_experiment, count_successes
from .protocols import closed_form, states
from .protocols.machine import ProtocolConfig, Session
from .streams import Stream

Check = tuple[str, bool, str]


def fixtures_dir() -> Path:
    return Path(str(resources.files("qbc") / "fixtures"))


def load_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _close(a, b, tol) -> bool:
    return abs(a - b) <= tol


def suite_qcore(fixtures: Path) -> list[Check]:
    rng = np.random.default_rng(11)
    out = []
    a, b = qcore.random_density(2, rng), qcore.random_density(3, rng)
    prod = qcore.tensor([a, b])
    err = np.max(np.abs(qcore.partial_trace(prod, [0]).matrix - a.matrix))
    out.append(("partial trace of a product", err < 1e-12, f"max error {err:.2e}"))
    worst = 0.0
    for _ in range(20):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u, p = qcore.polar_unitary(m)
        worst = max(worst, np.max(np.abs(m @ u - p)))
    out.append(("polar factor identity", worst < 1e-10, f"max error {worst:.2e}"))
    r0, r1 = qcore.random_density(3, rng), qcore.random_density(3, rng)
    f01, f10 = qcore.fidelity(r0, r1), qcore.fidelity(r1, r0)
    out.append(("fidelity symmetric", _close(f01, f10, 1e-9), f"{f01:.12f} vs {f10:.12f}"))
    k0, k1 = qcore.Ket.basis(0, 2), qcore.Ket.basis(1, 2)
    tn = qcore.trace_norm(k0.density().matrix - k1.density().matrix)
    out.append(("orthogonal trace norm is 2", _close(tn, 2.0, 1e-12), f"{tn}"))
    us = qcore.haar_unitary(4, rng, size=10)
    ok = all(qcore.is_unitary(u, 1e-10) for u in us)
    out.append(("haar samples unitary", ok, "10 samples"))
    return out


def suite_cheat(fixtures: Path) -> list[Check]:
    out = []
    for name in ("identical", "permutation"):
        e0, e1 = cheat.load_ensemble_pair(load_json(fixtures / f"{name}.json"))
        sol = cheat.optimal_overlap_cheat(e0, e1)
        ok = _close(sol.p_cheat, 1.0, 1e-9) and _close(sol.fidelity, 1.0, 1e-9)
        out.append((f"{name} fixture cheats perfectly", ok, f"pAc={sol.p_cheat:.12f} F={sol.fidelity:.12f}"))
    data = load_json(fixtures / "random_m3.json")
    e0, e1 = cheat.load_ensemble_pair(data)
    golden = load_json(fixtures / "random_m3.golden.json")
    report = json.loads(json.dumps(cheat.cheat_report(e0, e1)))
    out.append(("golden cheat report", report == golden, "random_m3"))

    rng = np.random.default_rng(5)
    worst_f = worst_bound = 0.0
    for _ in range(20):
        size, dim = int(rng.integers(1, 5)), int(rng.integers(2, 5))
        e0, e1 = cheat.random_ensemble(size, dim, rng), cheat.random_ensemble(int(rng.integers(1, 5)), dim, rng)
        sol = cheat.optimal_overlap_cheat(e0, e1)
        worst_f = max(worst_f, abs(sol.fidelity - qcore.fidelity(e0.density(), e1.density())))
        worst_bound = max(worst_bound, sol.fidelity**2 - sol.p_cheat)
    out.append(("tr|L| equals fidelity", worst_f < 1e-8, f"max error {worst_f:.2e}"))
    out.append(("cheat probability at least F^2", worst_bound < 1e-9, f"max shortfall {worst_bound:.2e}"))

    fx = cheat.appendix_b_fixture()
    c = fx.checks
    ok = (
        c["bc_trace_distance"] <= 1e-12
        and _close(c["adam_cheat_fixed_mixing"], 1.0, 1e-9)
        and _close(c["babe_helstrom_on_aa"], 1.0, 1e-12)
        and not c["full_maps_equal"]
    )
    out.append(("entangled-input example", ok, json.dumps({k: str(v) for k, v in c.items()})))

    ops = [(0.25, np.eye(2)), (0.25, np.array([[0, 1], [1, 0]])), (0.25, np.array([[0, -1j], [1j, 0]])), (0.25, np.diag([1, -1]))]
    res = cheat.kraus_freedom(ops, ops[::-1], rng=np.random.default_rng(2))
    out.append(("reordered Kraus sets are one channel", res.equal and res.residual <= 1e-7, f"residual {res.residual}"))
    return out


def suite_protocols(fixtures: Path) -> list[Check]:
    out = []
    r3, r5 = closed_form.concealing_closed_form(3), closed_form.concealing_closed_form(5)
    out.append(("closed form n=3,5", r3.exact == Fraction(3, 4) and r5.exact == Fraction(11, 16), f"{r3.exact}, {r5.exact}"))
    ok = all(closed_form.central_identity_holds(ell) for ell in range(16))
    out.append(("binomial identity l=0..15", ok, "exact integers"))
    inside = all(closed_form.concealing_closed_form(2 * ell + 1).inside_bounds for ell in range(2, 13))
    out.append(("closed form inside bounds l=2..12", inside, ""))
    p = closed_form.miss_probability(10, 3)
    out.append(("miss probability p(10,3)", p == Fraction(729, 1000), str(p)))
    psi = qcore.circle_state(qcore.GreatCircle.standard(), 0.7)
    d = qcore.trace_norm(states.qbcp3m_rho(3, psi, 0).matrix - states.qbcp3m_rho(3, psi, 1).matrix)
    out.append(("n=3 committed states at distance 1", _close(d, 1.0, 1e-12), f"{d:.15f}"))
    pair = qcore.random_density(4, np.random.default_rng(3))
    pair = qcore.DensityOp(pair.matrix, (2, 2))
    rec = states.mismatch_bound_sequence(3, pair)
    out.append(("entangled mismatch bound n=3", rec.holds, f"{rec.lhs:.6f} <= {rec.rhs:.6f}"))
    rejects = 0
    for kind, kw in (("QBCp3m", {"n": 3}), ("QBC3m1", {"m": 3, "N": 3}), ("QBC3m2", {"m": 3, "N": 5})):
        cfg = ProtocolConfig(kind, **kw)
        for t in range(100):
            s = Session(cfg, rng=t)
            s.commit(t % 2)
            s.open()
            rejects += not s.verify()
    out.append(("honest runs accept", rejects == 0, f"{rejects} rejects in 300 runs"))
    return out


def suite_harness(fixtures: Path) -> list[Check]:
    out = []
    spec = ExperimentSpec.from_dict(load_json(fixtures / "qbcp3m_n3.json")).with_overrides(trials=300)
    a, b = run_experiment(spec).to_json(), run_experiment(spec).to_json()
    out.append(("same seed, same bytes", a == b, "300 trials"))
    sharded = count_successes(spec, threads=2)
    out.append(("sharded counts agree", sharded == count_successes(spec), json.dumps(sharded, sort_keys=True)))
    seen = set()
    for t in range(10**4):
        s = Stream(spec.master_seed, t, "bit")
        seen.add(tuple(s.random() for _ in range(4)))
    out.append(("per-trial streams distinct", len(seen) == 10**4, f"{len(seen)} distinct prefixes"))
    e = Estimate(30, 100)
    lo, hi = e.clopper_pearson()
    out.append(("exact interval brackets mean", lo < e.mean < hi, f"[{lo:.4f}, {hi:.4f}]"))
    return out


def suite_cli(fixtures: Path) -> list[Check]:
    from .cli import build_parser

    parser = build_parser()
    ok = True
    for argv in (["concealing", "3"], ["cheat", "x.json"], ["simulate", "x.json"], ["verify"]):
        try:
            parser.parse_args(argv)
        except SystemExit:
            ok = False
    out = [("parser accepts every subcommand", ok, "")]
    names = sorted(p.name for p in fixtures.glob("*.json"))
    out.append(("fixtures present", len(names) >= 6, ", ".join(names)))
    return out


SUITES: dict[str, Callable[[Path], list[Check]]] = {
    "qcore": suite_qcore,
    "cheat": suite_cheat,
    "protocols": suite_protocols,
    "harness": suite_harness,
    "cli": suite_cli,
}
