"""Exit criteria for the build, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with ``-s`` or in
the summary written by ``pytest -v``) and then asserts.
"""

from __future__ import annotations

import json
import math
import random
import time
from pathlib import Path

import pytest

from oracles import brute_containing_arc
from prcnet.actuation import ConstantFrequency, ConstantTime, OptimizedSpin, plan_turn
from prcnet.cli import main
from prcnet.config import config_from_dict, load_config
from prcnet.coupling import desync_response, sync_response
from prcnet.engine import run, simulate
from prcnet.metrics import compare_methods, convergence_time
from prcnet.phase import TWO_PI, circ_dist, containing_arc, splay_error, state_metric, wrap
from prcnet.traceio import cross_validate, read_agent_csv, read_metric_csv, read_summary

PI = math.pi
TOL = 1e-9
CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# regression values from the reference runs (dt = 0.05 s, slot = 0.5 s)
PINNED_SYNC_CONVERGENCE = 3.6
PINNED_DESYNC_CONVERGENCE = 15.6
PINNED_DROPOUT_RECONVERGENCE = 35.6


def report(capsys, n: int, name: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} -- {detail}")


def reference(name: str):
    return load_config(CONFIGS / name)


def test_criterion_1_phase_core_invariants(capsys):
    rng = random.Random(1)
    trials = 1000
    t0 = time.perf_counter()
    failures: list[str] = []

    def check(cond: bool, label: str) -> None:
        if not cond and label not in failures:
            failures.append(label)

    for _ in range(trials):
        x = rng.uniform(-1e4, 1e4)
        k = rng.randint(-100, 100)
        check(wrap(wrap(x)) == wrap(x), "wrap idempotence")
        check(abs(circ_dist(wrap(x + TWO_PI * k), wrap(x))) < TOL, "wrap periodicity")

        a, b = rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI)
        if rng.random() < 0.05:
            b = wrap(a + PI)
        d = circ_dist(a, b)
        if d == PI:
            check(circ_dist(b, a) == PI, "antisymmetry at pi")
        else:
            check(circ_dist(b, a) == -d, "antisymmetry")
        check(abs(circ_dist(wrap(a + d), b)) < TOL, "circ_dist consistency")

        n = rng.randint(1, 8)
        ps = [rng.uniform(0, TWO_PI) for _ in range(n)]
        if rng.random() < 0.2:
            ps = [ps[0]] * n
        c = rng.uniform(-50, 50)
        rot = [wrap(p + c) for p in ps]
        perm = ps[:]
        rng.shuffle(perm)
        ca, se = containing_arc(ps), splay_error(ps)
        check(abs(containing_arc(rot) - ca) < TOL and abs(splay_error(rot) - se) < TOL, "rotation invariance")
        check(abs(containing_arc(perm) - ca) < TOL and abs(splay_error(perm) - se) < TOL, "permutation invariance")
        check(abs(ca - brute_containing_arc(ps)) < TOL, "oracle equivalence")
        check(se <= 2 * (n - 1) * TWO_PI / n + TOL, "splay bound")
        check(abs(splay_error([ps[0]] * n) - 2 * (n - 1) * TWO_PI / n) < TOL, "bound attained")

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 5.0
    report(capsys, 1, "phase-core invariants", ok,
           f"{trials} trials x 9 properties, failures={failures}, {elapsed:.2f}s")
    assert not failures
    assert elapsed < 5.0


def test_criterion_2_fixed_points(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    responses = 0.0
    methods = [{"kind": "optimized_spin"}, {"kind": "constant_time"}, {"kind": "constant_frequency"}]
    for n in (1, 2, 3, 6, 8):
        for method in methods:
            sync_phases = [1.1] * n
            splay = [0.4 + TWO_PI * i / n for i in range(n)]
            for mode, phases in (("sync", sync_phases), ("desync", splay)):
                doc = {"n_agents": n, "coupling": {"mode": mode, "gain": 0.5}, "method": method,
                       "init": {"kind": "explicit", "phases": phases}, "t_end": 60.0}
                trace = simulate(config_from_dict(doc))
                worst = max(worst, max(r.metric for r in trace.records))
                for r in trace.records:
                    for _, delta, _ in r.commands:
                        responses = max(responses, abs(delta))
            table = {i + 1: wrap(p) for i, p in enumerate(splay)}
            for own in table:
                responses = max(responses, abs(desync_response(own, table, 1.0)))
            responses = max(responses, abs(sync_response(1.1, 1.1, 1.0)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and responses < 1e-6 and elapsed < 5.0
    report(capsys, 2, "fixed points stationary over 60 s", ok,
           f"max metric {worst:.2e}, max |response| {responses:.2e}, {elapsed:.2f}s")
    assert worst < 1e-6
    assert responses < 1e-6
    assert elapsed < 5.0


def test_criterion_3_worst_case_convergence(capsys):
    sync_cfg = reference("sync_reference.json")
    desync_cfg = reference("desync_reference.json")
    sync_trace, sync_sum = run(sync_cfg)
    desync_trace, desync_sum = run(desync_cfg)

    sync_start = sync_trace.records[0].metric
    desync_start = desync_trace.records[0].metric
    ok_start = abs(sync_start - 5 * PI / 3) < TOL and abs(desync_start - 10 * PI / 3) < TOL
    ok_sync = sync_sum.convergence_time is not None and sync_sum.convergence_time + 5.0 <= 120.0
    ok_desync = desync_sum.convergence_time is not None and desync_sum.convergence_time <= 120.0
    ok_pinned = (sync_sum.convergence_time == pytest.approx(PINNED_SYNC_CONVERGENCE)
                 and desync_sum.convergence_time == pytest.approx(PINNED_DESYNC_CONVERGENCE))
    ok = ok_start and ok_sync and ok_desync and ok_pinned
    report(capsys, 3, "worst-case convergence (N=6, gain 0.5, optimized spin)", ok,
           f"sync arc {sync_start:.4f} -> <0.05 at t={sync_sum.convergence_time}s; "
           f"desync splay {desync_start:.4f} -> <0.10 at t={desync_sum.convergence_time}s")
    assert ok_start
    assert ok_sync and ok_desync
    assert sync_sum.convergence_time == pytest.approx(PINNED_SYNC_CONVERGENCE)
    assert desync_sum.convergence_time == pytest.approx(PINNED_DESYNC_CONVERGENCE)
    assert sync_sum.final_metric < 0.05 and desync_sum.final_metric < 0.10


def test_criterion_4_dropout_resilience(capsys):
    cfg = reference("desync_dropout.json")
    eps = cfg.analysis.epsilon
    trace = simulate(cfg)
    before = [(r.t, r.metric) for r in trace.records if r.t < 30.0]
    converged_before = convergence_time(before, eps, 5.0)

    fail_rec = next(r for r in trace.records if "fail 4" in r.events)
    survivors = [p for aid, p, alive in fail_rec.phases if alive]
    recomputed_ok = (fail_rec.live_count == 5 and len(survivors) == 5
                     and abs(state_metric("desync", survivors) - fail_rec.metric) < TOL)

    after = [(r.t, r.metric) for r in trace.records if r.t >= fail_rec.t]
    peak = max(m for _, m in after)
    reconverged = convergence_time(after, eps, 5.0)
    ok = (converged_before is not None and recomputed_ok and peak > eps
          and reconverged is not None and reconverged - 30.0 <= 60.0)
    report(capsys, 4, "dropout resilience (fail agent 4 at t=30 s)", ok,
           f"converged at {converged_before}s, 5-agent metric jumps to {peak:.3f}, "
           f"re-converged at {reconverged}s")
    assert converged_before is not None and converged_before < 30.0
    assert recomputed_ok
    assert peak > eps
    assert reconverged is not None and reconverged - 30.0 <= 60.0
    assert reconverged == pytest.approx(PINNED_DROPOUT_RECONVERGENCE)


def _ordering_line(comp) -> tuple[float, float, float]:
    amp = comp.orderings["amplitude(constant_frequency) >= amplitude(optimized_spin)"]
    cf = comp.row("constant_frequency").censored_convergence_time_mean
    os_ = comp.row("optimized_spin").censored_convergence_time_mean
    return amp, cf, os_


def test_criterion_5_method_ordering(capsys):
    t0 = time.perf_counter()
    seeds = list(range(50))
    results = {}
    for name in ("sync_reference.json", "sync_noisy.json"):
        comp = compare_methods(reference(name), seeds)
        results[name] = _ordering_line(comp)

    # mechanism: fixed-rate turns last in proportion to the commanded change,
    # so slow constant-frequency turns are still running when the next slot
    # arrives and get preempted far more often than optimized spin.
    cf = ConstantFrequency()
    durations_prop = all(
        abs(plan_turn(d, cf).remaining - abs(d) / cf.angular_speed) < TOL for d in (0.1, 0.5, 1.0, 2.0, -PI / 2))
    base = reference("sync_reference.json")
    preempts = {}
    for m in (OptimizedSpin(), ConstantTime(), ConstantFrequency()):
        tr = simulate(base.with_method(m))
        preempts[m.kind] = sum(e.startswith("preempt") for r in tr.records for e in r.events)
    elapsed = time.perf_counter() - t0

    ok = all(amp > 0.5 and cf_ct >= os_ct for amp, cf_ct, os_ct in results.values())
    ok = ok and durations_prop and preempts["constant_frequency"] > preempts["optimized_spin"] and elapsed < 60
    detail = "; ".join(
        f"{name}: amp(CF)>=amp(OS) in {amp:.0%} of seeds, mean t_conv CF {cf_ct:.2f}s vs OS {os_ct:.2f}s"
        for name, (amp, cf_ct, os_ct) in results.items())
    report(capsys, 5, "constant frequency slower and no less oscillatory", ok,
           f"{detail}; preemptions {preempts}; {elapsed:.1f}s")
    for amp, cf_ct, os_ct in results.values():
        assert amp > 0.5
        assert cf_ct >= os_ct
    assert durations_prop
    assert preempts["constant_frequency"] > preempts["optimized_spin"]
    assert elapsed < 60


def test_criterion_6_gain_sweep(tmp_path, capsys):
    cfg_path = CONFIGS / "desync_reference.json"
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(cfg_path), "--out", str(out), "--gains", "0.25,0.5,1.0", "--quiet"])
    rows = json.loads((out / "sweep.json").read_text())["rows"]
    cts = [math.inf if r["convergence_time"] is None else r["convergence_time"] for r in rows]
    amps = [r["steady_state_amplitude"] for r in rows]
    faster = all(b <= a for a, b in zip(cts, cts[1:]))
    noisier = all(b >= a for a, b in zip(amps, amps[1:]))

    _, control = run(reference("desync_reference.json").with_gain(1e-9))
    ok = code == 0 and len(rows) == 3 and (faster or noisier) and control.convergence_time is None
    direction = "higher gain converges no slower" if faster else "higher gain oscillates no less"
    report(capsys, 6, "gain sweep 0.25/0.5/1.0 on desync reference", ok,
           f"convergence {cts}, amplitude {[f'{a:.1e}' for a in amps]} ({direction}); "
           f"gain 1e-9 converged: {control.convergence_time}")
    assert code == 0 and len(rows) == 3
    assert faster or noisier
    assert control.convergence_time is None


def test_criterion_7_determinism_round_trip(tmp_path, capsys):
    cfg_path = CONFIGS / "desync_dropout.json"
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg_path), "--out", str(a), "--seed", "9", "--quiet"]) == 0
    assert main(["run", "--config", str(cfg_path), "--out", str(b), "--seed", "9", "--quiet"]) == 0
    names = sorted(p.name for p in a.iterdir() if p.name != "manifest.json")
    identical = names == sorted(p.name for p in b.iterdir() if p.name != "manifest.json") and all(
        (a / n).read_bytes() == (b / n).read_bytes() for n in names)

    parsed = True
    try:
        for p in a.glob("agent_*.csv"):
            read_agent_csv(p)
        read_metric_csv(a / "metric.csv")
        summary = read_summary(a / "summary.json")
        json.loads((a / "manifest.json").read_text())
        cross_validate(a, "desync", tol=TOL)
        _, expected = run(load_config(cfg_path).with_seed(9))
        parsed = summary == expected
    except (ValueError, KeyError) as exc:  # pragma: no cover - reported below
        parsed = False
        print(exc)

    ok = identical and parsed
    report(capsys, 7, "determinism and round-trip", ok,
           f"{len(names)} files byte-identical: {identical}; re-parse + cross-check at 1e-9: {parsed}")
    assert identical
    assert parsed
