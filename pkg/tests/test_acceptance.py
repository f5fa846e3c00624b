"""Acceptance criteria, one check per criterion.

Each test records a single ``[PASS]``/``[FAIL]`` line and then asserts; the
lines are collected into an "acceptance criteria" section at the end of the
pytest report.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from cachestream.channel import BDistribution, deliverable_bits, pmf_B
from cachestream.config import SimConfig, with_caching_case
from cachestream.experiments import SweepSpec, run_sweep
from cachestream.admission import eta, min_intensity, params_from_config, rho_threshold
from cachestream.mdp import (
    Action, backward_dp, complexity, end_costs, feasible_actions, lookup_action,
)
from cachestream.policy import ALL_KINDS, PolicyKind
from cachestream.sim import TRACE_FIELDS, run_experiment, run_trial, run_trials, trace_csv

from conftest import tiny_instance
from oracles import enumerate_policies, expectimax, oracle_best_actions, oracle_end

RESULTS: dict[str, str] = {}

P, S, HQ, OS = (PolicyKind.PROPOSED, PolicyKind.STRONGEST, PolicyKind.HIGHEST_QUALITY,
                PolicyKind.ONE_STEP)


def report(key: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}"
    RESULTS[key] = line
    print(line)
    assert ok, line


def tiny_instances(n=120, seed=20240917):
    rng = np.random.default_rng(seed)
    return [tiny_instance(rng) for _ in range(n)]


# 1 -------------------------------------------------------------------------

def test_c1_dp_matches_exhaustive_oracle():
    start = time.perf_counter()
    worst, mismatches, checked = 0.0, 0, 0
    for cfg, bdist, inst in tiny_instances():
        table = backward_dp(cfg.L, bdist, cfg)
        value, q_value = expectimax(inst)
        for t in range(cfg.T + 1):
            for z in range(cfg.Q_tilde + 1):
                worst = max(worst, abs(table.J[t, z] - value(t, z)))
        for t in range(cfg.T):
            for z in range(cfg.Q_tilde + 1):
                for b in range(len(inst["pmf"])):
                    best, vals, opt = oracle_best_actions(inst, t, z, b, q_value)
                    got = lookup_action(table, t, z, b)
                    checked += 1
                    if (got.M, got.q) != best[0] or vals[(got.M, got.q)] > opt + 1e-9:
                        mismatches += 1
    # literal enumeration of every Markov policy, on instances small enough for it
    rng = np.random.default_rng(1)
    worst_enum = 0.0
    for _ in range(10):
        pmf = rng.dirichlet(np.ones(3))
        inst = dict(T=2, Qt=2, c=1, N=[1], P=[30.0], V=float(rng.uniform(0, 2)),
                    A=float(rng.uniform(10, 100)), mu=1.0, pmf=pmf.tolist(), tail=0.0)
        cfg = SimConfig(L=1, p=(1.0,), N=(1,), P=(30.0,), B_max=2, b_unit=1, Q_tilde=2, c=1,
                        T=2, V=inst["V"], A_end=inst["A"], mu=1.0, K=1)
        table = backward_dp(1, BDistribution(pmf, 0.0, 1.0, 1), cfg)
        for z0 in range(3):
            worst_enum = max(worst_enum, abs(table.J[0, z0] - enumerate_policies(inst, z0)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and worst_enum <= 1e-9 and mismatches == 0 and elapsed < 10
    report("1", ok, f"120 instances, max |J - oracle| = {worst:.2e}, "
                    f"{mismatches}/{checked} action mismatches; 10 micro instances vs full "
                    f"policy enumeration, max error {worst_enum:.2e}; {elapsed:.2f} s")


# 2 -------------------------------------------------------------------------

def test_c2_principle_of_optimality():
    worst, theta_diff, subproblems = 0.0, 0, 0
    for cfg, bdist, _ in tiny_instances():
        full = backward_dp(cfg.L, bdist, cfg)
        for j in range(cfg.T):
            sub = backward_dp(cfg.L, bdist, cfg, horizon=cfg.T - j)
            worst = max(worst, float(np.max(np.abs(sub.J - full.J[j:]))))
            theta_diff += int(np.count_nonzero(sub.theta != full.theta[j:]))
            subproblems += 1
    report("2", worst <= 1e-12 and theta_diff == 0,
           f"{subproblems} truncated subproblems, max row difference {worst:.2e}, "
           f"{theta_diff} differing actions")


# 3 -------------------------------------------------------------------------

def test_c3_pmf_fidelity():
    cfg = SimConfig()
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    pvals, norm_err = [], 0.0
    for d in (2.0, 10.0, 30.0):
        bd = pmf_B(d, cfg)
        norm_err = max(norm_err, abs(bd.pmf.sum() + bd.tail_mass - 1.0))
        bits = deliverable_bits(d, rng.standard_exponential(10 ** 6), cfg)
        cells = np.minimum(bits // cfg.b_unit, bd.grid_max + 1)
        observed = np.bincount(cells, minlength=bd.grid_max + 2)
        expected = np.append(bd.pmf, bd.tail_mass) * 1e6
        # pool sparse cells into their neighbour so every expected count >= 5
        keep = expected >= 5
        obs = observed[keep].astype(float)
        exp = expected[keep]
        obs[-1] += observed[~keep].sum()
        exp[-1] += expected[~keep].sum()
        pvals.append(stats.chisquare(obs, exp).pvalue)
    elapsed = time.perf_counter() - start
    ok = min(pvals) > 0.01 and norm_err <= 1e-12 and elapsed < 5
    report("3", ok, "chi-square p-values " + ", ".join(f"{p:.3f}" for p in pvals)
           + f" at d = 2, 10, 30 m; normalization error {norm_err:.1e}; {elapsed:.2f} s")


# 4 -------------------------------------------------------------------------

def test_c4_worked_example():
    cfg = SimConfig(L=2, p=(0.5, 0.5), N=(10_000, 20_000), P=(34.0, 36.64))
    expected = {Action(0), Action(1, 1), Action(2, 1), Action(1, 2)}
    sets = {frozenset(feasible_actions(50, b, 2, cfg)) for b in range(20_000, 30_000)}
    ok = sets == {frozenset(expected)}
    report("4", ok, f"b in [20, 30) kbits gives {sorted(next(iter(sets)))}")


# 5 -------------------------------------------------------------------------

def test_c5_closed_form_round_trips():
    cfg = SimConfig()
    lam_min = min_intensity(cfg)
    e1 = eta(params_from_config(cfg, lambda_n=lam_min), cfg.psi, cfg.upsilon)
    p = params_from_config(cfg)
    e2 = eta(p, cfg.psi, rho_threshold(p, cfg.psi))
    ratio = cfg.N[0] / (cfg.t0 * cfg.W)
    ok = abs(e1 - cfg.eta_min) <= 1e-9 and abs(e2 - cfg.eta_min) <= 1e-9 \
        and abs(lam_min - 0.1113) <= 1e-3
    report("5", ok, f"|eta(lambda_min) - eta_min| = {abs(e1 - cfg.eta_min):.1e}, "
                    f"|eta(rho) - eta_min| = {abs(e2 - cfg.eta_min):.1e}, "
                    f"N1/(t0 W) = {ratio:.3f}, lambda_min = {lam_min:.4f}")


# 6 -------------------------------------------------------------------------

def test_c6_end_costs():
    cfg = SimConfig()
    J = end_costs(cfg)
    inst = dict(Qt=cfg.Q_tilde, c=cfg.c, A=cfg.A_end, mu=cfg.mu)
    points = (0, cfg.Q_tilde - cfg.c, cfg.Q_tilde - cfg.c + 1, cfg.Q_tilde)
    exact = all(J[z] == oracle_end(z, inst) for z in points)
    monotone = bool(np.all(np.diff(J) >= 0))
    report("6", exact and monotone,
           "J_end at z = " + ", ".join(f"{z}: {J[z]:.6g}" for z in points)
           + f"; monotone = {monotone}")


# 7 -------------------------------------------------------------------------

TRIALS = 200


@pytest.fixture(scope="module")
def trends():
    """All desk-scale experiments behind criterion 7, with shared trial seeds."""
    start = time.perf_counter()
    base = SimConfig(K=50, T=5)
    out = {"base": run_experiment(base, ALL_KINDS, TRIALS, base.seed)}
    out["case"] = {1: out["base"]}
    for case in (2, 3):
        out["case"][case] = run_experiment(with_caching_case(base, case), ALL_KINDS, TRIALS,
                                           base.seed)
    out["V"] = {0.015: out["base"]}
    for V in (0.005, 0.05):
        out["V"][V] = run_experiment(base.replace(V=V), [P], TRIALS, base.seed)
    out["ups"] = {5.0: out["base"]}
    for u in (0.0, 10.0):
        out["ups"][u] = run_experiment(base.replace(upsilon_db=u), ALL_KINDS, TRIALS, base.seed)
    out["elapsed"] = time.perf_counter() - start
    out["cfg"] = base
    return out


def q(res, kind):
    return res.mean(kind, res.quality_metric())


def d(res, kind):
    return res.mean(kind, "delay_rate")


def test_c7a_delay_ordering(trends):
    r = trends["base"]
    delays = {k: d(r, k) for k in ALL_KINDS}
    hq_over = delays[HQ] > delays[P] and delays[HQ] > delays[S]
    close = abs(delays[P] - delays[S]) <= 0.01
    os_over = delays[OS] > delays[HQ]
    detail = ", ".join(f"{k.value} {v:.5f}" for k, v in delays.items())
    report("7a", hq_over and close and os_over,
           f"delay {detail}; HQ > P,S {hq_over}; |P - S| <= 0.01 {close}; OS > HQ {os_over}")


def test_c7b_quality_ordering(trends):
    r = trends["base"]
    qual = {k: q(r, k) for k in ALL_KINDS}
    p_over = qual[P] > max(qual[S], qual[HQ])
    os_over = qual[OS] > qual[P]
    detail = ", ".join(f"{k.value} {v:.4f}" for k, v in qual.items())
    report("7b", p_over and os_over,
           f"quality {detail}; P > max(S, HQ) {p_over}; OS > P {os_over}")


def test_c7c_caching_cases(trends):
    cases = trends["case"]
    ok = all(q(cases[1], k) <= q(cases[2], k) <= q(cases[3], k) for k in ALL_KINDS)
    detail = "; ".join(f"{k.value} " + " -> ".join(f"{q(cases[c], k):.3f}" for c in (1, 2, 3))
                       for k in ALL_KINDS)
    report("7c", ok, f"quality over cases 1 -> 3: {detail}")


def test_c7d_V_sweep(trends):
    vs = sorted(trends["V"])
    quals = [q(trends["V"][v], P) for v in vs]
    delays = [d(trends["V"][v], P) for v in vs]
    ok = quals == sorted(quals) and delays == sorted(delays)
    report("7d", ok, f"Proposed over V = {vs}: quality {[round(x, 4) for x in quals]}, "
                     f"delay {[round(x, 5) for x in delays]}")


def test_c7e_upsilon_sweep(trends):
    us = sorted(trends["ups"])
    res = [trends["ups"][u] for u in us]
    q_down = all(q(a, k) >= q(b, k) for k in ALL_KINDS for a, b in zip(res, res[1:]))
    d_up = all(d(a, k) <= d(b, k) for k in ALL_KINDS for a, b in zip(res, res[1:]))
    drop_hq = q(res[0], HQ) - q(res[-1], HQ)
    drop_s = q(res[0], S) - q(res[-1], S)
    ok = q_down and d_up and drop_hq > drop_s
    report("7e", ok and trends["elapsed"] < 300,
           f"upsilon {us} dB: quality non-increasing {q_down}, delay non-decreasing {d_up}, "
           f"quality drop HQ {drop_hq:.3f} vs Strongest {drop_s:.3f}; "
           f"all trend runs {trends['elapsed']:.0f} s")


# 8 -------------------------------------------------------------------------

def test_c8_queue_safety():
    """10^5 frame trajectories: 100 random configs x 250 frames x 4 policies."""
    rng = np.random.default_rng(8)
    trajectories, violations, slots = 0, 0, 0
    for i in range(100):
        Qt = int(rng.integers(1, 31))
        cfg = SimConfig(Q_tilde=Qt, c=int(rng.integers(1, min(Qt, 3) + 1)),
                        V=float(rng.uniform(0, 1)), lam=float(rng.uniform(0.0005, 0.5)),
                        upsilon_db=float(rng.uniform(0, 15)), T=int(rng.integers(1, 6)),
                        K=250, p=with_caching_case(SimConfig(), int(rng.integers(1, 4))).p)
        runs = run_trials(cfg, ALL_KINDS, int(rng.integers(2 ** 32)), trace=True)
        for m in runs.values():
            trajectories += cfg.K
            for row in m.trace:
                r = dict(zip(TRACE_FIELDS, row))
                slots += 1
                bad = not (0 <= r["Q"] <= Qt and 0 <= r["Z"] <= Qt and r["Q"] + r["Z"] == Qt)
                if r["M"]:
                    bad |= r["M"] * cfg.N[r["q"] - 1] > r["b_bits"]
                    bad |= r["M"] > min(r["Z"] + cfg.c, Qt)
                violations += bad
    report("8", violations == 0 and trajectories >= 10 ** 5,
           f"{trajectories} frame trajectories ({slots} slots), {violations} violations")


# 9 -------------------------------------------------------------------------

def test_c9_determinism(tmp_path):
    cfg = SimConfig(K=20)
    runs = [trace_csv(run_trial(cfg, kind, 2024, trace=True)) for kind in ALL_KINDS for _ in (0, 1)]
    trial_same = all(runs[i] == runs[i + 1] for i in range(0, len(runs), 2))
    files = []
    for i in range(2):
        spec = SweepSpec("lambda", [0.2, 0.4], cfg, ALL_KINDS, 3, tmp_path / f"s{i}.csv", 99)
        run_sweep(spec)
        files.append((tmp_path / f"s{i}.csv").read_bytes())
    report("9", trial_same and files[0] == files[1],
           f"run_trial traces identical {trial_same}; sweep CSVs identical {files[0] == files[1]}")


# 10 ------------------------------------------------------------------------

def test_c10_complexity_counter():
    cfg = SimConfig()
    parts, ok = [], True
    for l in range(1, cfg.L + 1):
        table = backward_dp(l, pmf_B(10.0, cfg), cfg)
        info = complexity(table.space, cfg)
        predicted = info["n_states"] * info["N_B"] * info["N_theta"]
        measured = table.evaluations_per_slot
        ok &= measured == info["predicted"] and math.isclose(predicted, measured, rel_tol=0,
                                                             abs_tol=1e-6)
        parts.append(f"type {l}: {measured} = {info['n_states']} x {info['N_B']} x "
                     f"{info['N_theta']:.3f}")
    report("10", ok, "; ".join(parts))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
