"""Acceptance gate: one test per shipped guarantee, tolerances pinned.

Each test prints a single PASS line with the measured margin so a log
scrape shows the whole gate at a glance. Seeds are pinned; every
comparison is against an independently computed reference (exact chain,
closed form, or a frozen construction), never against the code under
test.
"""

import math
import time

import numpy as np
import pytest

import fixlab as fx
from fixlab import Rule, SolveOptions

from .util import random_digraph, random_undirected

NEUTRAL = ("bd", "db", "ld")
BIASED = ("bd-b", "bd-d", "db-b", "db-d", "ld")
FORMULA_RULES = ("bd-b", "bd-d", "db-b", "db-d")


def _report(k, detail):
    print(f"ACCEPTANCE {k}: PASS — {detail}")


def test_criterion_01_solver_matches_exact_chain():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for i in range(50):
        n = 4 + i % 5
        g = random_digraph(3000 + i, n)
        v = int(rng.integers(n))
        for rule in NEUTRAL:
            rep = fx.solve(g, [v], SolveOptions(rule=rule, epsilon=1e-8))
            assert rep.converged
            exact = fx.fixation_exact(fx.build_chain(g, rule=rule), [v])
            worst = max(worst, abs(rep.fixation - exact))
            assert abs(rep.fixation - exact) <= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(1, f"50 digraphs x 3 rules, worst |solve-exact|={worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_singleton_additivity():
    eps = 1e-9
    worst_sum = 0.0
    worst_pair = 0.0
    for i in range(20):
        n = 4 + i % 5
        g = random_digraph(3200 + i, n)
        singles = [
            fx.solve(g, [v], SolveOptions(rule=rule, epsilon=eps)).fixation
            for rule in NEUTRAL
            for v in range(n)
        ]
        for j, rule in enumerate(NEUTRAL):
            block = singles[j * n:(j + 1) * n]
            defect = abs(sum(block) - 1.0)
            worst_sum = max(worst_sum, defect)
            assert defect <= n * eps
            joint = fx.solve(g, [0, 1], SolveOptions(rule=rule, epsilon=eps)).fixation
            pair_defect = abs(block[0] + block[1] - joint)
            worst_pair = max(worst_pair, pair_defect)
            assert pair_defect <= 3 * eps
    _report(2, f"20 instances x 3 rules, worst sum defect={worst_sum:.2e}, "
               f"worst pair defect={worst_pair:.2e}")


def test_criterion_03_undirected_closed_forms():
    worst = 0.0
    for i in range(20):
        n = max(4, 5 + (i * 7) % 26)
        g = random_undirected(4000 + i, n)
        for v in range(g.n):
            for rule in ("bd", "db"):
                ref = fx.undirected_closed_form(g, v, rule=rule).fixation
                got = fx.solve(g, [v], SolveOptions(rule=rule, epsilon=1e-8)).fixation
                worst = max(worst, abs(got - ref))
                assert abs(got - ref) <= 1e-5
    _report(3, f"20 undirected graphs, all singletons, worst |solve-form|={worst:.2e}")


def test_criterion_04_bracket_discipline():
    for i in range(10):
        n = 4 + i % 5
        g = random_digraph(3400 + i, n)
        rep = fx.solve(g, [i % n], SolveOptions(
            rule="bd", epsilon=1e-8, record_trajectory=True))
        tr = rep.trajectory
        assert np.all(np.diff(tr.min) >= -1e-14)
        assert np.all(np.diff(tr.max) <= 1e-14)
        exact = fx.fixation_exact(fx.build_chain(g, rule="bd"), [i % n])
        assert np.all(tr.min <= exact + 1e-12)
        assert np.all(tr.max >= exact - 1e-12)
    _report(4, "10 runs: min/max traces monotone, exact value inside every bracket")


def test_criterion_05_advantage_never_hurts():
    checked = 0
    for i in range(30):
        n = 4 + i % 4
        g = random_digraph(3600 + i, n)
        v = i % n
        for rule in BIASED:
            neutral = fx.fixation_exact(fx.build_chain(g, rule=rule, r=1.0), [v])
            for r in (1.5, 2.0):
                better = fx.fixation_exact(fx.build_chain(g, rule=rule, r=r), [v])
                assert better >= neutral - 1e-12
                checked += 1
    _report(5, f"30 instances x 5 rules x 2 fitness values: {checked} comparisons, "
               "zero violations")


def test_criterion_06_upper_bounds_hold():
    worst_gap = math.inf
    for i in range(30):
        n = 4 + i % 4
        g = random_digraph(3800 + i, n)
        v = (i * 3) % n
        for rule in FORMULA_RULES:
            for r in (1.5, 2.0):
                exact = fx.fixation_exact(fx.build_chain(g, rule=rule, r=r), [v])
                ub = fx.upper_bound_single(g, v, r, rule)
                assert exact <= ub + 1e-12
                worst_gap = min(worst_gap, ub - exact)
    _report(6, f"30 instances x 4 rules x 2 fitness values, min slack={worst_gap:.2e}")


def test_criterion_07_mttf_bound_below_measured_times():
    for n in (6, 8):
        for s in (5000, 5001, 5002):
            g = fx.generate("erdos_renyi", n, seed=s, weighting="random", p=0.5)
            rep = fx.mttf_lower_bound(g, [0], rule="bd")
            assert rep.negative_increments == 0
            exact = fx.mean_times_exact(fx.build_chain(g, rule="bd"), [0]).fixation
            assert rep.lower_bound <= exact
    sim_checked = []
    for n in (10, 20):
        g = fx.generate("erdos_renyi", n, seed=5100 + n, weighting="random", p=0.5)
        rep = fx.mttf_lower_bound(g, [0], rule="bd")
        summ = fx.estimate(g, [0], rule="bd", r=1.0, runs=10_000, seed=77)
        assert summ.fixations >= 2
        se_t = summ.fixation_time_stdev / math.sqrt(summ.fixations)
        assert rep.lower_bound <= summ.mean_fixation_time + 3 * se_t
        sim_checked.append(f"N={n}: {rep.lower_bound:.1f} <= "
                           f"{summ.mean_fixation_time:.1f}+3*{se_t:.1f}")
    _report(7, "exact side N in {6,8} x 3 seeds holds; " + "; ".join(sim_checked))


def test_criterion_08_simulator_matches_exact_chain():
    runs = 2500
    combos = [(rule, 1.0) for rule in NEUTRAL]
    combos += [(rule, r) for rule in BIASED for r in (1.5, 2.0)]
    worst_z = 0.0
    seed = 0
    for gi, gseed in enumerate((61, 62)):
        g = random_digraph(gseed, 5 + 2 * gi)
        config = [0, 2]
        for rule, r in combos:
            exact = fx.fixation_exact(fx.build_chain(g, rule=rule, r=r), config)
            summ = fx.estimate(g, config, rule=rule, r=r, runs=runs, seed=800 + seed)
            seed += 1
            se = max(summ.std_error, math.sqrt(exact * (1 - exact) / runs))
            z = abs(summ.fixation_frequency - exact) / se if se > 0 else 0.0
            worst_z = max(worst_z, z)
            assert z <= 4.0, f"{rule} r={r}: freq={summ.fixation_frequency} exact={exact}"

    # one-step calibration: empirical transition row against the exact row
    g = random_digraph(41, 5)
    config = [0, 3]
    events = 60_000
    chain = fx.build_chain(g, rule="bd-b", r=1.5)
    dests, probs = chain.row(fx.state_of(config))
    row = dict(zip(dests.tolist(), probs.tolist()))
    counts = fx.sample_transitions(g, config, rule="bd-b", r=1.5, events=events, seed=9)
    assert set(counts) <= set(row)
    for state, q in row.items():
        freq = counts.get(state, 0) / events
        margin = 5 * math.sqrt(q * (1 - q) / events) + 1e-9
        assert abs(freq - q) <= margin
    _report(8, f"26 rule/fitness combos within 4 SE of exact (worst z={worst_z:.2f}); "
               "one-step transition frequencies match the exact row")


def test_criterion_09_iteration_beats_simulation_to_its_error_band():
    g = fx.generate("preferential_attachment", 100, seed=934, weighting="random", m=2)
    res = fx.speedup_benchmark(g, [93], "bd", 1.0, mc_runs=2000, seed=910)
    assert res.entered_band
    assert res.speedup >= 10.0
    _report(9, f"100-node scale-free digraph: {res.speedup:.0f}x "
               f"(simulation {res.mc_time:.1f}s, iteration to the error band "
               f"{res.solver_time * 1e3:.1f}ms, {res.solver_iterations} iterations)")


def test_criterion_10_average_trace_converges_first():
    g = fx.generate("erdos_renyi", 100, seed=1001, weighting="random", p=0.5)
    rep = fx.solve(g, [0], SolveOptions(
        rule="bd", epsilon=1e-6, record_trajectory=True))
    tr = rep.trajectory
    final = rep.fixation

    def first_stay_within(series, tol):
        off = np.flatnonzero(np.abs(series - final) > tol)
        return 0 if off.size == 0 else int(off[-1]) + 1

    hit_avg = first_stay_within(tr.avg, 1e-3)
    hit_min = first_stay_within(tr.min, 1e-3)
    hit_max = first_stay_within(tr.max, 1e-3)
    assert hit_avg < hit_min
    assert hit_avg < hit_max

    checkpoints = [2 ** k for k in range(11)] + [len(tr.stdev) - 1]
    stdevs = [tr.stdev[c] for c in checkpoints]
    assert all(b < a for a, b in zip(stdevs, stdevs[1:]))
    _report(10, f"avg trace stays within 1e-3 from iteration {hit_avg}, "
                f"min from {hit_min}, max from {hit_max}; stdev decreasing over "
                f"{len(checkpoints)} log-spaced checkpoints")


def test_criterion_11_trajectory_phenomena():
    def averages(kind, **kw):
        early, plateau = [], []
        for s in range(7000, 7050):
            g = fx.generate(kind, 100, seed=s, weighting="unweighted", **kw)
            v = int(np.argmin(g.k_out))
            early.append(fx.trajectory(g, [v], rule="bd", steps=10).ex[-1])
            plateau.append(fx.undirected_closed_form(g, v, rule="bd").limit_expected_mutants)
        return float(np.mean(early)), float(np.mean(plateau))

    ba = averages("preferential_attachment", m=1)
    er = averages("erdos_renyi", p=0.2)
    nws = averages("small_world", k=4, p=1.0)
    assert ba[0] > er[0] and ba[0] > nws[0]
    assert ba[1] < er[1] and ba[1] < nws[1]

    fg = fx.feeder_pair_graph(100, seed=7100)
    tab = fx.trajectory(fg.graph, [fg.feeder_mutant], rule="bd", steps=60_000)
    frac = tab.ex[-1] / fg.graph.n
    assert abs(frac - 0.5) <= 0.05
    _report(11, f"50-seed averages: early growth BA {ba[0]:.3f} > ER {er[0]:.3f}, "
                f"NWS {nws[0]:.3f}; plateau BA {ba[1]:.2f} < NWS {nws[1]:.2f} < "
                f"ER {er[1]:.2f}; feeder pair settles at {frac:.3f} of the population")
