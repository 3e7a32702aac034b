"""Acceptance gate: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL
line per criterion.  Exact criteria use rational arithmetic with zero
tolerance; Monte-Carlo criteria use 3 standard errors at 100k samples;
the only float allowance on "no tolerance" checks is 1e-9 roundoff on
sums of logarithms.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction

from designcount.cli import main as cli_main
from designcount.bounds import (
    cameron_lower_log,
    peel_bound_log,
    vdw_latin_lower_log,
    wilson_bounds,
)
from designcount.enumeration import (
    SearchConfig,
    count_latin_squares,
    count_one_factorizations,
    count_triple_systems,
    enumerate_pool,
)
from designcount.entropylab import (
    entropy_upper_estimate,
    finite_sum_rate,
    verify_M_expectation,
    verify_N_law,
    verify_position_law,
)

import oracles

SEED = 42
MC_SAMPLES = 100_000


def report(criterion: int, description: str, ok: bool) -> None:
    print(f"ACCEPTANCE {criterion}: {description}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {criterion} failed: {description}"


def test_criterion_1_exact_counts_with_oracles():
    cfg = SearchConfig(jobs=8)
    runs = [
        ("STS(7)", lambda: count_triple_systems(7, cfg), 30,
         lambda: oracles.oracle_count_sts(7)),
        ("STS(9)", lambda: count_triple_systems(9, cfg), 840,
         lambda: oracles.oracle_count_sts(9)),
        ("1F(4) labeled", lambda: count_one_factorizations(4, True, cfg), 6,
         lambda: oracles.oracle_count_1f_labeled(4)),
        ("1F(6) labeled", lambda: count_one_factorizations(6, True, cfg), 720,
         lambda: oracles.oracle_count_1f_labeled(6)),
        ("1F(8) unordered", lambda: count_one_factorizations(8, False, cfg), 6240,
         lambda: oracles.oracle_count_1f_unordered(8)),
        ("L(3)", lambda: count_latin_squares(3, cfg), 12,
         lambda: oracles.oracle_count_latin_bruteforce(3)),
        ("L(5)", lambda: count_latin_squares(5, cfg), 161280,
         lambda: oracles.oracle_count_latin_reduced(5)),
    ]
    ok = True
    for name, runner, expected, oracle in runs:
        t0 = time.perf_counter()
        result = runner()
        elapsed = time.perf_counter() - t0
        good = (result.count == expected == oracle() and result.complete
                and elapsed < 60.0)
        if not good:
            print(f"  {name}: got {result.count}, expected {expected}, "
                  f"{elapsed:.1f}s")
        ok &= good
    report(1, "exact counts match independent naive oracles, each < 60 s", ok)


def test_criterion_2_position_laws_exact():
    v1 = verify_position_law("1f", 6, "exact")
    v2 = verify_position_law("sts", 7, "exact")
    ok = (len(v1) == 5 and all(v.passed for v in v1)
          and all(v.observed == v.formula for v in v1))
    ok &= (len(v2) == 5 and all(v.passed for v in v2)
           and all(v.observed == v.formula for v in v2))
    report(2, "position laws exact over full order enumerations (zero tolerance)", ok)


def test_criterion_3_expected_m_sts_every_system_pair_position():
    pool = enumerate_pool("sts", 7)
    ok = True
    for X in pool.items:
        for i, j in itertools.permutations(range(1, 8), 2):
            for p in range(1, 6):
                v = verify_M_expectation("sts", X, i, j, p, "exact")[0]
                expected = 1 + Fraction((5 - p) * (4 - p) * (3 - p), 6)
                ok &= v.passed and v.formula == expected and isinstance(v.observed, Fraction)
                if not ok:
                    print(f"  first failure at system, pair ({i},{j}), p={p}")
                    report(3, "expected-M law (triple systems) exact everywhere", False)
    report(3, "expected-M law (triple systems) exact for all 30 systems, "
              "42 ordered pairs, p in 1..5", ok)


def test_criterion_4_expected_m_1f_oracle_decides_between_closed_forms():
    pool = enumerate_pool("1f-labeled", 6)
    rnd = random.Random(SEED)
    systems = [pool.items[0]] + [pool.items[rnd.randrange(720)] for _ in range(3)]
    rows = []
    derived_ok, printed_ok = True, True
    for X in systems:
        for (i, j) in ((1, 2), (3, 5), (6, 2)):
            for p in range(1, 6):
                main_v, printed_v = verify_M_expectation("1f", X, i, j, p, "exact")
                rows.append((p, main_v.observed, main_v.formula, printed_v.formula,
                             main_v.passed, printed_v.passed))
                derived_ok &= main_v.passed
                printed_ok &= printed_v.passed
    exactly_one_form = derived_ok != printed_ok
    print("  p  oracle     reconstruction(n-3)  printed(n-1)  matches")
    for p, obs, der, pri, md, mp in rows[:5]:
        print(f"  {p}  {str(obs):>9s}  {str(der):>19s}  {str(pri):>12s}  "
              f"derived={md} printed={mp}")
    print(f"  discrepancy report: reconstruction matches for all p: {derived_ok}; "
          f"printed form matches for all p: {printed_ok}")
    report(4, "1f expected-M oracle matches exactly one closed form "
              "(the n-3 reconstruction) and the discrepancy is reported",
           exactly_one_form and derived_ok)


def test_criterion_5_n_laws_exact():
    ok = True
    # uniformity of N for edge colorings: fixed design and vertex order,
    # all star orders, exact uniform distribution on {1..M}
    pool6 = enumerate_pool("1f-labeled", 6)
    orders = [(1, 2, 3, 4, 5, 6), (4, 1, 6, 2, 5, 3)]
    for X in (pool6.items[0], pool6.items[500]):
        for vo in orders:
            pos = {v: p for p, v in enumerate(vo)}
            for i, j in itertools.permutations(range(1, 7), 2):
                if pos[i] > pos[j]:
                    continue
                verdicts = verify_N_law("1f", X, vo, i, j, mode="exact")
                m_size = verdicts[0].conditioning["M"]
                ok &= len(verdicts) == m_size
                ok &= all(v.passed and v.observed == Fraction(1, m_size)
                          for v in verdicts)
    # expected N for triple systems: every informative pair and position
    pool7 = enumerate_pool("sts", 7)
    orders7 = [(1, 2, 3, 4, 5, 6, 7), (3, 6, 1, 7, 4, 2, 5)]
    checked = 0
    for X in (pool7.items[0], pool7.items[17]):
        for vo in orders7:
            pos = {v: p for p, v in enumerate(vo)}
            for i, j in itertools.permutations(range(1, 8), 2):
                if pos[i] > pos[j] or pos[X.table[i][j]] < pos[i]:
                    continue
                m = 7 - 1 - pos[i]
                for q in range(1, m):
                    v = verify_N_law("sts", X, vo, i, j, q=q, mode="exact")[0]
                    ok &= v.passed and isinstance(v.observed, Fraction)
                    checked += 1
    ok &= checked > 100
    report(5, f"N laws exact (1f uniformity; sts expectation, {checked} "
              "conditionings), zero tolerance", ok)


def test_criterion_6_chain_rule_inequalities():
    cases = [
        ("sts", 7, math.log(30)),
        ("sts", 9, math.log(840)),
        ("1f", 6, math.log(720)),
    ]
    ok = True
    for variant, n, logc in cases:
        t0 = time.perf_counter()
        est = entropy_upper_estimate(variant, n, MC_SAMPLES, seed=SEED, jobs=2)
        elapsed = time.perf_counter() - t0
        good = est.estimate >= logc - 3 * est.se - 1e-9 and elapsed <= 300
        print(f"  {variant} n={n}: estimate {est.estimate:.4f} +- {est.se:.4f} "
              f">= log-count {logc:.4f} ({elapsed:.0f}s): {good}")
        ok &= good
    t0 = time.perf_counter()
    est = entropy_upper_estimate("1f", 4, samples=0)
    elapsed = time.perf_counter() - t0
    exact_good = est.exact and est.estimate >= math.log(6) - 1e-9 and elapsed <= 300
    print(f"  1f n=4 exact: {est.estimate:.6f} >= log 6: {exact_good}")
    report(6, "chain-rule estimates dominate exact log-counts "
              "(3 SE at 100k samples; exact at 1f n=4)", ok and exact_good)


def test_criterion_7_bound_sandwiches():
    ok = True
    for n in (7, 9):
        lo, hi = wilson_bounds(n)
        logc = math.log(count_triple_systems(n).count)
        ok &= lo.value <= logc <= hi.value
    for n in (2, 4, 6, 8):
        labeled = count_one_factorizations(n, labeled=True).count
        ok &= peel_bound_log(n).value >= math.log(labeled)
    for n in range(1, 6):
        ok &= vdw_latin_lower_log(n).value <= math.log(count_latin_squares(n).count)
    cameron = cameron_lower_log(8, latin_count=count_latin_squares(4).count,
                                onef_count=count_one_factorizations(4).count)
    ok &= cameron.value <= math.log(count_one_factorizations(8).count)
    report(7, "bound sandwiches hold against exact counts", ok)


def test_criterion_8_rate_convergence():
    t0 = time.perf_counter()
    ok = True
    for variant in ("1f", "sts"):
        r3 = finite_sum_rate(variant, 1_000)
        r4 = finite_sum_rate(variant, 10_000)
        print(f"  {variant}: |sum - (log n - 1)| = {r3.gap:.6f} at 1e3, "
              f"{r4.gap:.6f} at 1e4")
        ok &= r4.gap < r3.gap and r4.gap < 0.1
    elapsed = time.perf_counter() - t0
    report(8, f"finite sums contract toward log n - 1 ({elapsed:.2f}s <= 10s)",
           ok and elapsed <= 10)


def test_criterion_9_reproducibility(capsys):
    ok = True
    for variant, n in (("sts", 7), ("1f", 6)):
        runs = [entropy_upper_estimate(variant, n, 10_000, seed=SEED, jobs=j)
                for j in (1, 2, 8)]
        runs += [entropy_upper_estimate(variant, n, 10_000, seed=SEED, jobs=1)]
        ok &= len({(r.estimate, r.se) for r in runs}) == 1
    # the CLI surface is byte-identical too
    outs = []
    for jobs in ("1", "2", "8", "1"):
        code = cli_main(["entropy", "--variant", "sts", "--n", "7",
                         "--samples", "5000", "--seed", str(SEED),
                         "--jobs", jobs])
        captured = capsys.readouterr()
        outs.append(captured.out)
        ok &= code == 0
    ok &= len(set(outs)) == 1 and json.loads(outs[0])["verdict"] == "PASS"
    with capsys.disabled():
        print()
        report(9, "Monte-Carlo results byte-identical across repeats and "
                  "--jobs in {1,2,8}", ok)
