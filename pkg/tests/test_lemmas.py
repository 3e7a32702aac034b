"""Conditional-law verdicts: exact rational equalities and MC tolerances."""

import itertools
import random
from fractions import Fraction

import pytest

from designcount.core import DesignError, validate_triple_system
from designcount.enumeration import enumerate_pool
from designcount.entropylab import (
    EmptyConditionError,
    TooLargeError,
    verify_M_expectation,
    verify_N_law,
    verify_position_law,
    verify_suite,
)
from designcount.entropylab.lemmas import verdicts_to_csv, verdicts_to_json

from oracles import FANO

FANO_TS = validate_triple_system(7, FANO)


class TestPositionLawExact:
    def test_1f_n6_all_positions(self):
        verdicts = verify_position_law("1f", 6, "exact")
        assert [v.conditioning["p"] for v in verdicts] == [1, 2, 3, 4, 5]
        assert all(v.passed for v in verdicts)
        assert verdicts[0].formula == Fraction(1, 3)
        assert verdicts[0].observed == Fraction(1, 3)

    def test_sts_n7_all_positions(self):
        verdicts = verify_position_law("sts", 7, "exact")
        assert [v.conditioning["p"] for v in verdicts] == [1, 2, 3, 4, 5]
        assert all(v.passed for v in verdicts)
        assert verdicts[4].formula == Fraction(1, 35)

    def test_probabilities_sum_to_one(self):
        for variant, n in (("1f", 6), ("sts", 7)):
            verdicts = verify_position_law(variant, n, "exact")
            assert sum(v.formula for v in verdicts) == 1

    def test_q_law_m5(self):
        verdicts = verify_position_law("sts", 5, "exact", law="q")
        assert all(v.passed for v in verdicts)
        assert verdicts[3].formula == Fraction(1, 10)
        assert verdicts[3].observed == Fraction(1, 10)

    def test_too_large(self):
        with pytest.raises(TooLargeError):
            verify_position_law("1f", 12, "exact")


class TestPositionLawMC:
    def test_1f_within_5_sigma(self):
        verdicts = verify_position_law("1f", 6, "mc", samples=20_000, seed=5)
        assert all(v.passed for v in verdicts)
        assert all(v.se is not None and v.se > 0 for v in verdicts)

    def test_q_law_mc(self):
        verdicts = verify_position_law("sts", 5, "mc", samples=20_000, seed=5, law="q")
        assert all(v.passed for v in verdicts)


class TestMExpectation1f:
    def test_measured_form_and_printed_discrepancy(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        derived_all, printed_all = [], []
        for p in range(1, 6):
            main, info = verify_M_expectation("1f", X, 1, 2, p, "exact")
            assert main.lemma == "exp-m" and info.informational
            derived_all.append(main.passed)
            printed_all.append(info.passed)
        assert all(derived_all)
        assert not all(printed_all)   # the printed denominator fails below p=4

    def test_nothing_ruled_out_when_first(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        main, info = verify_M_expectation("1f", X, 1, 2, 1, "exact")
        assert main.observed == 5            # n-1: anchor leads the order
        assert info.formula == Fraction(17, 5)
        assert not info.passed

    def test_every_pair_matches_measured_form(self):
        X = enumerate_pool("1f-labeled", 6).items[3]
        for i, j in itertools.permutations(range(1, 7), 2):
            for p in (1, 3, 5):
                main = verify_M_expectation("1f", X, i, j, p, "exact")[0]
                assert main.passed

    def test_empty_condition(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        with pytest.raises(EmptyConditionError):
            verify_M_expectation("1f", X, 1, 2, 6, "exact")   # no room for j

    def test_mc_agrees(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        # p=2 leaves no randomness in M (one earlier vertex always rules
        # out two colors); p=3 has genuine variance
        det = verify_M_expectation("1f", X, 1, 2, 2, "mc", samples=20_000, seed=3)[0]
        assert det.passed and det.se == 0.0 and det.observed == 3.0
        noisy = verify_M_expectation("1f", X, 1, 2, 3, "mc", samples=20_000, seed=3)[0]
        assert noisy.passed and noisy.se > 0


class TestMExpectationSts:
    def test_leading_anchor_sees_everything(self):
        out = verify_M_expectation("sts", FANO_TS, 2, 4, 1, "exact")
        assert len(out) == 1
        assert out[0].observed == 5 and out[0].formula == 5   # n-2 at p=1

    def test_zero_product_tail(self):
        out = verify_M_expectation("sts", FANO_TS, 2, 4, 3, "exact")
        assert out[0].observed == 1 and out[0].formula == 1

    def test_all_pairs_all_positions(self):
        for i, j in itertools.permutations(range(1, 8), 2):
            for p in range(1, 6):
                v = verify_M_expectation("sts", FANO_TS, i, j, p, "exact")[0]
                assert v.passed, (i, j, p)


class TestNLaw1f:
    def test_uniform_on_identity_order(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        verdicts = verify_N_law("1f", X, (1, 2, 3, 4, 5, 6), 1, 4)
        M = verdicts[0].conditioning["M"]
        assert len(verdicts) == M
        for v in verdicts:
            assert v.passed and v.formula == Fraction(1, M)

    def test_uniform_on_random_orders(self):
        rnd = random.Random(3)
        pool = enumerate_pool("1f-labeled", 6).items
        for _ in range(6):
            X = rnd.choice(pool)
            vo = list(range(1, 7))
            rnd.shuffle(vo)
            i = vo[0]
            j = rnd.choice(vo[1:])
            verdicts = verify_N_law("1f", X, tuple(vo), i, j)
            assert all(v.passed for v in verdicts)

    def test_needs_i_before_j(self):
        X = enumerate_pool("1f-labeled", 6).items[0]
        with pytest.raises(EmptyConditionError):
            verify_N_law("1f", X, (2, 1, 3, 4, 5, 6), 1, 2)


class TestNLawSts:
    def test_first_position_keeps_all_of_mset(self):
        # q=1: nothing in the star precedes {i,j}, so E[N] = l exactly
        v = verify_N_law("sts", FANO_TS, (1, 2, 3, 4, 5, 6, 7), 2, 4, q=1)[0]
        assert v.observed == v.conditioning["l"] and v.passed

    def test_q_sweep_identity_order(self):
        for q in (1, 2, 3, 4):
            v = verify_N_law("sts", FANO_TS, (1, 2, 3, 4, 5, 6, 7), 2, 4, q=q)[0]
            assert v.passed

    def test_zero_product_collapse_at_q_m_minus_2(self):
        # at q = m-2 the quadratic factor (m-q-1)(m-q-2) vanishes, so the
        # expectation collapses to 1 whatever l is; check it at reachable
        # configurations: (m=5, l=2) at n=7 and (m=6, l=3) at n=9
        v = verify_N_law("sts", FANO_TS, (1, 2, 3, 4, 5, 6, 7), 2, 4, q=3)[0]
        assert v.conditioning["m"] == 5 and v.conditioning["l"] == 2
        assert v.formula == 1 and v.observed == 1 and v.passed

        pool = enumerate_pool("sts", 9)
        rnd = random.Random(4)
        found = None
        while found is None:
            X = pool.items[rnd.randrange(len(pool))]
            vo = list(range(1, 10))
            rnd.shuffle(vo)
            pos = {v: p for p, v in enumerate(vo)}
            i = vo[2]                         # anchor third: star size m = 6
            for j in vo[3:]:
                k = X.table[i][j]
                if pos[k] < pos[i]:
                    continue
                others = [t for t in range(1, 10) if t not in (i, j)]
                l = sum(1 for t in others
                        if pos[t] > pos[i]
                        and pos[X.table[i][t]] >= pos[i]
                        and pos[X.table[j][t]] >= pos[i])
                if l == 3:
                    found = (X, tuple(vo), i, j)
                    break
        X, vo, i, j = found
        v = verify_N_law("sts", X, vo, i, j, q=4)[0]
        assert v.conditioning["m"] == 6 and v.conditioning["l"] == 3
        assert v.formula == 1 and v.observed == 1 and v.passed

    def test_m5_l3_is_unreachable(self):
        # no reveal of any triple system on 7 or 9 points produces star
        # size 5 with three open values: one anchor-preceding vertex rules
        # out exactly three points (n=7), and with three preceding vertices
        # (n=9) at least four are always closed; checked exhaustively over
        # every earlier-subset for one system of each order
        for n, X in ((7, FANO_TS), (9, enumerate_pool("sts", 9).items[0])):
            m = 5
            earlier = n - 1 - m
            for i, j in itertools.permutations(range(1, n + 1), 2):
                k = X.table[i][j]
                others = set(range(1, n + 1)) - {i, j}
                for W in itertools.combinations(sorted(others - {k}), earlier):
                    ruled = set(W)
                    for w in W:
                        ruled.add(X.table[i][w])
                        ruled.add(X.table[j][w])
                    assert len(others - ruled) != 3

    def test_empty_condition_when_k_precedes(self):
        # find an order where k lands before i
        for vo in itertools.permutations(range(1, 8)):
            pos = {v: p for p, v in enumerate(vo)}
            i, j = 2, 4
            k = FANO_TS.table[i][j]
            if pos[i] < pos[j] and pos[k] < pos[i]:
                with pytest.raises(EmptyConditionError):
                    verify_N_law("sts", FANO_TS, vo, i, j, q=1)
                return
        pytest.fail("no qualifying order found")


class TestSuitesAndSerialization:
    def test_dist_p_suite(self):
        verdicts = verify_suite("dist-p", "1f", 6, "exact")
        assert all(v.passed for v in verdicts)

    def test_exp_m_suite_reports_discrepancy(self):
        verdicts = verify_suite("exp-m", "1f", 6, "exact")
        gate = [v for v in verdicts if not v.informational]
        info = [v for v in verdicts if v.informational]
        assert all(v.passed for v in gate)
        assert any(not v.passed for v in info)

    def test_exp_m_2_suite(self):
        verdicts = verify_suite("exp-m-2", "sts", 7, "exact")
        assert all(v.passed for v in verdicts)

    def test_n_law_suites(self):
        assert all(v.passed for v in verify_suite("n-law", "1f", 6, "exact"))
        assert all(v.passed for v in verify_suite("n-law", "sts", 7, "exact"))

    def test_variant_mismatch(self):
        with pytest.raises(DesignError):
            verify_suite("dist-p", "sts", 7, "exact")

    def test_unknown_lemma(self):
        with pytest.raises(DesignError):
            verify_suite("dist-q", "1f", 6, "exact")

    def test_csv_columns(self):
        verdicts = verify_position_law("1f", 6, "exact")
        lines = verdicts_to_csv(verdicts).splitlines()
        assert lines[0] == ("lemma,variant,n,conditioning,formula-num,formula-den,"
                            "observed-num,observed-den,se,pass")
        assert lines[1] == "dist-p,1f,6,p=1,1,3,1,3,,True"

    def test_json_exact_rationals(self):
        import json
        verdicts = verify_position_law("sts", 7, "exact")
        docs = json.loads(verdicts_to_json(verdicts))
        assert docs[4]["formula"] == [1, 35] and docs[4]["observed"] == [1, 35]
