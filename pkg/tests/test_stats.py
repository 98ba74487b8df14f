import json
import math
from fractions import Fraction

import numpy as np
import pytest

from nilprob.errors import CapExceededError
from nilprob.groups import direct_product, quotient_table
from nilprob.structure import subgroups
from nilprob.tables import corpus_group, symmetric3
from nilprob import stats


def commuting_pair_count(G):
    return sum(
        1 for x in G.elements() for y in G.elements() if G.mul(x, y) == G.mul(y, x)
    )


def d2_brute(G):
    m = G.order
    hits = 0
    for x in range(m):
        for y in range(m):
            c = G.commutator(x, y)
            for z in range(m):
                if G.commutator(c, z) == 0:
                    hits += 1
    return Fraction(hits, m**3)


class TestD1:
    def test_abelian_is_one(self):
        assert stats.d1_exact(corpus_group("c6")).value == 1

    def test_s3_pair_count(self):
        S3 = symmetric3()
        rep = stats.d1_exact(S3)
        assert rep.value == Fraction(1, 2)
        assert rep.value == Fraction(commuting_pair_count(S3), S3.order**2)

    def test_q8_attains_nonabelian_maximum(self):
        Q8 = corpus_group("q8")
        rep = stats.d1_exact(Q8)
        assert rep.value == Fraction(5, 8)
        assert rep.value == Fraction(commuting_pair_count(Q8), Q8.order**2)

    def test_class_count_equals_pair_count_corpus_wide(self, corpus_groups):
        for G in corpus_groups.values():
            assert stats.d1_exact(G).value == Fraction(
                commuting_pair_count(G), G.order**2
            )

    def test_nonabelian_bound_five_eighths(self, corpus_groups):
        for G in corpus_groups.values():
            if not G.is_abelian:
                assert stats.d1_exact(G).value <= Fraction(5, 8)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            stats.d1_exact(corpus_group("a4"), cap=4)

    def test_family_d1(self, family21):
        # 56 classes over 512 elements; frozen after the class partition was
        # cross-checked against full-conjugation orbits
        assert stats.d1_exact(family21).value == Fraction(56, 512)


class TestD2:
    def test_class_two_group_is_one(self):
        assert stats.d2_exact(corpus_group("q8")).value == 1
        assert stats.d2_exact(corpus_group("d4")).value == 1

    def test_s3_brute_force(self):
        S3 = symmetric3()
        assert stats.d2_exact(S3).value == d2_brute(S3) == Fraction(3, 4)

    def test_matches_brute_force_on_small_groups(self):
        for name in ("c4", "s3", "q8"):
            G = corpus_group(name)
            assert stats.d2_exact(G).value == d2_brute(G)

    def test_family_n1_frozen_value(self, family21):
        rep = stats.d2_exact(family21)
        assert rep.value >= Fraction(1, 8)
        assert rep.value == Fraction(65, 128)

    def test_family_matches_full_pair_sum(self, family21):
        # same statistic without the class-representative reduction
        G = family21
        eng = G.batch
        elems = list(G.elements())
        flat = np.array([e.coords() for e in elems], dtype=np.int64)
        total = 0
        from nilprob.groups import GroupElement

        a = eng.from_coords(np.repeat(flat, len(elems), axis=0))
        b = eng.from_coords(np.tile(flat, (len(elems), 1)))
        comms = eng.coords(eng.commutator(a, b)).astype(np.uint8)
        for key, cnt in zip(*np.unique(comms, axis=0, return_counts=True)):
            g = GroupElement.from_coords(G.params, tuple(int(v) for v in key))
            total += int(cnt) * (G.order // G.class_size(g))
        assert stats.d2_exact(G).value == Fraction(total, G.order**3)

    def test_cap(self, family22):
        with pytest.raises(CapExceededError):
            stats.d2_exact(family22)


class TestMonteCarlo:
    def test_abelian_estimate_one(self):
        rep = stats.dk_monte_carlo(corpus_group("c6"), 2, 2000, seed=1)
        assert rep.value == 1.0
        assert rep.ci_high == 1.0
        assert rep.ci_low <= 1.0

    def test_seed_deterministic(self, family21):
        a = stats.dk_monte_carlo(family21, 2, 50_000, seed=9)
        b = stats.dk_monte_carlo(family21, 2, 50_000, seed=9)
        assert (a.value, a.ci_low, a.ci_high) == (b.value, b.ci_low, b.ci_high)
        c = stats.dk_monte_carlo(family21, 2, 50_000, seed=10)
        assert a.value != c.value

    def test_thread_count_does_not_change_estimate(self, family21):
        a = stats.dk_monte_carlo(family21, 2, 150_000, seed=3, threads=1)
        b = stats.dk_monte_carlo(family21, 2, 150_000, seed=3, threads=4)
        assert a.value == b.value

    def test_ci_contains_exact_for_most_seeds(self, family21):
        exact = float(stats.d2_exact(family21).value)
        hits = 0
        for seed in range(50):
            rep = stats.dk_monte_carlo(family21, 2, 4000, seed=seed)
            if rep.ci_low <= exact <= rep.ci_high:
                hits += 1
        assert hits >= 48

    def test_table_group_k1_matches_d1(self):
        S3 = symmetric3()
        exact = float(stats.d1_exact(S3).value)
        rep = stats.dk_monte_carlo(S3, 1, 200_000, seed=4)
        assert rep.ci_low <= exact <= rep.ci_high

    def test_validation(self, family21):
        with pytest.raises(ValueError):
            stats.dk_monte_carlo(family21, 0, 10)
        with pytest.raises(ValueError):
            stats.dk_monte_carlo(family21, 1, 0)

    def test_report_json_shape(self, family21):
        rep = stats.dk_monte_carlo(family21, 2, 1000, seed=5)
        d = rep.to_json_dict()
        assert d["kind"] == "monte-carlo"
        assert set(d) == {"kind", "estimate", "ci_low", "ci_high", "samples", "seed", "elapsed_ms"}
        exact = stats.d1_exact(symmetric3()).to_json_dict()
        assert set(exact) == {"kind", "value_num", "value_den", "elapsed_ms"}
        json.dumps(d), json.dumps(exact)


class TestConjugacyNorm:
    def test_identity_is_zero(self, family21):
        assert stats.conjugacy_norm(family21, family21.identity) == 0.0
        assert stats.conjugacy_norm(symmetric3(), 0) == 0.0

    def test_invariance_and_symmetry(self, family21):
        rng = np.random.default_rng(6)
        for _ in range(50):
            g, h = family21.random_elements(rng, 2)
            n = stats.conjugacy_norm(family21, g)
            assert stats.conjugacy_norm(family21, family21.conjugate(g, h)) == n
            assert stats.conjugacy_norm(family21, family21.inverse(g)) == n

    def test_triangle_inequality_q8_and_family(self, family21):
        Q8 = corpus_group("q8")
        for g in Q8.elements():
            for h in Q8.elements():
                assert (
                    stats.conjugacy_norm(Q8, Q8.mul(g, h))
                    <= stats.conjugacy_norm(Q8, g) + stats.conjugacy_norm(Q8, h) + 1e-12
                )
        rng = np.random.default_rng(7)
        for _ in range(200):
            g, h = family21.random_elements(rng, 2)
            assert (
                stats.conjugacy_norm(family21, family21.mul(g, h))
                <= stats.conjugacy_norm(family21, g)
                + stats.conjugacy_norm(family21, h)
                + 1e-12
            )

    def test_base_conventions(self, family21):
        # family norms are base-p logs of p-power class sizes, so integers
        rng = np.random.default_rng(8)
        for g in family21.random_elements(rng, 20):
            n = stats.conjugacy_norm(family21, g)
            assert abs(n - round(n)) < 1e-9
        Q8 = corpus_group("q8")
        i = next(g for g in Q8.elements() if Q8.class_size(g) == 2)
        assert stats.conjugacy_norm(Q8, i) == pytest.approx(math.log(2))


class TestCovering:
    def test_family_bound8_identity(self, family21):
        w = stats.covering_check(family21, 8, [family21.identity])
        assert w.ok and w.exhaustive
        assert w.verified_fraction == 1

    def test_abelian_bound1_identity(self):
        C6 = corpus_group("c6")
        w = stats.covering_check(C6, 1, [0])
        assert w.ok

    def test_s3_bound1_counterexample(self):
        S3 = symmetric3()
        w = stats.covering_check(S3, 1, [0])
        assert not w.ok
        assert w.counterexample is not None
        assert S3.class_size(w.counterexample) > 1

    def test_sampled_mode(self, family22):
        w = stats.covering_check(family22, 8, [family22.identity], mode="sampled",
                                 samples=500, seed=11)
        assert w.ok and not w.exhaustive
        assert w.checked == 500

    def test_monotone_in_n_and_s(self, corpus_groups):
        # a passing check never turns failing when n grows or S gains elements
        for name in ("s3", "d4", "q8", "a4"):
            G = corpus_groups[name]
            comm = stats.commutator_set(G)
            for n in (1, 2, 3):
                base = stats.covering_check(G, n, [0])
                if base.ok:
                    assert stats.covering_check(G, n + 1, [0]).ok
                    for extra in comm[:3]:
                        assert stats.covering_check(G, n, [0, extra]).ok
        S3 = symmetric3()
        assert not stats.covering_check(S3, 1, [0]).ok
        assert stats.covering_check(S3, 2, [0]).ok
        assert stats.covering_check(S3, 1, stats.commutator_set(S3)).ok

    def test_minimal_s_family(self, family21):
        w = stats.covering_minimal_S(family21, 8)
        assert w.ok
        assert w.S == [family21.identity]
        assert w.exact_minimum is True

    def test_minimal_s_abelian(self):
        w = stats.covering_minimal_S(corpus_group("c4"), 1)
        assert w.S == [0]
        assert w.exact_minimum is True

    def test_minimal_s_s3_exact_cover(self):
        # with n = 1 the ball around s is {s} itself, so S must be the whole
        # commutator set: all three rotations' values
        S3 = symmetric3()
        w = stats.covering_minimal_S(S3, 1)
        assert w.ok
        assert w.exact_minimum is True
        assert sorted(w.S) == stats.commutator_set(S3)
        assert len(w.S) == 3

    def test_subgroup_heredity(self, corpus_groups):
        # a group covering with (n, {1}) hands every small-index subgroup a
        # covering with (n^2, S')
        checked = 0
        for G in corpus_groups.values():
            if G.order < 4:
                continue
            n = max(G.class_size(c) for c in stats.commutator_set(G))
            assert stats.covering_check(G, n, [0]).ok
            for H in subgroups(G):
                if G.order // len(H) > 4 or len(H) == 1:
                    continue
                n2, Hgrp, s_prime = stats.covering_for_subgroup(G, H, n, [0])
                assert n2 == n * n
                w = stats.covering_check(Hgrp, n2, s_prime)
                assert w.ok, (G.name, sorted(H))
                checked += 1
        assert checked >= 5


class TestSubmultiplicativity:
    def pairs(self):
        S3 = symmetric3()
        D4 = corpus_group("d4")
        Q8 = corpus_group("q8")
        A4 = corpus_group("a4")
        H27 = corpus_group("heis27")
        S3xS3 = direct_product(S3, S3)
        out = []
        for G in (S3, D4, Q8, A4, H27, S3xS3):
            for H in subgroups(G) if G.order <= 64 else []:
                if 1 < len(H) < G.order:
                    try:
                        quotient, _ = quotient_table(G, H)
                    except ValueError:
                        continue
                    Hgrp, _ = stats.subgroup_table(G, H)
                    out.append((G, Hgrp, quotient))
        return out

    def test_dk_submultiplicative(self):
        pairs = self.pairs()
        assert len(pairs) >= 5
        for G, N, Q in pairs:
            assert stats.d1_exact(G).value <= stats.d1_exact(N).value * stats.d1_exact(Q).value
            assert stats.d2_exact(G).value <= stats.d2_exact(N).value * stats.d2_exact(Q).value

    def test_direct_product_tightness(self):
        # d2(S3 x S3) = d2(S3)^2: the inequality is sharp here
        S3 = symmetric3()
        prod = direct_product(S3, S3)
        assert stats.d2_exact(prod).value == stats.d2_exact(S3).value ** 2
