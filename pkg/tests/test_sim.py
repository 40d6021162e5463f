import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secretcorr.errors import DomainError
from secretcorr.omega import GroupConfig, OmegaParams, build_omega_distribution
from secretcorr.prob import total_variation_distance
from secretcorr.sim import rng as R
from secretcorr.sim._kernel import scan_blocks
from secretcorr.sim.estimate import (bootstrap_interval, entropy_mm, mutual_information_mm,
                                     one_way_rate, wilson_interval)
from secretcorr.sim.protocol import (SimConfig, _retained_table, acceptance_probability,
                                     block_acceptance_probability, block_samples, repeated_code_block,
                                     run_distillation, run_formation, sample_indices, sample_outcomes)


class TestRng:
    @given(st.integers(0, 2 ** 64 - 1))
    def test_vector_matches_scalar(self, z):
        assert int(R.mix64_array(np.array([z], dtype=np.uint64))[0]) == R.mix64(z)

    def test_draws_array_matches_draw(self):
        key = R.stream_key(7, 3)
        blocks = np.arange(50)
        assert [int(v) for v in R.draws_array(key, blocks, 4)] == [R.draw(key, b, 4) for b in range(50)]

    def test_mix64_reference_value(self):
        # splitmix64 output for state 0 after one increment
        assert R.mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF

    def test_streams_differ(self):
        assert len({R.stream_key(1, s) for s in range(100)}) == 100
        assert R.stream_key(1, 0) != R.stream_key(2, 0)

    @given(st.lists(st.integers(0, 9), min_size=1, max_size=12).filter(lambda w: sum(w) > 0))
    def test_alias_exact_masses(self, weights):
        thr, al = R.build_alias([Fraction(w) for w in weights])
        k = len(weights)
        mass = [Fraction(0)] * k
        for i in range(k):
            keep = Fraction(int(thr[i]), 2 ** 32)
            mass[i] += keep / k
            mass[int(al[i])] += (1 - keep) / k
        total = sum(weights)
        for m, w in zip(mass, weights):
            assert abs(m - Fraction(w, total)) <= Fraction(k, 2 ** 32)
            if w == 0:
                assert m == 0

    def test_alias_frequencies(self):
        weights = [Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)]
        thr, al = R.build_alias(weights)
        h = R.draws_array(R.stream_key(0, 0), np.arange(200_000), 0)
        counts = np.bincount(R.alias_lookup(h, thr, al), minlength=3)
        for c, w in zip(counts, weights):
            p = float(w)
            assert abs(c / 200_000 - p) < 4 * math.sqrt(p * (1 - p) / 200_000)


def _reference_scan(table, key, max_blocks, N):
    out = []
    for b in range(max_blocks):
        pairs = {int(table.pair[int(R.alias_lookup(np.array([R.draw(key, b, r)], dtype=np.uint64),
                                                   table.threshold, table.alias)[0])]) for r in range(N)}
        if len(pairs) == 1:
            out.append(b)
    return out


class TestScan:
    @pytest.mark.parametrize("N", [1, 2, 4])
    def test_matches_pure_python(self, pres_params, N):
        table = _retained_table(pres_params, GroupConfig.singletons(3))
        key = R.stream_key(11, R.SOURCE_STREAM)
        acc, scanned = scan_blocks(np.uint64(key), table.threshold, table.alias.astype(np.uint64),
                                   table.pair, 400, N, 0, 64)
        assert scanned == 400
        assert list(acc) == _reference_scan(table, key, 400, N)

    @pytest.mark.parametrize("batch", [1, 7, 1000])
    def test_batch_independent(self, pres_params, batch):
        table = _retained_table(pres_params, GroupConfig.singletons(3))
        key = np.uint64(R.stream_key(5, R.SOURCE_STREAM))
        args = (key, table.threshold, table.alias.astype(np.uint64), table.pair, 3000, 3)
        ref, ref_n = scan_blocks(*args, 0, 256)
        acc, n = scan_blocks(*args, 0, batch)
        assert n == ref_n and list(acc) == list(ref)
        capped, n_capped = scan_blocks(*args, 10, batch)
        assert list(capped) == list(ref[:10]) and n_capped == ref[9] + 1


class TestBlocks:
    def test_replay_matches_single_block_protocol(self, pres_params):
        cfg = GroupConfig.singletons(3)
        table = _retained_table(pres_params, cfg)
        key = R.stream_key(3, R.SOURCE_STREAM)
        accepted = set(_reference_scan(table, key, 60, 2))
        for b in range(60):
            res = repeated_code_block(block_samples(pres_params, cfg, 2, 3, b), cfg, 3, b)
            assert res.accepted == (b in accepted)
            if res.accepted:
                assert res.used == 2

    def test_mixed_pairs_rejected(self):
        cfg = GroupConfig.singletons(3)
        samples = [((0, 1, 0), "[01]0"), ((1, 0, 0), "[10]0")]
        assert not repeated_code_block(samples, cfg, 0).accepted

    def test_zero_pair_gives_equal_keys(self):
        cfg = GroupConfig.singletons(3)
        amb = "[00]0 or [11]1"
        res = repeated_code_block([((0, 0, 0), amb), ((1, 1, 1), amb), ((0, 0, 0), amb)], cfg, 9)
        assert res.accepted and len(set(res.keys)) == 1 and res.eve_view == "amb"

    def test_transparent_view_reveals_k1(self):
        cfg = GroupConfig.singletons(3)
        res = repeated_code_block([((0, 1, 0), "[01]0"), ((1, 0, 1), "[10]1")], cfg, 4)
        assert res.accepted
        assert res.eve_view == f"[01] k1={res.keys[0]}"
        assert res.keys[1] == 1 - res.keys[0]

    def test_splitting_realizations_dropped(self, p1_params):
        cfg = GroupConfig.parse("1|2,3", 3)
        res = repeated_code_block([((0, 1, 0), "[01]0"), ((0, 0, 0), "[00]0 or [11]1")], cfg, 0)
        assert res.used == 1 and res.accepted


class TestAcceptanceLaw:
    def test_pres_single_realization(self, pres_params):
        p = acceptance_probability(pres_params, GroupConfig.singletons(3), 1)
        assert p[min(p, key=lambda z: z.value)] == Fraction(1, 3)
        assert sum(p.values()) == 1

    def test_block_law(self, pres_params):
        cfg = GroupConfig.singletons(3)
        b = block_acceptance_probability(pres_params, cfg, 2)
        assert sum(b.values()) == Fraction(1, 3) ** 2 + 3 * Fraction(2, 9) ** 2

    def test_bad_n(self, pres_params):
        with pytest.raises(DomainError):
            acceptance_probability(pres_params, GroupConfig.singletons(3), 0)


def test_sample_frequencies(pres):
    n = 60_000
    counts = np.bincount(sample_indices(pres, n, 1), minlength=len(pres))
    for c, (_, p) in zip(counts, pres.items()):
        p = float(p)
        assert abs(c / n - p) < 4 * math.sqrt(p * (1 - p) / n)
    assert sample_outcomes(pres, 5, 1) == sample_outcomes(pres, 5, 1)


class TestDistillation:
    def test_deterministic(self, pres_params):
        sim = SimConfig(seed=2, rounds=20_000, block_size=3, config=GroupConfig.singletons(3), bootstrap=50)
        a, b = run_distillation(pres_params, sim), run_distillation(pres_params, sim)
        assert a.to_json() == b.to_json()

    def test_structure(self, pres_params):
        sim = SimConfig(seed=1, rounds=50_000, block_size=4, config=GroupConfig.singletons(3), bootstrap=100)
        rep = run_distillation(pres_params, sim)
        assert rep.keys_equal_on_zero_pair and rep.eve_determines_transparent_keys
        assert sum(p.accepted for p in rep.pairs) == rep.accepted_blocks
        law = sum(float(p.exact_per_block) for p in rep.pairs)
        sd = math.sqrt(law * (1 - law) / rep.total_blocks)
        assert abs(rep.acceptance_rate - law) < 4 * sd
        assert rep.rate_ci[0] <= rep.estimated_ck_rate <= rep.rate_ci[1]

    def test_target_accepted(self, pres_params):
        sim = SimConfig(seed=1, rounds=10 ** 6, block_size=2, config=GroupConfig.singletons(3),
                        target_accepted=500, bootstrap=20)
        rep = run_distillation(pres_params, sim)
        assert rep.accepted_blocks == 500 and rep.total_blocks < 10 ** 6

    def test_only_ambiguous_pair_gives_full_key(self):
        params = OmegaParams.from_strings(3, ["1/2", "0", "0", "0"])
        sim = SimConfig(seed=0, rounds=4000, block_size=1, config=GroupConfig.singletons(3), bootstrap=50)
        rep = run_distillation(params, sim)
        assert rep.accepted_blocks == 4000
        assert rep.estimated_ck_rate == pytest.approx(1.0, abs=0.01)

    def test_fully_transparent_gives_nothing(self):
        params = OmegaParams.from_strings(3, ["0", "1/6", "1/6", "1/6"])
        sim = SimConfig(seed=0, rounds=4000, block_size=1, config=GroupConfig.singletons(3), bootstrap=50)
        rep = run_distillation(params, sim)
        assert rep.estimated_ck_rate < 0.01

    def test_inconclusive(self, pres_params):
        sim = SimConfig(seed=0, rounds=3, block_size=40, config=GroupConfig.singletons(3), bootstrap=10)
        rep = run_distillation(pres_params, sim)
        assert rep.inconclusive and rep.rate_per_realization == 0.0

    def test_config_validation(self):
        with pytest.raises(DomainError):
            SimConfig(seed=0, rounds=0, block_size=1, config=GroupConfig.singletons(3))


class TestFormation:
    def test_uniform_always_x(self):
        params = OmegaParams.from_strings(3, ["1/8"] * 4)
        emp, target = run_formation(params, 2000, 0)
        assert {e for (_, e), _ in emp.items()} == {"x"}
        assert total_variation_distance(emp, target) < 0.05

    def test_excess_messages(self):
        params = OmegaParams.from_strings(3, ["1/10", "2/15", "2/15", "2/15"])
        emp, target = run_formation(params, 100_000, 3)
        assert total_variation_distance(emp, target) < 0.02
        assert len(emp.honest_marginal()) == 8

    def test_precondition(self, p1_params):
        from secretcorr.errors import PreconditionError
        with pytest.raises(PreconditionError):
            run_formation(p1_params, 10, 0)


class TestEstimators:
    def test_entropy_mm(self):
        assert entropy_mm(np.array([5, 5])) == pytest.approx(1 + 1 / (20 * math.log(2)))
        assert entropy_mm(np.array([0, 0])) == 0.0

    def test_mi_of_independent_is_small(self):
        t = np.array([[250, 250], [250, 250]])
        assert abs(mutual_information_mm(t)) < 1e-3

    def test_one_way_rate_perfect(self):
        joint = np.zeros((4, 1))
        joint[0, 0] = joint[3, 0] = 500
        assert one_way_rate(joint, 2) == pytest.approx(1.0, abs=0.01)

    def test_bootstrap_contains_point(self):
        rng = np.random.default_rng(0)
        joint = np.array([[400.0, 10.0], [12.0, 390.0]])
        lo, hi = bootstrap_interval(joint, mutual_information_mm, 200, 0.99, rng)
        assert lo <= mutual_information_mm(joint) <= hi

    @settings(max_examples=30)
    @given(st.integers(0, 200), st.integers(1, 200))
    def test_wilson(self, k, n):
        k = min(k, n)
        lo, hi = wilson_interval(k, n, 0.99)
        assert 0 <= lo <= k / n <= hi <= 1


def test_p1_block_law_sums(p1_params):
    cfg = GroupConfig.parse("2|1,3", 3)
    emp = build_omega_distribution(p1_params)
    assert sum(acceptance_probability(p1_params, cfg, 1).values()) == 1
    assert len(emp) == 6
