from fractions import Fraction

import pytest
from hypothesis import given, settings

from secretcorr.analysis import (bipartite_distillable, brute_force_distillable_oracle,
                                 distillable_pairs, has_bound_information, coarsening_consistent,
                                 lemma3_channel, lopc_formable, multipartition_distillable,
                                 noncoop_distillable, theorem5_channel, theorem6_channel)
from secretcorr.errors import DomainError, EmptyFilterError, PreconditionError, ResourceError
from secretcorr.omega import (GroupConfig, OmegaParams, PartitionCode, all_codes,
                              build_omega_distribution, build_pprime_distribution,
                              enumerate_group_configs, filter_to_groups)
from secretcorr.prob import (EVE, apply_channel_to_eve, conditional_mutual_information)
from secretcorr.scenarios import example1

from strategies import omega_params, params_and_config

P = PartitionCode.from_string


def _params(*omega):
    return OmegaParams.from_strings(len(omega).bit_length(), list(omega))


class TestBipartite:
    def test_p1_cases(self, p1_params):
        assert bipartite_distillable(p1_params, P("10")).answer
        assert not bipartite_distillable(p1_params, P("01")).answer
        assert not bipartite_distillable(p1_params, P("11")).answer

    def test_positive_certificate(self, p1_params):
        v = bipartite_distillable(p1_params, P("10"))
        assert (v.lhs, v.rhs, v.relation) == (0, Fraction(1, 6), "<")
        assert v.channel is None

    def test_tie_is_not_distillable(self):
        params = _params("1/8", "1/8", "1/8", "1/8")
        v = bipartite_distillable(params, P("01"))
        assert not v.answer and v.lhs == v.rhs

    @given(omega_params(n_values=(2, 3, 4)))
    def test_negative_verdicts_carry_zeroing_witness(self, params):
        for code in list(all_codes(params.n))[1:]:
            v = bipartite_distillable(params, code)
            if v.answer:
                continue
            after = apply_channel_to_eve(v.distribution, v.channel)
            assert conditional_mutual_information(after, *v.split, {EVE}) <= 1e-9

    def test_no_key_when_all_zero_omega0(self):
        # Omega_0 = 0: Eve sees every event label and nothing is secret
        params = _params("0", "1/4", "1/4", "0")
        for code in list(all_codes(3))[1:]:
            assert not bipartite_distillable(params, code).answer

    def test_trivial_code_rejected(self, p1_params):
        with pytest.raises(DomainError):
            bipartite_distillable(p1_params, P("00"))
        with pytest.raises(DomainError):
            bipartite_distillable(p1_params, P("0"))


class TestZeroingChannel:
    def test_weights_and_rows(self, p1_params):
        ch = lemma3_channel(p1_params, P("01"))
        amb = "[00]0 or [11]1"
        idx = ch.input_alphabet.index("[01]0")
        row = dict(zip(ch.output_alphabet, ch.rows[idx]))
        assert row[amb] == 1
        # every other symbol passes through untouched
        other = ch.input_alphabet.index("[11]0")
        assert dict(zip(ch.output_alphabet, ch.rows[other]))["[11]0"] == 1

    def test_partial_mixing_is_exact_zero(self):
        params = _params("1/10", "2/10", "1/10", "1/10")
        ch = lemma3_channel(params, P("01"))
        dist = apply_channel_to_eve(build_omega_distribution(params), ch)
        assert conditional_mutual_information(dist, {2}, {1, 3}, {EVE}) == 0

    def test_precondition(self, p1_params):
        with pytest.raises(PreconditionError):
            lemma3_channel(p1_params, P("10"))


class TestMultipartition:
    def test_pres_full_split(self, pres_params, p1_params):
        assert multipartition_distillable(pres_params, GroupConfig.singletons(3)).answer
        assert not multipartition_distillable(p1_params, GroupConfig.singletons(3)).answer

    def test_requires_cover(self, p1_params):
        with pytest.raises(DomainError):
            multipartition_distillable(p1_params, GroupConfig.singletons(3, (1, 2)))

    @given(params_and_config())
    def test_agrees_with_noncoop_on_full_cover(self, pc):
        params, config = pc
        if not config.covers_all:
            return
        try:
            expected = noncoop_distillable(params, config).answer
        except EmptyFilterError:
            return
        assert multipartition_distillable(params, config).answer == expected

    @given(params_and_config())
    def test_coarsening_consistent(self, pc):
        params, config = pc
        if config.covers_all:
            assert coarsening_consistent(params, config)


class TestNoncoop:
    def test_p1_groupings(self, p1_params):
        assert noncoop_distillable(p1_params, GroupConfig.parse("1|2,3", 3)).answer
        assert not noncoop_distillable(p1_params, GroupConfig.parse("2|1,3", 3)).answer
        assert not noncoop_distillable(p1_params, GroupConfig.parse("1,2|3", 3)).answer
        for cfg in enumerate_group_configs(3, singletons_only=True):
            assert not noncoop_distillable(p1_params, cfg).answer

    def test_pres_pairs(self, pres_params, p1_params):
        # an idle third party merges two pairs: 2/9 >= 1/6
        assert distillable_pairs(pres_params) == []
        assert distillable_pairs(_params("1/4", "0", "1/4", "0")) == [(2, 3)]
        assert distillable_pairs(p1_params) == []

    @settings(max_examples=300)
    @given(params_and_config())
    def test_matches_brute_force_oracle(self, pc):
        params, config = pc
        try:
            got = noncoop_distillable(params, config).answer
        except EmptyFilterError:
            return
        assert got == brute_force_distillable_oracle(params, config)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_matches_oracle_exhaustively_on_example1(self, n):
        for m in range(1, n):
            params = example1(n, m).params
            for cfg in enumerate_group_configs(n):
                assert noncoop_distillable(params, cfg).answer == brute_force_distillable_oracle(params, cfg)

    @given(params_and_config())
    def test_negative_witness_zeroes_filtered_cmi(self, pc):
        params, config = pc
        try:
            v = noncoop_distillable(params, config)
        except EmptyFilterError:
            return
        if v.answer or v.channel is None:
            return
        after = apply_channel_to_eve(v.distribution, v.channel)
        assert conditional_mutual_information(after, *v.split, {EVE}) <= 1e-9

    def test_example1_mixing_weight(self):
        # n=4, m=2: Omega_s = Omega_0/4; two singletons leave 4 associated codes per z'
        params = example1(4, 2).params
        cfg = GroupConfig.singletons(4, (1, 2))
        assert not noncoop_distillable(params, cfg).answer
        ch = theorem5_channel(params, cfg, P("1"))
        idx = ch.input_alphabet.index("[1]0")
        row = dict(zip(ch.output_alphabet, ch.rows[idx]))
        assert row["[0]0 or [1]1"] == 1  # total = 4 * Omega_0/4 = Omega_0

    def test_filtered_zeroing_precondition(self, pres_params):
        with pytest.raises(PreconditionError):
            theorem5_channel(pres_params, GroupConfig.singletons(3), P("10"))

    def test_single_group_rejected(self, p1_params):
        with pytest.raises(DomainError):
            noncoop_distillable(p1_params, GroupConfig(3, (frozenset({1, 2}),)))

    def test_filtered_weights_feed_the_decision(self, pres_params):
        cfg = GroupConfig.singletons(3, (1, 3))
        f = filter_to_groups(pres_params, cfg)
        v = noncoop_distillable(pres_params, cfg)
        assert v.lhs == f.pair_weights[v.code] == Fraction(2, 9)
        assert not v.answer


class TestFormable:
    def test_uniform_formable(self):
        params = _params("1/8", "1/8", "1/8", "1/8")
        v = lopc_formable(params)
        assert v.answer and v.relation == ">="
        assert apply_channel_to_eve(v.distribution, v.channel) == build_pprime_distribution(params)

    def test_p1_not_formable(self, p1_params, pres_params):
        v = lopc_formable(p1_params)
        assert not v.answer and v.code == P("10")
        assert not lopc_formable(pres_params).answer

    def test_formation_channel_precondition(self, p1_params):
        with pytest.raises(PreconditionError) as info:
            theorem6_channel(p1_params)
        assert "s=10" in str(info.value)

    @given(omega_params(n_values=(2, 3, 4)))
    def test_formable_iff_no_bipartite_key(self, params):
        any_key = any(bipartite_distillable(params, c).answer for c in list(all_codes(params.n))[1:])
        assert lopc_formable(params).answer == (not any_key)

    @given(omega_params(n_values=(2, 3, 4)))
    def test_formation_channel_exact(self, params):
        if not lopc_formable(params).answer:
            return
        dist = build_omega_distribution(params)
        assert apply_channel_to_eve(dist, theorem6_channel(params)) == build_pprime_distribution(params)


class TestBoundInformation:
    def test_p1_and_pres(self, p1_params, pres_params):
        assert has_bound_information(p1_params)
        assert not has_bound_information(pres_params)

    def test_formable_has_none(self):
        assert not has_bound_information(_params("1/8", "1/8", "1/8", "1/8"))

    def test_joint_groups_flag(self, p1_params):
        # 1|2,3 distills once A_2 and A_3 may meet
        assert not has_bound_information(p1_params, joint_groups=True)

    def test_guard(self):
        params = OmegaParams(8, tuple([Fraction(1, 256)] * 128))
        with pytest.raises(ResourceError):
            has_bound_information(params)
        with pytest.raises(ResourceError):
            has_bound_information(_params("1/6", "1/6", "0", "1/6"), max_partition_size=2)


def test_oracle_guard():
    params = OmegaParams(9, tuple([Fraction(1, 512)] * 256))
    with pytest.raises(ResourceError):
        brute_force_distillable_oracle(params, GroupConfig.singletons(9, (1, 2)))


def test_verdict_json(p1_params):
    v = bipartite_distillable(p1_params, P("01"))
    data = v.to_json()
    assert data["answer"] is False
    assert data["inequality"] == {"lhs": "1/6", "relation": "<", "rhs": "1/6"}
    assert "witness_channel" in data
