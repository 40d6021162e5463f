from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from secretcorr.errors import DomainError, ValidationError
from secretcorr.omega import (OmegaParams, PartitionCode, all_codes,
                              build_omega_distribution, omega_from_distribution)
from secretcorr.scenarios import (CYCLE, activation_mixture, bound_info_p1, build_scenario, example1,
                                  example2, example3, example4, example5, failures, merge_eve_labels,
                                  mixture, params_from_multipliers, permute_parties, verify_scenario)

from strategies import omega_params


class TestPermutation:
    def test_identity(self, p1):
        assert permute_parties(p1, [1, 2, 3]) == p1

    def test_cycle_cubed(self, p1):
        d = p1
        for _ in range(3):
            d = permute_parties(d, CYCLE)
        assert d == p1

    @given(omega_params(n_values=(3, 4)), st.permutations([1, 2, 3, 4]))
    def test_inverse(self, params, perm):
        perm = [p for p in perm if p <= params.n] if params.n == 3 else perm
        d = build_omega_distribution(params)
        inv = [0] * params.n
        for i, p in enumerate(perm, 1):
            inv[p - 1] = i
        assert permute_parties(permute_parties(d, perm), inv) == d

    @given(omega_params(n_values=(3, 4)), st.permutations([1, 2, 3, 4]))
    def test_stays_in_family(self, params, perm):
        perm = [p for p in perm if p <= params.n] if params.n == 3 else perm
        q = omega_from_distribution(permute_parties(build_omega_distribution(params), perm))
        assert sorted(q.omega[1:]) == sorted(params.omega[1:]) and q.omega0 == params.omega0

    def test_p2_parameters(self, p1):
        p2 = omega_from_distribution(permute_parties(p1, CYCLE))
        # A_1 alone becomes A_2 alone
        assert p2 == OmegaParams.from_strings(3, ["1/6", "0", "1/6", "1/6"])
        assert p2[PartitionCode.from_string("01")] == 0

    def test_invalid(self, p1):
        with pytest.raises(ValidationError):
            permute_parties(p1, [1, 1, 2])
        with pytest.raises(ValidationError):
            permute_parties(p1, [1, 2])


class TestMixture:
    def test_pres_from_components(self, pres):
        sc = activation_mixture()
        assert build_omega_distribution(sc.params) == pres
        assert sc.params == OmegaParams.from_strings(3, ["1/6", "1/9", "1/9", "1/9"])

    def test_mixture_labels(self, p1):
        mixed = mixture([p1, p1], [Fraction(1, 4), Fraction(3, 4)])
        assert sum(p for _, p in mixed.items()) == 1
        assert merge_eve_labels(mixed) == p1

    def test_symmetric_under_swapping_two_parties(self, pres):
        assert permute_parties(pres, {2: 3, 3: 2}) == pres


class TestExamples:
    def test_example1_omega0(self):
        n, m = 5, 2
        params = example1(n, m).params
        mult = Fraction(1, 2 ** (n - m))
        assert params.omega0 == Fraction(1, 2) / (1 + (2 ** (n - 1) - 1) * mult)
        assert all(w == params.omega0 * mult for w in params.omega[1:])

    def test_multipliers_normalize(self):
        params = params_from_multipliers(4, lambda c: sum(c.bits))
        assert sum(params.omega) == Fraction(1, 2)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            example1(4, 4)
        with pytest.raises(DomainError):
            example2(5, 3)
        with pytest.raises(DomainError):
            example5(4, 1, 4)
        with pytest.raises(DomainError):
            example5(4, 2, 2)

    @pytest.mark.parametrize("args", [(4, 1), (4, 3), (5, 2)])
    def test_example1(self, args):
        assert failures(example1(*args)) == []

    @pytest.mark.parametrize("args", [(4, 2), (5, 2), (6, 3)])
    def test_example2(self, args):
        assert failures(example2(*args)) == []

    @pytest.mark.parametrize("args", [(4, 2, 2), (5, 2, 2), (6, 3, 2)])
    def test_example3(self, args):
        assert failures(example3(*args)) == []

    def test_example3_params(self):
        params = example3(5, 2, 2).params
        w0 = params.omega0
        for c in list(all_codes(5))[1:]:
            expected = w0 / 8 if 2 <= sum(c.bits) <= 3 else w0
            assert params[c] == expected

    @pytest.mark.parametrize("args", [(4, 1, 2), (5, 2, 3), (6, 2, 4)])
    def test_example5_together(self, args):
        assert failures(example5(*args)) == []

    def test_example4_if_direction(self):
        """Every grouping the rule accepts really distills."""
        for got_claim, got in verify_scenario(example4(5, 2, 2)):
            if got_claim.expected:
                assert got

    def test_example5_separated_two_groups(self):
        """With exactly the two groups {i} and {j} cooperating the claim holds."""
        sc = example5(4, 1, 2, together=False)
        for claim, got in verify_scenario(sc):
            if claim.target.m == 2 and claim.target.cooperators == {1, 2}:
                assert got == claim.expected


class TestBoundInfo:
    def test_p1_claims(self):
        assert failures(bound_info_p1()) == []

    def test_activation_claims(self):
        assert failures(activation_mixture()) == []


def test_catalog():
    assert build_scenario("example2", n=4, k=2).name == "example2(n=4,k=2)"
    with pytest.raises(ValidationError):
        build_scenario("nope")
    with pytest.raises(ValidationError):
        build_scenario("example1", n=4)
