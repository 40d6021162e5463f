"""Named members of the P_Omega family and the properties claimed for them.

Claims are written from the intended semantics of each construction (who
must cooperate, in what groups), never by calling the predicate they are
checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .analysis import (bipartite_distillable, has_bound_information, lopc_formable,
                       multipartition_distillable, noncoop_distillable)
from .errors import DomainError, ValidationError
from .omega import (GroupConfig, OmegaParams, PartitionCode, all_codes, build_omega_distribution,
                    enumerate_group_configs, event_label, omega_alphabet, omega_from_distribution,
                    parse_event_label)
from .prob import Channel, JointDistribution, apply_channel_to_eve


@dataclass(frozen=True)
class Claim:
    """One checkable statement about a scenario.

    ``kind`` is one of ``noncoop`` and ``multipartition`` (target: GroupConfig),
    ``bipartite`` (target: PartitionCode), ``formable`` and
    ``bound_information`` (target: None).  ``params`` overrides the
    scenario's own parameters, for claims about mixture components.
    """

    kind: str
    target: object
    expected: bool
    params: Optional[OmegaParams] = None
    label: str = ""

    def describe(self) -> str:
        what = self.label or (f"{self.kind}({self.target})" if self.target is not None else self.kind)
        return f"{what} -> {self.expected}"


@dataclass(frozen=True)
class Scenario:
    name: str
    params: OmegaParams
    claims: Tuple[Claim, ...]
    notes: str = ""
    components: Tuple[OmegaParams, ...] = field(default=())


def evaluate_claim(scenario: Scenario, claim: Claim) -> bool:
    """The predicate value for ``claim`` (compare with ``claim.expected``)."""
    params = claim.params or scenario.params
    if claim.kind == "noncoop":
        return noncoop_distillable(params, claim.target).answer
    if claim.kind == "multipartition":
        return multipartition_distillable(params, claim.target).answer
    if claim.kind == "bipartite":
        return bipartite_distillable(params, claim.target).answer
    if claim.kind == "formable":
        return lopc_formable(params).answer
    if claim.kind == "bound_information":
        return has_bound_information(params)
    raise DomainError(f"unknown claim kind {claim.kind!r}")


def verify_scenario(scenario: Scenario) -> List[Tuple[Claim, bool]]:
    """Every claim paired with its predicate value."""
    return [(c, evaluate_claim(scenario, c)) for c in scenario.claims]


def failures(scenario: Scenario) -> List[Tuple[Claim, bool]]:
    return [(c, got) for c, got in verify_scenario(scenario) if got != c.expected]


# -- construction helpers ---------------------------------------------------

def params_from_multipliers(n: int, multiplier: Callable[[PartitionCode], Fraction]) -> OmegaParams:
    """Omega_[s] = multiplier(s) * Omega_[0] for s != 0, Omega_[0] fixed by normalization."""
    mult = [Fraction(1)] + [Fraction(multiplier(c)) for c in list(all_codes(n))[1:]]
    w0 = Fraction(1, 2) / sum(mult)
    return OmegaParams(n, tuple(w0 * x for x in mult))


def _weight(code: PartitionCode) -> int:
    return sum(code.bits)


def _grouping_claims(n: int, rule: Callable[[GroupConfig], bool]) -> Tuple[Claim, ...]:
    return tuple(Claim("noncoop", cfg, rule(cfg)) for cfg in enumerate_group_configs(n))


def _check_n(n: int):
    if not isinstance(n, int) or n < 2:
        raise DomainError("n must be an integer >= 2")


def _check_threshold(n: int, m: int):
    if not 1 <= m < n:
        raise DomainError(f"need 1 <= m < n, got m={m}, n={n}")


def _check_group_size(n: int, k: int):
    if not 2 <= k <= n // 2:
        raise DomainError(f"need 2 <= k <= n/2, got k={k}, n={n}")


def example1(n: int, m: int) -> Scenario:
    """Distillable iff more than ``m`` parties cooperate, however they group."""
    _check_n(n)
    _check_threshold(n, m)
    params = params_from_multipliers(n, lambda c: Fraction(1, 2 ** (n - m)))
    claims = _grouping_claims(n, lambda cfg: len(cfg.cooperators) > m)
    return Scenario(f"example1(n={n},m={m})", params, claims,
                    "Omega_s = Omega_0 / 2^(n-m) for every s != 0")


def example2(n: int, k: int) -> Scenario:
    """Distillable iff every cooperating group has at least ``k`` members."""
    _check_n(n)
    _check_group_size(n, k)
    params = params_from_multipliers(n, lambda c: 0 if k <= _weight(c) <= n - k else 1)
    claims = _grouping_claims(n, lambda cfg: all(len(g) >= k for g in cfg.groups))
    return Scenario(f"example2(n={n},k={k})", params, claims,
                    "Omega_s = 0 when k <= W(s) <= n-k, else Omega_0")


def example3(n: int, m: int, k: int) -> Scenario:
    """Distillable iff more than ``m`` cooperate AND every group has at least ``k`` members."""
    _check_n(n)
    _check_threshold(n, m)
    _check_group_size(n, k)
    params = params_from_multipliers(
        n, lambda c: Fraction(1, 2 ** (n - m)) if k <= _weight(c) <= n - k else 1)
    claims = _grouping_claims(
        n, lambda cfg: len(cfg.cooperators) > m and all(len(g) >= k for g in cfg.groups))
    return Scenario(f"example3(n={n},m={m},k={k})", params, claims,
                    "Omega_s = Omega_0 / 2^(n-m) when k <= W(s) <= n-k, else Omega_0")


def example4(n: int, m: int, k: int) -> Scenario:
    """Claimed distillable iff more than ``m`` cooperate OR every group has at least ``k`` members."""
    _check_n(n)
    _check_threshold(n, m)
    _check_group_size(n, k)
    params = params_from_multipliers(
        n, lambda c: 0 if k <= _weight(c) <= n - k else Fraction(1, 2 ** (n - m)))
    claims = _grouping_claims(
        n, lambda cfg: len(cfg.cooperators) > m or all(len(g) >= k for g in cfg.groups))
    return Scenario(f"example4(n={n},m={m},k={k})", params, claims,
                    "Omega_s = 0 when k <= W(s) <= n-k, else Omega_0 / 2^(n-m)")


def example5(n: int, i: int, j: int, together: bool = True) -> Scenario:
    """Distillable iff parties i and j cooperate and share a group (or, with
    ``together=False``, cooperate in different groups)."""
    _check_n(n)
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise DomainError(f"need distinct parties in 1..{n}, got i={i}, j={j}")
    if n in (i, j):
        raise DomainError("parties i and j must both differ from A_n")
    if together:
        params = params_from_multipliers(n, lambda c: 0 if c.bits[i - 1] == c.bits[j - 1] else 1)
        rule = lambda cfg: any({i, j} <= g for g in cfg.groups)  # noqa: E731
    else:
        params = params_from_multipliers(n, lambda c: 0 if c.bits[i - 1] != c.bits[j - 1] else 1)
        rule = lambda cfg: ({i, j} <= cfg.cooperators  # noqa: E731
                            and not any({i, j} <= g for g in cfg.groups))
    variant = "together" if together else "separated"
    return Scenario(f"example5(n={n},i={i},j={j},{variant})", params, _grouping_claims(n, rule),
                    f"Omega_s = 0 when bits i, j of s are {'equal' if together else 'different'}")


P1_OMEGA = ("1/6", "1/6", "0", "1/6")
PRES_OMEGA = ("1/6", "1/9", "1/9", "1/9")


def p1_params() -> OmegaParams:
    return OmegaParams.from_strings(3, P1_OMEGA)


def pres_params() -> OmegaParams:
    return OmegaParams.from_strings(3, PRES_OMEGA)


def _bound_claims(params: Optional[OmegaParams], n: int, tag: str) -> List[Claim]:
    claims = [Claim("formable", None, False, params, f"{tag} LOPC-formable"),
              Claim("bound_information", None, True, params, f"{tag} has bound information")]
    for cfg in enumerate_group_configs(n, singletons_only=True):
        claims.append(Claim("noncoop", cfg, False, params, f"{tag} separated {cfg} distillable"))
    return claims


def bound_info_p1() -> Scenario:
    """Tripartite distribution whose secrecy cannot be distilled by separated parties."""
    claims = _bound_claims(None, 3, "P1")
    claims.append(Claim("bipartite", PartitionCode.from_string("10"), True,
                        label="P1 A_1 vs A_2A_3 distillable"))
    claims.append(Claim("noncoop", GroupConfig.parse("1|2,3", 3), True,
                        label="P1 groups 1|2,3 distillable"))
    for text in ("2|1,3", "1,2|3"):
        claims.append(Claim("noncoop", GroupConfig.parse(text, 3), False,
                            label=f"P1 groups {text} distillable"))
    return Scenario("p1", p1_params(), tuple(claims), "Omega = (1/6, 1/6, 0, 1/6)")


CYCLE = {1: 2, 2: 3, 3: 1}


def activation_mixture() -> Scenario:
    """Equal mixture of P1 and its two cyclic relabelings, Eve told the component."""
    p1 = build_omega_distribution(p1_params())
    p2 = permute_parties(p1, CYCLE)
    p3 = permute_parties(p2, CYCLE)
    comps = tuple(omega_from_distribution(d) for d in (p1, p2, p3))
    merged = merge_eve_labels(mixture([p1, p2, p3]))
    params = omega_from_distribution(merged)
    claims = []
    for idx, comp in enumerate(comps, 1):
        claims += _bound_claims(comp, 3, f"P{idx}")
    claims += [Claim("multipartition", GroupConfig.singletons(3), True, label="mixture 1|2|3 distillable"),
               Claim("formable", None, False, label="mixture LOPC-formable"),
               Claim("bound_information", None, False, label="mixture has bound information")]
    return Scenario("activation", params, tuple(claims),
                    "P_res: mixture of P1, P2, P3 with Eve knowing the component", comps)


# -- permutations and mixtures ----------------------------------------------

def _as_permutation(perm, n: int) -> Dict[int, int]:
    if isinstance(perm, Mapping):
        mapping = {int(a): int(b) for a, b in perm.items()}
        for p in range(1, n + 1):
            mapping.setdefault(p, p)
    else:
        seq = list(perm)
        if len(seq) != n:
            raise ValidationError(f"permutation must list {n} images")
        mapping = {i + 1: int(v) for i, v in enumerate(seq)}
    if sorted(mapping) != list(range(1, n + 1)) or sorted(mapping.values()) != list(range(1, n + 1)):
        raise ValidationError(f"not a permutation of 1..{n}: {perm!r}")
    return mapping


def _permute_bits(bits, mapping):
    out = [0] * len(bits)
    for i, b in enumerate(bits, 1):
        out[mapping[i] - 1] = b
    return tuple(out)


def permute_parties(dist: JointDistribution, perm) -> JointDistribution:
    """Move party ``i`` to position ``perm[i]`` (dict or 1-based image list).

    Eve symbols naming an event are renamed to the moved event, so a P_Omega
    table stays in table form; the ambiguous symbol is fixed by every
    permutation because its events are all-equal strings.
    """
    n = dist.n
    mapping = _as_permutation(perm, n)

    def rename(sym):
        try:
            bits = parse_event_label(sym)
        except ValidationError:
            return sym
        if len(bits) != n:
            return sym
        return event_label(_permute_bits(bits, mapping))

    alphabet = [rename(s) for s in dist.eve_alphabet]
    if len(set(alphabet)) != len(alphabet):
        raise ValidationError("Eve relabeling is not injective")
    if set(alphabet) == set(dist.eve_alphabet):
        alphabet = list(dist.eve_alphabet)  # same symbol set: keep the canonical order
    mass = {(_permute_bits(bits, mapping), rename(e)): p for (bits, e), p in dist.items()}
    return JointDistribution(n, alphabet, mass)


def mixture(dists: Sequence[JointDistribution], weights: Optional[Sequence[Fraction]] = None
            ) -> JointDistribution:
    """Mixture in which Eve also learns the component index (symbol ``"i:e"``)."""
    if not dists:
        raise DomainError("empty mixture")
    n = dists[0].n
    if any(d.n != n for d in dists):
        raise DomainError("components have different party counts")
    weights = [Fraction(1, len(dists))] * len(dists) if weights is None else [Fraction(w) for w in weights]
    alphabet, mass = [], {}
    for i, (d, w) in enumerate(zip(dists, weights)):
        alphabet += [f"{i}:{e}" for e in d.eve_alphabet]
        for (bits, e), p in d.items():
            mass[(bits, f"{i}:{e}")] = w * p
    return JointDistribution(n, alphabet, mass)


def merge_eve_labels(dist: JointDistribution) -> JointDistribution:
    """Forget the component index of a :func:`mixture` (deterministic Eve channel)."""
    n = dist.n
    target = list(omega_alphabet(n))
    mapping = {}
    for sym in dist.eve_alphabet:
        base = sym.split(":", 1)[1]
        if base not in target:
            target.append(base)
        mapping[sym] = {base: 1}
    return apply_channel_to_eve(dist, Channel.from_mapping(dist.eve_alphabet, target, mapping))


# -- catalog ----------------------------------------------------------------

CATALOG: Dict[str, Tuple[Callable[..., Scenario], Tuple[str, ...]]] = {
    "p1": (bound_info_p1, ()),
    "activation": (activation_mixture, ()),
    "pres": (activation_mixture, ()),
    "example1": (example1, ("n", "m")),
    "example2": (example2, ("n", "k")),
    "example3": (example3, ("n", "m", "k")),
    "example4": (example4, ("n", "m", "k")),
    "example5": (example5, ("n", "i", "j", "together")),
}


def build_scenario(name: str, **kwargs) -> Scenario:
    """Look up ``name`` in :data:`CATALOG` and call it with the needed keyword arguments."""
    if name not in CATALOG:
        raise ValidationError(f"unknown scenario {name!r}; known: {', '.join(sorted(CATALOG))}")
    fn, needed = CATALOG[name]
    args = {}
    for key in needed:
        if kwargs.get(key) is None:
            if key == "together":
                continue
            raise ValidationError(f"scenario {name} needs --{key}")
        args[key] = kwargs[key]
    return fn(**args)


__all__ = ["Claim", "Scenario", "evaluate_claim", "verify_scenario", "failures", "example1",
           "example2", "example3", "example4", "example5", "bound_info_p1", "activation_mixture",
           "permute_parties", "mixture", "merge_eve_labels", "params_from_multipliers", "CATALOG",
           "build_scenario"]
