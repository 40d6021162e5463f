"""Exact distillability and LOPC-formability of P_Omega members.

Every negative verdict carries an Eve-degrading channel that drives the
conditional mutual information across the offending split to zero; the
channel is checked numerically before the verdict is returned.  Positive
verdicts carry the tightest inequality, which holds exactly in rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Optional, Tuple

from .errors import DomainError, PreconditionError, ResourceError
from .omega import (FORMATION_SYMBOL, GroupConfig, OmegaParams, PartitionCode, all_codes,
                    ambiguous_label, associated_codes, build_omega_distribution,
                    build_pprime_distribution, event_label, event_pair, filter_to_groups,
                    enumerate_group_configs, omega_alphabet, parties_of)
from .prob import (CMI_TOLERANCE, EVE, Channel, JointDistribution, apply_channel_to_eve,
                   conditional_mutual_information)

DEFAULT_MAX_PARTITION_SIZE = 7


@dataclass(frozen=True)
class DistillVerdict:
    """Answer plus certificate.

    ``code`` is the partition code the certificate refers to ([s] for
    bipartitions and formability, [z'] for group configurations).  The
    inequality reads ``lhs < rhs`` for distillability and ``lhs >= rhs`` for
    formability.  ``channel`` (with ``distribution`` and ``split``) is the
    zero-CMI witness when one applies.
    """

    answer: bool
    code: Optional[PartitionCode] = None
    lhs: Optional[Fraction] = None
    rhs: Optional[Fraction] = None
    relation: str = "<"
    channel: Optional[Channel] = None
    distribution: Optional[JointDistribution] = None
    split: Optional[Tuple[FrozenSet[int], FrozenSet[int]]] = None

    def __bool__(self):
        return self.answer

    def to_json(self) -> dict:
        out = {"answer": self.answer}
        if self.code is not None:
            out["code"] = str(self.code)
            out["inequality"] = {"lhs": str(self.lhs), "relation": self.relation, "rhs": str(self.rhs)}
        if self.channel is not None:
            out["witness_channel"] = {
                "inputs": list(self.channel.input_alphabet),
                "outputs": list(self.channel.output_alphabet),
                "rows": [[str(w) for w in row] for row in self.channel.rows],
            }
        return out


def _verify_zero(dist: JointDistribution, split, channel: Channel):
    value = conditional_mutual_information(apply_channel_to_eve(dist, channel), split[0], split[1], {EVE})
    if value > CMI_TOLERANCE:
        raise AssertionError(f"witness channel leaves I = {value} across {split}")


def _mixing_channel(alphabet, sources, target, weight) -> Channel:
    """Send each symbol in ``sources`` to ``target`` with probability ``weight``."""
    mapping = {}
    for e in sources:
        mapping[e] = {target: weight} if weight == 1 else {target: weight, e: 1 - weight}
    return Channel.from_mapping(alphabet, alphabet, mapping)


def lemma3_channel(params: OmegaParams, code: PartitionCode) -> Channel:
    """Merge the ``[s]`` pair into the ambiguous symbol with probability Omega_0/Omega_s."""
    ws, w0 = params[code], params.omega0
    if code.is_trivial or ws == 0 or ws < w0:
        raise PreconditionError(
            f"zeroing channel needs Omega_[{code}] >= Omega_[0] and Omega_[{code}] > 0",
            detail=f"Omega_[{code}] = {ws}, Omega_[0] = {w0}")
    n = params.n
    sources = [event_label(ev) for ev in event_pair(code)]
    return _mixing_channel(omega_alphabet(n), sources, ambiguous_label(n), w0 / ws)


def _bipartite_split(code: PartitionCode):
    inside, outside = parties_of(code)
    return inside, outside


def bipartite_distillable(params: OmegaParams, code: PartitionCode) -> DistillVerdict:
    """Key between P_[s] and its complement iff Omega_[s] < Omega_[0]."""
    if code.n != params.n:
        raise DomainError("code does not match params")
    if code.is_trivial:
        raise DomainError("the trivial bipartition has an empty half")
    ws, w0 = params[code], params.omega0
    if ws < w0:
        return DistillVerdict(True, code, ws, w0)
    dist = build_omega_distribution(params)
    channel = lemma3_channel(params, code) if ws > 0 else Channel.identity(dist.eve_alphabet)
    split = _bipartite_split(code)
    _verify_zero(dist, split, channel)
    return DistillVerdict(False, code, ws, w0, channel=channel, distribution=dist, split=split)


def _non_splitting_codes(config: GroupConfig):
    for code in all_codes(config.n):
        if code.is_trivial:
            continue
        inside, _ = parties_of(code)
        if all(g <= inside or not g & inside for g in config.groups):
            yield code


def multipartition_distillable(params: OmegaParams, partition: GroupConfig) -> DistillVerdict:
    """m-partite key among groups covering every party (Omega_s < Omega_0 on non-splitting codes)."""
    if partition.n != params.n:
        raise DomainError("partition does not match params")
    if not partition.covers_all:
        raise DomainError("groups must cover every party; use noncoop_distillable otherwise")
    codes = list(_non_splitting_codes(partition))
    if not codes:
        return DistillVerdict(True)
    worst = max(codes, key=lambda c: (params[c], -c.value))
    verdict = bipartite_distillable(params, worst)
    return verdict


def theorem5_channel(params: OmegaParams, config: GroupConfig, zprime: PartitionCode) -> Channel:
    """Mixing channel on the filtered alphabet that hides the ``[z']`` pair."""
    filtered = filter_to_groups(params, config)
    total, w0 = filtered.pair_weights[zprime], params.omega0
    if zprime.is_trivial or total == 0 or total < w0:
        raise PreconditionError(
            f"filtered zeroing channel needs sum over [s]~[{zprime}] >= Omega_[0] and > 0",
            detail=f"sum = {total}, Omega_[0] = {w0}")
    dist = filtered.distribution
    sources = [event_label(ev) for ev in event_pair(zprime)]
    return _mixing_channel(dist.eve_alphabet, sources, ambiguous_label(config.m), w0 / total)


def _group_split(config: GroupConfig, zprime: PartitionCode):
    """Variable ids (1..m) of the filtered distribution on each side of [z']."""
    inside = frozenset(i + 1 for i, b in enumerate(zprime.bits) if b)
    return inside, frozenset(range(1, config.m + 1)) - inside


def noncoop_distillable(params: OmegaParams, config: GroupConfig) -> DistillVerdict:
    """m-partite key among Q_1..Q_m, others idle: sum_{[s]~[z']} Omega_s < Omega_0 for all [z'] != 0."""
    if config.n != params.n:
        raise DomainError("config does not match params")
    if config.m < 2:
        raise DomainError("need at least two cooperating groups")
    w0 = params.omega0
    if w0 == 0:
        return DistillVerdict(False, lhs=Fraction(0), rhs=w0)
    filtered = filter_to_groups(params, config)
    nonzero = [z for z in all_codes(config.m) if not z.is_trivial]
    worst = max(nonzero, key=lambda z: (filtered.pair_weights[z], -z.value))
    total = filtered.pair_weights[worst]
    if total < w0:
        return DistillVerdict(True, worst, total, w0)
    dist = filtered.distribution
    if total > 0:
        channel = theorem5_channel(params, config, worst)
    else:
        channel = Channel.identity(dist.eve_alphabet)
    split = _group_split(config, worst)
    _verify_zero(dist, split, channel)
    return DistillVerdict(False, worst, total, w0, channel=channel, distribution=dist, split=split)


def theorem6_channel(params: OmegaParams) -> Channel:
    """E -> E~ taking P_Omega to P'_Omega (requires Omega_s >= Omega_0 for all s)."""
    bad = [c for c in all_codes(params.n) if params[c] < params.omega0]
    if bad:
        raise PreconditionError(f"formation condition violated at s={bad[0]}: "
                                f"Omega_[{bad[0]}] = {params[bad[0]]} < Omega_[0] = {params.omega0}",
                                detail=f"Omega_[{bad[0]}] = {params[bad[0]]} < Omega_[0] = {params.omega0}")
    n = params.n
    inputs = omega_alphabet(n)
    outputs = (FORMATION_SYMBOL,) + inputs[1:]
    mapping = {inputs[0]: {FORMATION_SYMBOL: 1}}
    for code in list(all_codes(n))[1:]:
        ws = params[code]
        for ev in event_pair(code):
            e = event_label(ev)
            if ws == 0:
                mapping[e] = {e: 1}
            else:
                w = params.omega0 / ws
                mapping[e] = {FORMATION_SYMBOL: 1} if w == 1 else {FORMATION_SYMBOL: w, e: 1 - w}
    return Channel.from_mapping(inputs, outputs, mapping)


def lopc_formable(params: OmegaParams) -> DistillVerdict:
    """P_Omega is LOPC-formable iff Omega_s >= Omega_0 for every s."""
    codes = list(all_codes(params.n))[1:]
    worst = min(codes, key=lambda c: (params[c], c.value)) if codes else None
    if worst is None:
        return DistillVerdict(True)
    ws, w0 = params[worst], params.omega0
    if ws < w0:
        return DistillVerdict(False, worst, ws, w0, relation=">=")
    channel = theorem6_channel(params)
    dist = build_omega_distribution(params)
    if apply_channel_to_eve(dist, channel) != build_pprime_distribution(params):
        raise AssertionError("formation channel does not reproduce P'_Omega")
    return DistillVerdict(True, worst, ws, w0, relation=">=", channel=channel, distribution=dist)


def _config_budget(n: int, max_partition_size: int):
    if n > max_partition_size:
        raise ResourceError(f"n={n} exceeds the enumeration guard max_partition_size={max_partition_size}")


def has_bound_information(params: OmegaParams, max_partition_size: int = DEFAULT_MAX_PARTITION_SIZE,
                          joint_groups: bool = False) -> bool:
    """Not LOPC-formable, yet no set of separated parties can distill a key.

    Every subset of at least two cooperating parties is tried, each party
    acting alone.  ``joint_groups=True`` also tries every set partition of
    each subset (parties allowed to meet), which is a strictly stronger
    requirement than the usual notion.
    """
    _config_budget(params.n, max_partition_size)
    if lopc_formable(params).answer:
        return False
    for config in enumerate_group_configs(params.n, singletons_only=not joint_groups):
        if noncoop_distillable(params, config).answer:
            return False
    return True


def brute_force_distillable_oracle(params: OmegaParams, config: GroupConfig) -> bool:
    """Recompute the non-cooperative distillability condition from raw set containment.

    Independent of :func:`omega.associated_codes`: for each bipartition of
    the groups (as an unordered pair of group sets) sum Omega over every
    party bipartition that puts each group wholly on the matching side.
    """
    n = params.n
    if n > 8:
        raise ResourceError("oracle limited to n <= 8")
    groups = [set(g) for g in config.groups]
    m = len(groups)
    if m < 2:
        raise DomainError("need at least two cooperating groups")
    everyone = set(range(1, n + 1))
    w0 = params.omega[0]
    for mask in range(1, 2 ** m - 1):
        left = set().union(*(groups[i] for i in range(m) if mask >> i & 1))
        right = set().union(*(groups[i] for i in range(m) if not mask >> i & 1))
        if mask >= 2 ** (m - 1):
            continue  # each unordered bipartition of the groups once
        total = Fraction(0)
        for s in range(1, 2 ** (n - 1)):
            half = {i for i in range(1, n) if s >> (n - 1 - i) & 1}
            other = everyone - half
            if (left <= half and right <= other) or (right <= half and left <= other):
                total += params.omega[s]
        if total >= w0:
            return False
    return True


def coarsening_consistent(params: OmegaParams, partition: GroupConfig) -> bool:
    """If the full partition distills, every two-block coarsening distills bipartitely."""
    if not multipartition_distillable(params, partition).answer:
        return True
    for code in _non_splitting_codes(partition):
        if not bipartite_distillable(params, code).answer:
            return False
    return True


def distillable_pairs(params: OmegaParams):
    """Pairs (i, j) of separated parties that can distill a key with every other party idle."""
    out = []
    for i in range(1, params.n + 1):
        for j in range(i + 1, params.n + 1):
            if noncoop_distillable(params, GroupConfig.singletons(params.n, (i, j))).answer:
                out.append((i, j))
    return out


__all__ = [
    "DistillVerdict", "bipartite_distillable", "multipartition_distillable", "noncoop_distillable",
    "lopc_formable", "has_bound_information", "lemma3_channel", "theorem5_channel",
    "theorem6_channel", "brute_force_distillable_oracle", "coarsening_consistent", "associated_codes",
    "distillable_pairs",
]
