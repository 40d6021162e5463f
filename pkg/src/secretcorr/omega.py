"""Partition codes, group configurations and the P_Omega family.

Bit-string conventions
----------------------
An index ``s`` in ``0 .. 2**(n-1) - 1`` is written as an (n-1)-bit string,
most significant bit first; character ``i`` (1-based) of that string is the
value of party ``A_i``.  So for ``n - 1 = 3``, ``s = 2`` is ``010``.  The
same string names the bipartition whose first half holds the parties with a
``1``; party ``A_n`` always sits in the other half.

Eve's symbols are written as the event they reveal, ``"[010]0"`` for
``A_1..A_{n-1} = 010, A_n = 0``.  The ambiguous symbol of the first event
pair is ``"[00..0]0 or [11..1]1"`` and the formation symbol is ``"x"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from .errors import DomainError, EmptyFilterError, PreconditionError, ValidationError
from .prob import JointDistribution, as_fraction

FORMATION_SYMBOL = "x"


@dataclass(frozen=True)
class PartitionCode:
    """An (n-1)-bit string ``[s]`` labelling a bipartition of n parties.

    The same type serves for primed codes ``[z']`` over m groups, in which
    case ``n`` is the number of groups.
    """

    bits: Tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValidationError(f"partition code bits must be 0/1, got {self.bits!r}")

    @classmethod
    def from_int(cls, value: int, n: int) -> "PartitionCode":
        if not 0 <= value < 2 ** (n - 1):
            raise DomainError(f"code {value} out of range for n={n}")
        return cls(tuple((value >> (n - 2 - i)) & 1 for i in range(n - 1)))

    @classmethod
    def from_string(cls, text: str) -> "PartitionCode":
        if not text or set(text) - {"0", "1"}:
            raise ValidationError(f"bad partition code {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def n(self) -> int:
        return len(self.bits) + 1

    @property
    def value(self) -> int:
        v = 0
        for b in self.bits:
            v = 2 * v + b
        return v

    @property
    def is_trivial(self) -> bool:
        return not any(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def complement(code: PartitionCode) -> PartitionCode:
    """Bitwise negation ``[s] -> [s-bar]``."""
    return PartitionCode(tuple(1 - b for b in code.bits))


def parties_of(code: PartitionCode) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """Return ``(P_[s], complement)`` as sets of 1-based party indices."""
    inside = frozenset(i + 1 for i, b in enumerate(code.bits) if b)
    return inside, frozenset(range(1, code.n + 1)) - inside


def splits_group(code: PartitionCode, group) -> bool:
    """True iff ``group`` has members on both sides of the bipartition."""
    group = set(group)
    if not group:
        raise DomainError("group must be non-empty")
    inside, outside = parties_of(code)
    return bool(group & inside) and bool(group & outside)


def all_codes(n: int) -> Iterator[PartitionCode]:
    for s in range(2 ** (n - 1)):
        yield PartitionCode.from_int(s, n)


def event_label(bits: Sequence[int]) -> str:
    """Eve's symbol for a transparent event: ``[b_1..b_{n-1}]b_n``."""
    return "[" + "".join(map(str, bits[:-1])) + "]" + str(bits[-1])


def ambiguous_label(n: int) -> str:
    return f"[{'0' * (n - 1)}]0 or [{'1' * (n - 1)}]1"


def event_pair(code: PartitionCode) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Honest outcomes ``([s]0, [s-bar]1)`` of the event pair for ``code``."""
    return code.bits + (0,), complement(code).bits + (1,)


def omega_alphabet(n: int) -> Tuple[str, ...]:
    labels = [ambiguous_label(n)]
    for code in list(all_codes(n))[1:]:
        a, b = event_pair(code)
        labels += [event_label(a), event_label(b)]
    return tuple(labels)


def parse_event_label(label: str) -> Tuple[int, ...]:
    """Inverse of :func:`event_label`."""
    if not (label.startswith("[") and "]" in label) or " " in label:
        raise ValidationError(f"not a transparent event label: {label!r}")
    head, tail = label[1:].split("]")
    return tuple(int(c) for c in head + tail)


@dataclass(frozen=True)
class OmegaParams:
    """Parameters Omega_[0..2^(n-1)-1] of a P_Omega member (sum exactly 1/2)."""

    n: int
    omega: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("P_Omega needs at least two parties")
        omega = tuple(as_fraction(w) for w in self.omega)
        object.__setattr__(self, "omega", omega)
        if len(omega) != 2 ** (self.n - 1):
            raise ValidationError(f"expected {2 ** (self.n - 1)} Omega values, got {len(omega)}")
        if any(w < 0 for w in omega):
            raise ValidationError("Omega values must be non-negative")
        if sum(omega) != Fraction(1, 2):
            raise ValidationError(f"normalization violated: sum(Omega) = {sum(omega)}, expected 1/2")

    @classmethod
    def from_strings(cls, n: int, values: Sequence[str]) -> "OmegaParams":
        return cls(n, tuple(as_fraction(v) for v in values))

    @property
    def omega0(self) -> Fraction:
        return self.omega[0]

    def __getitem__(self, code) -> Fraction:
        return self.omega[code.value if isinstance(code, PartitionCode) else code]


@dataclass(frozen=True)
class GroupConfig:
    """Disjoint cooperating groups Q_1..Q_m over parties 1..n.

    Groups are put in canonical order: sorted by smallest member, then the
    anchor group moved last.  The anchor (Q_m) is the group containing A_n,
    or, when A_n does not cooperate, the group holding the largest-index
    cooperating party.
    """

    n: int
    groups: Tuple[FrozenSet[int], ...] = field(default=())

    def __post_init__(self):
        groups = [frozenset(g) for g in self.groups]
        seen = set()
        for g in groups:
            if not g:
                raise ValidationError("empty group")
            if any(not isinstance(p, int) or not 1 <= p <= self.n for p in g):
                raise ValidationError(f"group {sorted(g)} has parties outside 1..{self.n}")
            if seen & g:
                raise ValidationError(f"groups overlap at {sorted(seen & g)}")
            seen |= g
        groups.sort(key=min)
        if groups:
            top = max(seen)
            anchor = next(i for i, g in enumerate(groups) if top in g)
            groups.append(groups.pop(anchor))
        object.__setattr__(self, "groups", tuple(groups))

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def cooperators(self) -> FrozenSet[int]:
        return frozenset().union(*self.groups) if self.groups else frozenset()

    @property
    def noncooperators(self) -> FrozenSet[int]:
        return frozenset(range(1, self.n + 1)) - self.cooperators

    @property
    def covers_all(self) -> bool:
        return len(self.cooperators) == self.n

    def __str__(self) -> str:
        return "|".join(",".join(map(str, sorted(g))) for g in self.groups)

    @classmethod
    def parse(cls, text: str, n: int) -> "GroupConfig":
        """Parse the ``"1,2|3"`` mini-grammar; omitted parties do not cooperate."""
        try:
            groups = [frozenset(int(p) for p in chunk.split(",")) for chunk in text.split("|")]
        except ValueError as exc:
            raise ValidationError(f"bad grouping spec {text!r}") from exc
        return cls(n, tuple(groups))

    @classmethod
    def singletons(cls, n: int, parties=None) -> "GroupConfig":
        parties = range(1, n + 1) if parties is None else parties
        return cls(n, tuple(frozenset({p}) for p in parties))


def _set_partitions(items: List[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def enumerate_group_configs(n: int, min_groups: int = 2, singletons_only: bool = False
                            ) -> Iterator[GroupConfig]:
    """Every GroupConfig with at least ``min_groups`` groups.

    Runs over all subsets of cooperating parties and, unless
    ``singletons_only``, all set partitions of each subset.
    """
    for size in range(min_groups, n + 1):
        for subset in combinations(range(1, n + 1), size):
            if singletons_only:
                yield GroupConfig.singletons(n, subset)
                continue
            for part in _set_partitions(list(subset)):
                if len(part) >= min_groups:
                    yield GroupConfig(n, tuple(frozenset(b) for b in part))


def _group_sides(code: PartitionCode, config: GroupConfig):
    """Side (1 = in P_[s]) of each group, or None if some group is split."""
    inside, _ = parties_of(code)
    sides = []
    for g in config.groups:
        k = len(g & inside)
        if 0 < k < len(g):
            return None
        sides.append(int(k > 0))
    return sides


def zprime_of(code: PartitionCode, config: GroupConfig):
    """The ``[z']`` a non-splitting code is associated with, or None if it splits a group.

    Sides are taken relative to the anchor group Q_m, so both orientations
    of a bipartition of the groups land on the same ``[z']``.
    """
    if code.n != config.n:
        raise DomainError("code and config have different party counts")
    sides = _group_sides(code, config)
    if sides is None:
        return None
    anchor = sides[-1]
    return PartitionCode(tuple(s ^ anchor for s in sides[:-1]))


def associated_codes(zprime: PartitionCode, config: GroupConfig) -> List[PartitionCode]:
    """All ``[s]`` with ``[s] ~ [z']``: exactly ``2**(#non-cooperators)`` of them."""
    if config.m < 1 or zprime.n != config.m:
        raise DomainError(f"[z'] must have {config.m - 1} bits for {config.m} groups")
    return [c for c in all_codes(config.n) if zprime_of(c, config) == zprime]


@dataclass(frozen=True)
class FilteredDistribution:
    """Result of group-consistency filtering.

    ``distribution`` is normalized and lives on the m group variables.
    ``retained_mass`` is the probability that a raw realization survives.
    ``pair_weights[z']`` is the unnormalized weight of each retained event
    pair, i.e. the sum of Omega over codes associated with ``z'`` (for
    ``z' = 0`` this includes Omega_[0] itself); ``transparent_zero`` is the
    part of the ``z' = 0`` weight that Eve can see through.
    """

    distribution: JointDistribution
    retained_mass: Fraction
    pair_weights: Dict[PartitionCode, Fraction]
    transparent_zero: Fraction
    config: GroupConfig


def build_omega_distribution(params: OmegaParams) -> JointDistribution:
    """The P_Omega table: event pairs ``([s]0, [s-bar]1)`` each of mass Omega_[s]."""
    n = params.n
    amb = ambiguous_label(n)
    mass = {}
    for code in all_codes(n):
        w = params[code]
        for ev in event_pair(code):
            mass[(ev, amb if code.is_trivial else event_label(ev))] = w
    return JointDistribution(n, omega_alphabet(n), mass)


def filter_to_groups(params: OmegaParams, config: GroupConfig) -> FilteredDistribution:
    """Discard events that split a group and rewrite the rest over Q_1..Q_m."""
    if params.n != config.n:
        raise DomainError("params and config have different party counts")
    m = config.m
    if m < 1:
        raise DomainError("at least one cooperating group is required")
    weights: Dict[PartitionCode, Fraction] = {z: Fraction(0) for z in all_codes(m)} if m > 1 else {}
    zero = PartitionCode((0,) * (m - 1))
    weights.setdefault(zero, Fraction(0))
    transparent_zero = Fraction(0)
    for code in all_codes(params.n):
        z = zprime_of(code, config)
        if z is None:
            continue
        weights[z] += params[code]
        if z == zero and not code.is_trivial:
            transparent_zero += params[code]
    total = sum(weights.values())
    if total == 0:
        raise EmptyFilterError(f"no retained events for groups {config}")
    labels = [ambiguous_label(m)] if m > 1 else ["[]0 or []1"]
    mass = {}
    for z, w in weights.items():
        a, b = event_pair(z)
        labels += [event_label(a), event_label(b)]
        if z == zero:
            amb = params.omega0
            mass[(a, labels[0])] = amb / (2 * total)
            mass[(b, labels[0])] = amb / (2 * total)
            mass[(a, event_label(a))] = transparent_zero / (2 * total)
            mass[(b, event_label(b))] = transparent_zero / (2 * total)
        else:
            mass[(a, event_label(a))] = w / (2 * total)
            mass[(b, event_label(b))] = w / (2 * total)
    dist = JointDistribution(m, labels, mass)
    return FilteredDistribution(dist, 2 * total, weights, transparent_zero, config)


def formable(params: OmegaParams) -> bool:
    return all(w >= params.omega0 for w in params.omega)


def build_pprime_distribution(params: OmegaParams) -> JointDistribution:
    """The distribution P'_Omega that the LOPC formation protocol produces.

    Each event keeps mass Omega_[0] under the public symbol ``"x"`` and the
    excess Omega_[s] - Omega_[0] under its revealing symbol.
    """
    if not formable(params):
        bad = next(c for c in all_codes(params.n) if params[c] < params.omega0)
        raise PreconditionError(
            f"formation condition violated at s={bad}: "
            f"Omega_[{bad}] = {params[bad]} < Omega_[0] = {params.omega0}",
            detail=f"Omega_[{bad}] = {params[bad]} < Omega_[0] = {params.omega0}")
    n = params.n
    alphabet = (FORMATION_SYMBOL,) + omega_alphabet(n)[1:]
    mass = {}
    for code in all_codes(n):
        for ev in event_pair(code):
            mass[(ev, FORMATION_SYMBOL)] = params.omega0
            if not code.is_trivial:
                mass[(ev, event_label(ev))] = params[code] - params.omega0
    return JointDistribution(n, alphabet, mass)


def omega_from_distribution(dist: JointDistribution) -> OmegaParams:
    """Read Omega back off a distribution in P_Omega table form."""
    n = dist.n
    omega = []
    for code in all_codes(n):
        a, b = event_pair(code)
        sym = ambiguous_label(n) if code.is_trivial else None
        wa, wb = dist[(a, sym or event_label(a))], dist[(b, sym or event_label(b))]
        if wa != wb:
            raise ValidationError(f"event pair {code} is not equiprobable")
        omega.append(wa)
    params = OmegaParams(n, tuple(omega))
    if build_omega_distribution(params) != dist:
        raise ValidationError("distribution is not in P_Omega table form")
    return params
