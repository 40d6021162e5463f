"""Repeated-code key distillation and LOPC formation, simulated with seeded hashes.

Distillation runs on realizations that survive the group-consistency
filter: a realization whose event pair separates members of one group is
publicly discarded, so blocks are made of N retained realizations, drawn
directly from the retained part of the table.  Group ``Q_1`` draws the
random bit ``k_1`` and broadcasts ``X_r = k_1 xor G_1^(r)``; group ``i``
accepts iff ``X_r xor G_i^(r)`` is the same for every r and then outputs it
as ``k_i``.  Rejected blocks are dropped and Eve only learns that they were
rejected.

Eve's view of an accepted block is compressed to a sufficient statistic:
``"amb"`` if every one of her N symbols is the ambiguous one, else the
event pair ``[z']`` and the bit ``k_1``, which she reads off any transparent
realization as ``X_r xor G_1^(r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from ..omega import (FORMATION_SYMBOL, GroupConfig, OmegaParams, PartitionCode, all_codes,
                     build_omega_distribution, build_pprime_distribution, event_label,
                     filter_to_groups, zprime_of)
from ..prob import JointDistribution
from . import rng as R
from .estimate import bootstrap_interval, one_way_rate, one_way_rate_terms, wilson_interval

AMBIGUOUS_VIEW = "amb"
DEFAULT_BATCH = 1 << 16
REPLAY_CHUNK = 1 << 18


@dataclass(frozen=True)
class SimConfig:
    """Settings of one distillation run.

    ``rounds`` caps the number of blocks scanned.  With ``target_accepted``
    set, scanning stops at the block that brings the accepted count to the
    target, so the report covers exactly that many accepted blocks.
    ``epsilon_eve`` is the tolerance of the check that Eve's view determines
    the keys on blocks from a transparent event pair.
    """

    seed: int
    rounds: int
    block_size: int
    config: GroupConfig
    epsilon_eve: float = 1e-9
    target_accepted: Optional[int] = None
    bootstrap: int = 1000
    confidence: float = 0.99

    def __post_init__(self):
        if self.rounds < 1 or self.block_size < 1:
            raise DomainError("rounds and block_size must be at least 1")
        if self.config.m < 2:
            raise DomainError("need at least two cooperating groups")
        if self.target_accepted is not None and self.target_accepted < 1:
            raise DomainError("target_accepted must be positive")
        if not 0 < self.confidence < 1:
            raise DomainError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class PairRow:
    zprime: str
    accepted: int
    exact_conditional: Fraction
    exact_per_block: Fraction

    def to_json(self, accepted_total: int, total_blocks: int) -> dict:
        return {
            "zprime": self.zprime,
            "accepted": self.accepted,
            "empirical_conditional": self.accepted / accepted_total if accepted_total else None,
            "exact_conditional": str(self.exact_conditional),
            "empirical_per_block": self.accepted / total_blocks,
            "exact_per_block": float(self.exact_per_block),
        }


@dataclass(frozen=True)
class SimReport:
    accepted_blocks: int
    total_blocks: int
    block_size: int
    config: str
    seed: int
    empirical_key_joint: Optional[JointDistribution]
    key_counts: np.ndarray = field(repr=False)
    estimated_ck_rate: float
    rate_ci: Tuple[float, float]
    honest_information: float
    eve_information: float
    acceptance_rate: float
    acceptance_ci: Tuple[float, float]
    pairs: Tuple[PairRow, ...]
    keys_equal_on_zero_pair: bool
    eve_key_entropy_transparent: float
    eve_determines_transparent_keys: bool
    retained_mass: Fraction
    inconclusive: bool

    @property
    def rate_per_realization(self) -> float:
        """Key bits per retained realization."""
        return self.estimated_ck_rate * self.acceptance_rate / self.block_size

    @property
    def rate_ci_per_realization(self) -> Tuple[float, float]:
        f = self.acceptance_rate / self.block_size
        return (self.rate_ci[0] * f, self.rate_ci[1] * f)

    def to_json(self) -> dict:
        """JSON-safe report; undefined estimates (no accepted block) become null."""
        def num(x):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else x

        return {
            "seed": self.seed,
            "config": self.config,
            "block_size": self.block_size,
            "accepted_blocks": self.accepted_blocks,
            "total_blocks": self.total_blocks,
            "inconclusive": self.inconclusive,
            "acceptance_rate": self.acceptance_rate,
            "acceptance_ci": list(self.acceptance_ci),
            "estimated_ck_rate": num(self.estimated_ck_rate),
            "rate_ci": [num(v) for v in self.rate_ci],
            "rate_per_realization": num(self.rate_per_realization),
            "honest_information": num(self.honest_information),
            "eve_information": num(self.eve_information),
            "retained_mass": str(self.retained_mass),
            "keys_equal_on_zero_pair": self.keys_equal_on_zero_pair,
            "eve_key_entropy_transparent": num(self.eve_key_entropy_transparent),
            "eve_determines_transparent_keys": self.eve_determines_transparent_keys,
            "pairs": [p.to_json(self.accepted_blocks, self.total_blocks) for p in self.pairs],
        }


def _alias_for(dist: JointDistribution):
    items = list(dist.items())
    thr, al = R.build_alias([p for _, p in items])
    return items, thr, al


def sample_indices(dist: JointDistribution, count: int, seed: int) -> np.ndarray:
    """Indices into ``list(dist.items())`` of ``count`` i.i.d. draws."""
    if count < 1:
        raise DomainError("count must be at least 1")
    _, thr, al = _alias_for(dist)
    h = R.draws_array(R.stream_key(seed, R.SOURCE_STREAM), np.arange(count), 0)
    return R.alias_lookup(h, thr, al)


def sample_outcomes(dist: JointDistribution, count: int, seed: int) -> List[tuple]:
    """``count`` i.i.d. outcomes ``(bits, eve)``, deterministic in ``seed``."""
    items = list(dist.items())
    return [items[i][0] for i in sample_indices(dist, count, seed)]


def acceptance_probability(params: OmegaParams, config: GroupConfig, N: int) -> Dict[PartitionCode, Fraction]:
    """p(s_0) = w_{s_0}^N / sum_z w_z^N over the retained event-pair weights."""
    return {z: v[0] for z, v in _pair_probabilities(params, config, N).items()}


def block_acceptance_probability(params: OmegaParams, config: GroupConfig, N: int
                                 ) -> Dict[PartitionCode, Fraction]:
    """Probability that a block of N retained realizations is accepted on pair ``[z']``."""
    return {z: v[1] for z, v in _pair_probabilities(params, config, N).items()}


def _pair_probabilities(params, config, N):
    if N < 1:
        raise DomainError("N must be at least 1")
    weights = filter_to_groups(params, config).pair_weights
    powers = {z: w ** N for z, w in weights.items() if w > 0}
    total_n = sum(powers.values())
    total = sum(weights.values())
    if total_n == 0:
        raise DomainError("all retained event-pair weights are zero")
    return {z: (p / total_n, p / total ** N) for z, p in sorted(powers.items(), key=lambda t: t[0].value)}


@dataclass(frozen=True)
class _Table:
    """Retained realizations, ready for sampling."""

    outcomes: Tuple[tuple, ...]
    threshold: np.ndarray
    alias: np.ndarray
    groups: np.ndarray        # [row, group] common bit of the group
    pair: np.ndarray          # [row] index of [z']
    transparent: np.ndarray   # [row] Eve's symbol reveals the event
    m: int


def _group_bits(bits, config) -> Optional[Tuple[int, ...]]:
    values = []
    for g in config.groups:
        vals = {bits[p - 1] for p in g}
        if len(vals) > 1:
            return None
        values.append(vals.pop())
    return tuple(values)


def _code_of(bits) -> PartitionCode:
    return PartitionCode(tuple(b ^ bits[-1] for b in bits[:-1]))


def _retained_table(params: OmegaParams, config: GroupConfig) -> _Table:
    dist = build_omega_distribution(params)
    amb = dist.eve_alphabet[0]
    rows = []
    for (bits, eve), p in dist.items():
        z = zprime_of(_code_of(bits), config)
        if z is None:
            continue
        g = _group_bits(bits, config)
        rows.append(((bits, eve), p, g, z.value, eve != amb))
    if not rows:
        raise DomainError("no realization survives the group filter")
    thr, al = R.build_alias([r[1] for r in rows])
    return _Table(tuple(r[0] for r in rows), thr, al,
                  np.array([r[2] for r in rows], dtype=np.int64),
                  np.array([r[3] for r in rows], dtype=np.int64),
                  np.array([r[4] for r in rows], dtype=bool), config.m)


def _q1_party(config: GroupConfig) -> int:
    return min(config.groups[0])


def view_alphabet(m: int) -> Tuple[str, ...]:
    labels = [AMBIGUOUS_VIEW]
    for z in all_codes(m):
        labels += [f"[{z}] k1=0", f"[{z}] k1=1"]
    return tuple(labels)


@dataclass(frozen=True)
class BlockResult:
    accepted: bool
    keys: Optional[Tuple[int, ...]]
    eve_view: Optional[str]
    broadcast: Tuple[int, ...]
    eve_symbols: Tuple[str, ...]
    used: int


def repeated_code_block(samples: Sequence[tuple], config: GroupConfig, seed: int, block: int = 0
                        ) -> BlockResult:
    """Run the repeated-code protocol on one block of raw outcomes ``(bits, eve)``.

    Realizations whose event splits a group are discarded first; ``used``
    counts the rest.  ``k_1`` comes from the stream of the first party of
    ``Q_1`` at ``block``, matching :func:`run_distillation`.
    """
    if config.m < 2:
        raise DomainError("need at least two cooperating groups")
    kept = [(bits, eve) for bits, eve in samples if _group_bits(bits, config) is not None]
    if not kept:
        return BlockResult(False, None, None, (), (), 0)
    n = len(kept[0][0])
    amb = f"[{'0' * (n - 1)}]0 or [{'1' * (n - 1)}]1"
    key = R.stream_key(seed, R.PARTY_STREAM_BASE + _q1_party(config) - 1)
    k1 = R.draw(key, block, 0) >> 63
    groups = [_group_bits(bits, config) for bits, _ in kept]
    broadcast = tuple(k1 ^ g[0] for g in groups)
    keys = []
    for i in range(config.m):
        vals = {x ^ g[i] for x, g in zip(broadcast, groups)}
        if len(vals) != 1:
            return BlockResult(False, None, None, broadcast, tuple(e for _, e in kept), len(kept))
        keys.append(vals.pop())
    view = AMBIGUOUS_VIEW
    for (bits, eve), x in zip(kept, broadcast):
        if eve != amb:
            z = zprime_of(_code_of(bits), config)
            g1 = _group_bits(bits, config)[0]
            view = f"[{z}] k1={x ^ g1}"
            break
    return BlockResult(True, tuple(keys), view, broadcast, tuple(e for _, e in kept), len(kept))


def block_samples(params: OmegaParams, config: GroupConfig, N: int, seed: int, block: int) -> List[tuple]:
    """The N retained realizations that :func:`run_distillation` draws for ``block``."""
    table = _retained_table(params, config)
    key = R.stream_key(seed, R.SOURCE_STREAM)
    out = []
    for r in range(N):
        h = np.array([R.draw(key, block, r)], dtype=np.uint64)
        out.append(table.outcomes[int(R.alias_lookup(h, table.threshold, table.alias)[0])])
    return out


def _replay(table: _Table, key_src: int, key_k1: int, blocks: np.ndarray, N: int):
    """Protocol outputs of accepted blocks: (key index, view index, pair index)."""
    m = table.m
    idx = np.stack([R.alias_lookup(R.draws_array(key_src, blocks, r), table.threshold, table.alias)
                    for r in range(N)])
    g = table.groups[idx]                      # [r, block, group]
    k1 = R.bit_of(R.draws_array(key_k1, blocks, 0))
    x = k1[None, :] ^ g[:, :, 0]
    v = x[:, :, None] ^ g                      # X_r xor G_i^(r)
    if not np.all(v == v[0][None, :, :]):
        raise AssertionError("scan accepted a block that fails the parity test")
    keys = v[0]
    key_index = np.sum(keys << np.arange(m)[None, :], axis=1)
    pair = table.pair[idx[0]]
    trans = table.transparent[idx]
    seen = trans.any(axis=0)
    first = np.argmax(trans, axis=0)
    cols = np.arange(len(blocks))
    eve_k1 = x[first, cols] ^ g[first, cols, 0]
    view = np.where(seen, 1 + 2 * pair + eve_k1, 0)
    return key_index, view, pair


def _cond_entropy(joint: np.ndarray) -> float:
    """Plug-in H(row | column) in bits."""
    n = joint.sum()
    if n == 0:
        return 0.0
    p = joint / n
    pc = p.sum(axis=0)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log2((p / np.where(pc > 0, pc, 1)[None, :])[mask])))


def run_distillation(params: OmegaParams, sim: SimConfig) -> SimReport:
    """Simulate the repeated-code protocol and estimate the one-way key rate."""
    from ._kernel import scan_blocks

    config, N = sim.config, sim.block_size
    if config.n != params.n:
        raise DomainError("config does not match params")
    table = _retained_table(params, config)
    probs = _pair_probabilities(params, config, N)
    key_src = R.stream_key(sim.seed, R.SOURCE_STREAM)
    key_k1 = R.stream_key(sim.seed, R.PARTY_STREAM_BASE + _q1_party(config) - 1)
    accepted, total = scan_blocks(np.uint64(key_src), table.threshold, table.alias.astype(np.uint64),
                                  table.pair, sim.rounds, N, sim.target_accepted or 0, DEFAULT_BATCH)
    m = config.m
    views = view_alphabet(m)
    joint = np.zeros((2 ** m, len(views)), dtype=np.int64)
    pair_counts = np.zeros(2 ** (m - 1), dtype=np.int64)
    zero_ok = True
    trans_joint = np.zeros((2 ** m, len(views)), dtype=np.int64)
    for start in range(0, len(accepted), REPLAY_CHUNK):
        chunk = accepted[start:start + REPLAY_CHUNK]
        key_index, view, pair = _replay(table, key_src, key_k1, chunk, N)
        np.add.at(joint, (key_index, view), 1)
        np.add.at(pair_counts, pair, 1)
        zero = pair == 0
        zero_ok &= bool(np.all((key_index[zero] == 0) | (key_index[zero] == 2 ** m - 1)))
        np.add.at(trans_joint, (key_index[~zero], view[~zero]), 1)
    n_acc = int(len(accepted))
    if n_acc:
        mass = {}
        for ki, vi in zip(*np.nonzero(joint)):
            bits = tuple(int(ki) >> i & 1 for i in range(m))
            mass[(bits, views[vi])] = Fraction(int(joint[ki, vi]), n_acc)
        empirical = JointDistribution(m, views, mass)
        rate = one_way_rate(joint, m)
        honest, eve = one_way_rate_terms(joint, m)
        boot = np.random.default_rng(np.random.SeedSequence([sim.seed & R.MASK64, 0xB0075]))
        ci = bootstrap_interval(joint, lambda t: one_way_rate(t, m), sim.bootstrap, sim.confidence, boot)
    else:
        empirical, rate, honest, eve, ci = None, 0.0, math.nan, math.nan, (math.nan, math.nan)
    h_trans = _cond_entropy(trans_joint)
    rows = tuple(PairRow(str(z), int(pair_counts[z.value]), c, b) for z, (c, b) in probs.items())
    return SimReport(
        accepted_blocks=n_acc, total_blocks=int(total), block_size=N, config=str(config),
        seed=sim.seed, empirical_key_joint=empirical, key_counts=joint,
        estimated_ck_rate=rate, rate_ci=ci, honest_information=honest, eve_information=eve,
        acceptance_rate=n_acc / int(total), acceptance_ci=wilson_interval(n_acc, int(total), sim.confidence),
        pairs=rows, keys_equal_on_zero_pair=zero_ok, eve_key_entropy_transparent=h_trans,
        eve_determines_transparent_keys=h_trans < sim.epsilon_eve,
        retained_mass=filter_to_groups(params, config).retained_mass, inconclusive=n_acc == 0)


def formation_messages(params: OmegaParams) -> Tuple[Tuple[str, Optional[tuple], Fraction], ...]:
    """Public messages of the formation protocol: ``(label, event bits or None, probability)``."""
    n = params.n
    out = [(FORMATION_SYMBOL, None, 2 ** n * params.omega0)]
    for code in list(all_codes(n))[1:]:
        excess = params[code] - params.omega0
        for bits in (code.bits + (0,), tuple(1 - b for b in code.bits) + (1,)):
            if excess > 0:
                out.append((event_label(bits), bits, excess))
    return tuple(out)


def run_formation(params: OmegaParams, rounds: int, seed: int
                  ) -> Tuple[JointDistribution, JointDistribution]:
    """Simulate LOPC formation of P'_Omega; returns ``(empirical, exact target)``.

    Party ``A_1`` draws the public message: ``"x"`` with probability
    ``2^n Omega_[0]``, after which every party outputs an independent local
    fair bit, or an event of pair ``s`` with probability
    ``Omega_[s] - Omega_[0]``, after which every party outputs its bit of that
    event.  Only public messages and local randomness are used.
    """
    target = build_pprime_distribution(params)
    if rounds < 1:
        raise DomainError("rounds must be at least 1")
    n = params.n
    msgs = formation_messages(params)
    thr, al = R.build_alias([p for _, _, p in msgs])
    blocks = np.arange(rounds)
    msg = R.alias_lookup(R.draws_array(R.stream_key(seed, R.FORMATION_STREAM), blocks, 0), thr, al)
    local = np.stack([R.bit_of(R.draws_array(R.stream_key(seed, R.PARTY_STREAM_BASE + i), blocks, 0))
                      for i in range(n)], axis=1)
    event_bits = np.array([b if b is not None else (0,) * n for _, b, _ in msgs], dtype=np.int64)
    is_x = (msg == 0)[:, None]
    bits = np.where(is_x, local, event_bits[msg])
    code = msg * (1 << n) + np.sum(bits << np.arange(n - 1, -1, -1)[None, :], axis=1)
    counts = np.bincount(code, minlength=len(msgs) << n)
    mass = {}
    for c in np.nonzero(counts)[0]:
        mi, b = divmod(int(c), 1 << n)
        outcome = tuple(b >> (n - 1 - i) & 1 for i in range(n))
        mass[(outcome, msgs[mi][0])] = Fraction(int(counts[c]), rounds)
    empirical = JointDistribution(n, target.eve_alphabet, mass)
    return empirical, target
