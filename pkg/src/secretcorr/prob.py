"""Exact finite joint distributions P(A_1, ..., A_n, E) and information measures.

Probabilities are stored as :class:`fractions.Fraction`; entropies are
floats computed from the exact masses at the last step.  Variables are
addressed by integer id: ``1..n`` for the honest parties and ``EVE`` (0)
for the eavesdropper.

Honest values are usually bits, but :func:`group_variables` produces
composite variables whose values are tuples of bits; every measure here
only needs hashable values.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Hashable, Iterable, Iterator, Mapping, Sequence, Tuple

from .errors import DomainError, ValidationError

EVE = 0
"""Variable id of the eavesdropper."""

TRIVIAL_EVE = "-"
"""Single Eve symbol used once Eve's variable has been marginalized away."""

CMI_TOLERANCE = 1e-9

Outcome = Tuple[Tuple[Hashable, ...], str]


def as_fraction(value) -> Fraction:
    """Convert ``value`` (int, Fraction or ``"num/den"`` string) to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a probability: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed fraction {value!r}") from exc
    raise ValidationError(f"expected an exact rational, got {type(value).__name__}")


class JointDistribution:
    """Immutable joint distribution over ``n`` honest variables and Eve.

    Parameters
    ----------
    n : int
        Number of honest variables.
    eve_alphabet : sequence of str
        Declared Eve symbols, in canonical order.  Symbols may carry zero mass.
    mass : mapping
        ``(honest_values, eve_symbol) -> probability``.  Zero entries are
        dropped; every other entry must be a non-negative rational and the
        total must be exactly one.
    """

    __slots__ = ("_n", "_alphabet", "_eve_index", "_mass")

    def __init__(self, n: int, eve_alphabet: Sequence[str], mass: Mapping[Outcome, object]):
        if n < 0:
            raise ValidationError("n must be non-negative")
        alphabet = tuple(eve_alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise ValidationError("duplicate Eve symbols")
        if not alphabet:
            raise ValidationError("Eve alphabet must be non-empty")
        index = {e: i for i, e in enumerate(alphabet)}
        stored: Dict[Outcome, Fraction] = {}
        total = Fraction(0)
        for (values, eve), p in mass.items():
            p = as_fraction(p)
            values = tuple(values)
            if len(values) != n:
                raise ValidationError(f"outcome {values!r} does not have {n} honest values")
            if eve not in index:
                raise ValidationError(f"Eve symbol {eve!r} not in declared alphabet")
            if p < 0:
                raise ValidationError(f"negative mass {p} at {values!r}, {eve!r}")
            total += p
            if p:
                key = (values, eve)
                stored[key] = stored.get(key, Fraction(0)) + p
        if total != 1:
            raise ValidationError(f"masses sum to {total}, not 1")
        self._n = n
        self._alphabet = alphabet
        self._eve_index = index
        self._mass = dict(sorted(stored.items(), key=lambda kv: (kv[0][0], index[kv[0][1]])))

    @property
    def n(self) -> int:
        return self._n

    @property
    def eve_alphabet(self) -> Tuple[str, ...]:
        return self._alphabet

    @property
    def variables(self) -> Tuple[int, ...]:
        return (EVE,) + tuple(range(1, self._n + 1))

    def items(self) -> Iterator[Tuple[Outcome, Fraction]]:
        """Support in canonical order (honest values, then Eve symbol index)."""
        return iter(self._mass.items())

    def outcomes(self) -> Tuple[Outcome, ...]:
        return tuple(self._mass)

    def __getitem__(self, outcome: Outcome) -> Fraction:
        values, eve = outcome
        return self._mass.get((tuple(values), eve), Fraction(0))

    def __len__(self) -> int:
        return len(self._mass)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (self._n == other._n and self._alphabet == other._alphabet
                and self._mass == other._mass)

    def __hash__(self):
        return hash((self._n, self._alphabet, tuple(self._mass.items())))

    def __repr__(self) -> str:
        return f"JointDistribution(n={self._n}, support={len(self._mass)}, |E|={len(self._alphabet)})"

    def eve_index(self, symbol: str) -> int:
        return self._eve_index[symbol]

    def honest_marginal(self) -> Dict[Tuple[Hashable, ...], Fraction]:
        out: Dict[Tuple[Hashable, ...], Fraction] = defaultdict(Fraction)
        for (values, _), p in self._mass.items():
            out[values] += p
        return dict(out)


def _check_vars(dist: JointDistribution, variables: Iterable[int]) -> Tuple[int, ...]:
    variables = tuple(variables)
    for v in variables:
        if not isinstance(v, int) or not 0 <= v <= dist.n:
            raise DomainError(f"unknown variable {v!r} for a distribution with n={dist.n}")
    return variables


def _project(dist: JointDistribution, variables: Sequence[int]) -> Dict[tuple, Fraction]:
    """Marginal over ``variables`` as a plain ``tuple -> mass`` dict."""
    order = sorted(set(variables))
    out: Dict[tuple, Fraction] = defaultdict(Fraction)
    for (values, eve), p in dist.items():
        key = tuple(eve if v == EVE else values[v - 1] for v in order)
        out[key] += p
    return out


def marginalize(dist: JointDistribution, keep: Iterable[int]) -> JointDistribution:
    """Sum out every variable not in ``keep``.

    Kept honest variables are renumbered ``1..k`` in increasing id order.  If
    Eve is dropped, the result carries the single symbol :data:`TRIVIAL_EVE`.
    """
    keep = set(_check_vars(dist, keep))
    if not keep:
        raise DomainError("keep must be non-empty")
    honest = sorted(v for v in keep if v != EVE)
    mass: Dict[Outcome, Fraction] = defaultdict(Fraction)
    for (values, eve), p in dist.items():
        e = eve if EVE in keep else TRIVIAL_EVE
        mass[(tuple(values[v - 1] for v in honest), e)] += p
    alphabet = dist.eve_alphabet if EVE in keep else (TRIVIAL_EVE,)
    return JointDistribution(len(honest), alphabet, mass)


def group_variables(dist: JointDistribution, groups: Sequence[Iterable[int]]) -> JointDistribution:
    """Merge each group of honest variables into one composite variable.

    Parties outside every group stay as singletons.  Result variables are
    ordered by their smallest member; a composite value is the tuple of its
    members' values in index order, a singleton keeps its raw value.
    """
    seen = set()
    blocks = []
    for g in groups:
        g = tuple(sorted(set(_check_vars(dist, g))))
        if not g:
            raise DomainError("empty group")
        if EVE in g:
            raise DomainError("Eve cannot be grouped with honest parties")
        if seen.intersection(g):
            raise DomainError(f"overlapping groups at {sorted(seen.intersection(g))}")
        seen.update(g)
        blocks.append(g)
    blocks += [(v,) for v in range(1, dist.n + 1) if v not in seen]
    blocks.sort(key=lambda b: b[0])
    mass: Dict[Outcome, Fraction] = defaultdict(Fraction)
    for (values, eve), p in dist.items():
        new = tuple(values[b[0] - 1] if len(b) == 1 else tuple(values[v - 1] for v in b)
                    for b in blocks)
        mass[(new, eve)] += p
    return JointDistribution(len(blocks), dist.eve_alphabet, mass)


def _entropy_of(masses: Iterable[Fraction]) -> float:
    h = 0.0
    for p in masses:
        if p:
            x = float(p)
            h -= x * math.log2(x)
    return h


def entropy(dist: JointDistribution, variables: Iterable[int]) -> float:
    """Shannon entropy in bits of the marginal on ``variables``."""
    variables = _check_vars(dist, variables)
    if not variables:
        raise DomainError("entropy needs at least one variable")
    return max(0.0, _entropy_of(_project(dist, variables).values()))


def conditional_mutual_information(dist: JointDistribution, x: Iterable[int], y: Iterable[int],
                                   z: Iterable[int] = ()) -> float:
    """I(X:Y|Z) = H(X,Z) + H(Y,Z) - H(X,Y,Z) - H(Z), in bits.

    Values in ``[-1e-9, 0)`` are reported as 0; anything more negative is a
    numerical bug and raises.
    """
    x, y, z = (set(_check_vars(dist, s)) for s in (x, y, z))
    if not x or not y:
        raise DomainError("X and Y must be non-empty")
    if x & y or x & z or y & z:
        raise DomainError("X, Y and Z must be pairwise disjoint")
    h = lambda s: _entropy_of(_project(dist, s).values()) if s else 0.0  # noqa: E731
    value = h(x | z) + h(y | z) - h(x | y | z) - h(z)
    if value < 0:
        if value < -CMI_TOLERANCE:
            raise ArithmeticError(f"conditional mutual information came out as {value}")
        return 0.0
    return value


class Channel:
    """Row-stochastic map from Eve's alphabet to a new alphabet.

    ``rows[i][j]`` is the probability of output ``output_alphabet[j]`` given
    input ``input_alphabet[i]``.  Exact channels hold Fractions and are
    checked exactly; float channels (optimizer output) are checked to 1e-9.
    """

    __slots__ = ("input_alphabet", "output_alphabet", "rows", "exact")

    def __init__(self, input_alphabet: Sequence[str], output_alphabet: Sequence[str],
                 rows: Sequence[Sequence[object]]):
        self.input_alphabet = tuple(input_alphabet)
        self.output_alphabet = tuple(output_alphabet)
        if len(set(self.output_alphabet)) != len(self.output_alphabet):
            raise ValidationError("duplicate output symbols")
        if len(rows) != len(self.input_alphabet):
            raise ValidationError("one row per input symbol required")
        self.exact = all(not isinstance(w, float) for row in rows for w in row)
        conv = as_fraction if self.exact else float
        self.rows = tuple(tuple(conv(w) for w in row) for row in rows)
        for sym, row in zip(self.input_alphabet, self.rows):
            if len(row) != len(self.output_alphabet):
                raise ValidationError(f"row for {sym!r} has wrong length")
            if any(w < 0 or w > 1 for w in row):
                raise ValidationError(f"row for {sym!r} has entries outside [0, 1]")
            total = sum(row)
            if (total != 1) if self.exact else abs(total - 1) > 1e-9:
                raise ValidationError(f"row for {sym!r} sums to {total}")

    @classmethod
    def identity(cls, alphabet: Sequence[str]) -> "Channel":
        k = len(alphabet)
        return cls(alphabet, alphabet, [[int(i == j) for j in range(k)] for i in range(k)])

    @classmethod
    def constant(cls, alphabet: Sequence[str], symbol: str = "*") -> "Channel":
        return cls(alphabet, (symbol,), [[1] for _ in alphabet])

    @classmethod
    def from_mapping(cls, input_alphabet: Sequence[str], output_alphabet: Sequence[str],
                     mapping: Mapping[str, Mapping[str, object]]) -> "Channel":
        """Build from sparse rows ``{input: {output: weight}}``; missing inputs map to themselves."""
        col = {e: j for j, e in enumerate(output_alphabet)}
        rows = []
        for e in input_alphabet:
            row = [0] * len(output_alphabet)
            for out, w in mapping.get(e, {e: 1}).items():
                row[col[out]] = w
            rows.append(row)
        return cls(input_alphabet, output_alphabet, rows)

    def weight(self, e_in: str, e_out: str):
        return self.rows[self.input_alphabet.index(e_in)][self.output_alphabet.index(e_out)]

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return (self.input_alphabet, self.output_alphabet, self.rows) == (
            other.input_alphabet, other.output_alphabet, other.rows)

    def __repr__(self):
        return f"Channel({len(self.input_alphabet)} -> {len(self.output_alphabet)}, exact={self.exact})"


def apply_channel_to_eve(dist: JointDistribution, ch: Channel) -> JointDistribution:
    """Replace E by E~ drawn from ``ch``; honest marginal is untouched."""
    if ch.input_alphabet != dist.eve_alphabet:
        raise DomainError("channel input alphabet does not match Eve's alphabet")
    if not ch.exact:
        raise DomainError("apply_channel_to_eve needs an exact channel; use cmi_under_channel for float channels")
    row_of = {e: i for i, e in enumerate(ch.input_alphabet)}
    mass: Dict[Outcome, Fraction] = defaultdict(Fraction)
    for (values, eve), p in dist.items():
        for out, w in zip(ch.output_alphabet, ch.rows[row_of[eve]]):
            if w:
                mass[(values, out)] += p * w
    return JointDistribution(dist.n, ch.output_alphabet, mass)


def total_variation_distance(a: JointDistribution, b: JointDistribution) -> float:
    """Half the L1 distance between two distributions on the same variables."""
    if a.n != b.n or set(a.eve_alphabet) != set(b.eve_alphabet):
        raise DomainError("distributions have different variable structure")
    keys = set(a.outcomes()) | set(b.outcomes())
    return float(sum(abs(a[k] - b[k]) for k in keys) / 2)


def joint_array(dist: JointDistribution, x: Iterable[int], y: Iterable[int]):
    """Float array ``P[x, y, e]`` with X and Y flattened over their supports.

    Returns ``(P, x_labels, y_labels)``; the Eve axis follows ``dist.eve_alphabet``.
    """
    import numpy as np

    x = sorted(set(_check_vars(dist, x)))
    y = sorted(set(_check_vars(dist, y)))
    if EVE in x or EVE in y or set(x) & set(y):
        raise DomainError("X and Y must be disjoint honest variable sets")
    xs, ys = {}, {}
    entries = []
    for (values, eve), p in dist.items():
        xv = tuple(values[v - 1] for v in x)
        yv = tuple(values[v - 1] for v in y)
        entries.append((xs.setdefault(xv, len(xs)), ys.setdefault(yv, len(ys)),
                        dist.eve_index(eve), float(p)))
    arr = np.zeros((len(xs), len(ys), len(dist.eve_alphabet)))
    for i, j, k, p in entries:
        arr[i, j, k] += p
    return arr, tuple(xs), tuple(ys)


def cmi_under_channel(dist: JointDistribution, x: Iterable[int], y: Iterable[int], ch: Channel) -> float:
    """I(X:Y|E~) for E -> E~ given by ``ch``; works for float channels too."""
    import numpy as np

    from .intrinsic import cmi_of_array

    if ch.input_alphabet != dist.eve_alphabet:
        raise DomainError("channel input alphabet does not match Eve's alphabet")
    p, _, _ = joint_array(dist, x, y)
    w = np.array([[float(v) for v in row] for row in ch.rows])
    return cmi_of_array(np.einsum("xye,et->xyt", p, w))
