"""Hypothesis strategies shared by the test modules."""

from fractions import Fraction

from hypothesis import strategies as st

from secretcorr.omega import GroupConfig, OmegaParams
from secretcorr.prob import JointDistribution


@st.composite
def omega_params(draw, n_values=(3, 4, 5), zero_prob=0.3):
    """Random P_Omega parameters; small integer weights give frequent ties and zeros."""
    n = draw(st.sampled_from(n_values))
    k = 2 ** (n - 1)
    raw = [draw(st.integers(0, 4)) if draw(st.floats(0, 1)) > zero_prob else 0 for _ in range(k)]
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    return OmegaParams(n, tuple(Fraction(r, 2 * total) for r in raw))


@st.composite
def group_configs(draw, n):
    parties = draw(st.lists(st.integers(1, n), min_size=2, max_size=n, unique=True))
    labels = [draw(st.integers(0, len(parties) - 1)) for _ in parties]
    if len(set(labels)) < 2:
        labels[0], labels[1] = 0, 1
    groups = {}
    for p, lbl in zip(parties, labels):
        groups.setdefault(lbl, set()).add(p)
    return GroupConfig(n, tuple(frozenset(g) for g in groups.values()))


@st.composite
def params_and_config(draw):
    params = draw(omega_params())
    return params, draw(group_configs(params.n))


@st.composite
def small_distributions(draw, n=2, max_eve=3):
    """Random distribution over n honest bits and a small Eve alphabet."""
    alphabet = [f"e{i}" for i in range(draw(st.integers(1, max_eve)))]
    cells = [(tuple((c >> (n - 1 - i)) & 1 for i in range(n)), e)
             for c in range(2 ** n) for e in alphabet]
    weights = [draw(st.integers(0, 5)) for _ in cells]
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return JointDistribution(n, alphabet, {c: Fraction(w, total) for c, w in zip(cells, weights)})
