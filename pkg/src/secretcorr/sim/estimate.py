"""Plug-in information estimates from contingency tables.

Entropies carry the Miller-Madow correction ``(K - 1) / (2 n ln 2)`` with K
the number of occupied cells.  Confidence intervals come from multinomial
bootstrap resampling of the full joint table.
"""

from __future__ import annotations

import math
from statistics import NormalDist
from typing import Callable, Tuple

import numpy as np


def entropy_mm(counts: np.ndarray) -> float:
    """Miller-Madow entropy estimate in bits from a count vector."""
    c = np.asarray(counts, dtype=float).ravel()
    n = c.sum()
    if n <= 0:
        return 0.0
    nz = c[c > 0]
    p = nz / n
    return float(-np.sum(p * np.log2(p)) + (len(nz) - 1) / (2 * n * math.log(2)))


def mutual_information_mm(table: np.ndarray) -> float:
    """I(X:Y) from a 2-D count table, each entropy Miller-Madow corrected."""
    t = np.asarray(table, dtype=float)
    return entropy_mm(t.sum(axis=1)) + entropy_mm(t.sum(axis=0)) - entropy_mm(t)


def one_way_rate_terms(joint: np.ndarray, m: int) -> Tuple[float, float]:
    """``(min_j I(k_1:k_j), I(k_1:Eve))`` from counts ``joint[key_index, eve_index]``.

    ``key_index`` packs ``k_1..k_m`` with ``k_1`` as the least significant bit.
    """
    joint = np.asarray(joint, dtype=float)
    keys = np.arange(joint.shape[0])
    k1 = keys & 1
    by_key = joint.sum(axis=1)
    best = math.inf
    for j in range(1, m):
        kj = (keys >> j) & 1
        t = np.zeros((2, 2))
        np.add.at(t, (k1, kj), by_key)
        best = min(best, mutual_information_mm(t))
    te = np.zeros((2, joint.shape[1]))
    np.add.at(te, k1, joint)
    return best, mutual_information_mm(te)


def one_way_rate(joint: np.ndarray, m: int) -> float:
    """max(0, min_j I(k_1:k_j) - I(k_1:Eve))."""
    honest, eve = one_way_rate_terms(joint, m)
    return max(0.0, honest - eve)


def bootstrap_interval(joint: np.ndarray, statistic: Callable[[np.ndarray], float],
                       resamples: int, confidence: float, rng: np.random.Generator
                       ) -> Tuple[float, float]:
    """Percentile interval of ``statistic`` over multinomial resamples of ``joint``."""
    flat = np.asarray(joint, dtype=float).ravel()
    n = int(flat.sum())
    if n == 0 or resamples <= 0:
        return (math.nan, math.nan)
    draws = rng.multinomial(n, flat / n, size=resamples)
    values = np.array([statistic(d.reshape(joint.shape)) for d in draws])
    alpha = (1 - confidence) / 2
    lo, hi = np.quantile(values, [alpha, 1 - alpha])
    return float(lo), float(hi)


def wilson_interval(successes: int, trials: int, confidence: float) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)
