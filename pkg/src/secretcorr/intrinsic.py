"""Upper bounds on intrinsic information by local search over Eve channels.

The objective ``I(X:Y|T)`` with ``Q(x,y,t) = sum_e P(x,y,e) W(t|e)`` is
minimized over row-stochastic ``W`` by projected gradient descent with
Armijo backtracking, started from a fixed candidate set plus Dirichlet
random restarts.  Only an upper bound is claimed; exact zeros come from
the explicit channels in :mod:`secretcorr.analysis`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .prob import CMI_TOLERANCE, Channel, JointDistribution, joint_array

_LOG_FLOOR = 1e-300


def cmi_of_array(q: np.ndarray) -> float:
    """I(X:Y|T) in bits for a nonnegative array ``q[x, y, t]`` summing to 1."""
    q = np.asarray(q, dtype=float)
    qt = q.sum(axis=(0, 1))
    qxt = q.sum(axis=1)
    qyt = q.sum(axis=0)
    mask = q > 0
    num = q * qt[None, None, :]
    den = qxt[:, None, :] * qyt[None, :, :]
    value = float(np.sum(q[mask] * np.log2(num[mask] / den[mask])))
    if value < 0:
        if value < -CMI_TOLERANCE:
            raise ArithmeticError(f"conditional mutual information {value} is negative")
        return 0.0
    return value


def _gradient(p: np.ndarray, w: np.ndarray) -> np.ndarray:
    q = np.einsum("xye,et->xyt", p, w)
    qt = q.sum(axis=(0, 1))
    qxt = q.sum(axis=1)
    qyt = q.sum(axis=0)
    lg = lambda a: np.log2(np.maximum(a, _LOG_FLOOR))  # noqa: E731
    g = lg(q) + lg(qt)[None, None, :] - lg(qxt)[:, None, :] - lg(qyt)[None, :, :]
    return np.einsum("xye,xyt->et", p, g)


def _project_rows(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex."""
    k = v.shape[1]
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, k + 1)
    cond = u - css / idx > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget of the channel search.

    ``eve_output_size`` of None means ``|E|``.  ``tolerance`` is the minimum
    improvement over a 25-step window below which a run is converged.
    """

    restarts: int = 20
    max_steps: int = 400
    tolerance: float = 1e-10
    eve_output_size: Optional[int] = None
    seed: int = 0
    window: int = 25

    def __post_init__(self):
        if self.restarts < 0 or self.max_steps < 0:
            raise DomainError("restarts and max_steps must be non-negative")
        if self.eve_output_size is not None and self.eve_output_size < 1:
            raise DomainError("eve_output_size must be positive")


@dataclass(frozen=True)
class IntrinsicBound:
    """Best channel found, its CMI ``upper`` and the identity-channel value."""

    upper: float
    channel: Channel
    restarts: int
    converged: bool
    identity_value: float = float("nan")
    evaluations: int = 0

    def to_json(self) -> dict:
        return {
            "upper_bits": self.upper,
            "identity_bits": self.identity_value,
            "restarts": self.restarts,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "channel": {
                "inputs": list(self.channel.input_alphabet),
                "outputs": list(self.channel.output_alphabet),
                "rows": [[float(w) for w in row] for row in self.channel.rows],
            },
        }


def _descend(p, w, cfg: OptimizerConfig):
    """Projected gradient descent from ``w``; returns (value, w, converged, evals)."""
    f = cmi_of_array(np.einsum("xye,et->xyt", p, w))
    evals = 1
    step = 1.0
    history = [f]
    for _ in range(cfg.max_steps):
        if f <= 0.0:
            return f, w, True, evals
        g = _gradient(p, w)
        while True:
            cand = _project_rows(w - step * g)
            fc = cmi_of_array(np.einsum("xye,et->xyt", p, cand))
            evals += 1
            # Armijo condition along the projection arc
            if fc <= f - 1e-4 * np.sum(g * (w - cand)) or step < 1e-12:
                break
            step *= 0.5
        if fc < f:
            w, f = cand, fc
            step = min(step * 2.0, 1e6)
        history.append(f)
        if len(history) > cfg.window and history[-cfg.window - 1] - f < cfg.tolerance:
            return f, w, True, evals
        if step < 1e-12:
            return f, w, True, evals
    return f, w, False, evals


def _pad_channel(ch: Channel, size: int) -> Optional[np.ndarray]:
    k = len(ch.output_alphabet)
    if k > size:
        return None
    w = np.zeros((len(ch.input_alphabet), size))
    w[:, :k] = np.array([[float(v) for v in row] for row in ch.rows])
    return w


def explicit_channels(dist: JointDistribution, x: Iterable[int], y: Iterable[int]) -> List[Channel]:
    """Known zeroing channels when ``dist`` is a P_Omega table and ``x|y`` a bipartition of it."""
    from .analysis import lemma3_channel
    from .omega import PartitionCode, omega_from_distribution

    x, y = set(x), set(y)
    n = dist.n
    if x | y != set(range(1, n + 1)) or x & y or not x or not y:
        return []
    try:
        params = omega_from_distribution(dist)
    except DomainError:
        return []
    half = y if n in x else x
    code = PartitionCode(tuple(int(i in half) for i in range(1, n)))
    try:
        return [lemma3_channel(params, code)]
    except DomainError:
        return []


def intrinsic_information_upper(dist: JointDistribution, bipartition: Sequence[Iterable[int]],
                                opt: OptimizerConfig = OptimizerConfig(),
                                seed_channels: Optional[Sequence[Channel]] = None) -> IntrinsicBound:
    """Upper bound on I(X:Y down E) for ``bipartition = (X, Y)``.

    Candidates are the identity channel, the constant channel and
    ``seed_channels`` (by default :func:`explicit_channels`), each evaluated
    as given and also used as a descent start when it fits the output size;
    then ``opt.restarts`` Dirichlet random starts follow.  Ties are broken by
    candidate order so the result does not depend on evaluation order.
    """
    x, y = bipartition
    x, y = tuple(x), tuple(y)
    p, _, _ = joint_array(dist, x, y)
    alphabet = dist.eve_alphabet
    n_e = len(alphabet)
    size = opt.eve_output_size or n_e
    if seed_channels is None:
        seed_channels = explicit_channels(dist, x, y)
    fixed = [Channel.identity(alphabet), Channel.constant(alphabet)] + list(seed_channels)
    for ch in fixed:
        if ch.input_alphabet != alphabet:
            raise DomainError("seed channel input alphabet does not match Eve's alphabet")

    results = []  # (value, order, channel, converged)
    evaluations = 0
    identity_value = None
    for order, ch in enumerate(fixed):
        w = np.array([[float(v) for v in row] for row in ch.rows])
        value = cmi_of_array(np.einsum("xye,et->xyt", p, w))
        evaluations += 1
        if order == 0:
            identity_value = value
        results.append((value, 2 * order, ch, True))
        start = _pad_channel(ch, size)
        if start is not None and opt.max_steps > 0:
            v2, w2, conv, ev = _descend(p, start, opt)
            evaluations += ev
            results.append((v2, 2 * order + 1, w2, conv))

    base = 2 * len(fixed)
    rng_root = np.random.SeedSequence(opt.seed)
    for i, child in enumerate(rng_root.spawn(opt.restarts)):
        rng = np.random.default_rng(child)
        start = rng.dirichlet(np.ones(size), size=n_e)
        v, w, conv, ev = _descend(p, start, opt)
        evaluations += ev
        results.append((v, base + i, w, conv))
    if not results:
        raise ResourceError("optimizer produced no evaluations")
    value, _, best, converged = min(results, key=lambda r: (r[0], r[1]))
    if not isinstance(best, Channel):
        best = Channel(alphabet, tuple(f"t{k}" for k in range(size)), best.tolist())
    if value > identity_value + CMI_TOLERANCE:
        raise AssertionError("optimizer returned a bound above the identity value")
    return IntrinsicBound(value, best, opt.restarts, converged, identity_value, evaluations)


__all__ = ["cmi_of_array", "OptimizerConfig", "IntrinsicBound", "intrinsic_information_upper",
           "explicit_channels"]
