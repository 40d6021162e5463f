"""Compiled acceptance scan for the repeated-code protocol.

A block is accepted iff all of its N retained realizations fall in the same
event pair.  The scan keeps a compacted list of surviving blocks per batch
and extends it one realization at a time, which avoids data-dependent
branches in the inner loop.  Draws match :mod:`secretcorr.sim.rng`.
"""

import numba as nb
import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_G = np.uint64(0x9E3779B97F4A7C15)
_S27, _S30, _S31, _S32 = np.uint64(27), np.uint64(30), np.uint64(31), np.uint64(32)
_LO = np.uint64(0xFFFFFFFF)
_ONE = np.uint64(1)


@nb.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always", cache=True)
def _sample(h, k, thr, al):
    i = ((h >> _S32) * k) >> _S32
    stay = np.uint64((h & _LO) < thr[i])
    return stay * i + (_ONE - stay) * al[i]


@nb.njit(cache=True)
def scan_blocks(key, thr, al, pair, max_blocks, n_real, target, batch):
    """Indices of accepted blocks in ``[0, max_blocks)``, in increasing order.

    Stops after the ``target``-th accepted block when ``target > 0``.
    Returns ``(accepted, blocks_scanned)``.
    """
    k = np.uint64(len(thr))
    out = np.empty(1024, np.int64)
    n_out = 0
    surv = np.empty(batch, np.int64)
    ref = np.empty(batch, np.int64)
    bases = np.empty(batch, np.uint64)
    scanned = 0
    for start in range(0, max_blocks, batch):
        stop = min(start + batch, max_blocks)
        cnt = 0
        for b in range(start, stop):
            base = _mix(key + np.uint64(b) * _G)
            p0 = pair[_sample(_mix(base), k, thr, al)]
            surv[cnt] = b
            ref[cnt] = p0
            bases[cnt] = base
            if n_real == 1:
                cnt += 1
            else:
                p1 = pair[_sample(_mix(base + _ONE), k, thr, al)]
                cnt += p0 == p1
        for j in range(2, n_real):
            c2 = 0
            uj = np.uint64(j)
            for t in range(cnt):
                p = pair[_sample(_mix(bases[t] + uj), k, thr, al)]
                surv[c2] = surv[t]
                ref[c2] = ref[t]
                bases[c2] = bases[t]
                c2 += p == ref[t]
            cnt = c2
        scanned = stop
        for t in range(cnt):
            if n_out == len(out):
                bigger = np.empty(2 * len(out), np.int64)
                bigger[:n_out] = out[:n_out]
                out = bigger
            out[n_out] = surv[t]
            n_out += 1
            if target > 0 and n_out == target:
                return out[:n_out].copy(), surv[t] + 1
    return out[:n_out].copy(), scanned
