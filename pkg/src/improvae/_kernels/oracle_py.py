"""Pure-Python oracle construction kernel (fallback for the Cython version).

Online factor-oracle construction where symbol equality is replaced by a
distance threshold. States are 0..n with state i labelled by frame i-1.
Distance modes: 0 = euclidean, 1 = one minus dot product (cosine distance on
pre-normalized rows), 2 = discrete (0 when rows are identical, else 1).

Both kernels must stay behaviourally identical; the test suite compares them
on random inputs.
"""

from __future__ import annotations

import math

import numpy as np

MODE_EUCLIDEAN = 0
MODE_ONE_MINUS_DOT = 1
MODE_DISCRETE = 2


def _distance(features: np.ndarray, a: int, b: int, mode: int) -> float:
    u = features[a]
    v = features[b]
    if mode == MODE_EUCLIDEAN:
        acc = 0.0
        for x, y in zip(u, v):
            acc += (x - y) * (x - y)
        return math.sqrt(acc)
    if mode == MODE_ONE_MINUS_DOT:
        acc = 0.0
        for x, y in zip(u, v):
            acc += x * y
        return 1.0 - acc
    for x, y in zip(u, v):
        if x != y:
            return 1.0
    return 0.0


def _len_common_suffix(p1: int, p2: int, sfx: np.ndarray, lrs: np.ndarray) -> int:
    if p2 == sfx[p1]:
        return int(lrs[p1])
    while sfx[p2] != sfx[p1] and p2 != 0:
        p2 = int(sfx[p2])
    if sfx[p2] == sfx[p1]:
        return int(min(lrs[p1], lrs[p2]))
    return 0


def build_oracle_arrays(features: np.ndarray, mode: int, theta: float):
    """Build transitions, suffix links and repeated-suffix lengths.

    Returns (transitions, sfx, lrs) where transitions is a list of target
    lists per state and sfx/lrs are int64 arrays of length n + 1.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    n = features.shape[0]
    transitions: list[list[int]] = [[] for _ in range(n + 1)]
    sfx = np.zeros(n + 1, dtype=np.int64)
    lrs = np.zeros(n + 1, dtype=np.int64)
    sfx[0] = -1

    for i in range(1, n + 1):
        transitions[i - 1].append(i)
        pi_1 = i - 1
        k = int(sfx[i - 1])
        best = -1
        best_dist = math.inf
        while k >= 0:
            found = False
            for target in transitions[k]:
                d = _distance(features, target - 1, i - 1, mode)
                if d <= theta:
                    found = True
                    if d < best_dist:
                        best_dist = d
                        best = target
            if found:
                break
            transitions[k].append(i)
            pi_1 = k
            k = int(sfx[k])
        if k < 0:
            sfx[i] = 0
            lrs[i] = 0
        else:
            sfx[i] = best
            length = _len_common_suffix(pi_1, best - 1, sfx, lrs) + 1
            # trim so every aligned frame pair of the repeated suffix is
            # theta-similar (similarity is not transitive in metric mode)
            verified = 1
            while (verified < length
                   and best - 1 - verified >= 0
                   and i - 1 - verified >= 0
                   and _distance(features, i - 1 - verified,
                                 best - 1 - verified, mode) <= theta):
                verified += 1
            lrs[i] = verified
    return transitions, sfx, lrs
