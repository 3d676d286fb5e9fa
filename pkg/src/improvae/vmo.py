"""Variable Markov oracle over a metric space.

Online factor-oracle construction with a similarity threshold instead of
symbol equality, compression-based information-rate profiles via a
Compror-style parse, exhaustive threshold search, and motif extraction.

Code-length convention (normative for this package): a literal frame at
1-based position k costs log2(k + 1); a repeated block of length l starting at
position k costs log2(k + 1) + log2(l + 1), amortized uniformly over its
frames. The per-frame information rate is max(0, literal cost - actual cost).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pianoroll
from ._kernels import build_oracle_arrays
from ._kernels.oracle_py import MODE_DISCRETE, MODE_EUCLIDEAN, MODE_ONE_MINUS_DOT

DISTANCE_IDS = ("tonnetz", "cosine", "euclidean", "discrete")

AUTO_GRID_SIZE = 32
AUTO_GRID_MAX_FRAMES = 500


@dataclass
class Oracle:
    n: int
    transitions: list  # per state, list of target states (label = frame target-1)
    sfx: np.ndarray
    lrs: np.ndarray
    theta: float
    distance_id: str
    features: np.ndarray  # metric-space features, one row per frame
    mode: int

    def distance(self, i: int, j: int) -> float:
        """Distance between frames i and j (0-based) in the oracle's metric."""
        u, v = self.features[i], self.features[j]
        if self.mode == MODE_EUCLIDEAN:
            return float(np.linalg.norm(u - v))
        if self.mode == MODE_ONE_MINUS_DOT:
            return float(1.0 - u @ v)
        return 0.0 if np.array_equal(u, v) else 1.0


@dataclass
class IRProfile:
    per_frame: np.ndarray  # bits, one value per position
    total: float
    theta: float


@dataclass
class ThresholdCurve:
    points: list  # (theta, total IR)
    theta_star: float


@dataclass
class Motif:
    length: int
    occurrences: list  # 1-based end positions, strictly increasing


def cosine_distance(u, v) -> float:
    """1 - cos(u, v) in [0, 2]; a zero vector is maximally direction-free (1)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("vectors must have equal length")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 1.0
    return float(1.0 - (u @ v) / (nu * nv))


def _features_for(frames, distance: str) -> tuple[np.ndarray, int]:
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if distance == "euclidean":
        return frames, MODE_EUCLIDEAN
    if distance == "discrete":
        return frames, MODE_DISCRETE
    if distance == "cosine":
        norms = np.linalg.norm(frames, axis=1, keepdims=True)
        # zero rows stay zero, so their distance to anything is 1 - 0 = 1
        return np.where(norms > 0, frames / np.where(norms > 0, norms, 1.0), 0.0), \
            MODE_ONE_MINUS_DOT
    if distance == "tonnetz":
        if frames.shape[1] != 12:
            raise ValueError("tonnetz distance expects 12-bin chroma frames")
        sums = frames.sum(axis=1, keepdims=True)
        normed = np.where(sums > 0, frames / np.where(sums > 0, sums, 1.0), 0.0)
        return normed @ pianoroll.TONNETZ_MATRIX.T, MODE_EUCLIDEAN
    raise ValueError(f"unknown distance id {distance!r}; expected one of {DISTANCE_IDS}")


def build_oracle(frames, distance: str, theta: float) -> Oracle:
    """Online metric factor-oracle construction over a frame sequence.

    New frames are matched against existing forward transitions along the
    suffix-link chain; a match is any transition within theta, with the
    minimum-distance candidate chosen as the suffix link.
    """
    features, mode = _features_for(frames, distance)
    if features.shape[0] == 0:
        raise ValueError("need at least one frame")
    transitions, sfx, lrs = build_oracle_arrays(features, mode, float(theta))
    return Oracle(n=features.shape[0], transitions=transitions, sfx=sfx, lrs=lrs,
                  theta=float(theta), distance_id=distance, features=features,
                  mode=mode)


def compror_parse(oracle: Oracle) -> list[tuple]:
    """Greedy left-to-right parse into literals and repeated blocks.

    Returns a list of ("lit", position) and ("copy", start, length) entries
    with 0-based frame positions. Copies shorter than two frames are emitted
    as literals so a block always certifies a real compression gain.
    """
    n = oracle.n
    lrs = oracle.lrs
    blocks = []
    j = 0
    while j < n:
        i = j
        while i < n and lrs[i + 1] > i - j:
            i += 1
        if i - j < 2:
            blocks.append(("lit", j))
            j += 1
        else:
            blocks.append(("copy", j, i - j))
            j = i
    return blocks


def ir_of_oracle(oracle: Oracle) -> IRProfile:
    """Per-frame information rate from the compression gain of the parse."""
    n = oracle.n
    per_frame = np.zeros(n)
    for block in compror_parse(oracle):
        if block[0] == "lit":
            continue  # literal cost equals the individual cost: zero gain
        _, start, length = block
        k = start + 1  # 1-based block start
        amortized = (np.log2(k + 1) + np.log2(length + 1)) / length
        for pos in range(start, start + length):
            per_frame[pos] = max(0.0, np.log2(pos + 2) - amortized)
    return IRProfile(per_frame=per_frame, total=float(per_frame.sum()),
                     theta=oracle.theta)


def _pairwise_distances(features: np.ndarray, mode: int) -> np.ndarray:
    n = features.shape[0]
    if n > AUTO_GRID_MAX_FRAMES:
        idx = np.random.default_rng(0).choice(n, AUTO_GRID_MAX_FRAMES, replace=False)
        features = features[np.sort(idx)]
        n = AUTO_GRID_MAX_FRAMES
    if mode == MODE_ONE_MINUS_DOT:
        d = 1.0 - features @ features.T
    elif mode == MODE_EUCLIDEAN:
        sq = np.sum(features**2, axis=1)
        d = np.sqrt(np.maximum(0.0, sq[:, None] + sq[None, :] - 2.0 * features @ features.T))
    else:
        d = (features[:, None, :] != features[None, :, :]).any(axis=2).astype(np.float64)
    return d[np.triu_indices(n, k=1)]


def threshold_search(frames, distance: str, thetas="auto",
                     exhaustive: bool = False) -> tuple[ThresholdCurve, Oracle]:
    """Build oracles over candidate thresholds and keep the IR-maximizing one.

    "auto" uses evenly spaced quantiles of the pairwise distance distribution
    (subsampled for long sequences); exhaustive=True uses every distinct
    pairwise distance instead. Ties go to the smallest threshold.
    """
    features, mode = _features_for(frames, distance)
    if features.shape[0] == 0:
        raise ValueError("need at least one frame")
    if isinstance(thetas, str):
        if thetas != "auto":
            raise ValueError(f"unknown theta spec {thetas!r}")
        pairwise = _pairwise_distances(features, mode)
        if pairwise.size == 0:
            candidates = np.array([0.0])
        elif exhaustive:
            candidates = np.unique(pairwise)
        else:
            candidates = np.unique(
                np.quantile(pairwise, np.linspace(0.0, 1.0, AUTO_GRID_SIZE)))
    else:
        candidates = np.unique(np.asarray(list(thetas), dtype=np.float64))
        if candidates.size == 0:
            raise ValueError("empty threshold candidate list")

    best_oracle = None
    best_total = -1.0
    points = []
    for theta in candidates:
        oracle = build_oracle(features if distance != "tonnetz" else frames,
                              distance, float(theta))
        total = ir_of_oracle(oracle).total
        points.append((float(theta), total))
        if total > best_total:
            best_total = total
            best_oracle = oracle
    return ThresholdCurve(points=points, theta_star=best_oracle.theta), best_oracle


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _aligned(oracle: Oracle, a: int, b: int, length: int) -> bool:
    # a, b are 1-based end positions; compare the aligned frames of the factor
    return all(oracle.distance(a - 1 - j, b - 1 - j) <= oracle.theta
               for j in range(length))


def find_motifs(oracle: Oracle, min_length: int, min_occurrences: int) -> list[Motif]:
    """Repeated patterns from suffix-link threads with long-enough lrs.

    Positions linked through qualifying suffix links form a candidate cluster;
    occurrences that are not theta-similar to every kept occurrence over the
    motif length are dropped, and motifs whose occurrence sets are contained
    in a longer motif's are pruned.
    """
    if min_length < 1 or min_occurrences < 2:
        raise ValueError("need min_length >= 1 and min_occurrences >= 2")
    uf = _UnionFind(oracle.n + 1)
    qualifying: dict[int, list[int]] = {}
    for k in range(1, oracle.n + 1):
        if oracle.lrs[k] >= min_length and oracle.sfx[k] > 0:
            uf.union(k, int(oracle.sfx[k]))
    clusters: dict[int, list[int]] = {}
    lengths: dict[int, int] = {}
    for k in range(1, oracle.n + 1):
        if oracle.lrs[k] >= min_length and oracle.sfx[k] > 0:
            root = uf.find(k)
            lengths[root] = min(lengths.get(root, int(oracle.lrs[k])),
                                int(oracle.lrs[k]))
    for k in range(1, oracle.n + 1):
        root = uf.find(k)
        if root in lengths:
            clusters.setdefault(root, []).append(k)

    motifs = []
    for root, positions in clusters.items():
        length = min(lengths[root], min(positions))
        if length < min_length:
            continue
        kept: list[int] = []
        for pos in sorted(positions):
            if all(_aligned(oracle, pos, q, length) for q in kept):
                kept.append(pos)
        if len(kept) >= min_occurrences:
            motifs.append(Motif(length=length, occurrences=kept))

    # containment pruning: drop a motif whose occurrences are a subset of an
    # at-least-as-long motif's; sorting keeps the longer or earlier one
    motifs.sort(key=lambda m: (-m.length, m.occurrences[0]))
    kept_motifs: list[Motif] = []
    for motif in motifs:
        occ = set(motif.occurrences)
        if any(m.length >= motif.length and occ <= set(m.occurrences)
               for m in kept_motifs):
            continue
        kept_motifs.append(motif)
    kept_motifs.sort(key=lambda m: (m.occurrences[0], -m.length))
    return kept_motifs
