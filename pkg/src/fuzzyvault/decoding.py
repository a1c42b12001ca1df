"""Hash-checked polynomial decoders shared by every vault type."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import field
from .field import Polynomial

TOO_FEW_POINTS = "TooFewPoints"
EXHAUSTED = "Exhausted"
BUDGET = "BudgetExhausted"

CHUNK = 1 << 15


@dataclass(frozen=True)
class UnlockingSet:
    """Vault points picked out by a query.

    ``genuine_count`` is filled in only when ground truth is known (analysis).
    """

    points: tuple[tuple[int, int], ...]
    genuine_count: Optional[int] = None

    def __post_init__(self):
        pts = tuple((int(x), int(y)) for x, y in self.points)
        if len({x for x, _ in pts}) != len(pts):
            raise ValueError("unlocking set abscissae must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def arrays(self):
        if not self.points:
            return np.zeros(0, dtype=np.int32), np.zeros(0, dtype=np.int32)
        xy = np.array(self.points, dtype=np.int32)
        return xy[:, 0], xy[:, 1]


@dataclass(frozen=True)
class DecodeResult:
    secret: Optional[Polynomial]
    attempts: int
    reason: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.secret is not None


def try_subsets(xs, ys, idx, digest):
    """Interpolate the rows of ``idx`` (index k-subsets of xs/ys); first hit or -1."""
    coeffs = field.interpolate_batch(xs[idx], ys[idx])
    hit = field.first_digest_match(coeffs, digest)
    if hit < 0:
        return -1, None
    return hit, Polynomial(tuple(coeffs[hit].tolist()))


def decode_exhaustive(u: UnlockingSet, k: int, digest: bytes,
                      budget: Optional[int] = None) -> DecodeResult:
    """Try every k-subset of ``u`` in lexicographic order of its point list.

    ``attempts`` is the 1-based position of the accepting subset, or the number
    of subsets tried before giving up.
    """
    if len(u) < k:
        return DecodeResult(None, 0, TOO_FEW_POINTS)
    xs, ys = u.arrays()
    combos = itertools.combinations(range(len(u)), k)
    tried = 0
    while budget is None or tried < budget:
        n = CHUNK if budget is None else min(CHUNK, budget - tried)
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, n)),
                           dtype=np.int32)
        if not flat.size:
            return DecodeResult(None, tried, EXHAUSTED)
        idx = flat.reshape(-1, k)
        hit, f = try_subsets(xs, ys, idx, digest)
        if hit >= 0:
            return DecodeResult(f, tried + hit + 1)
        tried += len(idx)
    if next(combos, None) is None:
        return DecodeResult(None, tried, EXHAUSTED)
    return DecodeResult(None, tried, BUDGET)


def random_subsets(rng: np.random.Generator, count: int, t: int, k: int) -> np.ndarray:
    """``count`` independent uniform k-subsets of range(t), one per row."""
    perm = np.tile(np.arange(t, dtype=np.int32), (count, 1))
    rows = np.arange(count)
    for i in range(k):
        j = rng.integers(i, t, size=count)
        head = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = head
    return perm[:, :k]


def randomized_decode(u: UnlockingSet, k: int, iterations: int, digest: bytes,
                      seed=None) -> DecodeResult:
    """Interpolate at most ``iterations`` random k-subsets (drawn independently,
    so repeats are possible) and accept the first hash match.

    The draw sequence depends only on ``seed``; the reported attempt count is
    the index of the first successful draw in that sequence.
    """
    if len(u) < k:
        return DecodeResult(None, 0, TOO_FEW_POINTS)
    rng = np.random.default_rng(seed)
    xs, ys = u.arrays()
    tried = 0
    while tried < iterations:
        n = min(CHUNK, iterations - tried)
        idx = random_subsets(rng, n, len(u), k)
        hit, f = try_subsets(xs, ys, idx, digest)
        if hit >= 0:
            return DecodeResult(f, tried + hit + 1)
        tried += n
    return DecodeResult(None, tried, BUDGET)


def genuine_count(points: Sequence[tuple[int, int]], secret: Polynomial) -> int:
    return sum(1 for x, y in points if secret(x) == y)
