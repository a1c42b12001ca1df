import itertools
import math

import numpy as np
import pytest

from fuzzyvault.decoding import (BUDGET, EXHAUSTED, TOO_FEW_POINTS, UnlockingSet,
                                 decode_exhaustive, genuine_count, random_subsets,
                                 randomized_decode)
from fuzzyvault.field import Polynomial, poly_hash


def make_set(seed, t, omega, k):
    """Unlocking set of t points, the genuine ones on a random secret."""
    rng = np.random.default_rng(seed)
    f = Polynomial.random(k, rng)
    xs = rng.choice(65536, size=t, replace=False)
    genuine = set(rng.choice(t, size=omega, replace=False).tolist())
    pts = []
    for i, x in enumerate(xs):
        y = f(int(x))
        if i not in genuine:
            y = (y + 1 + int(rng.integers(65535))) % 65536
        pts.append((int(x), y))
    return UnlockingSet(tuple(pts)), f, genuine


def test_unlocking_set_requires_distinct_abscissae():
    with pytest.raises(ValueError):
        UnlockingSet(((1, 2), (1, 3)))


@pytest.mark.parametrize("seed", range(6))
def test_exhaustive_attempt_count_matches_lexicographic_oracle(seed):
    t, omega, k = 14, 6, 4
    u, f, genuine = make_set(seed, t, omega, k)
    expected = next(i for i, c in enumerate(itertools.combinations(range(t), k), 1)
                    if set(c) <= genuine)
    res = decode_exhaustive(u, k, poly_hash(f))
    assert res.success and res.secret == f and res.attempts == expected


def test_exhaustive_reasons():
    u, f, _ = make_set(1, 12, 3, 5)
    res = decode_exhaustive(u, 5, poly_hash(f))
    assert res.reason == EXHAUSTED and res.attempts == math.comb(12, 5)
    res = decode_exhaustive(u, 5, poly_hash(f), budget=100)
    assert res.reason == BUDGET and res.attempts == 100
    assert decode_exhaustive(UnlockingSet(u.points[:4]), 5, poly_hash(f)).reason == TOO_FEW_POINTS
    # a budget equal to the number of subsets exhausts rather than running out
    assert decode_exhaustive(u, 5, poly_hash(f), budget=math.comb(12, 5)).reason == EXHAUSTED


def test_exhaustive_spans_chunks():
    t, k = 22, 9
    u, f, genuine = make_set(7, t, 9, k)
    res = decode_exhaustive(u, k, poly_hash(f))
    expected = next(i for i, c in enumerate(itertools.combinations(range(t), k), 1)
                    if set(c) <= genuine)
    assert res.success and res.attempts == expected and expected > 1 << 15


def test_random_subsets_are_uniform_distinct():
    rng = np.random.default_rng(0)
    idx = random_subsets(rng, 60000, 6, 2)
    assert all(len(set(r)) == 2 for r in idx[:1000].tolist())
    pairs = np.sort(idx, axis=1)
    codes = pairs[:, 0] * 6 + pairs[:, 1]
    counts = np.bincount(codes, minlength=36)[codes.min():]
    counts = counts[counts > 0]
    assert len(counts) == 15
    # each pair has probability 1/15; 5 sigma band
    assert np.all(np.abs(counts - 4000) < 5 * math.sqrt(4000))


def test_randomized_decoder_is_seeded_and_sound():
    u, f, _ = make_set(3, 20, 10, 5)
    a = randomized_decode(u, 5, 5000, poly_hash(f), seed=11)
    b = randomized_decode(u, 5, 5000, poly_hash(f), seed=11)
    assert a == b and a.success and a.secret == f
    u2, f2, _ = make_set(4, 20, 4, 5)
    res = randomized_decode(u2, 5, 20000, poly_hash(f2), seed=1)
    assert not res.success and res.reason == BUDGET and res.attempts == 20000
    assert randomized_decode(UnlockingSet(()), 5, 10, poly_hash(f)).reason == TOO_FEW_POINTS


def test_genuine_count():
    u, f, genuine = make_set(5, 15, 7, 3)
    assert genuine_count(u.points, f) == 7
