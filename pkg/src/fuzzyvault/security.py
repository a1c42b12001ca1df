"""Closed-form brute-force security of a vault: the odds against one random
k-subset of vault points being all genuine."""
from __future__ import annotations

import math
from fractions import Fraction

from .stats import median_trials


def _check(n: int, t: int, k: int):
    if not (0 < k <= t <= n):
        raise ValueError(f"need 0 < k <= t <= n, got n={n} t={t} k={k}")


def bf_exact(n: int, t: int, k: int) -> Fraction:
    """C(n,k) / C(t,k) as an exact rational."""
    _check(n, t, k)
    return Fraction(math.comb(n, k), math.comb(t, k))


def bf_security(n: int, t: int, k: int) -> float:
    return float(bf_exact(n, t, k))


def bf_log2(n: int, t: int, k: int) -> float:
    b = bf_exact(n, t, k)
    # exact ratio of big ints; log2 of each keeps precision past float range
    return math.log2(b.numerator) - math.log2(b.denominator)


def expected_bf_iterations(n: int, t: int, k: int) -> float:
    """Median number of random k-subset guesses until the secret is found.

    The formula degenerates to 0 when every point is genuine (bf = 1); one
    guess is needed there, so 1 is returned.
    """
    b = bf_exact(n, t, k)
    if b == 1:
        return 1.0
    return median_trials(float(1 / b))


def expected_bf_log2(n: int, t: int, k: int) -> float:
    b = bf_exact(n, t, k)
    if b == 1:
        return 0.0
    p = float(1 / b)
    return math.log2(math.log(2.0)) - math.log2(-math.log1p(-p))
