"""Error-rate estimation from trial counts: point estimate, exact binomial
(Clopper-Pearson) interval, rule of three and median trial counts."""
from __future__ import annotations

import math
from dataclasses import dataclass

TOLERANCE = 1e-10


@dataclass(frozen=True)
class TrialRecord:
    successes: int
    trials: int

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise ValueError("need 0 <= successes <= trials and trials >= 1")


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    def __contains__(self, p: float) -> bool:
        return self.lower <= p <= self.upper

    def percent(self, digits: int = 2) -> str:
        return f"[{100 * self.lower:.{digits}f}%, {100 * self.upper:.{digits}f}%]"


def point_estimate(r: TrialRecord) -> float:
    return r.successes / r.trials


def _log_pmf_terms(n: int):
    lg = [0.0] * (n + 1)
    for i in range(2, n + 1):
        lg[i] = lg[i - 1] + math.log(i)
    return lg


def _tail(n: int, lo: int, hi: int, p: float, lg) -> float:
    """P(lo <= X <= hi) for X ~ Bin(n, p), summed in log space."""
    if p <= 0.0:
        return 1.0 if lo == 0 else 0.0
    if p >= 1.0:
        return 1.0 if hi == n else 0.0
    lp, lq = math.log(p), math.log1p(-p)
    terms = [lg[n] - lg[i] - lg[n - i] + i * lp + (n - i) * lq for i in range(lo, hi + 1)]
    top = max(terms)
    return math.exp(top) * math.fsum(math.exp(t - top) for t in terms)


def _upper_tail(n: int, s: int, p: float, lg) -> float:
    """P(X >= s), summing whichever side of s is shorter."""
    if s <= 0:
        return 1.0
    if n - s < s:
        return _tail(n, s, n, p, lg)
    return 1.0 - _tail(n, 0, s - 1, p, lg)


def _bisect(f, target: float, increasing: bool) -> float:
    """Boundary p in [0, 1] where f(p) crosses ``target``."""
    lo, hi = 0.0, 1.0
    while hi - lo > TOLERANCE:
        mid = 0.5 * (lo + hi)
        above = f(mid) > target
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def clopper_pearson(r: TrialRecord, level: float = 0.95) -> ConfidenceInterval:
    """Exact interval by bisection on binomial tail sums."""
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    s, n = r.successes, r.trials
    alpha = (1.0 - level) / 2.0
    lg = _log_pmf_terms(n)
    # P(X >= s) grows with p; P(X <= s) shrinks
    lower = 0.0 if s == 0 else _bisect(lambda p: _upper_tail(n, s, p, lg), alpha, True)
    upper = 1.0 if s == n else _bisect(lambda p: 1.0 - _upper_tail(n, s + 1, p, lg), alpha, False)
    return ConfidenceInterval(lower, upper, level)


def rule_of_three(n: int) -> ConfidenceInterval:
    """[0, 3/N]: at least 95% confidence after zero successes in N trials."""
    if n < 1:
        raise ValueError("need at least one trial")
    return ConfidenceInterval(0.0, min(1.0, 3.0 / n), 0.95)


def median_trials(p: float) -> float:
    """log(0.5)/log(1-p), the trial count by which success is more likely than not."""
    if not 0.0 < p <= 1.0:
        raise ValueError("probability must lie in (0, 1]")
    if p == 1.0:
        return 1.0
    return math.log(0.5) / math.log1p(-p)
