"""Attacks on vault records and their cost models.

* brute force: guess random k-subsets of all vault points
* false accept: replay a template database as queries
* correlation: align two records of the same finger to isolate genuine points
* cost of a false-accept attack against the randomized decoder
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .classic import ClassicVault
from .decoding import (CHUNK, DecodeResult, UnlockingSet, decode_exhaustive, random_subsets,
                       try_subsets)
from .field import Polynomial, poly_hash
from .grid import GridVault
from .minutiae import (IDENTITY, RigidTransform, angular_distance, dissimilarity_matrix,
                       wrap_angle)
from .stats import median_trials

# re-exported closed forms
from .security import bf_exact, bf_log2, bf_security, expected_bf_iterations, expected_bf_log2  # noqa: F401


@dataclass
class AttackReport:
    success: bool
    iterations: int
    wall_time: float
    recovered_secret: Optional[Polynomial] = None
    per_core_rate: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["recovered_secret"] = (None if self.recovered_secret is None
                                 else list(self.recovered_secret.coefficients))
        return d


def _verified(secret: Optional[Polynomial], digest: bytes) -> Optional[Polynomial]:
    if secret is not None and poly_hash(secret) != digest:
        raise AssertionError("decoder returned a polynomial with the wrong digest")
    return secret


# ---------------------------------------------------------------------------
# brute force

def brute_force_time(n: int, t: int, k: int, rate: float, cores: int = 1) -> float:
    """Seconds until success is more likely than not at ``rate`` guesses/s per core."""
    return expected_bf_iterations(n, t, k) / (rate * cores)


def brute_force_attack(v, seed=None, max_iterations: int = 1 << 30, first_chunk: int = 256,
                       k: Optional[int] = None) -> AttackReport:
    """Interpolate uniformly random k-subsets of all vault points until the
    digest matches.

    The first chunk is a warm-up; the per-core rate is measured over the rest
    of the run (or over everything when the attack ends during warm-up).
    """
    pts = v.points
    k = v.params.k if k is None else k
    xs = np.array([p[0] for p in pts], dtype=np.int32)
    ys = np.array([p[1] for p in pts], dtype=np.int32)
    rng = np.random.default_rng(seed)
    tried = 0
    chunk = first_chunk
    start = time.perf_counter()
    timed_from, timed_start = None, None
    secret = None
    while tried < max_iterations:
        n = min(chunk, max_iterations - tried)
        idx = random_subsets(rng, n, len(pts), k)
        hit, f = try_subsets(xs, ys, idx, v.digest)
        if hit >= 0:
            tried += hit + 1
            secret = f
            break
        tried += n
        if timed_from is None:
            timed_from, timed_start = tried, time.perf_counter()
        chunk = min(2 * chunk, CHUNK)
    end = time.perf_counter()
    if timed_from is not None and tried > timed_from and end > timed_start:
        rate = (tried - timed_from) / (end - timed_start)
    else:
        rate = tried / (end - start) if end > start else None
    return AttackReport(secret is not None, tried, end - start, _verified(secret, v.digest), rate,
                        {"attack": "brute-force", "n": len(pts), "k": k})


# ---------------------------------------------------------------------------
# false accept

def fa_cost(far: float, idt: float, cores: int = 1) -> float:
    """Seconds of impostor decoding until a false accept is more likely than not."""
    if not 0.0 < far < 1.0:
        raise ValueError("false acceptance rate must lie in (0, 1)")
    if cores < 1:
        raise ValueError("need at least one core")
    return median_trials(far) * idt / cores


def false_accept_attack(authenticate: Callable[[Any], DecodeResult], queries: Iterable,
                        digest: Optional[bytes] = None) -> AttackReport:
    """Feed ``queries`` to ``authenticate`` (no alignment) until one unlocks.

    Reports queries consumed and the mean impostor decoding time, so a failed
    run can still be extrapolated with :func:`fa_cost`.
    """
    times = []
    secret = None
    start = time.perf_counter()
    used = 0
    for q in queries:
        t0 = time.perf_counter()
        res = authenticate(q)
        times.append(time.perf_counter() - t0)
        used += 1
        if res.success:
            secret = res.secret
            break
    if not used:
        raise ValueError("query list is empty")
    wall = time.perf_counter() - start
    reject_times = times[:-1] if secret is not None else times
    idt = float(np.mean(reject_times)) if reject_times else float(times[0])
    if digest is not None:
        _verified(secret, digest)
    return AttackReport(secret is not None, used, wall, secret, 1.0 / idt if idt > 0 else None,
                        {"attack": "false-accept", "idt": idt})


def fa_cost_randomized_decoder(unlock_stats: Sequence[tuple[int, int]], k: int, D: int):
    """(FAR, cost in decoder iterations) for an impostor population attacking
    a randomized decoder with D iterations per query.

    FAR is the mean of p(t_i, omega_i, D); the cost is the median query count
    times D. No chance of success gives an infinite cost.
    """
    if not unlock_stats:
        raise ValueError("need at least one (t, omega) pair")
    if D < 1:
        raise ValueError("D must be positive")
    # log of each attempt's failure probability
    logs = []
    for t, omega in unlock_stats:
        if omega < k:
            logs.append(0.0)
            continue
        p1 = float(1 / bf_exact(t, omega, k))
        logs.append(-math.inf if p1 == 1.0 else D * math.log1p(-p1))
    n = len(logs)
    far = math.fsum(-math.expm1(a) for a in logs) / n
    if far == 0.0:
        return 0.0, math.inf
    if all(a == logs[0] for a in logs):
        # homogeneous population: the mean failure log is exact, so cost(D) = cost(1)
        neg_log_fail = -logs[0]
        if neg_log_fail == math.inf:
            return 1.0, float(D)
    elif far <= 0.5:
        neg_log_fail = -math.log1p(-far)
    else:
        # 1 - far is tiny here; take its log without forming it
        top = max(logs)
        if top == -math.inf:
            return 1.0, float(D)
        lse = top + math.log(math.fsum(math.exp(a - top) for a in logs))
        neg_log_fail = math.log(n) - lse
    return far, D * math.log(2.0) / neg_log_fail


# ---------------------------------------------------------------------------
# correlation

ROTATIONS = tuple(range(-30, 31, 3))
# pairing radius for the correlation score; at the separation constant (25)
# chance pairs among chaff swamp the genuine agreement
PAIR_THRESHOLD = 6.0
CROSS_MATCH_THRESHOLD = 14
ATTACK_BUDGET = 1 << 18


@dataclass
class CorrelationResult:
    matched_pairs: list[tuple[int, int]]
    dissimilarities: list[float]
    score: int
    best_transform: RigidTransform
    decision: bool


def _greedy_pairs(a: np.ndarray, b: np.ndarray, threshold: float):
    d = dissimilarity_matrix(a, b)
    ia, ib = np.nonzero(d <= threshold)
    order = np.argsort(d[ia, ib], kind="stable")
    used_a, used_b = set(), set()
    pairs, ds = [], []
    for o in order:
        i, j = int(ia[o]), int(ib[o])
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j))
        ds.append(float(d[i, j]))
    return pairs, ds


def _apply(T: RigidTransform, arr: np.ndarray) -> np.ndarray:
    x, y = T.apply_points(arr[:, 0], arr[:, 1])
    return np.column_stack([x, y, wrap_angle(arr[:, 2] + T.rotation)])


def _kabsch(src: np.ndarray, dst: np.ndarray) -> RigidTransform:
    """Least-squares rigid motion taking src positions onto dst positions."""
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    phi = math.atan2(h[0, 1] - h[1, 0], h[0, 0] + h[1, 1])
    c, s = math.cos(phi), math.sin(phi)
    t = cd - np.array([c * cs[0] - s * cs[1], s * cs[0] + c * cs[1]])
    return RigidTransform(float(t[0]), float(t[1]), math.degrees(phi))


def _align(a: np.ndarray, b: np.ndarray, rotations, threshold: float, center,
           bin_size: float, angle_tol: float, candidates: int):
    """Best transform of ``b`` onto ``a``: Hough votes over translations
    implied by angle-compatible pairs, for each trial rotation."""
    votes = []
    for phi in rotations:
        rot = RigidTransform(0.0, 0.0, float(phi), center)
        rb = _apply(rot, b)
        ia, ib = np.nonzero(angular_distance(a[:, None, 2], rb[None, :, 2]) <= angle_tol)
        if not len(ia):
            continue
        dx = a[ia, 0] - rb[ib, 0]
        dy = a[ia, 1] - rb[ib, 1]
        cx = np.floor(dx / bin_size).astype(np.int64)
        cy = np.floor(dy / bin_size).astype(np.int64)
        key = (cx - cx.min()) * (int(cy.max() - cy.min()) + 1) + (cy - cy.min())
        _, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
        for c in np.argsort(-counts, kind="stable")[:candidates]:
            sel = inv == c
            votes.append((int(counts[c]), float(phi), float(dx[sel].mean()), float(dy[sel].mean())))
    votes.sort(key=lambda v: -v[0])
    best = ([], [], IDENTITY)
    for _, phi, tx, ty in votes[:candidates]:
        T = RigidTransform(tx, ty, phi, center)
        pairs, ds = _greedy_pairs(a, _apply(T, b), threshold)
        if len(pairs) >= 3:
            # polish with a least-squares fit on the pairs found so far
            ia = [i for i, _ in pairs]
            ib = [j for _, j in pairs]
            T2 = _kabsch(b[ib, :2], a[ia, :2])
            pairs2, ds2 = _greedy_pairs(a, _apply(T2, b), threshold)
            if len(pairs2) > len(pairs):
                T, pairs, ds = T2, pairs2, ds2
        if len(pairs) > len(best[0]):
            best = (pairs, ds, T)
    return best


def correlation_score(ma: np.ndarray, mb: np.ndarray, rotations=ROTATIONS,
                      threshold: float = PAIR_THRESHOLD, decision_threshold: int = CROSS_MATCH_THRESHOLD,
                      center=(148.0, 280.0), bin_size: float = 8.0, angle_tol: float = 20.0,
                      candidates: int = 12) -> CorrelationResult:
    """Pair the vault minutiae of two records after the best rigid alignment.

    Both directions are searched and the better one is kept, so the score is
    symmetric; pairs are always reported as (index in A, index in B) and the
    transform maps B onto A.
    """
    ma = np.asarray(ma, dtype=float).reshape(-1, 3)
    mb = np.asarray(mb, dtype=float).reshape(-1, 3)
    if not len(ma) or not len(mb):
        return CorrelationResult([], [], 0, IDENTITY, False)
    args = (rotations, threshold, center, bin_size, angle_tol, candidates)
    pab, dab, tab = _align(ma, mb, *args)
    pba, dba, tba = _align(mb, ma, *args)
    if len(pba) > len(pab):
        pab, dab, tab = [(i, j) for j, i in pba], dba, tba.inverse()
    return CorrelationResult(pab, dab, len(pab), tab, len(pab) >= decision_threshold)


def grid_correlation(va: GridVault, vb: GridVault) -> CorrelationResult:
    """Abscissa agreement of two grid records: always the whole universe."""
    common = sorted(set(va.abscissae) & set(vb.abscissae))
    return CorrelationResult([(x, x) for x in common], [0.0] * len(common), len(common),
                             IDENTITY, True)


def correlate(va, vb, **kw) -> CorrelationResult:
    if isinstance(va, GridVault) and isinstance(vb, GridVault):
        return grid_correlation(va, vb)
    return correlation_score(va.array(), vb.array(), **kw)


def max_candidates(k: int, budget: int) -> int:
    """Largest M with C(M, k) <= budget (at least k)."""
    m = k
    while math.comb(m + 1, k) <= budget:
        m += 1
    return m


def correlation_attack(va: ClassicVault, vb: ClassicVault, k: Optional[int] = None,
                       budget: int = ATTACK_BUDGET, **kw) -> AttackReport:
    """Treat A's best-agreeing minutiae as genuine and decode exhaustively.

    Pairs are ranked by dissimilarity; the top M with C(M, k) within the
    budget form the unlocking set.
    """
    k = va.params.k if k is None else k
    start = time.perf_counter()
    corr = correlation_score(va.array(), vb.array(), **kw)
    ranked = [i for _, (i, _) in sorted(zip(corr.dissimilarities, corr.matched_pairs),
                                        key=lambda p: p[0])]
    m = max_candidates(k, budget)
    chosen = ranked[:m]
    u = UnlockingSet(tuple((i, va.ordinates[i]) for i in chosen))
    res = decode_exhaustive(u, k, va.digest, budget)
    wall = time.perf_counter() - start
    return AttackReport(res.success, res.attempts, wall, _verified(res.secret, va.digest),
                        res.attempts / wall if wall > 0 else None,
                        {"attack": "correlation", "score": corr.score, "candidates": len(chosen),
                         "reason": res.reason})
