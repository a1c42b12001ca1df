"""Cross-matching resistant vault over a fixed feature universe.

Minutiae are quantized to (nearest hexagonal grid point, angle bucket); the
vault holds one point for every possible quantization, so every record over
the same parameters has exactly the same abscissae. Unlocking uses a
randomized decoder with at most D interpolations.
"""
from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import records
from .classic import chaff_ordinates
from .decoding import DecodeResult, UnlockingSet, randomized_decode
from .errors import FailureToCapture, VaultFormatError
from .field import SIZE, Polynomial, eval_batch, poly_hash
from .minutiae import FVC_HEIGHT, FVC_WIDTH, Minutia, MinutiaeTemplate
from .security import bf_exact

DEFAULT_D = 1 << 16
_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class HexGrid:
    lam: float
    width: float
    height: float
    points: np.ndarray = dc_field(repr=False)
    tree: cKDTree = dc_field(repr=False)

    @property
    def r(self) -> int:
        return len(self.points)


@lru_cache(maxsize=64)
def build_grid(lam: float, width: float = FVC_WIDTH, height: float = FVC_HEIGHT) -> HexGrid:
    """Hexagonal grid anchored at the origin: rows ``lam*sqrt(3)/2`` apart,
    odd rows shifted by ``lam/2``; points on the region's border are kept."""
    if lam <= 0:
        raise ValueError("grid distance must be positive")
    dy = lam * math.sqrt(3.0) / 2.0
    pts = []
    for row in itertools.count():
        y = row * dy
        if y > height + _EPS:
            break
        x = lam / 2.0 if row % 2 else 0.0
        while x <= width + _EPS:
            pts.append((x, y))
            x += lam
    arr = np.array(pts, dtype=float)
    arr.setflags(write=False)
    return HexGrid(float(lam), float(width), float(height), arr, cKDTree(arr))


@dataclass(frozen=True)
class GridParams:
    lam: float = 29.0
    s: int = 6
    width: float = FVC_WIDTH
    height: float = FVC_HEIGHT
    t_max: int = 44
    k: int = 7

    def __post_init__(self):
        if self.s < 1 or self.k < 1 or self.t_max < self.k:
            raise ValueError("need s >= 1 and 1 <= k <= t_max")
        if self.n > SIZE:
            raise ValueError(f"r*s = {self.n} exceeds the field size")

    @property
    def grid(self) -> HexGrid:
        return build_grid(self.lam, self.width, self.height)

    @property
    def r(self) -> int:
        return self.grid.r

    @property
    def n(self) -> int:
        return self.r * self.s


def nearest_grid_points(grid: HexGrid, a, b) -> np.ndarray:
    """Index of the closest grid point for each position, lowest index on ties."""
    q = np.column_stack([np.atleast_1d(a), np.atleast_1d(b)]).astype(float)
    kk = min(4, grid.r)
    dist, idx = grid.tree.query(q, k=kk)
    dist = dist.reshape(len(q), kk)
    idx = idx.reshape(len(q), kk)
    # a hexagonal Voronoi vertex is equidistant to three points, so four suffice
    tie = dist <= dist[:, :1] + _EPS
    return np.where(tie, idx, np.iinfo(np.int64).max).min(axis=1)


def angle_bucket(theta, s: int):
    j = np.floor(np.asarray(theta, dtype=float) * s / 360.0).astype(np.int64)
    return np.clip(j, 0, s - 1)


def quantize_minutia(m: Minutia, grid: HexGrid, s: int) -> int:
    i = int(nearest_grid_points(grid, m.a, m.b)[0])
    return i + grid.r * int(angle_bucket(m.theta, s))


def quantize_template(t: MinutiaeTemplate, grid: HexGrid, s: int) -> np.ndarray:
    """Labels of all minutiae, in the template's quality order."""
    if not len(t):
        return np.zeros(0, dtype=np.int64)
    arr = t.array()
    return nearest_grid_points(grid, arr[:, 0], arr[:, 1]) + grid.r * angle_bucket(arr[:, 2], s)


def first_distinct(labels: Iterable[int], cap: int) -> list[int]:
    seen: dict[int, None] = {}
    for x in labels:
        if len(seen) >= cap:
            break
        seen.setdefault(int(x), None)
    return list(seen)


def extract_feature_set(t: MinutiaeTemplate, grid: HexGrid, s: int, t_max: int) -> frozenset:
    """Quantizations of the best-quality minutiae, at most ``t_max`` distinct."""
    return frozenset(first_distinct(quantize_template(t, grid, s), t_max))


@dataclass(frozen=True)
class GridVault:
    """One ordinate per element of the feature universe, abscissa = label."""

    params: GridParams
    ordinates: tuple[int, ...]
    digest: bytes

    def __post_init__(self):
        if len(self.ordinates) != self.params.n:
            raise ValueError(f"grid vault needs {self.params.n} ordinates")

    @property
    def points(self) -> list[tuple[int, int]]:
        return list(enumerate(self.ordinates))

    @property
    def abscissae(self) -> range:
        return range(self.params.n)


def grid_enroll(t: MinutiaeTemplate, params: GridParams, secret: Polynomial, seed: int) -> GridVault:
    if secret.k != params.k:
        raise ValueError(f"secret has degree bound {secret.k}, params expect {params.k}")
    a_set = extract_feature_set(t, params.grid, params.s, params.t_max)
    if len(a_set) < params.k:
        raise FailureToCapture(f"feature set has {len(a_set)} elements, need {params.k}")
    n = params.n
    xs = np.arange(n, dtype=np.int32)
    coeffs = np.broadcast_to(np.array(secret.coefficients, dtype=np.int32), (n, params.k))
    f_vals = eval_batch(coeffs, xs)
    rng = np.random.default_rng(seed)
    ys = chaff_ordinates(rng, f_vals)
    genuine = np.zeros(n, dtype=bool)
    genuine[list(a_set)] = True
    ys = np.where(genuine, f_vals, ys)
    return GridVault(params, tuple(int(y) for y in ys), poly_hash(secret))


def grid_unlocking_set(v: GridVault, query: MinutiaeTemplate,
                       secret: Optional[Polynomial] = None) -> UnlockingSet:
    p = v.params
    b_set = sorted(extract_feature_set(query, p.grid, p.s, p.t_max))
    pts = tuple((x, v.ordinates[x]) for x in b_set)
    gc = None if secret is None else sum(1 for x, y in pts if secret(x) == y)
    return UnlockingSet(pts, gc)


def grid_unlock(v: GridVault, query: MinutiaeTemplate, D: int = DEFAULT_D, seed=None) -> DecodeResult:
    return randomized_decode(grid_unlocking_set(v, query), v.params.k, D, v.digest, seed)


def decode_success_probability(t: int, omega: int, k: int, D: int) -> float:
    """Chance that D independent random k-subsets of t points, omega of them
    genuine, include an all-genuine one."""
    if not 0 <= omega <= t:
        raise ValueError("need 0 <= omega <= t")
    if omega < k or D <= 0:
        return 0.0
    p = float(1 / bf_exact(t, omega, k))
    if p == 1.0:
        return 1.0
    return -math.expm1(D * math.log1p(-p))


# ---------------------------------------------------------------------------
# parameter training

@dataclass(frozen=True)
class TrainingRow:
    lam: float
    s: int
    t_max: int
    k: int
    genuine_accepts: int
    genuine_trials: int
    false_accepts: int
    impostor_trials: int

    @property
    def gar(self) -> float:
        return self.genuine_accepts / self.genuine_trials if self.genuine_trials else 0.0

    @property
    def far(self) -> float:
        return self.false_accepts / self.impostor_trials if self.impostor_trials else 0.0


def _rank(row: TrainingRow):
    return (-row.gar, row.far, -row.k / row.t_max)


def select_configuration(rows: Sequence[TrainingRow]) -> TrainingRow:
    """Highest GAR, then lowest FAR, then largest k/t_max; sweep order breaks
    any remaining tie."""
    if not rows:
        raise ValueError("no configurations to choose from")
    return min(rows, key=_rank)


def train_parameters(training: Sequence[Sequence[MinutiaeTemplate]], lambdas: Iterable[float],
                     ss: Iterable[int], t_maxes: Iterable[int], ks: Optional[Iterable[int]] = None,
                     width: float = FVC_WIDTH, height: float = FVC_HEIGHT):
    """Sweep grid parameters on aligned impressions, one list per finger.

    Genuine trials pair impressions i < j of a finger (A from i); impostor
    trials pair first impressions of fingers I < J. A configuration accepts
    when the two feature sets share at least k elements.
    Returns (best GridParams, all rows).
    """
    if not training:
        raise ValueError("training set is empty")
    if any(len(imps) < 2 for imps in training):
        raise ValueError("every finger needs at least two impressions")
    ks = None if ks is None else sorted(set(ks))
    rows: list[TrainingRow] = []
    for lam in lambdas:
        grid = build_grid(float(lam), width, height)
        for s in ss:
            if grid.r * s > SIZE:
                continue
            labels = [[quantize_template(t, grid, s) for t in imps] for imps in training]
            for t_max in t_maxes:
                sets = [[set(first_distinct(lb, t_max)) for lb in fl] for fl in labels]
                gen = [len(fs[i] & fs[j]) for fs in sets
                       for i, j in itertools.combinations(range(len(fs)), 2)]
                imp = [len(sets[a][0] & sets[b][0])
                       for a, b in itertools.combinations(range(len(sets)), 2)]
                gen_arr, imp_arr = np.array(gen), np.array(imp)
                for k in (ks if ks is not None else range(1, t_max + 1)):
                    if k > t_max:
                        continue
                    rows.append(TrainingRow(float(lam), int(s), int(t_max), int(k),
                                            int((gen_arr >= k).sum()), len(gen),
                                            int((imp_arr >= k).sum()), len(imp)))
    if not rows:
        raise ValueError("search space admits no configuration")
    best = select_configuration(rows)
    return GridParams(best.lam, best.s, width, height, best.t_max, best.k), rows


# ---------------------------------------------------------------------------
# serialization

_HEAD = struct.Struct(">IHIIHH")


def serialize_grid_vault(v: GridVault) -> bytes:
    p = v.params
    head = _HEAD.pack(records.fixed(p.lam), p.s, records.fixed(p.width), records.fixed(p.height),
                      p.k, p.t_max)
    body = np.asarray(v.ordinates, dtype=">u2").tobytes()
    return records.header(records.KIND_GRID) + head + body + v.digest


def deserialize_grid_vault(data: bytes) -> GridVault:
    r = records.Reader(data, records.KIND_GRID)
    lam, s, w, h, k, t_max = r.unpack(_HEAD)
    try:
        params = GridParams(records.unfixed(lam), s, records.unfixed(w), records.unfixed(h), t_max, k)
    except ValueError as exc:
        raise VaultFormatError(f"invalid grid parameters: {exc}") from None
    ys = np.frombuffer(r.take(2 * params.n), dtype=">u2")
    digest = r.digest()
    r.finish()
    return GridVault(params, tuple(int(y) for y in ys), digest)
