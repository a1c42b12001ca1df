"""Minutiae templates, well-separated selection, rigid transforms and a
seeded synthetic finger generator.

Templates on disk are plain text: a ``width height`` header followed by one
``a b theta quality`` line per minutia (angles in degrees).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .errors import FailureToCapture, GenerationError

ANGLE_WEIGHT = 0.2
SEPARATION = 25.0
FVC_WIDTH = 296
FVC_HEIGHT = 560


@dataclass(frozen=True)
class Minutia:
    a: float
    b: float
    theta: float
    quality: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta < 360.0:
            raise ValueError(f"angle {self.theta} outside [0, 360)")
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality {self.quality} outside [0, 1]")


def _by_quality(minutiae: Iterable[Minutia]) -> tuple[Minutia, ...]:
    # stable, so equal-quality minutiae keep their given order
    return tuple(sorted(minutiae, key=lambda m: -m.quality))


@dataclass(frozen=True)
class MinutiaeTemplate:
    """Minutiae ordered by descending quality, plus the image region."""

    minutiae: tuple[Minutia, ...]
    width: float = FVC_WIDTH
    height: float = FVC_HEIGHT

    def __post_init__(self):
        object.__setattr__(self, "minutiae", _by_quality(self.minutiae))

    def __len__(self):
        return len(self.minutiae)

    def __iter__(self):
        return iter(self.minutiae)

    def __getitem__(self, i):
        return self.minutiae[i]

    def array(self) -> np.ndarray:
        """(n, 3) array of ``a, b, theta``."""
        if not self.minutiae:
            return np.zeros((0, 3))
        return np.array([(m.a, m.b, m.theta) for m in self.minutiae], dtype=float)

    def contains(self, a: float, b: float) -> bool:
        return 0.0 <= a <= self.width and 0.0 <= b <= self.height

    def to_text(self) -> str:
        lines = [f"{self.width!r} {self.height!r}"]
        lines += [f"{m.a!r} {m.b!r} {m.theta!r} {m.quality!r}" for m in self.minutiae]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MinutiaeTemplate":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise ValueError("template header must be 'width height'")
        width, height = float(rows[0][0]), float(rows[0][1])
        minutiae = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise ValueError(f"line {lineno}: expected 'a b theta quality'")
            a, b, theta, q = (float(v) for v in row)
            minutiae.append(Minutia(a, b, theta, q))
        return cls(tuple(minutiae), width, height)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "MinutiaeTemplate":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def wrap_angle(theta):
    """Reduce to [0, 360); float ``%`` can return exactly 360 for tiny negatives."""
    r = np.mod(theta, 360.0)
    return np.where(r >= 360.0, 0.0, r)


def angular_distance(t1, t2):
    d = np.abs(np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float)) % 360.0
    return np.minimum(d, 360.0 - d)


def dissimilarity(m1: Minutia, m2: Minutia) -> float:
    pos = math.hypot(m1.a - m2.a, m1.b - m2.b)
    return pos + ANGLE_WEIGHT * float(angular_distance(m1.theta, m2.theta))


def dissimilarity_matrix(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Pairwise dissimilarities between rows of (n, 3) and (m, 3) arrays."""
    p = np.asarray(p, dtype=float).reshape(-1, 3)
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    pos = np.hypot(p[:, None, 0] - q[None, :, 0], p[:, None, 1] - q[None, :, 1])
    return pos + ANGLE_WEIGHT * angular_distance(p[:, None, 2], q[None, :, 2])


def select_well_separated(t: MinutiaeTemplate, t_min: int, t_max: int,
                          threshold: float = SEPARATION) -> list[Minutia]:
    """Greedy scan in quality order keeping minutiae farther than ``threshold``
    from everything already kept; stops after ``t_max``.

    Raises FailureToCapture when fewer than ``t_min`` survive.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    kept: list[Minutia] = []
    kept_arr = np.zeros((0, 3))
    for m in t.minutiae:
        if len(kept) >= t_max:
            break
        row = np.array([[m.a, m.b, m.theta]])
        if kept and dissimilarity_matrix(row, kept_arr).min() <= threshold:
            continue
        kept.append(m)
        kept_arr = np.vstack([kept_arr, row])
    if len(kept) < t_min:
        raise FailureToCapture(f"only {len(kept)} well-separated minutiae, need {t_min}")
    return kept


@dataclass(frozen=True)
class RigidTransform:
    """Rotate by ``rotation`` degrees about ``center``, then translate."""

    dx: float = 0.0
    dy: float = 0.0
    rotation: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)

    def _affine(self):
        phi = math.radians(self.rotation)
        c, s = math.cos(phi), math.sin(phi)
        cx, cy = self.center
        tx = cx - (c * cx - s * cy) + self.dx
        ty = cy - (s * cx + c * cy) + self.dy
        return c, s, tx, ty

    def apply_points(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.rotation % 360.0 == 0.0:
            return a + self.dx, b + self.dy
        c, s, tx, ty = self._affine()
        return c * a - s * b + tx, s * a + c * b + ty

    def apply(self, m: Minutia) -> Minutia:
        a, b = self.apply_points(m.a, m.b)
        return Minutia(float(a), float(b), float(wrap_angle(m.theta + self.rotation)), m.quality)

    def inverse(self) -> "RigidTransform":
        c, s, tx, ty = self._affine()
        # R^-1 (p - t)
        return RigidTransform(-(c * tx + s * ty), -(-s * tx + c * ty), -self.rotation)

    def then(self, other: "RigidTransform") -> "RigidTransform":
        """Composite transform: apply ``self`` first, then ``other``."""
        c1, s1, tx1, ty1 = self._affine()
        c2, s2, tx2, ty2 = other._affine()
        return RigidTransform(c2 * tx1 - s2 * ty1 + tx2, s2 * tx1 + c2 * ty1 + ty2,
                              self.rotation + other.rotation)


IDENTITY = RigidTransform()


def apply_transform(t: MinutiaeTemplate, T: RigidTransform) -> MinutiaeTemplate:
    return MinutiaeTemplate(tuple(T.apply(m) for m in t.minutiae), t.width, t.height)


def _round(v, digits=2):
    return np.round(np.asarray(v, dtype=float), digits)


def _clashes(cand: np.ndarray, placed: np.ndarray, threshold: float, neighbors: int = 8) -> np.ndarray:
    """For each candidate row, whether some placed minutia is within ``threshold``."""
    if not len(placed):
        return np.zeros(len(cand), dtype=bool)
    # only positions closer than the threshold can clash; crowding near a
    # candidate is bounded, so a few nearest neighbours suffice
    k = min(neighbors, len(placed))
    dist, idx = cKDTree(placed[:, :2]).query(cand[:, :2], k=k, distance_upper_bound=threshold)
    dist = dist.reshape(len(cand), k)
    idx = idx.reshape(len(cand), k)
    valid = np.isfinite(dist)
    ang = angular_distance(placed[np.where(valid, idx, 0), 2], cand[:, None, 2])
    d = np.where(valid, dist + ANGLE_WEIGHT * ang, np.inf)
    clash = d.min(axis=1) <= threshold
    # all k slots inside the radius: there may be more, fall back to the full check
    full = valid.all(axis=1) & ~clash
    if full.any():
        clash[full] = dissimilarity_matrix(cand[full], placed).min(axis=1) <= threshold
    return clash


def place_separated(rng: np.random.Generator, existing: np.ndarray, count: int,
                    width: float, height: float, min_separation: float = SEPARATION,
                    max_rejections: int = 5000, batch: int = 256) -> np.ndarray:
    """Rejection-sample ``count`` new (a, b, theta) rows, rounded to 1/100, each
    uniform over the region and farther than ``min_separation`` from
    ``existing`` and from each other.

    Raises GenerationError after ``max_rejections`` consecutive rejections.
    """
    existing = np.asarray(existing, dtype=float).reshape(-1, 3)
    pts = np.vstack([existing, np.zeros((count, 3))])
    base = placed = len(existing)
    end = base + count
    misses = 0
    while placed < end:
        cand = _round(np.column_stack([rng.uniform(0, width, batch), rng.uniform(0, height, batch),
                                       rng.uniform(0, 360, batch)]))
        cand[:, 2] = wrap_angle(cand[:, 2])
        clash = _clashes(cand, pts[:placed], min_separation)
        start = placed
        for i in range(batch):
            ok = not clash[i]
            if ok and placed > start:
                ok = dissimilarity_matrix(cand[i], pts[start:placed]).min() > min_separation
            if not ok:
                misses += 1
                if misses > max_rejections:
                    raise GenerationError(f"placed {placed - base} of {count} minutiae before giving up")
                continue
            misses = 0
            pts[placed] = cand[i]
            placed += 1
            if placed == end:
                break
    return pts[base:]


def synthesize_finger(seed: int, count: int = 40, width: float = FVC_WIDTH,
                      height: float = FVC_HEIGHT, min_separation: float = SEPARATION,
                      max_rejections: int = 5000, batch: int = 256) -> MinutiaeTemplate:
    """Random master template with pairwise dissimilarity above ``min_separation``.

    Coordinates and angles are rounded to 1/100 so the text format round-trips
    exactly. Gives up after ``max_rejections`` consecutive rejected draws.
    """
    rng = np.random.default_rng(seed)
    pts = place_separated(rng, np.zeros((0, 3)), count, width, height, min_separation,
                          max_rejections, batch)
    quality = _round(rng.uniform(0.5, 1.0, size=count), 4)
    minutiae = [Minutia(float(a), float(b), float(th), float(q))
                for (a, b, th), q in zip(pts, quality)]
    return MinutiaeTemplate(tuple(minutiae), width, height)


def impression_with_origin(master: MinutiaeTemplate, seed: int, pos_noise: float = 0.0,
                           ang_noise: float = 0.0, drop_rate: float = 0.0,
                           spurious_count: int = 0, transform: RigidTransform = IDENTITY,
                           quality_noise: float | None = None):
    """Like :func:`synthesize_impression` but also returns, per output minutia,
    the index of its master minutia (-1 for spurious ones)."""
    if not 0.0 <= drop_rate <= 1.0:
        raise ValueError("drop_rate must lie in [0, 1]")
    if quality_noise is None:
        quality_noise = 0.02 * pos_noise
    rng = np.random.default_rng(seed)
    n = len(master)
    arr = master.array()
    quality = np.array([m.quality for m in master.minutiae])
    keep = rng.random(n) >= drop_rate
    a = arr[:, 0] + rng.normal(0.0, pos_noise, n)
    b = arr[:, 1] + rng.normal(0.0, pos_noise, n)
    th = wrap_angle(arr[:, 2] + rng.normal(0.0, ang_noise, n))
    q = np.clip(quality + rng.normal(0.0, quality_noise, n), 0.0, 1.0)
    origin = list(np.flatnonzero(keep))
    a, b, th, q = a[keep], b[keep], th[keep], q[keep]

    if spurious_count:
        a = np.concatenate([a, rng.uniform(0, master.width, spurious_count)])
        b = np.concatenate([b, rng.uniform(0, master.height, spurious_count)])
        th = np.concatenate([th, rng.uniform(0, 360, spurious_count)])
        q = np.concatenate([q, rng.uniform(0.3, 0.8, spurious_count)])
        origin += [-1] * spurious_count

    a, b = transform.apply_points(a, b)
    th = wrap_angle(th + transform.rotation)
    if pos_noise or ang_noise or spurious_count or transform != IDENTITY:
        a, b, th = _round(a), _round(b), wrap_angle(_round(th))
        q = _round(q, 4)

    out, out_origin = [], []
    for ai, bi, ti, qi, oi in zip(a, b, th, q, origin):
        if 0.0 <= ai <= master.width and 0.0 <= bi <= master.height:
            out.append(Minutia(float(ai), float(bi), float(ti), float(qi)))
            out_origin.append(int(oi))
    # sort here (stable) so origin stays aligned with the template's order
    order = sorted(range(len(out)), key=lambda i: -out[i].quality)
    template = MinutiaeTemplate(tuple(out[i] for i in order), master.width, master.height)
    return template, [out_origin[i] for i in order]


def synthesize_impression(master: MinutiaeTemplate, seed: int, pos_noise: float = 0.0,
                          ang_noise: float = 0.0, drop_rate: float = 0.0,
                          spurious_count: int = 0, transform: RigidTransform = IDENTITY,
                          quality_noise: float | None = None) -> MinutiaeTemplate:
    """Noisy re-acquisition of ``master``.

    Each master minutia is dropped with probability ``drop_rate``; survivors get
    Gaussian position noise (``pos_noise`` px per axis), wrapped Gaussian angle
    noise and jittered quality (default sigma ``0.02 * pos_noise``).
    ``spurious_count`` uniform minutiae are added, ``transform`` is applied and
    minutiae leaving the image region are discarded.
    """
    return impression_with_origin(master, seed, pos_noise, ang_noise, drop_rate,
                                  spurious_count, transform, quality_noise)[0]


def random_transform(rng: np.random.Generator, max_rotation: float = 10.0,
                     max_shift: float = 20.0, width: float = FVC_WIDTH,
                     height: float = FVC_HEIGHT) -> RigidTransform:
    """Uniform small rotation about the image center plus a uniform shift."""
    return RigidTransform(float(rng.uniform(-max_shift, max_shift)),
                          float(rng.uniform(-max_shift, max_shift)),
                          float(rng.uniform(-max_rotation, max_rotation)),
                          (width / 2.0, height / 2.0))
