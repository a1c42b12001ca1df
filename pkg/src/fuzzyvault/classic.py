"""Minutiae fuzzy vault: chaff-hardened enrollment, query matching and the
exhaustive hash-checked decoder."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import records
from .decoding import DecodeResult, UnlockingSet, decode_exhaustive
from .errors import ChaffPlacementFailure, GenerationError, VaultFormatError
from .field import ORDER, SIZE, Polynomial, poly_hash
from .minutiae import (FVC_HEIGHT, FVC_WIDTH, SEPARATION, Minutia, MinutiaeTemplate,
                       dissimilarity_matrix, place_separated, select_well_separated,
                       wrap_angle)


@dataclass(frozen=True)
class ClassicVaultParams:
    n: int = 224
    t_min: int = 18
    t_max: int = 24
    k: int = 9
    separation: float = SEPARATION
    # query-to-vault acceptance radius
    match_threshold: float = SEPARATION

    def __post_init__(self):
        if not (1 <= self.k <= self.t_min <= self.t_max <= self.n <= SIZE):
            raise ValueError("need 1 <= k <= t_min <= t_max <= n <= 65536")
        if self.separation <= 0 or self.match_threshold < 0:
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class ClassicVault:
    """Published record: vault minutiae in lexicographic order, one ordinate
    per minutia (abscissa = list index) and the secret's digest."""

    params: ClassicVaultParams
    minutiae: tuple[Minutia, ...]
    ordinates: tuple[int, ...]
    digest: bytes
    width: float = FVC_WIDTH
    height: float = FVC_HEIGHT

    def __post_init__(self):
        if len(self.minutiae) != self.params.n or len(self.ordinates) != self.params.n:
            raise ValueError("vault must hold exactly n minutiae and n ordinates")

    @property
    def points(self) -> list[tuple[int, int]]:
        return list(enumerate(self.ordinates))

    def array(self) -> np.ndarray:
        return np.array([(m.a, m.b, m.theta) for m in self.minutiae], dtype=float)


def _rounded(t: MinutiaeTemplate) -> list[Minutia]:
    out = []
    for m in t.minutiae:
        theta = float(wrap_angle(round(m.theta, 2)))
        out.append(Minutia(round(m.a, 2), round(m.b, 2), theta, m.quality))
    return out


def chaff_ordinates(rng: np.random.Generator, forbidden: np.ndarray) -> np.ndarray:
    """Uniform field elements, each different from the matching ``forbidden`` entry."""
    r = rng.integers(0, ORDER, size=len(forbidden))
    return np.where(r >= forbidden, r + 1, r)


def enroll_classic_traced(t: MinutiaeTemplate, params: ClassicVaultParams, secret: Polynomial,
                          seed: int, max_rejections: int = 5000):
    """Enroll and also return ``{vault index: template index}`` for the genuine
    minutiae. The mapping is enrollment-side knowledge and never published."""
    if secret.k != params.k:
        raise ValueError(f"secret has degree bound {secret.k}, params expect {params.k}")
    rng = np.random.default_rng(seed)
    pool = _rounded(t)
    slot = {id(m): i for i, m in enumerate(pool)}
    genuine = _select(pool, t, params)
    g_arr = np.array([(m.a, m.b, m.theta) for m in genuine], dtype=float).reshape(-1, 3)
    try:
        chaff = place_separated(rng, g_arr, params.n - len(genuine), t.width, t.height,
                                params.separation, max_rejections)
    except GenerationError as exc:
        raise ChaffPlacementFailure(str(exc)) from None

    rows = [(m.a, m.b, m.theta, slot[id(m)]) for m in genuine]
    rows += [(float(a), float(b), float(th), -1) for a, b, th in chaff]
    rows.sort(key=lambda r: r[:3])
    xs = np.arange(params.n)
    f_vals = np.array([secret(int(x)) for x in xs])
    ys = chaff_ordinates(rng, f_vals)
    is_genuine = np.array([r[3] >= 0 for r in rows])
    ys = np.where(is_genuine, f_vals, ys)

    vault = ClassicVault(params, tuple(Minutia(a, b, th) for a, b, th, _ in rows),
                         tuple(int(y) for y in ys), poly_hash(secret), t.width, t.height)
    mapping = {i: r[3] for i, r in enumerate(rows) if r[3] >= 0}
    return vault, mapping


def _select(pool: list[Minutia], t: MinutiaeTemplate, params: ClassicVaultParams) -> list[Minutia]:
    tmpl = MinutiaeTemplate(tuple(pool), t.width, t.height)
    # the template constructor re-sorts stably, so identities survive
    return select_well_separated(tmpl, params.t_min, params.t_max, params.separation)


def enroll_classic(t: MinutiaeTemplate, params: ClassicVaultParams, secret: Polynomial,
                   seed: int) -> ClassicVault:
    """Hide the best well-separated minutiae of ``t`` among n - t chaff minutiae.

    Raises FailureToCapture or ChaffPlacementFailure.
    """
    return enroll_classic_traced(t, params, secret, seed)[0]


def match_query(vault_minutiae: np.ndarray, query: MinutiaeTemplate, t_max: int,
                separation: float, match_threshold: float) -> list[tuple[int, int]]:
    """(query index, vault index) pairs claimed by the query's well-separated
    minutiae, in query quality order; each vault minutia is claimed at most once."""
    if not len(query) or not len(vault_minutiae):
        return []
    chosen = select_well_separated(query, 0, t_max, separation)
    if not chosen:
        return []
    where = {id(m): i for i, m in enumerate(query.minutiae)}
    q = np.array([(m.a, m.b, m.theta) for m in chosen], dtype=float)
    d = dissimilarity_matrix(q, vault_minutiae)
    claimed: list[tuple[int, int]] = []
    taken = set()
    for m, row in zip(chosen, d):
        j = int(np.argmin(row))
        if row[j] <= match_threshold and j not in taken:
            taken.add(j)
            claimed.append((where[id(m)], j))
    return claimed


def build_unlocking_set(v: ClassicVault, query: MinutiaeTemplate,
                        params: Optional[ClassicVaultParams] = None,
                        secret: Optional[Polynomial] = None) -> UnlockingSet:
    """Vault points whose minutiae are approximated by the aligned query.

    Points come back sorted by abscissa. Passing ``secret`` fills in the
    genuine count for analysis.
    """
    params = params or v.params
    idx = sorted(j for _, j in match_query(v.array(), query, params.t_max,
                                           params.separation, params.match_threshold))
    pts = tuple((i, v.ordinates[i]) for i in idx)
    gc = None if secret is None else sum(1 for x, y in pts if secret(x) == y)
    return UnlockingSet(pts, gc)


def unlock_classic(v: ClassicVault, query: MinutiaeTemplate, budget: Optional[int] = None,
                   params: Optional[ClassicVaultParams] = None) -> DecodeResult:
    u = build_unlocking_set(v, query, params)
    return decode_exhaustive(u, v.params.k, v.digest, budget)


# ---------------------------------------------------------------------------
# serialization

_PARAMS = struct.Struct(">IHHHII")
_REGION = struct.Struct(">II")
_ENTRY = struct.Struct(">IIHH")


def _pack_params(p: ClassicVaultParams) -> bytes:
    return _PARAMS.pack(p.n, p.t_min, p.t_max, p.k, records.fixed(p.separation),
                        records.fixed(p.match_threshold))


def _read_params(r: records.Reader) -> ClassicVaultParams:
    n, t_min, t_max, k, sep, match = r.unpack(_PARAMS)
    try:
        return ClassicVaultParams(n, t_min, t_max, k, records.unfixed(sep), records.unfixed(match))
    except ValueError as exc:
        raise VaultFormatError(f"invalid vault parameters: {exc}") from None


def _pack_minutia(m: Minutia) -> tuple[int, int, int]:
    return records.fixed(m.a), records.fixed(m.b), records.fixed(m.theta) % 36000


def _read_minutia(a: int, b: int, th: int) -> Minutia:
    if th >= 36000:
        raise VaultFormatError("minutia angle out of range")
    return Minutia(records.unfixed(a), records.unfixed(b), records.unfixed(th))


def serialize_vault(v: ClassicVault) -> bytes:
    out = [records.header(records.KIND_CLASSIC), _pack_params(v.params),
           _REGION.pack(records.fixed(v.width), records.fixed(v.height))]
    for m, y in zip(v.minutiae, v.ordinates):
        out.append(_ENTRY.pack(*_pack_minutia(m), y))
    out.append(v.digest)
    return b"".join(out)


def deserialize_vault(data: bytes) -> ClassicVault:
    r = records.Reader(data, records.KIND_CLASSIC)
    params = _read_params(r)
    w, h = r.unpack(_REGION)
    minutiae, ys = [], []
    for _ in range(params.n):
        a, b, th, y = r.unpack(_ENTRY)
        minutiae.append(_read_minutia(a, b, th))
        ys.append(y)
    digest = r.digest()
    r.finish()
    return ClassicVault(params, tuple(minutiae), tuple(ys), digest,
                        records.unfixed(w), records.unfixed(h))
