"""Descriptor-hardened vault: each ordinate is published only as a fuzzy
commitment ``c(y) xor w`` keyed by the minutia's binary descriptor ``w``, plus
the decoupling analysis an attacker with a descriptor pool would run.

Codes with fewer than 16 message bits carry the ordinate in several blocks,
all masked with the same descriptor. By linearity the blocks then decode or
fail together, so a descriptor unlocks an entry with the same probability as
it unlocks a single codeword.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import records
from .bch import (BCH_511_19, BinaryCodeSpec, bch_decode_bits, bch_encode, ints_to_bits,
                  make_code, word_bytes)
from .classic import (ClassicVault, ClassicVaultParams, _pack_minutia, _pack_params,
                      _read_minutia, _read_params, enroll_classic_traced, match_query)
from .decoding import DecodeResult, UnlockingSet, decode_exhaustive
from .errors import VaultFormatError
from .field import BITS, Polynomial
from .minutiae import FVC_HEIGHT, FVC_WIDTH, Minutia, MinutiaeTemplate
from .security import bf_exact

# attacker's difficulty of guessing a random descriptor
DEFAULT_R = 4.27


def block_count(code: BinaryCodeSpec) -> int:
    return -(-BITS // code.ell)


def split_ordinate(y: int, code: BinaryCodeSpec) -> list[int]:
    mask = (1 << code.ell) - 1
    return [(y >> (code.ell * b)) & mask for b in range(block_count(code))]


def join_ordinate(blocks: Sequence[int], code: BinaryCodeSpec) -> int:
    y = 0
    for b, v in enumerate(blocks):
        y |= int(v) << (code.ell * b)
    # bits beyond the field width are padding
    return y & ((1 << BITS) - 1)


def random_descriptor(rng: np.random.Generator, m: int) -> int:
    nb = (m + 7) // 8
    return int.from_bytes(rng.bytes(nb), "little") & ((1 << m) - 1)


def flip_bits(w: int, m: int, count: int, rng: np.random.Generator) -> int:
    """``w`` with exactly ``count`` distinct bit positions flipped."""
    for p in rng.choice(m, size=count, replace=False):
        w ^= 1 << int(p)
    return w


def noisy_descriptor(w: int, m: int, ber: float, rng: np.random.Generator) -> int:
    """Flip each bit independently with probability ``ber``."""
    for p in np.flatnonzero(rng.random(m) < ber):
        w ^= 1 << int(p)
    return w


@dataclass(frozen=True)
class DescriptorVault:
    params: ClassicVaultParams
    minutiae: tuple[Minutia, ...]
    masked: tuple[tuple[int, ...], ...]
    code: BinaryCodeSpec
    digest: bytes
    width: float = FVC_WIDTH
    height: float = FVC_HEIGHT

    def __post_init__(self):
        if len(self.minutiae) != self.params.n or len(self.masked) != self.params.n:
            raise ValueError("vault must hold exactly n minutiae and n entries")
        nblk = block_count(self.code)
        for entry in self.masked:
            if len(entry) != nblk or any(not 0 <= w < (1 << self.code.m) for w in entry):
                raise ValueError(f"each entry needs {nblk} words of {self.code.m} bits")

    def array(self) -> np.ndarray:
        return np.array([(m.a, m.b, m.theta) for m in self.minutiae], dtype=float)


def _check_descriptor(w: int, code: BinaryCodeSpec):
    if not 0 <= w < (1 << code.m):
        raise ValueError(f"descriptor does not fit the code length m={code.m}")


def commit(y: int, w: int, code: BinaryCodeSpec) -> tuple[int, ...]:
    return tuple(bch_encode(code, blk) ^ w for blk in split_ordinate(y, code))


def harden_vault(v: ClassicVault, descriptors: Mapping[int, int], code: BinaryCodeSpec,
                 seed: int, pool: Optional[Sequence[int]] = None) -> DescriptorVault:
    """Replace every ordinate of ``v`` by its commitment.

    ``descriptors`` maps each genuine vault index to that minutia's descriptor;
    every other entry is masked with a chaff descriptor drawn from ``pool``
    (uniform random m-bit vectors when no pool is given).
    """
    for w in descriptors.values():
        _check_descriptor(int(w), code)
    if pool is not None:
        if not len(pool):
            raise ValueError("chaff descriptor pool is empty")
        for w in pool:
            _check_descriptor(int(w), code)
    rng = np.random.default_rng(seed)
    masked = []
    for i, y in enumerate(v.ordinates):
        if i in descriptors:
            w = int(descriptors[i])
        elif pool is not None:
            w = int(pool[int(rng.integers(len(pool)))])
        else:
            w = random_descriptor(rng, code.m)
        masked.append(commit(y, w, code))
    return DescriptorVault(v.params, v.minutiae, tuple(masked), code, v.digest, v.width, v.height)


def enroll_descriptor(t: MinutiaeTemplate, descriptors: Sequence[int], params: ClassicVaultParams,
                      secret: Polynomial, seed: int, code: BinaryCodeSpec = BCH_511_19,
                      pool: Optional[Sequence[int]] = None) -> DescriptorVault:
    """Enroll ``t`` with one descriptor per template minutia (template order)."""
    if len(descriptors) != len(t):
        raise ValueError("need one descriptor per template minutia")
    v, mapping = enroll_classic_traced(t, params, secret, seed)
    genuine = {i: descriptors[j] for i, j in mapping.items()}
    return harden_vault(v, genuine, code, seed + 1, pool)


def unmask_entries(entries: Sequence[tuple[int, ...]], witnesses: Sequence[int],
                   code: BinaryCodeSpec) -> list[Optional[int]]:
    """Decode ``entry xor witness`` blockwise; None where decoding fails."""
    if not entries:
        return []
    nblk = block_count(code)
    words = [w ^ wit for entry, wit in zip(entries, witnesses) for w in entry]
    msgs = bch_decode_bits(code, ints_to_bits(words, code.m)).reshape(-1, nblk)
    out: list[Optional[int]] = []
    for row in msgs:
        out.append(None if (row < 0).any() else join_ordinate(row.tolist(), code))
    return out


def build_hardened_unlocking_set(v: DescriptorVault, query: MinutiaeTemplate,
                                 query_descriptors: Sequence[int],
                                 secret: Optional[Polynomial] = None) -> UnlockingSet:
    if len(query_descriptors) != len(query):
        raise ValueError("need one descriptor per query minutia")
    p = v.params
    pairs = match_query(v.array(), query, p.t_max, p.separation, p.match_threshold)
    ys = unmask_entries([v.masked[j] for _, j in pairs],
                        [int(query_descriptors[q]) for q, _ in pairs], v.code)
    pts = sorted((j, y) for (_, j), y in zip(pairs, ys) if y is not None)
    gc = None if secret is None else sum(1 for x, y in pts if secret(x) == y)
    return UnlockingSet(tuple(pts), gc)


def unlock_hardened(v: DescriptorVault, query: MinutiaeTemplate, query_descriptors: Sequence[int],
                    budget: Optional[int] = None) -> DecodeResult:
    u = build_hardened_unlocking_set(v, query, query_descriptors)
    return decode_exhaustive(u, v.params.k, v.digest, budget)


# ---------------------------------------------------------------------------
# decoupling analysis

def sphere_packing_density_exact(m: int, ell: int, nu: int) -> Fraction:
    """Fraction of m-bit words within distance nu of one of 2^ell codewords."""
    return Fraction(sum(math.comb(m, j) for j in range(nu + 1)), 1 << (m - ell))


def sphere_packing_density(code) -> float:
    if isinstance(code, BinaryCodeSpec):
        return float(sphere_packing_density_exact(code.m, code.ell, code.nu))
    return float(sphere_packing_density_exact(*code))


def s_factor(rho: float, r: float = DEFAULT_R) -> float:
    if r < 1:
        raise ValueError("R must be at least 1")
    return 1.0 + (r - 1.0) * rho


def _rho(code_or_rho) -> float:
    if isinstance(code_or_rho, (int, float)):
        return float(code_or_rho)
    return sphere_packing_density(code_or_rho)


def hardened_bf_log2(n: int, t: int, k: int, r: float, code_or_rho) -> float:
    """log2 of S^k * bf(n,t,k)."""
    b = bf_exact(n, t, k)
    base = math.log2(b.numerator) - math.log2(b.denominator)
    return k * math.log2(s_factor(_rho(code_or_rho), r)) + base


def hardened_bf_security(n: int, t: int, k: int, r: float, code_or_rho) -> float:
    """S^k * bf(n,t,k) with S = 1 + (R-1) rho."""
    rho = _rho(code_or_rho)
    if rho == 0.0:
        return float(bf_exact(n, t, k))
    return 2.0 ** hardened_bf_log2(n, t, k, r, rho)


@dataclass
class DecouplingReport:
    candidates: list[list[int]]  # decoded ordinates per entry, in pool order
    s_prime: float
    success_estimate: float  # (1 - S')^n
    failure_estimate: float  # 1 - (1 - S')^n, kept separately for tiny values

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.candidates]

    @property
    def distinct_sizes(self) -> list[int]:
        return [len(set(c)) for c in self.candidates]

    @property
    def mean_size(self) -> float:
        return float(np.mean(self.sizes)) if self.candidates else 0.0


def decoupling_estimate(n: int, rho: float, r: float = DEFAULT_R) -> tuple[float, float, float]:
    """(S', (1-S')^n, 1-(1-S')^n) with S' = (R-1) rho."""
    sp = (r - 1.0) * rho
    if sp >= 1.0:
        # the Markov bound says nothing once S' reaches 1
        return sp, 0.0, 1.0
    lg = n * math.log1p(-sp)
    return sp, math.exp(lg), -math.expm1(lg)


def decouple_ordinates(v: DescriptorVault, pool: Sequence[int], r: float = DEFAULT_R,
                       chunk: int = 1 << 14) -> DecouplingReport:
    """Try every pool descriptor on every entry and collect what decodes."""
    if not len(pool):
        raise ValueError("descriptor pool is empty")
    code = v.code
    pool_bits = ints_to_bits(pool, code.m)
    nblk = block_count(code)
    candidates = []
    for entry in v.masked:
        blocks = ints_to_bits(entry, code.m)
        first = bch_decode_bits(code, pool_bits ^ blocks[0])
        hit = np.flatnonzero(first >= 0)
        msgs = [first[hit]]
        for b in range(1, nblk):
            # blocks share the witness, so they succeed on exactly the same rows
            msgs.append(bch_decode_bits(code, pool_bits[hit] ^ blocks[b]))
        cols = np.stack(msgs, axis=1) if len(hit) else np.zeros((0, nblk), dtype=np.int64)
        candidates.append([join_ordinate(row, code) for row in cols.tolist() if min(row) >= 0])
    sp, ok, fail = decoupling_estimate(v.params.n, sphere_packing_density(code), r)
    return DecouplingReport(candidates, sp, ok, fail)


# ---------------------------------------------------------------------------
# descriptor files and serialization

def save_descriptors(path, descriptors: Sequence[int], m: int) -> None:
    width = -(-m // 4)
    Path(path).write_text("".join(f"{int(w):0{width}x}\n" for w in descriptors), encoding="utf-8")


def load_descriptors(path, m: Optional[int] = None) -> list[int]:
    out = []
    for ln in Path(path).read_text(encoding="utf-8").split():
        w = int(ln, 16)
        if m is not None and w >> m:
            raise ValueError(f"descriptor {ln} longer than {m} bits")
        out.append(w)
    return out


_CODE = struct.Struct(">HHH")
_MINUTIA = struct.Struct(">IIH")


def serialize_descriptor_vault(v: DescriptorVault) -> bytes:
    nb = word_bytes(v.code)
    out = [records.header(records.KIND_DESCRIPTOR), _pack_params(v.params),
           struct.pack(">II", records.fixed(v.width), records.fixed(v.height)),
           _CODE.pack(v.code.m, v.code.ell, v.code.nu)]
    for m, entry in zip(v.minutiae, v.masked):
        out.append(_MINUTIA.pack(*_pack_minutia(m)))
        out.extend(w.to_bytes(nb, "big") for w in entry)
    out.append(v.digest)
    return b"".join(out)


def deserialize_descriptor_vault(data: bytes) -> DescriptorVault:
    r = records.Reader(data, records.KIND_DESCRIPTOR)
    params = _read_params(r)
    w, h = r.unpack(struct.Struct(">II"))
    m, ell, nu = r.unpack(_CODE)
    try:
        code = make_code(m, ell, nu)
    except ValueError as exc:
        raise VaultFormatError(str(exc)) from None
    nb = word_bytes(code)
    nblk = block_count(code)
    minutiae, masked = [], []
    for _ in range(params.n):
        minutiae.append(_read_minutia(*r.unpack(_MINUTIA)))
        words = tuple(int.from_bytes(r.take(nb), "big") for _ in range(nblk))
        if any(x >> code.m for x in words):
            raise VaultFormatError("masked word longer than the code length")
        masked.append(words)
    digest = r.digest()
    r.finish()
    return DescriptorVault(params, tuple(minutiae), tuple(masked), code, digest,
                           records.unfixed(w), records.unfixed(h))
