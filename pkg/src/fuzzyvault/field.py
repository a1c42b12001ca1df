"""Arithmetic in GF(2^16), polynomials of bounded degree and their SHA-1 digest.

Field elements are plain ints in ``[0, 65535]`` read as binary polynomials.
Scalar helpers work on ints; the ``*_batch`` helpers work on numpy arrays
and are what the decoders and attacks use in their inner loops.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

BITS = 16
SIZE = 1 << BITS
ORDER = SIZE - 1
# x^16 + x^12 + x^3 + x + 1, primitive
MODULUS = 0x1100B
DIGEST_SIZE = 20


# log(0) points past every reachable sum of two genuine logs, into a zero tail
# of the exp table, so vectorized products need no masking.
_LOG_ZERO = 2 * ORDER + 1


def _build_tables():
    exp = np.zeros(2 * _LOG_ZERO + 1, dtype=np.int32)
    log = np.zeros(SIZE, dtype=np.int32)
    v = 1
    for i in range(ORDER):
        exp[i] = v
        log[v] = i
        v <<= 1
        if v & SIZE:
            v ^= MODULUS
    if v != 1:
        raise RuntimeError("field modulus is not primitive")
    exp[ORDER:2 * ORDER] = exp[:ORDER]
    exp[2 * ORDER] = exp[0]
    log[0] = _LOG_ZERO
    return exp, log


EXP, LOG = _build_tables()
_EXP = EXP.tolist()
_LOG = LOG.tolist()


def add(a: int, b: int) -> int:
    return a ^ b


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^16)")
    return _EXP[ORDER - _LOG[a]]


def div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(2^16)")
    if a == 0:
        return 0
    return _EXP[_LOG[a] + ORDER - _LOG[b]]


def power(a: int, e: int) -> int:
    if a == 0:
        return 0 if e > 0 else 1
    return _EXP[(_LOG[a] * e) % ORDER]


def mul_slow(a: int, b: int) -> int:
    """Shift-and-add multiply, independent of the log tables."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & SIZE:
            a ^= MODULUS
    return r


@dataclass(frozen=True)
class Polynomial:
    """Polynomial of degree < k, coefficients lowest degree first.

    ``k`` is the length of ``coefficients``; leading zeros are kept so the
    serialized form has a fixed width.
    """

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("degree bound k must be at least 1")
        for c in coeffs:
            if not 0 <= c < SIZE:
                raise ValueError(f"coefficient {c} outside GF(2^16)")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def __call__(self, x: int) -> int:
        return poly_eval(self, x)

    def to_bytes(self) -> bytes:
        return struct.pack(f">{self.k}H", *self.coefficients)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Polynomial":
        if len(data) % 2 or not data:
            raise ValueError("polynomial encoding must be a nonempty even number of bytes")
        return cls(struct.unpack(f">{len(data) // 2}H", data))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "Polynomial":
        return cls(tuple(int(c) for c in rng.integers(0, SIZE, size=k)))


def poly_eval(f: Polynomial, x: int) -> int:
    acc = 0
    lx = _LOG[x] if x else None
    for c in reversed(f.coefficients):
        # acc = acc * x + c
        if acc and lx is not None:
            acc = _EXP[_LOG[acc] + lx]
        else:
            acc = 0
        acc ^= c
    return acc


def interpolate(points: Sequence[tuple[int, int]], k: int) -> Polynomial:
    """Unique polynomial of degree < k through exactly k points (Newton form)."""
    if len(points) != k:
        raise ValueError(f"need exactly {k} points, got {len(points)}")
    xs = [int(p[0]) for p in points]
    ys = [int(p[1]) for p in points]
    if len(set(xs)) != k:
        raise ValueError("abscissae must be pairwise distinct")
    c = ys[:]
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            c[i] = div(c[i] ^ c[i - 1], xs[i] ^ xs[i - j])
    p = [0] * k
    p[0] = c[k - 1]
    for i in range(k - 2, -1, -1):
        xi = xs[i]
        nxt = [0] * k
        for d in range(k - 1):
            if p[d]:
                nxt[d + 1] ^= p[d]
                nxt[d] ^= mul(p[d], xi)
        nxt[0] ^= c[i]
        p = nxt
    return Polynomial(tuple(p))


def poly_hash(f: Polynomial) -> bytes:
    """SHA-1 over the k big-endian 16-bit coefficients, lowest first."""
    return hashlib.sha1(f.to_bytes()).digest()


# ---------------------------------------------------------------------------
# vectorized helpers

def mul_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return EXP[LOG[a] + LOG[b]]


def div_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b)
    if np.any(b == 0):
        raise ZeroDivisionError("division by zero in GF(2^16)")
    return EXP[LOG[a] + (ORDER - LOG[b])]


def eval_batch(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate each row of ``coeffs`` (B, k) at the matching entry of ``x`` (B,)."""
    coeffs = np.asarray(coeffs, dtype=np.int32)
    x = np.asarray(x, dtype=np.int32)
    acc = np.zeros(coeffs.shape[0], dtype=np.int32)
    for d in range(coeffs.shape[1] - 1, -1, -1):
        acc = mul_batch(acc, x) ^ coeffs[:, d]
    return acc


def interpolate_batch(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Interpolate B point sets at once; returns (B, k) coefficient rows.

    Every row needs pairwise distinct abscissae (ZeroDivisionError otherwise).
    """
    # work in (k, B) layout so every step touches contiguous rows
    x = np.ascontiguousarray(np.asarray(xs, dtype=np.int32).T)
    c = np.ascontiguousarray(np.asarray(ys, dtype=np.int32).T)
    k = x.shape[0]
    lx = LOG[x]
    for j in range(1, k):
        num = c[j:] ^ c[j - 1:k - 1]
        den = x[j:] ^ x[:k - j]
        if not den.all():
            raise ZeroDivisionError("repeated abscissa in interpolation batch")
        c[j:] = EXP[LOG[num] + (ORDER - LOG[den])]
    p = np.zeros_like(c)
    p[0] = c[k - 1]
    for i in range(k - 2, -1, -1):
        deg = k - 2 - i  # degree bound of the partial product
        prod = EXP[LOG[p[:deg + 1]] + lx[i]]
        shifted = p[:deg + 1].copy()
        p[:deg + 1] = prod
        p[1:deg + 2] ^= shifted
        p[0] ^= c[i]
    return np.ascontiguousarray(p.T)


def first_digest_match(coeffs: np.ndarray, digest: bytes) -> int:
    """Index of the first row whose polynomial hash equals ``digest``, else -1."""
    coeffs = np.asarray(coeffs)
    if coeffs.size == 0:
        return -1
    width = 2 * coeffs.shape[1]
    buf = memoryview(coeffs.astype(">u2").tobytes())
    sha1 = hashlib.sha1
    for i in range(coeffs.shape[0]):
        if sha1(buf[i * width:(i + 1) * width]).digest() == digest:
            return i
    return -1
