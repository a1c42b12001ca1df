"""Narrow-sense binary BCH codes: systematic encoding and bounded-distance
decoding (syndromes, Berlekamp-Massey, Chien search).

Words are Python ints; bit i is the coefficient of x^i. The message sits in
the top ``ell`` bits of a codeword.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numba
import numpy as np

# primitive polynomials for GF(2^mu), indexed by mu
_PRIMITIVE = {4: 0b10011, 5: 0b100101, 9: 0b1000010001}


def _gf_tables(mu: int):
    size = 1 << mu
    order = size - 1
    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.full(size, -1, dtype=np.int64)
    v = 1
    for i in range(order):
        exp[i] = v
        log[v] = i
        v <<= 1
        if v & size:
            v ^= _PRIMITIVE[mu]
    exp[order:] = exp[:order]
    return exp, log


def _pmul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _pmod(a: int, g: int) -> int:
    dg = g.bit_length() - 1
    while a and a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a


def _minimal_poly(e: int, mu: int, exp, log) -> int:
    """Minimal polynomial over GF(2) of alpha^e, as a bitmask."""
    order = (1 << mu) - 1
    coset = []
    c = e % order
    while c not in coset:
        coset.append(c)
        c = (2 * c) % order
    # prod (x - alpha^c) with coefficients in GF(2^mu), lowest first
    poly = [1]
    for c in coset:
        root = int(exp[c])
        nxt = [0] * (len(poly) + 1)
        for i, p in enumerate(poly):
            nxt[i + 1] ^= p
            if p:
                nxt[i] ^= int(exp[(log[p] + log[root]) % order])
        poly = nxt
    if any(p not in (0, 1) for p in poly):
        raise RuntimeError("minimal polynomial not over GF(2)")
    return sum(1 << i for i, p in enumerate(poly) if p)


@dataclass(frozen=True)
class BinaryCodeSpec:
    m: int
    ell: int
    nu: int
    generator: int = dc_field(default=0, compare=False, repr=False)

    @property
    def mu(self) -> int:
        return (self.m + 1).bit_length() - 1

    @property
    def name(self) -> str:
        return f"BCH({self.m},{self.ell})"


@lru_cache(maxsize=None)
def _build(m: int, ell: int, nu: int) -> BinaryCodeSpec:
    mu = (m + 1).bit_length() - 1
    if (1 << mu) - 1 != m or mu not in _PRIMITIVE:
        raise ValueError(f"no primitive BCH code of length {m} supported")
    exp, log = _gf_tables(mu)
    g = 1
    seen = set()
    for e in range(1, 2 * nu + 1):
        mp = _minimal_poly(e, mu, exp, log)
        if mp not in seen:
            seen.add(mp)
            g = _pmul(g, mp)
    if g.bit_length() - 1 != m - ell:
        raise ValueError(f"designed distance {2 * nu + 1} gives dimension "
                         f"{m - g.bit_length() + 1}, not {ell}")
    return BinaryCodeSpec(m, ell, nu, g)


def make_code(m: int, ell: int, nu: int) -> BinaryCodeSpec:
    return _build(m, ell, nu)


BCH_511_19 = make_code(511, 19, 119)
BCH_31_6 = make_code(31, 6, 7)
BCH_15_5 = make_code(15, 5, 3)
CODES = {c.name: c for c in (BCH_511_19, BCH_31_6, BCH_15_5)}


def code_by_name(name: str) -> BinaryCodeSpec:
    key = name.upper().replace(" ", "")
    if not key.startswith("BCH"):
        key = f"BCH({key})"
    try:
        return CODES[key]
    except KeyError:
        raise ValueError(f"unknown code {name!r}; choose from {', '.join(CODES)}") from None


def bch_encode(code: BinaryCodeSpec, message: int) -> int:
    if not 0 <= message < (1 << code.ell):
        raise ValueError(f"message {message} needs more than {code.ell} bits")
    shifted = message << (code.m - code.ell)
    return shifted ^ _pmod(shifted, code.generator)


# ---------------------------------------------------------------------------
# decoding kernel

@numba.njit(cache=True)
def _decode_one(bits, exp, log, order, nu, ell, leader, frob, out_bits):
    m = bits.shape[0]
    t2 = 2 * nu
    synd = np.zeros(t2 + 1, dtype=np.int64)
    any_err = False
    for j in range(1, t2 + 1):
        if leader[j] == j:
            idx = 0
            acc = 0
            for i in range(m):
                # branchless: random words would defeat the predictor
                acc ^= exp[idx] & -np.int64(bits[i])
                idx += j
                if idx >= order:
                    idx -= order
            synd[j] = acc
        else:
            # S_j = S_leader^(2^e) within a cyclotomic coset
            s0 = synd[leader[j]]
            synd[j] = 0 if s0 == 0 else exp[(log[s0] * frob[j]) % order]
        if synd[j]:
            any_err = True
    for i in range(m):
        out_bits[i] = bits[i]
    if not any_err:
        return 0

    # Berlekamp-Massey; for binary codes every even-step discrepancy vanishes
    lam = np.zeros(t2 + 2, dtype=np.int64)
    prev = np.zeros(t2 + 2, dtype=np.int64)
    tmp = np.zeros(t2 + 2, dtype=np.int64)
    lam[0] = 1
    prev[0] = 1
    L = 0
    Lp = 0
    shift = 1
    b = 1
    for r in range(1, t2 + 1):
        if r % 2 == 0:
            shift += 1
            continue
        d = synd[r]
        for i in range(1, L + 1):
            if lam[i] and synd[r - i]:
                d ^= exp[log[lam[i]] + log[synd[r - i]]]
        if d == 0:
            shift += 1
            continue
        coef = (log[d] - log[b]) % order
        if 2 * L <= r - 1:
            for i in range(L + 1):
                tmp[i] = lam[i]
            for i in range(Lp + 1):
                if prev[i]:
                    lam[i + shift] ^= exp[coef + log[prev[i]]]
            for i in range(L + 1):
                prev[i] = tmp[i]
            Lp = L
            L = r - L
            b = d
            shift = 1
        else:
            for i in range(Lp + 1):
                if prev[i]:
                    lam[i + shift] ^= exp[coef + log[prev[i]]]
            shift += 1
        if L > nu:
            # L never shrinks
            return -1
    deg = 0
    for i in range(t2 + 2):
        if lam[i]:
            deg = i
    if deg != L or L > nu:
        return -1

    # Chien search: error at position i iff lam(alpha^-i) == 0
    vals = np.empty(m, dtype=np.int64)
    for i in range(m):
        vals[i] = lam[0]
    for j in range(1, L + 1):
        if lam[j] == 0:
            continue
        # term j at position i is lam_j * alpha^(-i*j)
        idx = log[lam[j]]
        for i in range(m):
            vals[i] ^= exp[idx]
            idx -= j
            if idx < 0:
                idx += order
    found = 0
    for i in range(m):
        if vals[i] == 0:
            found += 1
            if found > L:
                return -1
            out_bits[i] ^= 1
            for j in range(1, t2 + 1):
                synd[j] ^= exp[(i * j) % order]
    if found != L:
        return -1
    for j in range(1, t2 + 1):
        if synd[j]:
            return -1
    return L


@numba.njit(cache=True)
def _decode_batch(words, exp, log, order, nu, ell, leader, frob):
    n, m = words.shape
    out = np.empty(n, dtype=np.int64)
    buf = np.empty(m, dtype=np.uint8)
    for w in range(n):
        if _decode_one(words[w], exp, log, order, nu, ell, leader, frob, buf) < 0:
            out[w] = -1
            continue
        msg = 0
        for i in range(ell):
            if buf[m - ell + i]:
                msg |= 1 << i
        out[w] = msg
    return out


@lru_cache(maxsize=None)
def _tables(mu: int):
    return _gf_tables(mu)


@lru_cache(maxsize=None)
def _cosets(order: int, t2: int):
    """For j <= t2: the smallest j0 with j = j0 * 2^e (mod order), and 2^e."""
    leader = np.arange(t2 + 1, dtype=np.int64)
    frob = np.ones(t2 + 1, dtype=np.int64)
    for j0 in range(1, t2 + 1):
        if leader[j0] != j0:
            continue
        c, e = (2 * j0) % order, 2
        while c != j0:
            if c <= t2 and leader[c] == c and c > j0:
                leader[c] = j0
                frob[c] = e
            c, e = (2 * c) % order, (2 * e) % order
    return leader, frob


def word_bytes(code: BinaryCodeSpec) -> int:
    return (code.m + 7) // 8


def ints_to_bits(words, m: int) -> np.ndarray:
    nb = (m + 7) // 8
    raw = b"".join(int(w).to_bytes(nb, "little") for w in words)
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(-1, nb)
    return np.unpackbits(arr, axis=1, bitorder="little")[:, :m].copy()


def bits_to_ints(bits: np.ndarray) -> list[int]:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def random_words(rng: np.random.Generator, count: int, m: int) -> np.ndarray:
    """``count`` uniform m-bit words as a (count, m) bit array."""
    return rng.integers(0, 2, size=(count, m), dtype=np.uint8)


def bch_decode_bits(code: BinaryCodeSpec, bits: np.ndarray) -> np.ndarray:
    """Decode each row of a (B, m) bit array; -1 marks a decoding failure."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8).reshape(-1, code.m)
    exp, log = _tables(code.mu)
    leader, frob = _cosets(code.m, 2 * code.nu)
    return _decode_batch(bits, exp, log, code.m, code.nu, code.ell, leader, frob)


def bch_decode_many(code: BinaryCodeSpec, words) -> np.ndarray:
    words = list(words)
    if not words:
        return np.zeros(0, dtype=np.int64)
    return bch_decode_bits(code, ints_to_bits(words, code.m))


def bch_decode(code: BinaryCodeSpec, word: int):
    """Message whose codeword lies within distance nu of ``word``, else None."""
    if not 0 <= word < (1 << code.m):
        raise ValueError(f"word does not fit in {code.m} bits")
    msg = int(bch_decode_many(code, [word])[0])
    return None if msg < 0 else msg
