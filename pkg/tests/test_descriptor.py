import math
from fractions import Fraction

import numpy as np
import pytest

from fuzzyvault.bch import BCH_15_5, BCH_31_6, BCH_511_19, bch_encode, ints_to_bits, random_words
from fuzzyvault.classic import ClassicVaultParams, enroll_classic
from fuzzyvault.descriptor import (DEFAULT_R, block_count, build_hardened_unlocking_set, commit,
                                   decouple_ordinates, decoupling_estimate,
                                   deserialize_descriptor_vault, enroll_descriptor, flip_bits,
                                   harden_vault, hardened_bf_log2, hardened_bf_security,
                                   join_ordinate, load_descriptors, random_descriptor,
                                   s_factor, save_descriptors, serialize_descriptor_vault,
                                   sphere_packing_density, sphere_packing_density_exact,
                                   split_ordinate, unlock_hardened, unmask_entries)
from fuzzyvault.errors import VaultFormatError
from fuzzyvault.field import Polynomial
from fuzzyvault.bch import bch_decode_bits
from fuzzyvault.minutiae import synthesize_finger
from fuzzyvault.security import bf_log2, bf_security

P = ClassicVaultParams()
CODES = [BCH_511_19, BCH_31_6, BCH_15_5]


def enrolled(seed, code, count=40):
    rng = np.random.default_rng(seed)
    t = synthesize_finger(seed, count)
    desc = [random_descriptor(rng, code.m) for _ in range(len(t))]
    f = Polynomial.random(P.k, rng)
    return t, desc, f, enroll_descriptor(t, desc, P, f, seed, code)


@pytest.mark.parametrize("code", CODES)
def test_ordinate_blocks_round_trip(code):
    assert block_count(code) == math.ceil(16 / code.ell)
    for y in (0, 1, 0xFFFF, 0x8001, 12345):
        assert join_ordinate(split_ordinate(y, code), code) == y


@pytest.mark.parametrize("code", CODES)
def test_linearity_decides_unmasking(code):
    # masked xor w' = c(y) xor (w xor w'): decodes iff weight(w xor w') <= nu
    rng = np.random.default_rng(1)
    for _ in range(40):
        y = int(rng.integers(0, 1 << 16))
        w = random_descriptor(rng, code.m)
        flips = int(rng.integers(0, min(code.m, 2 * code.nu + 2)))
        w2 = flip_bits(w, code.m, flips, rng)
        got = unmask_entries([commit(y, w, code)], [w2], code)[0]
        if flips <= code.nu:
            assert got == y
        else:
            assert got != y


@pytest.mark.parametrize("code", CODES)
def test_self_unlock_and_noise_tolerance(code):
    t, desc, f, v = enrolled(2, code)
    res = unlock_hardened(v, t, desc)
    assert res.success and res.secret == f
    rng = np.random.default_rng(3)
    within = [flip_bits(w, code.m, code.nu, rng) for w in desc]
    assert unlock_hardened(v, t, within).secret == f
    beyond = [flip_bits(w, code.m, 2 * code.nu + 1, rng) for w in desc]
    u = build_hardened_unlocking_set(v, t, beyond, secret=f)
    assert u.genuine_count == 0
    assert not unlock_hardened(v, t, beyond).success


def test_record_hides_ordinates():
    t, desc, f, v = enrolled(4, BCH_511_19)
    ys = {f(i) for i in range(P.n)}
    for entry in v.masked:
        # masked words are 511-bit and carry no 16-bit field element verbatim
        assert len(entry) == 1 and entry[0] not in ys
    with pytest.raises(ValueError):
        enroll_descriptor(t, desc[:-1], P, f, 0, BCH_511_19)


def test_unrelated_descriptor_almost_never_decodes():
    rng = np.random.default_rng(5)
    out = bch_decode_bits(BCH_511_19, random_words(rng, 100_000, 511))
    assert (out < 0).all()


def test_harden_with_pool_and_validation():
    rng = np.random.default_rng(6)
    t = synthesize_finger(6, 40)
    f = Polynomial.random(9, rng)
    base = enroll_classic(t, P, f, 6)
    pool = [random_descriptor(rng, 15) for _ in range(5)]
    v = harden_vault(base, {}, BCH_15_5, 1, pool)
    assert len(v.masked) == P.n
    with pytest.raises(ValueError):
        harden_vault(base, {0: 1 << 15}, BCH_15_5, 1)
    with pytest.raises(ValueError):
        harden_vault(base, {}, BCH_15_5, 1, [])


def test_sphere_packing_density():
    rho = sphere_packing_density(BCH_511_19)
    assert rho == pytest.approx(1.3e-29, rel=0.01)
    assert sphere_packing_density_exact(15, 5, 3) == Fraction(576, 1024)
    assert sphere_packing_density((7, 7, 0)) == 1.0
    # monotone in nu and ell
    assert sphere_packing_density((31, 6, 6)) < sphere_packing_density(BCH_31_6)
    assert sphere_packing_density((31, 5, 7)) < sphere_packing_density(BCH_31_6)


def test_sphere_packing_density_monte_carlo_small_codes():
    rng = np.random.default_rng(7)
    for code in (BCH_15_5, BCH_31_6):
        ok = (bch_decode_bits(code, random_words(rng, 40000, code.m)) >= 0).mean()
        rho = sphere_packing_density(code)
        assert abs(ok - rho) < 5 * math.sqrt(rho * (1 - rho) / 40000)


def test_hardened_security():
    assert hardened_bf_security(224, 24, 9, DEFAULT_R, 0.0) == bf_security(224, 24, 9)
    assert hardened_bf_log2(224, 24, 9, DEFAULT_R, BCH_511_19) == pytest.approx(bf_log2(224, 24, 9))
    assert hardened_bf_security(224, 24, 9, DEFAULT_R, BCH_511_19) == pytest.approx(2.54e9, rel=0.01)
    assert round(hardened_bf_log2(224, 24, 9, DEFAULT_R, BCH_15_5)) == 45
    vals = [hardened_bf_log2(224, 24, 9, DEFAULT_R, r) for r in (0.0, 0.01, 0.1, 0.5)]
    assert vals == sorted(vals)
    assert s_factor(0.5625, DEFAULT_R) == pytest.approx(1 + 3.27 * 0.5625)
    with pytest.raises(ValueError):
        s_factor(0.1, 0.5)


def test_decoupling_estimate():
    rho = sphere_packing_density(BCH_511_19)
    sp, ok, fail = decoupling_estimate(224, rho)
    assert sp == pytest.approx(4.25e-29, rel=0.01)
    assert fail == pytest.approx(9.52e-27, rel=0.01)
    assert ok == 1.0 - fail or ok == pytest.approx(1.0)
    # the bound is vacuous once S' reaches 1
    assert decoupling_estimate(224, 0.5625) == (pytest.approx(1.839375), 0.0, 1.0)


def test_decoupling_candidate_count_matches_expectation():
    code = BCH_15_5
    rng = np.random.default_rng(8)
    t, desc, f, v = enrolled(8, code)
    pool = [random_descriptor(rng, code.m) for _ in range(1000)]
    rep = decouple_ordinates(v, pool)
    expected = 1 + (len(pool) - 1) * sphere_packing_density(code)
    assert abs(rep.mean_size - expected) / expected < 0.10
    assert max(rep.distinct_sizes) <= 1 << code.ell


def test_decoupling_with_true_descriptors_finds_every_genuine_ordinate():
    code = BCH_31_6
    t, desc, f, v = enrolled(9, code)
    rep = decouple_ordinates(v, desc)
    genuine = {i for i in range(P.n) if f(i) in rep.candidates[i]}
    assert len(genuine) >= P.t_min
    with pytest.raises(ValueError):
        decouple_ordinates(v, [])


@pytest.mark.parametrize("code", CODES)
def test_serialization_round_trip(code):
    _, _, _, v = enrolled(10, code)
    data = serialize_descriptor_vault(v)
    assert deserialize_descriptor_vault(data) == v
    with pytest.raises(VaultFormatError):
        deserialize_descriptor_vault(data[:-3])


def test_descriptor_file_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    ws = [random_descriptor(rng, 31) for _ in range(20)]
    save_descriptors(tmp_path / "d.desc", ws, 31)
    assert load_descriptors(tmp_path / "d.desc", 31) == ws
    with pytest.raises(ValueError):
        load_descriptors(tmp_path / "d.desc", 4)
