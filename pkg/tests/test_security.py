import math

import pytest
from hypothesis import given, strategies as st

from fuzzyvault.security import (bf_exact, bf_log2, bf_security, expected_bf_iterations,
                                 expected_bf_log2)


@given(st.integers(1, 500).flatmap(lambda n: st.integers(1, n).flatmap(
    lambda t: st.tuples(st.just(n), st.just(t), st.integers(1, t)))))
def test_bf_is_ratio_of_binomials(ntk):
    n, t, k = ntk
    b = bf_exact(n, t, k)
    assert b * math.comb(t, k) == math.comb(n, k)
    assert bf_log2(n, t, k) == pytest.approx(math.log2(math.comb(n, k)) - math.log2(math.comb(t, k)))
    assert b >= 1


def test_values():
    assert bf_security(224, 24, 9) == pytest.approx(2.5429e9, rel=1e-4)
    assert round(bf_log2(1452, 44, 7)) == 36
    assert bf_exact(10, 10, 3) == 1
    assert expected_bf_iterations(10, 10, 3) == 1.0
    assert expected_bf_log2(10, 10, 3) == 0.0
    p = 1 / bf_security(224, 24, 9)
    assert expected_bf_iterations(224, 24, 9) == pytest.approx(math.log(0.5) / math.log1p(-p))
    assert expected_bf_log2(224, 24, 9) == pytest.approx(math.log2(expected_bf_iterations(224, 24, 9)))


def test_validation():
    for args in ((10, 5, 6), (5, 6, 3), (10, 5, 0)):
        with pytest.raises(ValueError):
            bf_exact(*args)


def test_published_time_column():
    # seconds on four cores at the measured per-core rate
    it = expected_bf_iterations(224, 24, 9)
    assert it / (148634.1 * 4) / 60 == pytest.approx(49.4, abs=0.1)
