import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import beta

from fuzzyvault.stats import (ConfidenceInterval, TrialRecord, clopper_pearson, median_trials,
                              point_estimate, rule_of_three)


def scipy_cp(s, n, level=0.95):
    a = (1 - level) / 2
    lo = 0.0 if s == 0 else beta.ppf(a, s, n - s + 1)
    hi = 1.0 if s == n else beta.ppf(1 - a, s + 1, n - s)
    return lo, hi


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 20000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))),
       st.sampled_from([0.9, 0.95, 0.99]))
def test_clopper_pearson_matches_beta_quantiles(sn, level):
    s, n = sn
    ci = clopper_pearson(TrialRecord(s, n), level)
    lo, hi = scipy_cp(s, n, level)
    assert ci.lower == pytest.approx(lo, abs=1e-9)
    assert ci.upper == pytest.approx(hi, abs=1e-9)
    assert ci.lower <= s / n <= ci.upper


def test_published_intervals():
    ci = clopper_pearson(TrialRecord(27, 4856))
    assert ci.percent() == "[0.37%, 0.81%]"
    ci = clopper_pearson(TrialRecord(14, 34650))
    assert ci.percent(4) == "[0.0221%, 0.0678%]"


def test_record_and_interval_validation():
    with pytest.raises(ValueError):
        TrialRecord(5, 4)
    with pytest.raises(ValueError):
        TrialRecord(0, 0)
    with pytest.raises(ValueError):
        ConfidenceInterval(0.5, 0.4, 0.95)
    with pytest.raises(ValueError):
        clopper_pearson(TrialRecord(1, 2), 1.0)
    assert point_estimate(TrialRecord(1, 4)) == 0.25
    assert 0.3 in ConfidenceInterval(0.1, 0.5, 0.95)


def test_rule_of_three():
    assert rule_of_three(4856).upper == pytest.approx(3 / 4856)
    assert rule_of_three(1).upper == 1.0
    # conservative: covers at least the exact one-sided 95% bound
    assert rule_of_three(4856).upper >= 1 - 0.05 ** (1 / 4856)
    with pytest.raises(ValueError):
        rule_of_three(0)


def test_median_trials():
    assert median_trials(8.53e-10) == pytest.approx(8.13e8, rel=0.005)
    assert median_trials(1.0) == 1.0
    p = 0.01
    n = median_trials(p)
    assert (1 - p) ** n == pytest.approx(0.5)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            median_trials(bad)
