import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzyvault.errors import FailureToCapture, GenerationError
from fuzzyvault.minutiae import (IDENTITY, Minutia, MinutiaeTemplate, RigidTransform,
                                 angular_distance, apply_transform, dissimilarity,
                                 dissimilarity_matrix, impression_with_origin,
                                 place_separated, random_transform, select_well_separated,
                                 synthesize_finger, synthesize_impression, wrap_angle)

coord = st.floats(0, 296, allow_nan=False)
angle = st.floats(0, 359.99, allow_nan=False)
minutia = st.builds(Minutia, coord, st.floats(0, 560), angle, st.floats(0, 1))


def test_minutia_validation():
    with pytest.raises(ValueError):
        Minutia(1, 1, 360.0)
    with pytest.raises(ValueError):
        Minutia(1, 1, 10, quality=1.5)


def test_template_sorted_by_quality_stably():
    ms = [Minutia(1, 1, 0, 0.5), Minutia(2, 2, 0, 0.9), Minutia(3, 3, 0, 0.5)]
    t = MinutiaeTemplate(tuple(ms))
    assert [m.a for m in t] == [2, 1, 3]


def test_text_round_trip(tmp_path):
    t = synthesize_finger(4, 30)
    path = tmp_path / "t.txt"
    t.save(path)
    assert MinutiaeTemplate.load(path) == t
    assert path.read_text().splitlines()[0] == "296 560"


@pytest.mark.parametrize("text", ["", "296\n", "296 560\n1 2 3\n", "296 560\n1 2 400 0.5\n"])
def test_text_errors(text):
    with pytest.raises(ValueError):
        MinutiaeTemplate.from_text(text)


def test_angular_distance_is_circular():
    assert angular_distance(350, 10) == 20
    assert angular_distance(10, 350) == 20
    assert angular_distance(0, 180) == 180
    assert float(wrap_angle(-1e-18)) < 360.0


@given(minutia, minutia)
def test_dissimilarity_symmetric_and_zero_iff_equal(m1, m2):
    d = dissimilarity(m1, m2)
    assert d == pytest.approx(dissimilarity(m2, m1))
    assert dissimilarity(m1, m1) == 0
    if (m1.a, m1.b, m1.theta) != (m2.a, m2.b, m2.theta):
        assert d > 0


def test_dissimilarity_weights_angle_by_a_fifth():
    d = dissimilarity(Minutia(0, 0, 0), Minutia(3, 4, 90))
    assert d == pytest.approx(5 + 0.2 * 90)
    mat = dissimilarity_matrix(np.array([[0, 0, 0]]), np.array([[3, 4, 90], [0, 0, 350]]))
    assert mat.tolist()[0] == pytest.approx([23.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(minutia, min_size=0, max_size=40), st.integers(1, 30), st.floats(5, 60))
def test_well_separated_properties(ms, t_max, thr):
    t = MinutiaeTemplate(tuple(ms))
    kept = select_well_separated(t, 0, t_max, thr)
    assert len(kept) <= t_max
    for a, b in itertools.combinations(kept, 2):
        assert dissimilarity(a, b) > thr
    # subsequence of the quality order
    pos = [t.minutiae.index(m) for m in kept]
    assert pos == sorted(pos)


def test_well_separated_is_greedy_and_raises_below_t_min():
    t = MinutiaeTemplate((Minutia(0, 0, 0, 0.9), Minutia(5, 0, 0, 0.8), Minutia(100, 0, 0, 0.7)))
    assert [m.a for m in select_well_separated(t, 0, 5, 25)] == [0, 100]
    with pytest.raises(FailureToCapture):
        select_well_separated(t, 3, 5, 25)


transform = st.builds(RigidTransform, st.floats(-50, 50), st.floats(-50, 50),
                      st.floats(-180, 180), st.tuples(st.floats(0, 300), st.floats(0, 600)))


@given(transform)
def test_transform_is_rigid(T):
    pts = np.array([[0, 0], [100, 20], [37.5, 400], [296, 560]], dtype=float)
    a, b = T.apply_points(pts[:, 0], pts[:, 1])
    q = np.column_stack([a, b])
    for i, j in itertools.combinations(range(len(pts)), 2):
        assert abs(np.linalg.norm(pts[i] - pts[j]) - np.linalg.norm(q[i] - q[j])) < 1e-6


@given(transform, transform)
def test_inverse_and_composition(T, U):
    m = Minutia(120.0, 240.0, 33.0)
    back = T.inverse().apply(T.apply(m))
    assert (back.a, back.b) == pytest.approx((m.a, m.b), abs=1e-6)
    assert float(angular_distance(back.theta, m.theta)) < 1e-6
    both = T.then(U).apply(m)
    seq = U.apply(T.apply(m))
    assert (both.a, both.b) == pytest.approx((seq.a, seq.b), abs=1e-6)
    assert float(angular_distance(both.theta, seq.theta)) < 1e-6


def test_rotation_about_center():
    T = RigidTransform(0, 0, 90, (10, 10))
    m = T.apply(Minutia(20, 10, 350))
    assert (m.a, m.b) == pytest.approx((10, 20))
    assert m.theta == pytest.approx(80)


def test_synthesized_finger_is_separated_and_reproducible():
    t = synthesize_finger(9, 40)
    assert len(t) == 40 and t == synthesize_finger(9, 40)
    assert len(select_well_separated(t, 40, 40, 25)) == 40
    for m in t:
        assert t.contains(m.a, m.b)
        assert round(m.a, 2) == m.a and round(m.theta, 2) == m.theta


def test_place_separated_gives_up():
    rng = np.random.default_rng(0)
    with pytest.raises(GenerationError):
        place_separated(rng, np.zeros((0, 3)), 500, 50, 50, max_rejections=200)


def test_impression_noise_model():
    master = synthesize_finger(5, 40)
    assert synthesize_impression(master, 1) == master
    imp, origin = impression_with_origin(master, 2, pos_noise=1.0, ang_noise=2.0,
                                         drop_rate=0.25, spurious_count=5)
    assert origin.count(-1) == 5
    genuine = [o for o in origin if o >= 0]
    assert len(set(genuine)) == len(genuine) < 40
    for m, o in zip(imp, origin):
        if o >= 0:
            ref = master[o]
            assert math.hypot(m.a - ref.a, m.b - ref.b) < 8
    assert imp == impression_with_origin(master, 2, 1.0, 2.0, 0.25, 5)[0]


def test_impression_transform_and_clipping():
    master = synthesize_finger(6, 40)
    T = RigidTransform(500, 0)
    assert len(synthesize_impression(master, 1, transform=T)) == 0
    rng = np.random.default_rng(3)
    T = random_transform(rng, 10, 20)
    imp, origin = impression_with_origin(master, 3, transform=T)
    back = apply_transform(imp, T.inverse())
    for m, o in zip(back, origin):
        assert abs(m.a - master[o].a) < 0.02 and abs(m.b - master[o].b) < 0.02


def test_apply_identity():
    t = synthesize_finger(1, 10)
    assert apply_transform(t, IDENTITY) == t
