import json
import math

import numpy as np
import pytest

from fuzzyvault.attacks import fa_cost_randomized_decoder
from fuzzyvault.errors import DatasetError
from fuzzyvault.grid import GridParams, extract_feature_set
from fuzzyvault.harness import (CORES_ENV, SchemeConfig, SynthConfig, align_to, default_cores,
                                derive_seed, deserialize_record, enroll_record, far_interval,
                                format_duration, load_dataset, report_json, run_fvc_protocol,
                                run_unlocking_stats, serialize_record, synthesize_dataset,
                                table2_rows, table4_rows, table5_rows, verify_record)
from fuzzyvault.field import Polynomial
from fuzzyvault.minutiae import MinutiaeTemplate
from fuzzyvault.stats import median_trials


def test_dataset_round_trip(small_dataset):
    again = load_dataset(small_dataset.root)
    assert again.finger_ids == [1, 2, 3, 4, 5]
    for f in again.finger_ids:
        for a, b in zip(again.impressions(f), small_dataset.impressions(f)):
            assert a.template == b.template
            assert a.transform == b.transform
            assert a.descriptors == b.descriptors
    assert again.meta["descriptor_bits"] == 31


def test_synthesis_is_deterministic(tmp_path):
    cfg = SynthConfig(fingers=2, impressions=2, max_rotation=10, max_shift=10)
    a = synthesize_dataset(tmp_path / "a", cfg, seed=7)
    b = synthesize_dataset(tmp_path / "b", cfg, seed=7)
    for f in a.finger_ids:
        assert [i.template for i in a.impressions(f)] == [i.template for i in b.impressions(f)]


def test_alignment_recovers_master_frame(tmp_path):
    cfg = SynthConfig(fingers=1, impressions=2, pos_noise=0, ang_noise=0, drop_rate=0,
                      max_rotation=25, max_shift=30)
    ds = synthesize_dataset(tmp_path, cfg, seed=1)
    a, b = ds.impressions(1)
    aligned = align_to(b, a).array()
    ref = a.template.array()
    # points cropped by the frame differ; every survivor has an exact partner
    d = np.hypot(*(aligned[:, None, :2] - ref[None, :, :2]).transpose(2, 0, 1))
    assert np.mean(d.min(axis=1) < 1.0) > 0.7


def test_load_dataset_errors(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "missing")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    (tmp_path / "finger1_imp1.txt").write_text("not a template\n")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)


def test_bad_sidecars(tmp_path):
    ds = synthesize_dataset(tmp_path, SynthConfig(fingers=1, impressions=1, descriptor_bits=31), 0)
    tf = tmp_path / "finger1_imp1.tf"
    tf.write_text("1 2\n")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    tf.write_text("0 0 0 0 0\n")
    desc = tmp_path / "finger1_imp1.desc"
    desc.write_text("\n".join(desc.read_text().split()[:-1]) + "\n")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)


def test_derive_seed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


def test_cores_env(monkeypatch):
    monkeypatch.delenv(CORES_ENV, raising=False)
    assert default_cores() == 1
    monkeypatch.setenv(CORES_ENV, "4")
    assert default_cores() == 4
    for bad in ("0", "x", "-2"):
        monkeypatch.setenv(CORES_ENV, bad)
        with pytest.raises(ValueError):
            default_cores()


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig("other")
    with pytest.raises(ValueError):
        SchemeConfig(decoder="magic")
    with pytest.raises(ValueError):
        SchemeConfig(D=0)
    assert SchemeConfig("grid").decoder_name == "randomized"
    assert SchemeConfig("classic").decoder_name == "exhaustive"


@pytest.mark.parametrize("scheme", ["classic", "descriptor", "grid"])
def test_record_round_trip_and_self_unlock(small_dataset, scheme):
    cfg = SchemeConfig(scheme, D=1 << 12)
    imp = small_dataset.impressions(1)[0]
    secret = Polynomial.random(cfg.k, np.random.default_rng(0))
    rec = enroll_record(cfg, imp, secret, 5)
    back = deserialize_record(serialize_record(rec))
    assert serialize_record(back) == serialize_record(rec)
    res, secs = verify_record(cfg, back, imp.template, imp.descriptors, 1)
    assert res.success and res.secret == secret and secs >= 0


def test_far_interval():
    assert far_interval(0, 0) is None
    ci = far_interval(0, 300)
    assert ci.lower == 0 and ci.upper == pytest.approx(0.01)
    ci = far_interval(27, 4856)
    assert ci.lower < 27 / 4856 < ci.upper


def test_protocol_counts(small_dataset):
    rep = run_fvc_protocol(small_dataset, SchemeConfig("classic"))
    assert rep.failures_to_capture == 0
    assert rep.genuine_trials == rep.genuine_pairs_expected == 5 * 3
    assert rep.impostor_trials == rep.impostor_pairs_expected == 10
    assert rep.sub_genuine_trials == 5
    assert rep.enrollments == 5 * 2
    assert 0 <= rep.far <= rep.gar <= 1


def test_protocol_is_reproducible_across_workers(small_dataset):
    cfg = SchemeConfig("descriptor", seed=4)
    a = report_json(run_fvc_protocol(small_dataset, cfg), timings=False)
    b = report_json(run_fvc_protocol(small_dataset, cfg, workers=2), timings=False)
    assert a == b
    d = json.loads(a)
    assert "timings" not in d and d["config"]["code"] == "BCH(511,19)"


def test_noiseless_grid_protocol(tmp_path):
    cfg = SynthConfig(fingers=4, impressions=2, pos_noise=0, ang_noise=0, drop_rate=0,
                      max_rotation=20, max_shift=20)
    ds = synthesize_dataset(tmp_path, cfg, seed=11)
    attempts = []
    rep = run_fvc_protocol(ds, SchemeConfig("grid", D=1 << 12), attempts_out=attempts)
    assert rep.gar == 1.0 and rep.far == 0.0
    assert len(attempts) == rep.genuine_trials + rep.impostor_trials
    row = rep.row()
    assert row["k"] == 7 and row["far_ci"] == [0.0, 0.5]


def test_failure_to_capture_excluded(tmp_path):
    cfg = SynthConfig(fingers=3, impressions=2, minutiae=40)
    ds = synthesize_dataset(tmp_path, cfg, seed=2)
    # too few minutiae for t_min: finger 1 impression 1 cannot enroll
    MinutiaeTemplate(ds.impressions(1)[0].template.minutiae[:5]).save(tmp_path / "finger1_imp1.txt")
    rep = run_fvc_protocol(load_dataset(tmp_path), SchemeConfig("classic"))
    assert rep.failures_to_capture == 1 and rep.ftcr == pytest.approx(1 / 3)
    assert rep.genuine_trials == 2 and rep.genuine_pairs_expected == 3
    # one enrollment per finger; finger 1's also carried both of its impostor queries
    assert rep.impostor_trials == 1


def test_unlocking_stats(small_dataset):
    grid = GridParams()
    us = run_unlocking_stats(small_dataset, grid, ks=[7, 9], idt={7: 0.5})
    assert len(us.pairs) == len(us.stats) == 10
    for (x, y), (t, w) in zip(us.pairs, us.stats):
        assert x < y and 0 <= w <= t <= grid.t_max
        a = extract_feature_set(small_dataset.impressions(x)[0].template, grid.grid, grid.s, grid.t_max)
        assert t == len(extract_feature_set(small_dataset.impressions(y)[0].template, grid.grid,
                                            grid.s, grid.t_max))
        assert w <= len(a)
    r7 = us.rows[0]
    assert r7["far_single"] == fa_cost_randomized_decoder(us.stats, 7, 1)[0]
    assert ("seconds" in r7) == (r7["far_single"] > 0)
    assert "seconds" not in us.rows[1]


def test_unlocking_stats_on_identical_population(tmp_path):
    cfg = SynthConfig(fingers=3, impressions=1, pos_noise=0, ang_noise=0, drop_rate=0)
    ds = synthesize_dataset(tmp_path, cfg, seed=0)
    # every finger is a copy of finger 1: each pair overlaps fully, p = 1
    for f in (2, 3):
        ds.impressions(1)[0].template.save(tmp_path / f"finger{f}_imp1.txt")
    us = run_unlocking_stats(load_dataset(tmp_path), GridParams(), ks=[7])
    assert all(t == w for t, w in us.stats)
    assert us.rows[0]["far_single"] == 1.0 and us.rows[0]["queries"] == 1.0


def test_closed_form_tables():
    t2 = table2_rows()
    assert [round(r["log2_security"], 2) for r in t2] == [35.63, 31.24, 27.49, 31.24, 39.02, 47.88, 51.86]
    assert t2[2]["seconds"] == pytest.approx(2.97 * 60, rel=0.01)
    t4 = table4_rows()
    assert t4[-1]["seconds"][1] == math.inf and t4[-1]["ci"][0] == 0
    assert t4[2]["seconds"][0] == pytest.approx(4.23, abs=0.01)
    t5 = table5_rows(cores=1)
    assert t5[0]["seconds"] == pytest.approx(median_trials(8.31e-8) / 65536 * 0.28)


def test_format_duration():
    assert format_duration(math.inf) == "inf"
    assert format_duration(30) == "30 sec"
    assert format_duration(90) == "1.5 min"
    assert format_duration(2 * 86400) == "2 days"
