import json

import pytest

import script
from wigner.report_functions import strip_timing


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = script.main([*argv, "--output", str(out)])
    return code, (json.loads(out.read_text(encoding="utf-8")) if out.exists() else None), out


def test_derive_reproduces_the_derivation(tmp_path, expected):
    code, report, _ = run(tmp_path, "derive", "--no-timing")
    golden = expected("derive")
    assert code == 0
    assert report["sizes"] == golden["sizes"]
    assert report["terms_canceled"] == golden["terms_canceled"]
    assert all(report["checks"].values())


def test_analyze_with_rounded_overrides(tmp_path, data_dir):
    code, report, _ = run(tmp_path, "analyze", "--input", str(data_dir / "published_counts.toml"),
                          "--p-min", "0.002", "--p-max", "0.043")
    assert code == 0
    assert 363 <= report["report"]["violation"] <= 375
    assert report["report"]["significance"] > 2.5
    assert "reproduction" in report


def test_analyze_with_unscaled_sigma_from_csv(tmp_path, data_dir):
    code, report, _ = run(tmp_path, "analyze", "--input", str(data_dir / "published_counts.csv"),
                          "--p-min", "0.002", "--p-max", "0.043", "--sigma-convention", "unscaled")
    assert code == 0
    assert report["report"]["convention"] == "unscaled"
    assert report["report"]["significance"] > 2.5


def test_analyze_computed_extremes_has_sensitivity_note(tmp_path, data_dir):
    code, report, _ = run(tmp_path, "analyze", "--input", str(data_dir / "published_counts.toml"))
    assert code == 0
    assert report["report"]["violation"] == pytest.approx(293.5, abs=0.5)
    assert "sensitivity" in report


@pytest.mark.parametrize("argv", [
    ["analyze", "--input", "does/not/exist.toml"],
    ["analyze"],
    ["analyze", "--input", "data/published_counts.toml", "--sigma-convention", "bayesian"],
    ["census", "--predicate", "sideways"],
    ["montecarlo", "--samples", "0"],
    ["montecarlo", "--samples", "10", "--seed", "-1"],
    ["montecarlo", "--samples", "10", "--seed", str(2 ** 64)],
    ["teleport"],
])
def test_validation_errors_exit_with_one(tmp_path, argv):
    code, report, _ = run(tmp_path, *argv)
    assert code == 1
    assert report is None


def test_montecarlo_is_byte_identical_across_runs(tmp_path):
    argv = ["montecarlo", "--samples", "2000", "--seed", "7", "--shards", "3", "--no-timing"]
    code_a, report_a, out_a = run(tmp_path, *argv, name="a.json")
    code_b, _, out_b = run(tmp_path, *argv, name="b.json")
    assert code_a == code_b == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert report_a["passed"]
    assert report_a["samples"] == 2000


def test_montecarlo_failures_do_not_depend_on_shards(tmp_path):
    _, one, _ = run(tmp_path, "montecarlo", "--samples", "1000", "--seed", "5", "--shards", "1", name="one.json")
    _, many, _ = run(tmp_path, "montecarlo", "--samples", "1000", "--seed", "5", "--shards", "7", name="many.json")
    for key in ("samples", "raw_failures", "efa_failures"):
        assert one[key] == many[key]
    assert one["efa_max_margin"] == pytest.approx(many["efa_max_margin"], abs=1e-15)


def test_census_perfect_scope_is_deterministic(tmp_path):
    argv = ["census", "--scope", "perfect", "--no-timing"]
    code, report, out_a = run(tmp_path, *argv, name="a.json")
    _, _, out_b = run(tmp_path, *argv, name="b.json")
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert report["perfect"]["alice_only"]["flat_count"] == 40
    assert report["perfect"]["both_sides"]["matches_published"] is False
    assert report["multi_step_possibilities"] == 216


def test_census_groups_scope(tmp_path):
    code, report, _ = run(tmp_path, "census", "--scope", "groups", "--predicate", "both_sides", "--no-timing")
    assert code == 0
    assert report["groups"]["census"]["both_sides"]["flat_count"] == 172
    assert len(report["groups"]["members"]) == 12


def test_quantum_command(tmp_path):
    code, report, _ = run(tmp_path, "quantum", "--grid-step", "2")
    assert code == 0
    assert report["evaluation"]["margin"] == pytest.approx(0.25, abs=1e-12)
    assert report["max_violation_scan"]["angles"] == {"theta1": 0.0, "theta2": 30.0, "theta3": 60.0}


def test_slitwheel_command_writes_fringe_csv(tmp_path):
    csv_path = tmp_path / "fringe.csv"
    code, report, _ = run(tmp_path, "slitwheel", "--l", "10", "--fringe-csv", str(csv_path),
                          "--fringe-points", "11")
    assert code == 0
    assert report["numeric"]["relative_difference"] < 1e-6
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "phi_o_rad,probability"
    assert len(lines) == 12


def test_slitwheel_bad_width_exits_with_one(tmp_path):
    code, _, _ = run(tmp_path, "slitwheel", "--slit-width", "1.5")
    assert code == 1


def test_adversary_command(tmp_path):
    code, report, _ = run(tmp_path, "adversary", "--extra", "0.2", "--balanced-extra", "0.2")
    assert code == 0
    assert report["adversarial"]["singles_profile"] == pytest.approx([0.6, 0.4, 0.4, 0.4, 0.4, 0.6], abs=1e-12)
    assert report["balanced"]["evaluation"]["satisfied"] is False
    assert report["balanced"]["same_setting"][1] == pytest.approx(0.2, abs=1e-12)


def test_json_report_reingests_through_the_cli(tmp_path, data_dir):
    _, first, first_path = run(tmp_path, "analyze", "--input", str(data_dir / "published_counts.toml"),
                               "--p-min", "0.002", "--p-max", "0.043", name="first.json")
    code, second, _ = run(tmp_path, "analyze", "--input", str(first_path), name="second.json")
    assert code == 0
    assert second == first


def test_strip_timing_drops_speedup_fields():
    report = {"one_step": {"alice_only": {"flat_count": 3, "elapsed_s": 0.5, "baseline_elapsed_s": 1.0,
                                          "speedup": 2.0}}}
    assert strip_timing(report) == {"one_step": {"alice_only": {"flat_count": 3}}}


@pytest.mark.slow
def test_sharded_census_reports_speedup(tmp_path, expected):
    code, report, _ = run(tmp_path, "census", "--scope", "one_step", "--predicate", "alice_only",
                          "--shards", "4")
    assert code == 0
    entry = report["one_step"]["alice_only"]
    assert entry["flat_count"] == expected("census")["one_step"]["alice_only"]
    assert entry["baseline_elapsed_s"] > 0
    assert entry["speedup"] is None or entry["speedup"] > 0
    assert report["workers"] == 4
