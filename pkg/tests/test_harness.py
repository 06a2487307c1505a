import json

import pytest

from curvlab import harness as H


def test_theorem_coverage_manifest():
    # every in-scope claim has exactly one registered experiment
    assert set(H._EXPERIMENTS) == set(H.THEOREM_IDS)
    assert len(H.THEOREM_IDS) == 8


def test_config_validation_errors():
    with pytest.raises(H.ConfigError):
        H.RunConfig(theorems=("NoSuchTheorem",)).validate()
    with pytest.raises(H.ConfigError):
        H.RunConfig(theorems=()).validate()
    with pytest.raises(H.ConfigError):
        H.RunConfig(level=0).validate()
    with pytest.raises(H.ConfigError):
        H.RunConfig(cap_eps=1.5).validate()


def test_config_file_parsing(tmp_path):
    p = tmp_path / "cfg"
    p.write_text("theorems = CapBody, SingularSeam\nseed = 7\nlevel = 4\n")
    cfg = H.RunConfig.from_file(p)
    assert cfg.theorems == ("CapBody", "SingularSeam")
    assert cfg.seed == 7 and cfg.level == 4
    bad = tmp_path / "bad"
    bad.write_text("nonsense = 12\n")
    with pytest.raises(H.ConfigError):
        H.RunConfig.from_file(bad)


def test_selected_subset_runs_only_requested():
    cfg = H.RunConfig(theorems=("CapBody",))
    reports = H.run_all(cfg)
    assert [r.theorem for r in reports] == ["CapBody"]
    assert reports[0].passed


def test_report_serialization_shapes():
    cfg = H.RunConfig(theorems=("SingularSeam",), seed=3)
    reports = H.run_all(cfg)
    payload = json.loads(H.reports_json(reports))
    assert payload[0]["theorem"] == "SingularSeam"
    assert payload[0]["seed"] == 3
    rows = H.reports_csv(reports).splitlines()
    assert rows[0] == "# curvlab-verify-csv-v1"
    assert rows[1] == "theorem,fixture,quantity,value,tolerance,verdict"
    assert all(line.count(",") == 5 for line in rows[2:])


def test_full_run_passes(verify_runs):
    assert verify_runs["codes"] == [0, 0]
    reports = verify_runs["reports"]
    assert [r["theorem"] for r in reports] == list(H.THEOREM_IDS)
    for r in reports:
        assert r["passed"], f"{r['theorem']} failed: {r['fixtures']}"


def test_hausdorff_helper_strictly_below_eps():
    for e in (0.5, 0.25, 0.125):
        d = H.hausdorff_to_unit_ball(e)
        assert 0.5 * e < d < e
