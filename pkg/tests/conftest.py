import json

import pytest

from curvlab import cli


@pytest.fixture(scope="session")
def verify_runs(tmp_path_factory):
    """Two full `verify --all --seed 42` CLI runs; byte blobs plus parsed reports.

    Shared across the suite so the heavy experiments execute exactly twice
    (the determinism criterion needs two independent runs).
    """
    out = tmp_path_factory.mktemp("verify")
    paths = [out / "run1.json", out / "run2.json"]
    csvs = [out / "run1.csv", out / "run2.csv"]
    codes = []
    for p, c in zip(paths, csvs):
        codes.append(cli.main(["verify", "--all", "--seed", "42",
                               "--out", str(p), "--csv", str(c)]))
    blobs = [p.read_bytes() for p in paths]
    csv_blobs = [c.read_bytes() for c in csvs]
    reports = json.loads(blobs[0].decode())
    return {"codes": codes, "blobs": blobs, "csv_blobs": csv_blobs, "reports": reports}


def report_by_theorem(reports, theorem):
    for r in reports:
        if r["theorem"] == theorem:
            return r
    raise KeyError(theorem)


def fixture_rows(report, quantity=None, fixture=None):
    rows = report["fixtures"]
    if quantity is not None:
        rows = [r for r in rows if r["quantity"] == quantity]
    if fixture is not None:
        rows = [r for r in rows if r["fixture"] == fixture]
    return rows
