import pytest

from src.harness.runner import run_scenario
from src.harness.scenario import parse_scenario
from src.storage.artifacts import ArtifactStore, read_csv, read_key_values


def run(text: str, tmp_path, **flags):
    config = parse_scenario(text, flags=flags)
    return run_scenario(config, ArtifactStore(tmp_path / "run"), workers=1)


def names(result) -> set[str]:
    return {path.name for path in result.artifacts}


def test_run_scenario__meanfield(tmp_path):
    text = "kind: meanfield\ninitial:\n  points: [[0.1, 0.05], [-0.3, 0.2]]\n"

    result = run(text, tmp_path, **{"integrator.t_end": 5.0})

    assert names(result) == {
        "trajectory-0.csv",
        "trajectory-1.csv",
        "fixed-points.csv",
        "phase-portrait.svg",
        "manifest.txt",
    }
    table = read_csv(result.store.path("trajectory-0.csv"))
    assert table.header == ["t", "s", "sigma"]
    assert len(table.rows) == 51
    assert table.column("t")[-1] == pytest.approx(5.0)


def test_run_scenario__fixed_points(tmp_path):
    result = run("kind: fixed-points\nweights: {w_ee: 15}\n", tmp_path)

    table = read_csv(result.store.path("fixed-points.csv"))
    assert len(table.rows) == 5
    assert table.header[:3] == ["s", "sigma", "stability"]
    assert "fixed-points.svg" in names(result)


def test_run_scenario__regulate(tmp_path):
    text = "kind: regulate\nregulation: {regulate: [w_ee]}\n"

    result = run(text, tmp_path, **{"integrator.t_end": 10.0, "integrator.sample_every": 1.0})

    assert {"regulation-0.csv", "regulation-0.txt", "regulation-0-summary.txt"} <= names(result)
    summary = read_key_values(result.store.path("regulation-0-summary.txt"))
    assert float(summary["t"]) == pytest.approx(10.0)
    assert "nullcline_overlap" in summary
    assert len(read_csv(result.store.path("regulation-0.csv")).rows) == 11


def test_run_scenario__simulate(tmp_path):
    text = "kind: simulate\nvariant: full\nthresholds: {h_e: 1, h_i: 3}\nglauber: {n: 10}\n"

    result = run(text, tmp_path, **{"integrator.t_end": 1.0})

    table = read_csv(result.store.path("trace.csv"))
    assert table.header == ["t", "mean_e", "mean_i"]
    assert len(table.rows) == 21
    assert read_key_values(result.store.path("manifest.txt"))["seed"] == "0"


def test_run_scenario__scan(tmp_path):
    text = (
        "kind: scan\n"
        "integrator: {dt: 0.05, t_transient: 100, t_measure: 100}\n"
        "scan:\n"
        "  x: {name: w_ee, low: 3, high: 5, size: 10}\n"
        "  y: {name: w_ie, low: 6, high: 10, size: 10}\n"
    )

    result = run(text, tmp_path)

    table = read_csv(result.store.path("region-map.csv"))
    assert table.header == ["w_ee", "w_ie", "label"]
    assert set(table.text_column("label")) == {"O"}
    assert len(table.rows) == 100


def test_run_scenario__profile(tmp_path):
    text = (
        "kind: profile\n"
        "integrator: {dt: 0.05, t_transient: 100, t_measure: 50}\n"
        "profile: {w_ie: [8], w_ee_low: 4, w_ee_high: 5, w_ee_size: 3}\n"
    )

    result = run(text, tmp_path)

    table = read_csv(result.store.path("profile.csv"))
    assert table.header == ["w_ie", "w_ee", "c_ee", "c_bar_ee", "c_bar_ie"]
    assert list(table.column("w_ee")) == [4.0, 4.5, 5.0]


def test_run_scenario__rerun_gives_identical_manifest(tmp_path):
    config = parse_scenario("kind: fixed-points\n")

    first = run_scenario(config, ArtifactStore(tmp_path / "a"))
    again = run_scenario(config, ArtifactStore(tmp_path / "b"))

    manifest = first.store.path("manifest.txt").read_bytes()
    assert manifest == again.store.path("manifest.txt").read_bytes()
