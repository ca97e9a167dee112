import json

import pytest

from kanlab import __version__
from kanlab.cli import CONFIG_SCHEMA, main

FAST_ORBIT = {"n_transient": 100, "n_average": 5000}


def write_config(path, system=None, operation=None, **extra):
    cfg = {
        "schema_version": 1,
        "system": system or {"family": "kan_cylinder", "k": 3, "eps": 0.5},
        "operation": operation or {"name": "validate"},
        "output_dir": "out",
        **extra,
    }
    path.write_text(json.dumps(cfg))
    return path


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_validate_defaults(tmp_path, capsys):
    cfg = write_config(tmp_path / "validate.json")
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    report = json.loads((out / "validate.json").read_text())
    passed = {c["name"]: c["passed"] for c in report["conditions"]}
    assert set(passed) == {"K1", "K2", "K3", "K4"} and all(passed.values())
    m = manifest(out)
    assert m["version"] == __version__ and m["operation"] == "validate"
    assert set(m["artifacts"]) == {"config.json", "validate.json", "conditions.csv"}
    assert (out / "config.json").read_bytes() == cfg.read_bytes()


def test_failing_conditions_still_exit_zero(tmp_path):
    cfg = write_config(tmp_path / "c.json", system={"family": "toy", "A": [[2, 1], [1, 1]], "delta": 0.9})
    assert main(["run", str(cfg)]) == 0
    report = json.loads((tmp_path / "out" / "validate.json").read_text())
    assert not report["all_passed"]


@pytest.mark.parametrize(
    "system,operation,extra,needle",
    [
        ({"family": "kan_cylinder", "k": 3}, None, {}, "system.eps"),
        ({"family": "kan_cylinder", "k": 3, "eps": 0.5, "epsilon": 1}, None, {}, "system.epsilon"),
        ({"family": "kan_cylinder", "k": 3, "eps": 1.5}, None, {}, "system.eps"),
        ({"family": "kan_t3", "eps": 0.5, "r": 0.2, "p": [0, 0], "q": [0.2, 0.4]}, None, {}, "system.M"),
        ({"family": "banana"}, None, {}, "system.family"),
        (None, {"name": "basin"}, {}, "seed"),
        (None, {"name": "sweep"}, {"seed": 1}, "operation.etas"),
        (None, {"name": "validate"}, {"settings": {"grid": {"nx": 0}}}, "settings.grid.nx"),
        (None, {"name": "validate"}, {"bogus": 1}, "bogus"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, system, operation, extra, needle):
    cfg = write_config(tmp_path / "bad.json", system, operation, **extra)
    assert main(["run", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and needle in err
    assert not (tmp_path / "out").exists()


def test_invalid_json_and_missing_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "nope.json")]) == 1


def test_inconsistent_system_is_config_error(tmp_path, capsys):
    system = {"family": "kan_t3", "M": [[5, 3], [3, 2]], "eps": 0.5, "r": 0.2, "p": [0, 0], "q": [0.3, 0.3]}
    cfg = write_config(tmp_path / "c.json", system)
    assert main(["run", str(cfg)]) == 1
    assert "system" in capsys.readouterr().err


def basin_config(tmp_path, n=512, name="basin"):
    return write_config(
        tmp_path / f"{name}.json",
        operation={"name": name},
        settings={"grid": {"nx": n, "ny": n}, "classify": {"max_iter": 2000}},
        seed=2024,
    )


@pytest.mark.slow
@pytest.mark.criterion(7)
def test_basin_run_is_reproducible(tmp_path):
    cfg = basin_config(tmp_path)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["run", str(cfg), "--out", str(out1), "--threads", "1"]) == 0
    assert main(["run", str(cfg), "--out", str(out2), "--threads", "4"]) == 0
    m1, m2 = manifest(out1), manifest(out2)
    assert {"basin.ppm", "intermingling.csv", "basin_summary.json", "config.json"} <= set(m1["artifacts"])
    assert m1["config_sha256"] == m2["config_sha256"]
    assert m1["artifacts"] == m2["artifacts"]
    assert m1["seeds"]["grid"] == 2024
    assert (out1 / "basin.ppm").read_bytes()[:15] == b"P6\n512 512\n255\n"
    head = (out1 / "intermingling.csv").read_text().splitlines()[0]
    assert head == "scale_j,mixed_fraction,mixed_count,total_boxes"


def test_relative_output_dir_resolves_against_config(tmp_path, monkeypatch):
    sub = tmp_path / "cfgs"
    sub.mkdir()
    cfg = basin_config(sub, n=32, name="intermingle")
    monkeypatch.chdir(tmp_path)
    assert main(["run", str(cfg.relative_to(tmp_path))]) == 0
    assert (sub / "out" / "intermingle_summary.json").exists()
    assert (sub / "out" / "manifest.json").exists()


def test_runtime_error_exits_two(tmp_path, capsys):
    cfg = write_config(
        tmp_path / "dim.json",
        operation={"name": "dimension"},
        settings={"grid": {"nx": 64, "ny": 64}},
        seed=1,
    )
    assert main(["run", str(cfg)]) == 2
    assert "runtime error" in capsys.readouterr().err


def test_lyapunov_run(tmp_path):
    cfg = write_config(
        tmp_path / "ly.json",
        operation={"name": "lyapunov", "x0": [0.0, 0.3]},
        settings={"orbit": FAST_ORBIT},
        seed=3,
    )
    assert main(["run", str(cfg)]) == 0
    res = json.loads((tmp_path / "out" / "lyapunov.json").read_text())
    assert res["center"] == pytest.approx(-0.6931471805599453, abs=1e-9)
    assert res["n_used"] == 5000


def test_lyapunov_on_boundary_level(tmp_path):
    cfg = write_config(
        tmp_path / "ly.json",
        operation={"name": "lyapunov", "level": 0.0},
        settings={"orbit": {"n_transient": 100, "n_average": 200000}},
        seed=3,
    )
    assert main(["run", str(cfg)]) == 0
    res = json.loads((tmp_path / "out" / "lyapunov.json").read_text())
    assert res["x0"][1] == 0.0
    assert abs(res["center"] - (-0.06933646419507394)) < 0.01


def test_toy_and_sweep_runs(tmp_path):
    toy = write_config(
        tmp_path / "toy.json",
        system={"family": "toy", "A": [[2, 1], [1, 1]], "delta": 0.5},
        operation={"name": "toy"},
        settings={"grid": {"nx": 32, "ny": 32}, "orbit": FAST_ORBIT},
        seed=5,
        output_dir="toy",
    )
    assert main(["run", str(toy)]) == 0
    assert {"toy.csv", "toy_summary.json", "basin_eta_0p0000.ppm"} <= set(manifest(tmp_path / "toy")["artifacts"])

    sweep = write_config(
        tmp_path / "sweep.json",
        operation={"name": "sweep", "mode": "boundary_preserving", "etas": [0, 0.02]},
        settings={"grid": {"nx": 16, "ny": 16}, "orbit": FAST_ORBIT, "scales": [2]},
        seed=5,
        output_dir="sweep",
    )
    assert main(["run", str(sweep)]) == 0
    arts = manifest(tmp_path / "sweep")["artifacts"]
    assert {"sweep.csv", "sweep_summary.json", "basin_eta_0p0200.ppm"} <= set(arts)


def test_toy_operation_rejects_other_families(tmp_path, capsys):
    cfg = write_config(tmp_path / "t.json", operation={"name": "toy"}, seed=1)
    assert main(["run", str(cfg)]) == 2


def test_schema_and_version(capsys):
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out) == CONFIG_SCHEMA
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == f"kanlab {__version__}"


def test_bad_thread_count(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    assert main(["run", str(cfg), "--threads", "0"]) == 1
