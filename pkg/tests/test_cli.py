import json

import numpy as np
import pytest

from lelandfem.cli import RunConfig, apply_settings, main, read_table, run_experiment
from lelandfem.presets import PRESETS


def run_cli(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_preset_run_writes_expected_files(tmp_path):
    assert run_cli(tmp_path, "--preset", "le04-coarse") == 0
    curve = read_table(tmp_path / "curve_t0.csv")
    assert list(curve) == ["S", "V_fem", "V_fdm", "V_bs_linear"]
    comp = read_table(tmp_path / "comparison_t0.csv")
    assert np.allclose(comp["diff_fdm"], comp["V_fem"] - comp["V_fdm"], atol=1e-12)
    report = json.loads((tmp_path / "stability.json").read_text())
    assert report["config"]["preset"] == "le04-coarse"
    assert report["config"]["market"]["c"] == 0.01
    assert report["flagged"] is False
    assert {"ratios", "oscillation_index", "timing"} <= set(report)


def test_header_and_number_format(tmp_path):
    run_cli(tmp_path, "--preset", "linear-coarse", "--oracles", "off")
    lines = (tmp_path / "curve_t0.csv").read_text().splitlines()
    assert lines[0] == "S,V_fem"
    mantissa = lines[5].split(",")[0].split("e")[0]
    assert len(mantissa.replace(".", "").lstrip("-")) == 15
    assert not (tmp_path / "comparison_t0.csv").exists()


def test_csv_round_trip(tmp_path):
    from lelandfem import MarketParams, SchemeConfig, assemble, build_aligned, price_curve_at, run

    run_cli(tmp_path, "--preset", "le08-coarse", "--oracles", "off")
    p = MarketParams(c=0.02)
    mesh = build_aligned(0.1, p.K, 1)
    curve = price_curve_at(run(assemble(mesh, p.K), p, SchemeConfig(d_tau=0.001, Le=p.leland)), 0.0)
    back = read_table(tmp_path / "curve_t0.csv")
    assert np.allclose(back["S"], curve.S, rtol=1e-14, atol=0)
    assert np.allclose(back["V_fem"], curve.V, rtol=1e-14, atol=1e-300)


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        main(["--preset", "le12-p1-coarse", "--out", str(d), "--set", "times=0,0.5"])
    for name in ("curve_t0.csv", "curve_t0.5.csv", "comparison_t0.csv", "comparison_t0.5.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_unstable_preset_flagged(tmp_path):
    assert run_cli(tmp_path, "--preset", "le12-p1-unstable", "--oracles", "off") == 0
    assert json.loads((tmp_path / "stability.json").read_text())["flagged"] is True


def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# custom run\nc = 0.02\nh = 0.2\nd_tau = 0.004\norder = 2\ntimes = 0, 1\n")
    out = tmp_path / "out"
    assert main(["--config", str(cfg_file), "--set", "variant=v2", "--out", str(out), "--oracles", "off"]) == 0
    report = json.loads((out / "stability.json").read_text())
    assert report["config"]["numerics"]["order"] == 2
    assert report["config"]["numerics"]["variant"] == "v2"
    assert (out / "curve_t1.csv").exists()
    expiry = read_table(out / "curve_t1.csv")
    assert np.allclose(expiry["V_fem"], np.maximum(expiry["S"] - 100, 0), atol=1e-9)


def test_empty_times_default_to_zero():
    cfg = apply_settings(RunConfig(), {"times": ""})
    assert cfg.outputs.sample_times == (0.0,)


def test_json_format(tmp_path):
    assert run_cli(tmp_path, "--preset", "linear-coarse", "--set", "formats=csv,json") == 0
    payload = json.loads((tmp_path / "curve_t0.json").read_text())
    assert set(payload["columns"]) == {"S", "V_fem", "V_fdm", "V_bs_linear"}


@pytest.mark.parametrize(
    "args",
    [["--preset", "nope"], ["--set", "bogus=1"], ["--set", "order=3"], ["--set", "h"], ["--set", "times=5"]],
)
def test_bad_configuration_exits_nonzero(tmp_path, args, capsys):
    assert run_cli(tmp_path, *args) == 2
    assert "error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run_cli(tmp_path, "--config", str(tmp_path / "missing.cfg")) == 2


def test_blowup_is_recorded(tmp_path):
    code = run_cli(tmp_path, "--set", "h=0.001", "--set", "d_tau=0.0001", "--set", "theta=0",
                   "--set", "n_rannacher=0", "--oracles", "off")
    assert code == 3
    report = json.loads((tmp_path / "stability.json").read_text())
    assert report["aborted"] is True and "non-finite" in report["reason"]


def test_study_output(tmp_path):
    assert run_cli(tmp_path, "--set", "h=0.2", "--set", "study_levels=2", "--oracles", "off") == 0
    rows = read_table(tmp_path / "convergence.csv")
    assert list(rows) == ["h", "d_tau", "error", "order"]
    assert rows["h"].size == 2


def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    row = next(line for line in out.splitlines() if line.startswith("le08-coarse "))
    assert "0.02" in row.split()
    row = next(line for line in out.splitlines() if line.startswith("le12-p1-stable-fine "))
    assert "0.025" in row.split() and "6.25e-05" in row.split()
    assert len(PRESETS) >= 16


def test_run_experiment_rejects_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = apply_settings(RunConfig(), {"out": str(blocker / "sub")})
    assert run_experiment(cfg) == 2
