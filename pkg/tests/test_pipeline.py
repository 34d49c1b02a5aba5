import json
import math

import numpy as np
import pytest

from bpt import cli
from bpt.pipeline import (OUTPUTS, ConfigError, compare, parse_config, run_scenario,
                          run_table1, simulate, table1_config)


def cfg(**kw):
    base = {"version": 1, "name": "t", "pump": "pulsed", "sigma_p": 2e12, "sigma_c": 2e12,
            "grid": {"n": 64}}
    base.update(kw)
    return base


def test_defaults():
    c = parse_config({"version": 1, "name": "x", "pump": "cw", "sigma_c": 3e12})
    assert c.grid.n == 256 and c.grid.span == 12 * 3e12 and c.grid.center == 0
    assert c.amplitude == 0.1 and c.outputs == OUTPUTS and c.sigma_p is None
    assert parse_config(c.to_dict()) == c


@pytest.mark.parametrize("raw,field", [
    (cfg(pump="cw"), "sigma_p"),
    (cfg(sigma_p=None), "sigma_p"),
    ({k: v for k, v in cfg().items() if k != "sigma_p"}, "sigma_p"),
    (cfg(version=2), "version"),
    (cfg(colour="red"), "colour"),
    (cfg(grid={"n": 100}), "grid.n"),
    (cfg(grid={"n": 8192}), "grid.n"),
    (cfg(grid={"n": 16}), "grid.n"),
    (cfg(grid={"n": 64, "spn": 1.0}), "grid.spn"),
    (cfg(grid={"span": -1.0}), "grid.span"),
    (cfg(outputs=["g3"]), "outputs"),
    (cfg(amplitude=-0.1), "amplitude"),
    (cfg(sigma_c="2e12"), "sigma_c"),
    (cfg(pump="ns"), "pump"),
    (cfg(name=""), "name"),
    (cfg(shots=0), "shots"),
    (cfg(seed=True), "seed"),
])
def test_validation_errors(raw, field):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.field == field
    assert field in str(info.value)


def test_run_scenario_manifest(tmp_path):
    c = parse_config(cfg(outputs=list(OUTPUTS), shots=50))
    manifest = run_scenario(c, tmp_path)
    assert sorted(manifest["outputs"]) == sorted(OUTPUTS)
    seen = [e["path"] for v in manifest["outputs"].values() for e in v]
    assert len(seen) == len(set(seen))
    for v in manifest["outputs"].values():
        for e in v:
            assert (tmp_path / e["path"]).exists()
            assert len(e["sha256"]) == 64
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) == {"name", "K", "g2_time_integrated", "total_n_bar",
                            "coherence_fwhm_s", "stationary", "schmidt_coefficients"}
    assert summary["K"] == pytest.approx(1.0, abs=1e-4)
    assert summary["g2_time_integrated"] == pytest.approx(2.0, abs=1e-4)
    assert summary["coherence_fwhm_s"] is None
    assert summary["stationary"] is False


def test_output_subset(tmp_path):
    manifest = run_scenario(parse_config(cfg(outputs=["summary", "g2"])), tmp_path)
    assert sorted(manifest["outputs"]) == ["g2", "summary"]
    assert not (tmp_path / "jsa.csv").exists()


def test_cw_scenario_flags_stationary():
    res = simulate(table1_config("cw"))
    assert res.summary["stationary"] is True
    from bpt.correlations import max_toeplitz_deviation
    assert max_toeplitz_deviation(res.g1_abs) <= 1e-8


def test_summary_round_trip():
    res = simulate(table1_config("longer"))
    text = json.dumps(res.summary)
    back = json.loads(text)
    for key in ("K", "g2_time_integrated", "total_n_bar", "coherence_fwhm_s"):
        assert back[key] == res.summary[key]
    assert back["schmidt_coefficients"] == res.summary["schmidt_coefficients"]


def test_run_deterministic(tmp_path):
    c = parse_config(cfg(name="longer", sigma_p=1.5e12, sigma_c=2.4e12, shots=20))
    m1 = run_scenario(c, tmp_path / "a")
    m2 = run_scenario(c, tmp_path / "b")
    assert m1 == m2
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_table1(tmp_path):
    manifest = run_table1(tmp_path, threads=3, n=64)
    assert sorted(manifest["scenarios"]) == ["cw", "longer", "shorter"]
    for name in ("shorter", "longer", "cw"):
        assert (tmp_path / name / "summary.json").exists()
    comp = json.loads((tmp_path / "comparison.json").read_text())
    assert comp["K_increasing"] and comp["coherence_decreasing"]
    assert comp["K"]["shorter"] == pytest.approx(1, abs=1e-9)
    assert comp["K"]["longer"] == pytest.approx(1.1125, abs=1e-3)
    assert (tmp_path / "figure1.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_compare_handles_unbounded():
    results = [simulate(table1_config(n, n=64)) for n in ("shorter", "longer", "cw")]
    comp = compare(results)
    assert comp["coherence_fwhm_s"]["shorter"] is None
    assert comp["coherence_decreasing"]
    assert all(v < 0.1 for v in comp["spectra_rms"].values())


# -- CLI --------------------------------------------------------------------

def write(tmp_path, raw):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(raw))
    return str(p)


def test_cli_validate(tmp_path, capsys):
    assert cli.main(["validate", "--config", write(tmp_path, cfg())]) == 0
    assert cli.main(["validate", "--config", write(tmp_path, cfg(pump="cw"))]) == 2
    assert "sigma_p" in capsys.readouterr().err
    (tmp_path / "broken.json").write_text("{nope")
    assert cli.main(["validate", "--config", str(tmp_path / "broken.json")]) == 2


def test_cli_run(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", write(tmp_path, cfg(outputs=["summary"])),
                     "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["scenario"] == "t"
    assert (out / "manifest.json").exists()


def test_cli_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["run", "--config", write(tmp_path, cfg(outputs=["summary"])),
                     "--out", str(blocker / "sub")])
    assert code == 4
    assert cli.main(["validate", "--config", str(tmp_path / "missing.json")]) == 4


def test_cli_numeric_failure(tmp_path):
    code = cli.main(["run", "--config", write(tmp_path, cfg(amplitude=0.0)),
                     "--out", str(tmp_path / "o")])
    assert code == 3


def test_threads_env(monkeypatch):
    monkeypatch.setenv("BPT_THREADS", "2")
    assert cli._threads(None) == 2
    assert cli._threads(5) == 5
    monkeypatch.setenv("BPT_THREADS", "many")
    with pytest.raises(ConfigError):
        cli._threads(None)


def test_cli_table1(tmp_path, monkeypatch):
    monkeypatch.setenv("BPT_THREADS", "1")
    assert cli.main(["table1", "--out", str(tmp_path), "--no-figure"]) == 0
    assert (tmp_path / "comparison.json").exists()
    assert not (tmp_path / "figure1.png").exists()
    assert math.isfinite(json.loads((tmp_path / "cw" / "summary.json").read_text())["K"])
