import json
import subprocess
import sys

import numpy as np
import pytest

from pulseforge.cli import main
from pulseforge.pulses import load_pulse


def _run(tmp_path, argv, config=None):
    args = list(argv) + ["--out", str(tmp_path)]
    if config is not None:
        tmp_path.mkdir(parents=True, exist_ok=True)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return main(args)


def _manifest(tmp_path):
    return json.loads((tmp_path / "manifest.json").read_text())


def test_complexity_flat_top(tmp_path, capsys):
    code = _run(tmp_path, ["complexity", "--M", "2048", "--TF", "1.07", "--K", "1", "--flat-top"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["total"] == 22816 and out["ratio"] == "101%"
    man = _manifest(tmp_path)
    assert man["command"] == "complexity" and man["outputs"] == ["complexity.json"]
    data = json.loads((tmp_path / "complexity.json").read_text())
    assert data["manifest"].endswith(man["config_digest"][:16])


def test_unknown_command_and_no_args(capsys):
    assert main(["frobnicate"]) == 64
    assert "usage" in capsys.readouterr().err
    assert main([]) == 64


def test_missing_config_single_line(tmp_path, capsys):
    code = main(["design", "orth", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err.strip()
    assert err and "\n" not in err


def test_bad_json_and_bad_flag(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{oops")
    assert main(["psd", "--config", str(tmp_path / "bad.json")]) == 2
    assert main(["complexity", "--M", "many"]) == 2


def test_design_orth_rc_window(tmp_path, capsys):
    cfg = {"M": 256, "N": 320, "K": 2, "epsilon": 1e-4, "window": {"kind": "RC", "beta": 0.25}}
    assert _run(tmp_path, ["design", "orth"], cfg) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["sir_self_dB"] > 80 and rep["converged"]
    text = (tmp_path / "pulse.csv").read_text()
    assert text.startswith("# manifest.json sha256:")
    assert load_pulse(tmp_path / "pulse.csv").length == 640
    assert set(_manifest(tmp_path)["outputs"]) == {"pulse.csv", "pulse.json", "report.json"}


def test_digest_tracks_overrides(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["complexity", "--M", "2048", "--TF", "1.07", "--K", "2", "--out", str(a)])
    main(["complexity", "--M", "2048", "--TF", "1.07", "--K", "4", "--out", str(b)])
    assert _manifest(a)["config_digest"] != _manifest(b)["config_digest"]
    assert _manifest(b)["config"]["K"] == "4"


def test_numerology_modes(tmp_path, capsys):
    cfg = {"mode": "cp", "tau_max": 4.6e-6, "F": 15000, "Ts": 1 / (15000 * 256)}
    assert _run(tmp_path, ["numerology"], cfg) == 0
    assert json.loads(capsys.readouterr().out)["N"] == 274
    assert _run(tmp_path, ["numerology", "--mode", "tf", "--TF", "1.25"],
                {"tau_max": 1e-5, "nu_max": 1e3, "Ts": 1e-6}) == 0
    out = json.loads(capsys.readouterr().out)
    assert "ratio_error" in out
    assert _run(tmp_path, ["numerology", "--mode", "tf"], {"Ts": 1e-6}) == 2


def test_contour_threads_agree(tmp_path):
    cfg = {"M": 32, "N": 36, "tx": {"kind": "cp_tx"}, "rx": {"kind": "cp_rx"},
           "noise_db": -20, "grid": [3, 3], "tau_points": [0, 2, 4], "nu_points": [0.0, 0.01]}
    one, four = tmp_path / "one", tmp_path / "four"
    assert _run(one, ["contour"], cfg) == 0
    assert _run(four, ["contour", "--threads", "4"], cfg) == 0
    a = np.loadtxt(one / "contour.csv", delimiter=",", skiprows=2)
    b = np.loadtxt(four / "contour.csv", delimiter=",", skiprows=2)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (6, 3)


def test_maxsinr_and_joint(tmp_path, capsys):
    cfg = {"M": 32, "N": 36, "tx": {"kind": "cp_tx"}, "noise_db": -20,
           "channel": {"tau_max": 4, "nu_max": 0.01, "grid": [3, 3]}}
    assert _run(tmp_path / "m", ["design", "maxsinr"], cfg) == 0
    assert json.loads(capsys.readouterr().out)["zeta_max_dB"] > 0
    cfg = {"M": 32, "N": 40, "L": 80, "noise_db": -1, "channel": {"tau_max": 4, "grid": [8, 8]}}
    with pytest.warns(UserWarning):
        code = _run(tmp_path / "j", ["design", "joint"], cfg)
    assert code == 0
    assert (tmp_path / "j" / "gamma.csv").exists()


def test_psd_guards_simulate_ambiguity(tmp_path, capsys):
    base = {"M": 256, "N": 320, "tx": {"kind": "wofdm", "N0": 9}, "active": 40, "n_symbols": 16}
    assert _run(tmp_path / "p", ["psd"], base) == 0
    assert (tmp_path / "p" / "psd.csv").read_text().startswith("# manifest")
    assert _run(tmp_path / "g", ["guards"], {**base, "mask_level": -30}) == 0
    assert json.loads((tmp_path / "g" / "guards.json").read_text())["guards_single_side"] >= 0
    sim = {"M": 32, "N": 36, "tx": {"kind": "cp_tx"}, "rx": {"kind": "cp_rx"}, "snr_db": 20,
           "n_frames": 50, "channel": {"tau_max": 2, "nu_max": 0.005, "grid": [2, 2]}}
    assert _run(tmp_path / "s", ["simulate", "--seed", "3"], sim) == 0
    rep = json.loads((tmp_path / "s" / "report.json").read_text())
    assert {"ser", "evm_percent", "predicted_sinr_dB"} <= set(rep)
    assert _manifest(tmp_path / "s")["seed"] == 3
    amb = {"M": 32, "N": 36, "tx": {"kind": "rect", "length": 32}, "tau_points": [-4, 0, 4],
           "nu_points": [0.0]}
    assert _run(tmp_path / "a", ["ambiguity"], amb) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["max_abs"] == pytest.approx(1.0)


def test_unknown_pulse_kind(tmp_path):
    assert _run(tmp_path, ["ambiguity"], {"M": 8, "N": 10, "tx": {"kind": "iota"},
                                          "tau_points": [0], "nu_points": [0]}) == 2


def test_console_script_module_entry():
    res = subprocess.run([sys.executable, "-m", "pulseforge.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "pulseforge" in res.stdout
