"""CLI tests: config parsing diagnostics, subcommand outputs, exit codes,
byte-stable artifacts, and the verify battery."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hartree_exact import (
    fock_state,
    load_wavefunction,
    norm_sq,
    quasi_energy,
    tcs_constants,
)
from hartree_exact.cli import main, parse_config
from hartree_exact.errors import ParseError, RegimeError, ValidationError

STANDARD_CONFIG = """\
m = 1.0
k = 1.0
omega = 0.9
hbar = 1.0
E_field = 0.1
a = 0.5
b = 0.3
c = 0.2
kappa = 0.4
seed = 7
"""


def write_config(tmp_path, text=STANDARD_CONFIG, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def l2_distance(psi, phi):
    return math.sqrt(psi.grid.h * float(np.sum(np.abs(psi.values - phi.values) ** 2)))


# ---------------------------------------------------------------------------
# config parsing


def test_minimal_config_applies_defaults(tmp_path):
    cfg = parse_config(write_config(tmp_path, "m = 1\nk = 1\nomega = 0.9\nhbar = 1\n"))
    assert cfg.model.e_charge == 1.0
    assert cfg.model.E_field == 0.0
    assert cfg.model.kappa == 0.0
    assert cfg.grid.n_points == 1024
    assert cfg.grid.x_min == -cfg.grid.x_max
    assert cfg.solver.renormalize is False
    assert abs(cfg.solver.dt - cfg.model.drive_period / 4096.0) < 1e-15
    assert cfg.output == "csv"
    assert cfg.seed == 0


def test_full_config_round_trips(tmp_path):
    text = STANDARD_CONFIG + (
        "x_min = -20\nx_max = 20\nn_points = 512\ndt = 0.002\n"
        "renormalize = true\noutput = json\n"
    )
    cfg = parse_config(write_config(tmp_path, text))
    assert cfg.model.kappa == 0.4
    assert (cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points) == (-20.0, 20.0, 512)
    assert cfg.solver.dt == 0.002
    assert cfg.solver.renormalize is True
    assert cfg.output == "json"
    assert cfg.seed == 7


@pytest.mark.parametrize(
    "text, line, key",
    [
        ("m = 1\nk 1\n", 2, None),
        ("m = 1\nquux = 3\n", 2, "quux"),
        ("m = 1\nm = 2\n", 2, "m"),
        ("m = potato\nk = 1\nomega = 0.9\nhbar = 1\n", 1, "m"),
        ("m =\n", 1, "m"),
        ("m = 1\nk = 1\nomega = 0.9\nhbar = 1\nn_points = 3.5\n", 5, "n_points"),
        ("m = 1\nk = 1\nomega = 0.9\nhbar = 1\nrenormalize = maybe\n", 5, "renormalize"),
    ],
)
def test_malformed_configs_report_line_and_key(tmp_path, text, line, key):
    with pytest.raises(ParseError) as err:
        parse_config(write_config(tmp_path, text))
    assert err.value.line == line
    assert err.value.key == key


def test_missing_required_key_is_named(tmp_path):
    with pytest.raises(ParseError) as err:
        parse_config(write_config(tmp_path, "k = 1\nomega = 0.9\nhbar = 1\n"))
    assert err.value.key == "m"


def test_half_specified_grid_is_rejected(tmp_path):
    with pytest.raises(ParseError) as err:
        parse_config(
            write_config(tmp_path, "m = 1\nk = 1\nomega = 0.9\nhbar = 1\nx_min = -5\n")
        )
    assert err.value.key == "x_max"


def test_bad_output_choice_is_rejected(tmp_path):
    with pytest.raises(ParseError) as err:
        parse_config(write_config(tmp_path, "m = 1\nk = 1\nomega = 0.9\nhbar = 1\noutput = xml\n"))
    assert err.value.key == "output"


def test_negative_stiffness_is_a_validation_error(tmp_path):
    with pytest.raises(ValidationError, match="k must be > 0"):
        parse_config(write_config(tmp_path, "m = 1\nk = -1\nomega = 0.9\nhbar = 1\n"))


def test_unstable_width_dynamics_surfaces_the_inequality(tmp_path):
    text = "m = 1\nk = 1\nomega = 0.9\nhbar = 1\na = -3\nkappa = 1\n"
    with pytest.raises(RegimeError, match=r"Omega\^2.*<= 0"):
        parse_config(write_config(tmp_path, text))


def test_config_errors_exit_with_code_4(tmp_path, capsys):
    bad = write_config(tmp_path, "m = 1\nk = 1\nomega = 0.9\nhbar = 1\nquux = 1\n")
    assert main(["verify", "--config", bad]) == 4
    assert "unknown key" in capsys.readouterr().err
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 4


# ---------------------------------------------------------------------------
# states / evolve / oracle


def test_states_writes_members_and_sidecar(tmp_path, params, freqs, grid):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    assert main(["states", "--config", cfg, "--n-max", "2", "--t", "0.0",
                 "--out-dir", str(out_dir)]) == 0
    sidecar = json.loads((out_dir / "states.json").read_text())
    assert [s["n"] for s in sidecar["states"]] == [0, 1, 2]
    for entry in sidecar["states"]:
        qe = quasi_energy(params, freqs, entry["n"])
        assert abs(entry["E_n"] - qe.energy) < 1e-14
        assert abs(entry["gamma"] - qe.aa_phase) < 1e-14
        assert set(entry["constants"]) == {"c1", "c2", "c3", "c4", "c5"}
    psi = load_wavefunction(out_dir / "state_n1.csv")
    assert abs(norm_sq(psi) - 1.0) < 1e-10
    exact = fock_state(params, freqs, 1, tcs_constants(params, freqs, 1), 0.0, grid)
    assert l2_distance(psi, exact) < 1e-12


def test_evolve_command_matches_the_closed_form(tmp_path, params, freqs, grid):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    dst = tmp_path / "ev.csv"
    assert main(["evolve", "--config", cfg, "--from", str(out_dir / "state_n0.csv"),
                 "--t0", "0", "--t1", "1.1", "--out", str(dst)]) == 0
    got = load_wavefunction(dst)
    exact = fock_state(params, freqs, 0, tcs_constants(params, freqs, 0), 1.1, grid)
    assert l2_distance(got, exact) < 1e-10


def test_oracle_command_matches_evolve(tmp_path):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    src = str(out_dir / "state_n0.csv")
    ev, orc = tmp_path / "ev.csv", tmp_path / "orc.csv"
    main(["evolve", "--config", cfg, "--from", src, "--t0", "0", "--t1", "0.5",
          "--out", str(ev)])
    assert main(["oracle", "--config", cfg, "--from", src, "--t0", "0", "--t1", "0.5",
                 "--steps", "500", "--out", str(orc)]) == 0
    assert l2_distance(load_wavefunction(ev), load_wavefunction(orc)) < 1e-4


def test_oracle_rejects_dt_and_steps_together(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    code = main(["oracle", "--config", cfg, "--from", str(out_dir / "state_n0.csv"),
                 "--t0", "0", "--t1", "0.5", "--steps", "10", "--dt", "0.05",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 4
    assert "either --dt or --steps" in capsys.readouterr().err


def test_json_output_format(tmp_path):
    cfg = write_config(tmp_path, STANDARD_CONFIG + "output = json\n")
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    obj = json.loads((out_dir / "state_n0.json").read_text())
    assert obj["n_points"] == 1024
    assert len(obj["x"]) == len(obj["re"]) == len(obj["im"]) == 1024
    assert obj["version"]
    assert obj["config_sha256"]


# ---------------------------------------------------------------------------
# symmetry / quasienergy


def test_symmetry_ladder_raises_the_level(tmp_path, params, freqs, grid, capsys):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    dst = tmp_path / "raised.csv"
    assert main(["symmetry", "--config", cfg, "--op", "ladder+",
                 "--state", str(out_dir / "state_n0.csv"), "--t", "0",
                 "--out", str(dst)]) == 0
    report = json.loads(capsys.readouterr().out)
    mO = params.m * freqs.Omega
    assert abs(report["norm_sq"] - 1.0) < 1e-10
    assert abs(report["constants"]["c5"] - 3.0 * params.hbar / (2.0 * mO)) < 1e-10
    got = load_wavefunction(dst)
    exact = fock_state(params, freqs, 1, tcs_constants(params, freqs, 1), 0.0, grid)
    assert l2_distance(got, exact) < 1e-8


def test_symmetry_displace_reports_shifted_constants(tmp_path, params, freqs, capsys):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    assert main(["symmetry", "--config", cfg, "--op", "displace", "--alpha", "0.3,0.2",
                 "--state", str(out_dir / "state_n0.csv"), "--t", "0",
                 "--out", str(tmp_path / "disp.csv")]) == 0
    report = json.loads(capsys.readouterr().out)
    mO = params.m * freqs.Omega
    c1_shift = 0.3 * math.sqrt(2.0 * mO * params.hbar) / (params.m * freqs.OmegaTilde)
    c2_shift = -0.2 * math.sqrt(2.0 * params.hbar / mO)
    assert report["alpha"] == [0.3, 0.2]
    assert abs(report["constants"]["c1"] - c1_shift) < 1e-8
    assert abs(report["constants"]["c2"] - c2_shift) < 1e-8


def test_symmetry_displace_requires_alpha(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    code = main(["symmetry", "--config", cfg, "--op", "displace",
                 "--state", str(out_dir / "state_n0.csv"), "--t", "0",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 4
    assert "--alpha" in capsys.readouterr().err


def test_quasienergy_report(tmp_path, params, freqs, capsys):
    cfg = write_config(tmp_path)
    assert main(["quasienergy", "--config", cfg, "--n", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    qe = quasi_energy(params, freqs, 1)
    assert report["n"] == 1
    assert abs(report["energy"] - qe.energy) < 1e-14
    assert abs(report["aa_phase"] - qe.aa_phase) < 1e-14
    assert abs(report["period"] - params.drive_period) < 1e-14
    spacing = quasi_energy(params, freqs, 2).energy - qe.energy
    assert abs(report["spacing"] - spacing) < 1e-14


# ---------------------------------------------------------------------------
# exit codes on propagation failures


def test_focal_interval_exits_with_code_2(tmp_path, freqs, capsys):
    cfg = write_config(tmp_path)
    out_dir = tmp_path / "states"
    main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)])
    focal_t = repr(math.pi / freqs.Omega)
    code = main(["evolve", "--config", cfg, "--from", str(out_dir / "state_n0.csv"),
                 "--t0", "0", "--t1", focal_t, "--steps", "1",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "focal" in capsys.readouterr().err


def test_escaping_state_exits_with_code_3(tmp_path, capsys):
    cfg = write_config(tmp_path, STANDARD_CONFIG + "x_min = -8\nx_max = 8\nn_points = 256\n")
    out_dir = tmp_path / "states"
    assert main(["states", "--config", cfg, "--n-max", "0", "--out-dir", str(out_dir)]) == 0
    code = main(["symmetry", "--config", cfg, "--op", "displace", "--alpha", "0,-6",
                 "--state", str(out_dir / "state_n0.csv"), "--t", "0",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 3
    assert "grid" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify battery


def test_verify_default_config_passes(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["verify", "--config", cfg]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True
    names = [c["check"] for c in report["checks"]]
    assert "norm_conservation" in names
    assert "moment_transport" in names
    assert "ladder_algebra" in names
    assert "displacement_group_law" in names
    assert "oracle_consistency" in names
    for entry in report["checks"]:
        assert set(entry) >= {"check", "value", "tolerance", "pass"}
        assert entry["pass"] is True
        assert entry["value"] < entry["tolerance"]


def test_verify_reduces_quasienergy_without_drive(tmp_path, capsys):
    text = "m = 1.0\nk = 1.0\nomega = 0.9\nhbar = 1.0\na = 0.5\nb = 0.3\nc = 0.2\nkappa = 0.4\n"
    cfg = write_config(tmp_path, text)
    assert main(["verify", "--config", cfg]) == 0
    report = json.loads(capsys.readouterr().out)
    entry = {c["check"]: c for c in report["checks"]}["quasienergy_reduction"]
    assert entry["pass"] is True
    assert entry["value"] < 1e-12


def test_verify_coarse_grid_fails_with_grid_diagnostics(tmp_path, capsys):
    cfg = write_config(tmp_path, STANDARD_CONFIG + "n_points = 32\n")
    assert main(["verify", "--config", cfg]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is False
    failed = [c for c in report["checks"] if not c["pass"]]
    assert failed
    assert any("error" in c for c in failed)


def test_verify_output_is_byte_stable(tmp_path, capsys):
    cfg = write_config(tmp_path)
    main(["verify", "--config", cfg])
    first = capsys.readouterr().out
    main(["verify", "--config", cfg])
    second = capsys.readouterr().out
    assert first == second


def test_states_output_is_byte_stable(tmp_path):
    cfg = write_config(tmp_path)
    main(["states", "--config", cfg, "--n-max", "1", "--out-dir", str(tmp_path / "s1")])
    main(["states", "--config", cfg, "--n-max", "1", "--out-dir", str(tmp_path / "s2")])
    for name in ("state_n0.csv", "state_n1.csv", "states.json"):
        assert (tmp_path / "s1" / name).read_bytes() == (tmp_path / "s2" / name).read_bytes()


def test_thread_cap_env_var(tmp_path):
    cfg = write_config(tmp_path)
    env = {**os.environ, "HARTREE_EXACT_THREADS": "1"}
    run = subprocess.run(
        [sys.executable, "-m", "hartree_exact.cli", "verify", "--config", cfg],
        env=env, capture_output=True, text=True,
    )
    assert run.returncode == 0
    assert json.loads(run.stdout)["pass"] is True

    env["HARTREE_EXACT_THREADS"] = "zebra"
    run = subprocess.run(
        [sys.executable, "-m", "hartree_exact.cli", "verify", "--config", cfg],
        env=env, capture_output=True, text=True,
    )
    assert run.returncode == 4
    assert "HARTREE_EXACT_THREADS" in run.stderr
