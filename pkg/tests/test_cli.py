import csv
from dataclasses import fields

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphereflow.cli import main
from sphereflow.config import ConfigError, RunConfig, format_config, parse_config
from sphereflow.solver import DiagnosticsRecord

FULL = """\
N = 3
R = 1.0
J = 64
a = 1.0
gamma = 1.4
mu = 1.0
lambda = 0.0
profile = polynomial-bump
amplitude = 0.001
rho_ref = 1.0
t_end = 0.05
output_interval = 0.01
cfl = 0.4
splitting = lie
seed = 3
delta = 0.001
eps = 0.1
repr_tol = 0.001
volume_tol = 1e-08
energy_tol = 1e-08
"""


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestParseConfig:
    def test_full_file_echoes_values(self):
        cfg = parse_config(FULL)
        assert cfg.N == 3 and cfg.J == 64 and cfg.lam == 0.0 and cfg.seed == 3
        assert cfg.profile == "polynomial-bump"
        assert parse_config(format_config(cfg)) == cfg

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# header\n\nJ = 40   # cells\n")
        assert cfg.J == 40

    def test_gamma_constraint(self):
        with pytest.raises(ConfigError, match="gamma") as info:
            parse_config("gamma = 0.9\n")
        assert info.value.key == "gamma"

    def test_viscosity_constraint(self):
        with pytest.raises(ConfigError, match="lambda") as info:
            parse_config("mu = 1\nlambda = -1\nN = 3\n")
        assert "-0.5" in str(info.value)

    def test_unknown_key_has_line_number(self):
        with pytest.raises(ConfigError, match="line 2") as info:
            parse_config("J = 40\nfoo = 1\n")
        assert info.value.line == 2

    def test_syntax_and_type_errors(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("J 40\n")
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("J = forty\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("J = 40\nJ = 50\n")

    @pytest.mark.parametrize("text,key", [("J = 16", "J"), ("t_end = 0", "t_end"), ("N = 4", "N")])
    def test_range_constraints(self, text, key):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.key == key

    @settings(max_examples=50, deadline=None)
    @given(
        J=st.integers(32, 4096),
        gamma=st.floats(1.001, 5.0),
        mu=st.floats(0.01, 10.0),
        t_end=st.floats(1e-6, 10.0),
    )
    def test_round_trip(self, J, gamma, mu, t_end):
        cfg = RunConfig(J=J, gamma=gamma, mu=mu, t_end=t_end)
        assert parse_config(format_config(cfg)) == cfg

    def test_all_fields_formatted(self):
        text = format_config(RunConfig())
        assert len(text.splitlines()) == len(fields(RunConfig))


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(FULL)
    return path


class TestCli:
    def test_ckn_instance_feasible(self, capsys, tmp_path):
        assert main(["ckn-check", "--out", str(tmp_path)]) == 0
        assert "feasible" in capsys.readouterr().out

    def test_ckn_infeasible_exit_one(self, capsys, tmp_path):
        assert main(["ckn-check", "--gamma", "1", "--out", str(tmp_path)]) == 1
        assert "ckn_feasibility: balance" in capsys.readouterr().err

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main(["bogus"])
        assert info.value.code == 2

    def test_bad_config_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("gamma = 0.5\n")
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
        assert "gamma" in capsys.readouterr().err

    def test_simulate_static(self, tmp_path):
        cfg = tmp_path / "static.cfg"
        cfg.write_text("profile = constant\nJ = 32\nt_end = 0.02\noutput_interval = 0.005\n")
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        rows = _read(tmp_path / "diagnostics.csv")
        assert tuple(rows[0]) == DiagnosticsRecord.COLUMNS
        E = np.array([float(r[1]) for r in rows[1:]])
        assert len(E) >= 4
        assert np.ptp(E) <= 1e-12 * E[0]

    def test_simulate_deterministic(self, cfg_file, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["simulate", "--config", str(cfg_file), "--out", str(out), "--seed", "9"]) == 0
        for name in ("diagnostics.csv", "trajectory.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_uniqueness_zero_delta(self, tmp_path):
        cfg = tmp_path / "u.cfg"
        cfg.write_text("J = 32\nt_end = 0.02\ndelta = 0\n")
        assert main(["uniqueness-run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        rows = _read(tmp_path / "diff.csv")
        assert rows[0] == ["t", "lam_norm2", "theta_norm2", "flux_diff_norm2", "gronwall_rhs"]
        assert all(float(x) == 0.0 for r in rows[1:] for x in r[1:4])

    def test_convergence(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("J = 32\nt_end = 0.25\namplitude = 0.1\n")
        assert main(["convergence", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        rows = _read(tmp_path / "convergence.csv")
        assert rows[0] == ["J", "n_steps", "err_v", "err_u"]
        assert [int(r[0]) for r in rows[1:]] == [32, 64]

    def test_verify_estimates_reports_radial_line(self, tmp_path, capsys):
        cfg = tmp_path / "e.cfg"
        cfg.write_text("N = 2\n")
        code = main(["verify-estimates", "--config", str(cfg), "--out", str(tmp_path), "--count", "200"])
        rows = dict(_read(tmp_path / "estimates.csv")[1:])
        assert rows["linf_failures"] == "0"
        assert rows["lp_over_r_failures"] == "0"
        # the radial line fails for steep boundary layers (see README)
        assert (code == 1) == (rows["lp_radial_failures"] != "0")
