import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mcfreq import DiffusionChannel, PassiveMembrane, eval_channel
from mcfreq.cli import SWEEP_HEADER, main, parse_config, ConfigError, sweep_rows
from mcfreq.pde import fit_sinusoid, settling_time

from conftest import K, MU, MU_HAT


def write_config(tmp_path, L=100.0, name="cfg.json", **extra):
    cfg = {"mu_um2_per_s": MU, "L_um": L, "k_per_s": K, "mu_hat_um_per_s": MU_HAT}
    cfg.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    assert lines[-1] == ""
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:-1]])
    return text, header, data


class TestConfig:
    def test_defaults(self):
        cfg = parse_config(json.dumps({"mu_um2_per_s": 1, "L_um": 2, "k_per_s": 3, "mu_hat_um_per_s": 0}))
        assert (cfg.wmin, cfg.wmax, cfg.points) == (1e-4, 1e1, 400)
        assert cfg.sim is None and cfg.mu_hat == 0

    def test_bad_json_line(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config('{\n "mu_um2_per_s": 1,\n "L_um": ,\n}')

    def test_negative_field_line(self):
        text = '{\n "mu_um2_per_s": 490,\n "L_um": -5,\n "k_per_s": 0.05,\n "mu_hat_um_per_s": 9.9\n}'
        with pytest.raises(ConfigError, match="line 3: field 'L_um'"):
            parse_config(text)

    def test_unknown_field(self):
        text = '{"mu_um2_per_s": 490, "L_um": 5, "k_per_s": 0.05, "mu_hat_um_per_s": 9.9, "x": 1}'
        with pytest.raises(ConfigError, match="unknown field 'x'"):
            parse_config(text)

    def test_sweep_order(self):
        text = json.dumps({"mu_um2_per_s": 490, "L_um": 5, "k_per_s": 0.05, "mu_hat_um_per_s": 9.9,
                           "sweep": {"wmin": 1.0, "wmax": 0.1, "points": 10}})
        with pytest.raises(ConfigError, match="wmin < wmax"):
            parse_config(text)

    def test_missing_field(self):
        with pytest.raises(ConfigError, match="k_per_s"):
            parse_config('{"mu_um2_per_s": 490, "L_um": 5, "mu_hat_um_per_s": 9.9}')


class TestBode:
    def test_table1(self, tmp_path):
        out = tmp_path / "bode.csv"
        assert main(["bode", write_config(tmp_path), str(out)]) == 0
        text, header, data = read_csv(out)
        assert tuple(header) == SWEEP_HEADER
        assert len(data) == 400
        assert np.all(np.diff(data[:, 0]) > 0)
        assert abs(data[0, 1]) < 0.1
        # each value is rounded to 9 significant digits (relative error <= 5e-9)
        parts = data[:, 2] + data[:, 3] + data[:, 4]
        tol = 1e-9 + 5e-9 * np.abs(data[:, 1:5]).sum(axis=1)
        assert np.all(np.abs(data[:, 1] - parts) <= tol)
        for line in text.split("\n")[1:-1]:
            for field in line.split(","):
                assert field == f"{float(field):.9g}"

    def test_identity_before_serialisation(self, tmp_path):
        cfg = parse_config(open(write_config(tmp_path)).read())
        for w, ch, g1, gff, gd, _ in sweep_rows(cfg):
            assert abs(ch - (g1 + gff + gd)) < 1e-9

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["bode", cfg, str(a)])
        main(["bode", cfg, str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_fig5_ordering(self, tmp_path):
        cut = {}
        for L in (10.0, 100.0, 1000.0):
            out = tmp_path / f"bode{int(L)}.csv"
            main(["bode", write_config(tmp_path, L, name=f"c{int(L)}.json"), str(out)])
            _, _, data = read_csv(out)
            cut[L] = data[np.argmax(data[:, 1] <= -6.0), 0]
        assert cut[10.0] > cut[100.0] > cut[1000.0]

    def test_bad_config_exit(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{\n  \"mu_um2_per_s\": oops\n}")
        assert main(["bode", str(p), str(tmp_path / "x.csv")]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_file_exit(self, tmp_path):
        assert main(["bode", str(tmp_path / "nope.json"), str(tmp_path / "x.csv")]) == 2


class TestCutoff:
    def run(self, capsys, *args):
        code = main(["cutoff", *args])
        return code, capsys.readouterr().out

    def test_transmission(self, tmp_path, capsys):
        code, out = self.run(capsys, write_config(tmp_path), "--system", "transmission")
        assert code == 0
        assert float(out.split(":")[1].split()[0]) == pytest.approx(0.0866, rel=5e-3)

    def test_diffusion(self, tmp_path, capsys):
        code, out = self.run(capsys, write_config(tmp_path), "--system", "diffusion")
        assert code == 0 and float(out.split(":")[1].split()[0]) == pytest.approx(0.2032, rel=5e-3)

    def test_six_significant_digits(self, tmp_path, capsys):
        _, out = self.run(capsys, write_config(tmp_path), "--system", "diffusion")
        assert out.startswith("diffusion cutoff: 0.203097 rad/s")

    def test_channel_long(self, tmp_path, capsys):
        code, out = self.run(capsys, write_config(tmp_path, 1000.0), "--system", "channel")
        assert code == 0 and "DiffusionLimited" in out

    def test_channel_short(self, tmp_path, capsys):
        code, out = self.run(capsys, write_config(tmp_path, 100.0))
        assert code == 0 and "BoundaryLimited" in out

    def test_no_crossing_exit(self, tmp_path, capsys):
        # G_FF of a 10 um channel never dips to -6 dB
        code, _ = self.run(capsys, write_config(tmp_path, 10.0), "--system", "flux-feedback")
        assert code == 4

    @pytest.mark.parametrize("system", ["boundary", "flux-feedback"])
    def test_boundary_systems(self, tmp_path, capsys, system):
        code, out = self.run(capsys, write_config(tmp_path), "--system", system)
        assert code == 0 and float(out.split(":")[1].split()[0]) < 0.0866


class TestDesign:
    def test_example(self, capsys):
        assert main(["design", "--mu", "490", "--omega-b", "0.06"]) == 0
        assert float(capsys.readouterr().out.split(":")[1].split()[0]) == pytest.approx(183.5, rel=5e-3)

    def test_inverse(self, capsys):
        main(["design", "--mu", "490", "--omega-b", "0.2032"])
        assert float(capsys.readouterr().out.split(":")[1].split()[0]) == pytest.approx(100.0, rel=5e-3)

    @pytest.mark.parametrize("args", [["--mu", "490", "--omega-b", "0"], ["--mu", "-1", "--omega-b", "1"]])
    def test_nonpositive(self, args):
        assert main(["design", *args]) == 2


class TestSimulate:
    def test_step(self, tmp_path):
        cfg = write_config(tmp_path, sim={"nx": 20, "t_end": 20 * 100.0**2 / MU})
        out = tmp_path / "step.csv"
        assert main(["simulate", cfg, "--input", "step", "--stride", "100", "--out", str(out)]) == 0
        text, header, data = read_csv(out)
        assert header == ["t_s", "v", "u_L"]
        assert data[-1, 2] == pytest.approx(1.0, rel=5e-3)

    def test_sine(self, tmp_path):
        chan, mem = DiffusionChannel(MU, 100.0), PassiveMembrane(K, MU_HAT)
        w = 0.01
        t_end = settling_time(chan, mem) + 8 * 2 * math.pi / w
        cfg = write_config(tmp_path, sim={"nx": 16, "t_end": t_end})
        out = tmp_path / "sine.csv"
        assert main(["simulate", cfg, "--input", "sine", "--omega", str(w), "--stride", "20", "--out", str(out)]) == 0
        _, _, data = read_csv(out)
        keep = data[:, 0] >= settling_time(chan, mem)
        fit = fit_sinusoid(data[keep, 0], data[keep, 2], w, 1.0)
        assert fit.amplitude_ratio == pytest.approx(abs(eval_channel(mem.boundary_layer(), chan, 1j * w)), rel=0.02)

    def test_zero_amplitude(self, tmp_path):
        cfg = write_config(tmp_path, sim={"nx": 16, "t_end": 30})
        out = tmp_path / "z.csv"
        assert main(["simulate", cfg, "--amplitude", "0", "--out", str(out)]) == 0
        _, _, data = read_csv(out)
        assert not data[:, 1:].any()

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, sim={"nx": 16, "t_end": 30})
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", cfg, "--input", "impulse", "--out", str(a)])
        main(["simulate", cfg, "--input", "impulse", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_missing_sim_block(self, tmp_path):
        assert main(["simulate", write_config(tmp_path), "--out", str(tmp_path / "x.csv")]) == 2

    def test_unstable_dt_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, sim={"nx": 16, "t_end": 30, "dt": 1.0})
        assert main(["simulate", cfg, "--out", str(tmp_path / "x.csv")]) == 2

    def test_sine_needs_omega(self, tmp_path):
        cfg = write_config(tmp_path, sim={"nx": 16, "t_end": 3000})
        assert main(["simulate", cfg, "--input", "sine", "--out", str(tmp_path / "x.csv")]) == 2


class TestValidate:
    def test_empty(self, tmp_path, capsys):
        assert main(["validate", write_config(tmp_path), "--omegas"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 2  # header and summary

    def test_infeasible(self, tmp_path, capsys):
        assert main(["validate", write_config(tmp_path), "--omegas", "1000"]) == 6
        assert "SimulationConfigError" in capsys.readouterr().out

    @pytest.mark.slow
    def test_table1(self, tmp_path, capsys):
        code = main(["validate", write_config(tmp_path), "--omegas", "3e-3", "1e-2", "3e-2", "1e-1"])
        out = capsys.readouterr().out
        assert code == 0, out
        assert out.count(",ok") == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "mcfreq", "design", "--mu", "490", "--omega-b", "0.06"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "max distance" in proc.stdout
