import json
import math

import pytest

from cuspkit.cli import ConfigError, main, read_config, resolve
from cuspkit.modular import ModeFunction, norm


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def manifest(path):
    return json.loads((path / "manifest.json").read_text())


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 1
        assert "usage" in err

    def test_missing_subcommand(self, capsys):
        assert run(capsys)[0] == 1

    def test_unknown_key(self, capsys, tmp_path):
        code, _, err = run(capsys, "alpha", "--out", str(tmp_path), "--set", "bogus=1")
        assert code == 1 and "bogus" in err

    def test_bad_value(self, capsys, tmp_path):
        assert run(capsys, "alpha", "--out", str(tmp_path), "--set", "T=abc")[0] == 1

    def test_nonpositive_tol(self, capsys, tmp_path):
        assert run(capsys, "alpha", "--out", str(tmp_path), "--tol", "0")[0] == 1

    def test_io_failure(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run(capsys, "alpha", "--out", str(blocker / "sub"))
        assert code == 3 and "I/O" in err

    def test_missing_config_file(self, capsys, tmp_path):
        assert run(capsys, "alpha", "--config", str(tmp_path / "none.cfg"))[0] == 1

    def test_broken_normalization(self, capsys, tmp_path):
        code, out, _ = run(capsys, "transform", "--out", str(tmp_path), "--set", "roundtrip=false",
                           "--set", "broken_normalization=true")
        assert code == 2
        assert "FAIL poly8_R1_diagram" in out
        rows = (tmp_path / "transform_residuals.csv").read_text().splitlines()
        ratios = [float(r.split(",")[2]) for r in rows[1:]]
        assert all(abs(x - 2.0) <= 1e-6 for x in ratios)

    def test_transform_without_round_trip(self, capsys, tmp_path):
        out_dir = tmp_path / "new" / "dir"
        code, _, _ = run(capsys, "transform", "--out", str(out_dir), "--set", "roundtrip=false")
        assert code == 0
        assert manifest(out_dir)["passed"] is True


class TestCommands:
    def test_alpha(self, capsys, tmp_path):
        code, out, _ = run(capsys, "alpha", "--out", str(tmp_path), "--set", "p=3")
        assert code == 0 and "PASS alpha_close" in out
        m = manifest(tmp_path)
        assert abs(m["results"]["alpha"] - 1 / (4 * math.pi)) <= 0.01 / (4 * math.pi)
        assert m["checks"]["s_independent"] is True

    def test_manifest_fields(self, capsys, tmp_path):
        run(capsys, "alpha", "--out", str(tmp_path), "--seed", "7")
        m = manifest(tmp_path)
        assert {"command", "config", "seed", "tolerance", "versions", "outputs", "checks",
                "passed", "runtime_s"} <= set(m)
        assert m["seed"] == 7 and m["tolerance"] == 0.01
        assert {"numpy", "scipy", "python", "backend"} <= set(m["versions"])

    def test_csv_format(self, capsys, tmp_path):
        run(capsys, "alpha", "--out", str(tmp_path))
        raw = (tmp_path / "alpha.csv").read_bytes()
        assert raw.startswith(b"T,mass,ratio\n") and b"\r" not in raw

    def test_deterministic_rerun(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert run(capsys, "lemma2", "--out", str(d), "--seed", "4")[0] == 0
        for name in ("lemma2.json", "lemma2_pushforward.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_lemma2_from_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# mixed ambient\nambient_real = 1\nambient_int = 1\n"
                       "generators = 0.693147, 1; 0.5, 0\nweyl = sign\n")
        code, out, _ = run(capsys, "lemma2", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert code == 0 and "PASS pushforward_zero" in out

    def test_lemma2_dimension_mismatch(self, capsys, tmp_path):
        assert run(capsys, "lemma2", "--out", str(tmp_path), "--set", "generators=1,0,0")[0] == 1

    def test_cusp_round_trip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "cusp", "--out", str(tmp_path))
        assert code == 0 and "PASS constant_term_zero" in out
        g = ModeFunction.from_json(tmp_path / "cusp_output.json")
        assert g.mode_set() == {1, 2}
        assert norm(g) == pytest.approx(manifest(tmp_path)["results"]["output_norm"], rel=1e-15)

    def test_cusp_floor_too_low(self, capsys, tmp_path):
        code, _, err = run(capsys, "cusp", "--out", str(tmp_path), "--set", "floor=1.5")
        assert code == 1 and "R > p" in err

    def test_smallvalue(self, capsys, tmp_path):
        code, out, _ = run(capsys, "smallvalue", "--out", str(tmp_path), "--set", "samples=20000")
        assert code == 0 and "PASS arcsin_oracle" in out

    def test_whittaker(self, capsys, tmp_path):
        code, out, _ = run(capsys, "whittaker", "--out", str(tmp_path))
        assert code == 0 and "PASS unfolding" in out and "PASS siegel_positive" in out

    def test_weyl_from_file(self, capsys, tmp_path):
        from cuspkit.testfn import synthetic_weyl_list
        eigs, vol = synthetic_weyl_list(20000, 40.0, seed=2)
        eigs.to_csv(tmp_path / "eigs.csv")
        code, _, _ = run(capsys, "weyl", "--out", str(tmp_path / "o"),
                         "--set", f"eigenvalues={tmp_path / 'eigs.csv'}", "--set", f"volume={vol}",
                         "--set", "T=400,900,1600", "--set", "eps=0", "--tol", "0.05")
        assert code == 0

    def test_weyl_file_needs_volume(self, capsys, tmp_path):
        (tmp_path / "e.csv").write_text("lambda\n1.0\n")
        code = run(capsys, "weyl", "--out", str(tmp_path), "--set", f"eigenvalues={tmp_path / 'e.csv'}")[0]
        assert code == 1


class TestConfig:
    def test_read_config(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("a = 1  # note\n\n b=x = y\n")
        assert read_config(p) == {"a": "1", "b": "x = y"}

    def test_read_config_errors(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("novalue\n")
        with pytest.raises(ConfigError):
            read_config(p)

    def test_override_order(self):
        cfg = resolve("alpha", {"tol": "0.5", "T": "1, 4"}, {"tol": "0.1", "seed": None})
        assert cfg["tol"] == 0.1 and cfg["T"] == [1.0, 4.0] and cfg["seed"] == 0

    def test_help_lists_keys(self, capsys):
        with pytest.raises(SystemExit):
            main(["cusp", "--help"])
        assert "window_order" in capsys.readouterr().out
