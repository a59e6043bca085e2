"""CLI contract: config validation, exit codes, determinism, schemas."""

import json

import pytest

from bhflow.cli import main

E1_CONFIG = {"surface": "CP1xCP1", "t": 0.1, "samples": 5, "seed": 11}
E2_CONFIG = {"surface": "CP2", "t": 0.1, "samples": 4, "seed": 11}


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def strip_timestamp(path):
    doc = json.loads(open(path).read())
    doc.pop("timestamp")
    return json.dumps(doc, sort_keys=True)


class TestConfigValidation:
    def test_unknown_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**E1_CONFIG, "bogus": 1})
        assert main(["verify", "--config", cfg]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_bad_coefficient_count(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"surface": "CP2", "section": [[1.0, 0.0]] * 8})
        assert main(["verify", "--config", cfg]) == 2
        assert "section" in capsys.readouterr().err

    def test_bad_pair_shape(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"surface": "CP2", "section": [[1.0, 0.0]] * 9 + [[1.0]]}
        )
        assert main(["verify", "--config", cfg]) == 2
        assert "section[9]" in capsys.readouterr().err

    def test_unknown_tolerance_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**E1_CONFIG, "tolerances": {"nope": 1.0}})
        assert main(["verify", "--config", cfg]) == 2
        assert "nope" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "absent.json")]) == 2

    def test_explicit_coefficients_accepted(self, tmp_path):
        fermat = [[0.0, 0.0]] * 10
        for i in (0, 6, 9):
            fermat[i] = [1.0, 0.0]
        cfg = write_config(
            tmp_path, {"surface": "CP2", "section": fermat, "samples": 3, "seed": 2}
        )
        out = str(tmp_path / "r.json")
        assert main(["verify", "--config", cfg, "--out", out]) == 0


class TestVerifyCommand:
    def test_default_e1_passes(self, tmp_path):
        cfg = write_config(tmp_path, E1_CONFIG)
        out = str(tmp_path / "report.json")
        assert main(["verify", "--config", cfg, "--out", out]) == 0
        doc = json.loads(open(out).read())
        assert doc["schema"] == "bhflow-report/1"
        assert doc["pass"] is True
        names = {row["name"] for row in doc["identities"]}
        assert {"twist_minus", "twist_plus", "f_conservation", "group_law"} <= names

    def test_unachievable_tolerance_fails(self, tmp_path):
        cfg = write_config(
            tmp_path, {**E1_CONFIG, "tolerances": {"twist_minus": 1e-20}}
        )
        assert main(["verify", "--config", cfg]) == 1

    def test_determinism(self, tmp_path):
        cfg = write_config(tmp_path, E1_CONFIG)
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(["verify", "--config", cfg, "--out", a]) == 0
        assert main(["verify", "--config", cfg, "--out", b]) == 0
        assert strip_timestamp(a) == strip_timestamp(b)
        # a different seed changes the report
        assert main(["verify", "--config", cfg, "--seed", "99", "--out", b]) == 0
        assert strip_timestamp(a) != strip_timestamp(b)


class TestScanCommand:
    def test_default_window(self, tmp_path):
        cfg = write_config(tmp_path, {**E1_CONFIG, "t_values": [0.0, 0.05, 0.1]})
        out = str(tmp_path / "scan.json")
        assert main(["scan", "--config", cfg, "--samples", "4", "--out", out]) == 0
        doc = json.loads(open(out).read())
        assert doc["t_max"] > 0.0

    def test_zero_grid(self, tmp_path):
        cfg = write_config(tmp_path, {**E1_CONFIG, "t_values": [0.0]})
        out = str(tmp_path / "scan.json")
        assert main(["scan", "--config", cfg, "--samples", "3", "--out", out]) == 0
        assert json.loads(open(out).read())["t_max"] == 0.0

    def test_inverted_metric(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {**E1_CONFIG, "metric": "fubini-study-inverted", "t_values": [0.05, 0.1]},
        )
        out = str(tmp_path / "scan.json")
        assert main(["scan", "--config", cfg, "--samples", "3", "--out", out]) == 0
        doc = json.loads(open(out).read())
        assert doc["t_max"] == 0.0
        assert doc["first_failure"]["t"] == 0.05


class TestExportCommand:
    def test_grid_shape_and_schema(self, tmp_path):
        cfg = write_config(tmp_path, E1_CONFIG)
        out = str(tmp_path / "grid.csv")
        assert main(["export", "--config", cfg, "--grid", "2", "--out", out]) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "# schema: bhflow-grid/1"
        assert lines[1].startswith("re_z1,im_z1,re_z2,im_z2,sigma_norm_sq,f,p,")
        assert len(lines) == 2 + 4  # schema + header + grid_n^2 rows

    def test_p_column_at_t_zero(self, tmp_path):
        cfg = write_config(tmp_path, {**E1_CONFIG, "t": 0.0})
        out = str(tmp_path / "grid.csv")
        assert main(["export", "--config", cfg, "--grid", "2", "--out", out]) == 0
        for line in open(out).read().splitlines()[2:]:
            assert float(line.split(",")[6]) == pytest.approx(1.0, abs=1e-12)

    def test_quaternion_identity_rowwise(self, tmp_path):
        cfg = write_config(tmp_path, E1_CONFIG)
        out = str(tmp_path / "grid.csv")
        assert main(["export", "--config", cfg, "--grid", "3", "--out", out]) == 0
        for line in open(out).read().splitlines()[2:]:
            cols = [float(x) for x in line.split(",")]
            p, phi_sq = cols[6], cols[8]
            assert abs(phi_sq - 4.0 * (1.0 - p * p)) <= 1e-7

    def test_unwritable_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path, E1_CONFIG)
        bad = str(tmp_path / "no" / "such" / "dir" / "grid.csv")
        assert main(["export", "--config", cfg, "--grid", "2", "--out", bad]) == 2


class TestCurveCommand:
    def test_fermat_translation(self, tmp_path):
        cfg = write_config(tmp_path, E2_CONFIG)
        out = str(tmp_path / "curve.json")
        assert main(["curve", "--config", cfg, "--out", out]) == 0
        doc = json.loads(open(out).read())
        disp = doc["curve"]["displacement_re"]
        assert all(abs(d + 0.1) <= 1e-6 for d in disp)
        assert doc["curve"]["spread"] <= 1e-6

    def test_degenerate_divisor_exits_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path, E1_CONFIG)
        assert main(["curve", "--config", cfg]) == 1
        assert "degenerate" in capsys.readouterr().err


class TestLimitCommand:
    def test_default_sequence(self, tmp_path):
        cfg = write_config(tmp_path, {**E1_CONFIG, "point": [0.4, 0.2, -0.3, 0.5]})
        out = str(tmp_path / "limit.json")
        assert main(["limit", "--config", cfg, "--out", out]) == 0
        doc = json.loads(open(out).read())
        assert doc["pass"] is True
        assert len(doc["limit"]["rows"]) == 4

    def test_single_t_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**E1_CONFIG, "t_values": [0.1]})
        assert main(["limit", "--config", cfg]) == 2
        assert "t_values" in capsys.readouterr().err

    def test_non_halving_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {**E1_CONFIG, "t_values": [0.3, 0.2, 0.1]})
        assert main(["limit", "--config", cfg]) == 2


def test_exit_codes_are_contractual(tmp_path):
    # the three observed codes are exactly {0, 1, 2}
    cfg_ok = write_config(tmp_path, E1_CONFIG, "ok.json")
    cfg_bad = write_config(tmp_path, {"nope": 1}, "bad.json")
    cfg_fail = write_config(
        tmp_path, {**E1_CONFIG, "tolerances": {"twist_minus": 1e-20}}, "fail.json"
    )
    codes = {
        main(["verify", "--config", cfg_ok, "--out", str(tmp_path / "x.json")]),
        main(["verify", "--config", cfg_fail, "--out", str(tmp_path / "y.json")]),
        main(["verify", "--config", cfg_bad]),
    }
    assert codes == {0, 1, 2}
