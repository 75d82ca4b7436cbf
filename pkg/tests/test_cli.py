"""CLI behavior: listing, tables, verification runs, exit codes, determinism."""

import json
import math

import pytest

from tubecomp import cli
from tubecomp.cli import ConfigError, cmd_scenario_list, main, parse_radii


FAST_CONFIG = {
    "name": "cli_flat",
    "manifold": {"name": "flat_torus", "n": 4},
    "submanifold": {"name": "sub_torus", "axes": [0],
                    "offset": [0.0, 1.0, 2.0, 3.0]},
    "parameters": {"k": 1, "H": 0.0, "p": 4.0},
    "radii": [0.4],
    "quadrature": {"base_resolution": 4, "fiber_resolution": 2},
    "declared": {"minimal": True, "totally_geodesic": True,
                 "validity_radius": 3.0, "rho_exact": {"1": 0.0, "2": 0.0}},
    "checks": ["hk"],
    "seed": 7,
}


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestScenarioList:
    def test_contains_required_names(self, capsys):
        assert main(["scenario-list"]) == 0
        out = capsys.readouterr().out
        for name in ("flat_t4_circle", "s3_great_circle", "sn_equator",
                     "s2xs2_factor", "bump_torus"):
            assert name in out

    def test_deterministic_ordering(self):
        assert cmd_scenario_list() == cmd_scenario_list()
        lines = cmd_scenario_list().splitlines()
        names = [ln.split(":")[0] for ln in lines]
        assert names == sorted(names)

    def test_empty_registry(self):
        assert cmd_scenario_list(registry={}) == ""


class TestParseRadii:
    def test_grid(self):
        assert parse_radii("0:1:3") == (0.0, 0.5, 1.0)

    def test_single(self):
        assert parse_radii("0.7") == (0.7,)

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_radii("1:2")


class TestTubeVolume:
    def test_flat_table(self, tmp_path, capsys):
        cfg = write_config(tmp_path, FAST_CONFIG)
        code = main(["tube-volume", "--config", cfg, "--radii", "0:0.5:2"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = lines[0].split(",")
        assert header[:4] == ["scenario", "r", "value", "error_estimate"]
        row0 = lines[1].split(",")
        assert float(row0[2]) == 0.0
        row1 = lines[2].split(",")
        assert float(row1[2]) == pytest.approx(math.pi**2 / 3.0, rel=1e-9)

    def test_schema_error_names_field(self, tmp_path, capsys):
        bad = dict(FAST_CONFIG)
        bad["raduis"] = [0.5]
        cfg = write_config(tmp_path, bad)
        code = main(["tube-volume", "--config", cfg])
        assert code == 2
        err = capsys.readouterr().err
        assert "raduis" in err

    def test_unknown_submanifold_param_named(self, tmp_path, capsys):
        bad = json.loads(json.dumps(FAST_CONFIG))
        bad["submanifold"]["wobble"] = 3
        cfg = write_config(tmp_path, bad)
        assert main(["tube-volume", "--config", cfg]) == 2
        assert "wobble" in capsys.readouterr().err

    def test_csv_file_output(self, tmp_path):
        cfg = write_config(tmp_path, FAST_CONFIG)
        out = tmp_path / "out"
        out.mkdir()
        code = main(["tube-volume", "--config", cfg, "--out", str(out)])
        assert code == 0
        text = (out / "tube_volume.csv").read_text()
        assert text.startswith("scenario,r,value")

    def test_product_manifold_config(self, tmp_path, capsys):
        cfg_data = {
            "name": "product_point",
            "manifold": {"name": "product",
                         "a": {"name": "sphere", "n": 2},
                         "b": {"name": "sphere", "n": 2},
                         "rho_exact": {"1": 0.0, "2": 0.0, "3": 1.0}},
            "submanifold": {"name": "point", "location": [0.1, 0.2, 0.0, 0.3]},
            "parameters": {"k": 1, "H": 0.0, "p": 5.0},
            "radii": [0.3],
            "quadrature": {"fiber_resolution": 2, "t_nodes_per_panel": 8},
        }
        cfg = write_config(tmp_path, cfg_data, "prod.json")
        assert main(["tube-volume", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "product_point" in out

    def test_warped_product_config(self, tmp_path, capsys):
        cfg_data = {
            "name": "warped",
            "manifold": {"name": "warped_product", "fiber_dim": 2,
                         "warp": "constant", "base_interval": [-1.0, 1.0]},
            "submanifold": {"name": "sub_torus", "axes": [1],
                            "offset": [0.0, 0.0, 1.0]},
            "parameters": {"k": 1, "H": 0.0, "p": 4.0},
            "radii": [0.2],
            "quadrature": {"base_resolution": 4, "fiber_resolution": 2,
                           "t_nodes_per_panel": 8},
        }
        cfg = write_config(tmp_path, cfg_data, "warp.json")
        assert main(["tube-volume", "--config", cfg]) == 0
        assert "warped" in capsys.readouterr().out

    def test_json_file_output(self, tmp_path):
        cfg = write_config(tmp_path, FAST_CONFIG)
        out = tmp_path / "out"
        out.mkdir()
        code = main(["tube-volume", "--config", cfg, "--out", str(out),
                     "--format", "json"])
        assert code == 0
        rows = json.loads((out / "tube_volume.json").read_text())
        assert rows[0]["scenario"] == "cli_flat"
        assert float(rows[0]["value"]) >= 0.0


class TestVerify:
    def test_pass_run_writes_reports(self, tmp_path, capsys):
        cfg = write_config(tmp_path, FAST_CONFIG)
        out = tmp_path / "reports"
        out.mkdir()
        code = main(["verify", "--config", cfg, "--out", str(out)])
        assert code == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["ok"] is True
        assert payload["n_failures"] == 0
        assert (out / "report.csv").read_text().startswith("scenario,check")
        assert "PASS" in capsys.readouterr().out

    def test_missing_out_dir_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, FAST_CONFIG)
        code = main(["verify", "--config", cfg, "--out",
                     str(tmp_path / "nope")])
        assert code == 2
        assert "I/O error" in capsys.readouterr().err

    def test_induced_violation_exit_1(self, tmp_path, monkeypatch):
        from tubecomp import verification

        original = verification.TubeSampler.volume

        def inflated(self, r):
            res = original(self, r)
            res.value *= 1.1
            return res

        monkeypatch.setattr(verification.TubeSampler, "volume", inflated)
        cfg = write_config(tmp_path, FAST_CONFIG)
        assert main(["verify", "--config", cfg]) == 1

    def test_unknown_scenario_exit_2(self, capsys):
        assert main(["verify", "--scenario", "not_a_scenario"]) == 2

    def test_byte_identical_reports(self, tmp_path):
        cfg = write_config(tmp_path, FAST_CONFIG)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            out.mkdir()
            assert main(["verify", "--config", cfg, "--out", str(out),
                         "--seed", "5"]) == 0
            outs.append(((out / "report.json").read_bytes(),
                         (out / "report.csv").read_bytes()))
        assert outs[0] == outs[1]
