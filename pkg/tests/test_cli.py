import csv
import io
import json

import pytest

from compressible_bl.cli import (
    REPORT_HEADER,
    ConfigError,
    RunConfig,
    main,
    parse_config_text,
    sweep_configs,
)

# mpmath root of F(u) = 0.1 with 2 i0 = 1
U_AT_CS_01 = 0.1000803769668413


def run(capsys, *argv):
    code = main([*argv, "--quiet"])
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConfig:
    def test_sections_and_sweep(self):
        cfg = parse_config_text(
            "[flow]\nU = 0.2\ndelta = 0.3\n[run]\ngrid = 11\nseries_order = 4\n"
            "[sweep]\nU = 0, 0.1, 0.2\nc = 1, 2\n"
        )
        assert (cfg.U, cfg.delta, cfg.grid, cfg.series_order) == (0.2, 0.3, 11, 4)
        assert cfg.sweep == {"U": (0.0, 0.1, 0.2), "c": (1.0, 2.0)}
        tuples = sweep_configs(cfg)
        assert [(t.U, t.c) for t in tuples] == [(0.0, 1.0), (0.0, 2.0), (0.1, 1.0), (0.1, 2.0), (0.2, 1.0), (0.2, 2.0)]

    @pytest.mark.parametrize(
        "text",
        ["[flow]\nbogus = 1\n", "[nowhere]\nx = 1\n", "[flow]\nU = fast\n", "[sweep]\nformat = csv, json\n", "not an ini"],
    )
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    @pytest.mark.parametrize(
        "changes",
        [{"grid": 4}, {"series_order": 17}, {"format": "xml"}, {"c1_exponent": "odd"}, {"sweep": {"U": ()}}],
    )
    def test_validate(self, changes):
        cfg = RunConfig(**changes)
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_sweep_size_bound(self):
        big = tuple(float(i) for i in range(1001))
        with pytest.raises(ConfigError, match="limit"):
            RunConfig(sweep={"U": big, "c": big}).validate()

    def test_dict_round_trip(self):
        cfg = RunConfig(U=0.2, grid=11, sweep={"c": (1.0, 2.0)})
        assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    def test_flag_overrides_file(self, tmp_path, capsys):
        conf = tmp_path / "run.ini"
        conf.write_text("[flow]\ndelta = 0.2\n[run]\ngrid = 9\n")
        code, out, _ = run(capsys, "solve", "--config", str(conf), "--grid", "7")
        assert code == 0
        rows = rows_of(out)
        assert len(rows) == 7 and float(rows[-1]["s"]) == 0.2


class TestSolve:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "solve")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 201
        assert list(rows[0]) == ["s", "z", "u", "du_ds"]
        assert (float(rows[0]["s"]), float(rows[0]["z"]), float(rows[0]["u"])) == (0.0, 0.0, 0.0)
        assert float(rows[0]["du_ds"]) == 1.0

    def test_value_at_cs_01(self, capsys):
        # delta c = 0.5, so z = 0.2 is the point with c s = 0.1
        code, out, _ = run(capsys, "solve", "--grid", "11", "--c", "1", "--i0", "0.5", "--delta", "0.5")
        row = rows_of(out)[2]
        assert float(row["z"]) == 0.2
        assert float(row["u"]) == pytest.approx(U_AT_CS_01, abs=1e-12)

    def test_saturation_exit(self, capsys):
        code, _, err = run(capsys, "solve", "--delta", "1.0", "--c", "1")
        assert code == 3 and "BeyondSaturation" in err

    def test_speed_bound_exit(self, capsys):
        code, _, err = run(capsys, "solve", "--U", "1.0", "--i0", "0.5")
        assert code == 2 and "SpeedExceedsEnergyBound" in err

    def test_bad_grid_exit(self, capsys):
        code, _, _ = run(capsys, "solve", "--grid", "3")
        assert code == 2

    def test_no_partial_file_on_failure(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        code, _, _ = run(capsys, "solve", "--delta", "2", "--out", str(out))
        assert code == 3 and not out.exists() and list(tmp_path.iterdir()) == []

    def test_json(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        assert run(capsys, "solve", "--grid", "5", "--format", "json", "--out", str(out))[0] == 0
        doc = json.loads(out.read_text())
        assert doc["columns"] == ["s", "z", "u", "du_ds"] and len(doc["rows"]) == 5


class TestCompare:
    def test_single_row_report(self, capsys):
        code, out, _ = run(capsys, "compare", "--grid", "21")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 1
        assert list(rows[0]) == REPORT_HEADER
        row = rows[0]
        assert float(row["sup_err_exact"]) == 0.0 and float(row["rms_err_exact"]) == 0.0
        assert row["error"] == ""

    def test_zero_speed_literal_equals_recomputed(self, capsys):
        _, out, _ = run(capsys, "compare", "--U", "0", "--grid", "21")
        row = rows_of(out)[0]
        assert row["sup_err_thm1_literal"] == row["sup_err_thm1_recomputed"]
        assert row["rms_err_thm1_literal"] == row["rms_err_thm1_recomputed"]

    def test_small_parameter_fixture(self, capsys):
        args = ["compare", "--delta", "0.01", "--c", "1", "--U", "0.1", "--i0", "0.5"]
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second
        row = rows_of(first)[0]
        # frozen from the first oracle-checked run (grid 201, series order 2)
        assert float(row["sup_err_thm1_literal"]) == pytest.approx(3.191999625574288e-05, rel=1e-9)
        assert float(row["sup_err_thm1_recomputed"]) == pytest.approx(1.3900948636694221e-05, rel=1e-6)
        assert float(row["sup_err_series"]) < 1e-12
        for short in ("thm1_literal", "thm1_recomputed", "series"):
            assert float(row[f"sup_err_{short}"]) < 1e-3
        # the quartic's wall slope 2U is unrelated to delta c, so it is far off here
        assert float(row["sup_err_quartic"]) > 1e-2
        ranks = [int(row[f"rank_{s}"]) for s in ("exact", "series", "thm1_recomputed", "thm1_literal", "quartic")]
        assert ranks == [1, 2, 3, 4, 5]

    def test_minimum_grid_low_confidence(self, capsys):
        code, out, _ = run(capsys, "compare", "--grid", "5")
        row = rows_of(out)[0]
        assert code == 0 and row["low_confidence"] == "true"
        assert rows_of(run(capsys, "compare", "--grid", "21")[1])[0]["low_confidence"] == "false"

    def test_json_config_echo(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert run(capsys, "compare", "--grid", "11", "--format", "json", "--out", str(out), "--U", "0.2")[0] == 0
        doc = json.loads(out.read_text())
        echoed = RunConfig.from_dict(doc["config"])
        assert echoed == RunConfig(U=0.2, grid=11, format="json", output=str(out))
        assert doc["ranking"][0] == "exact"
        assert doc["quartic"] == {"A": 0.4, "B": -0.0, "C": -0.4, "D": 0.2, "U": 0.2, "lambda": 0.0}
        assert {m["kind"] for m in doc["metrics"]} == {
            "exact", "quartic", "theorem1-literal", "theorem1-recomputed", "series-truncated",
        }

    def test_profiles_csv(self, tmp_path, capsys):
        prof = tmp_path / "prof.csv"
        assert run(capsys, "compare", "--grid", "11", "--profiles", str(prof))[0] == 0
        rows = rows_of(prof.read_text())
        assert len(rows) == 11
        assert list(rows[0]) == [
            "z", "s", "u_exact", "u_quartic", "u_thm1_literal", "u_thm1_recomputed", "u_series",
            "abs_err_quartic", "abs_err_thm1_literal", "abs_err_thm1_recomputed", "abs_err_series",
        ]

    def test_out_of_range_approximant_noted(self, capsys):
        # literal form overshoots sqrt(2 i0) at the edge for this set
        _, out, _ = run(capsys, "compare", "--U", "0.95", "--delta", "0.85", "--grid", "21")
        row = rows_of(out)[0]
        assert row["residual_sup_thm1_literal"] == ""
        assert "thm1_literal: exceeds energy bound" in row["note"]


class TestSweep:
    def test_single_tuple_matches_compare(self, capsys):
        _, compare_out, _ = run(capsys, "compare", "--grid", "11")
        _, sweep_out, _ = run(capsys, "sweep", "--grid", "11")
        assert sweep_out == compare_out

    def test_three_speeds(self, tmp_path, capsys):
        conf = tmp_path / "s.ini"
        conf.write_text("[run]\ngrid = 21\n[sweep]\nU = 0, 0.1, 0.2\n")
        code, out, _ = run(capsys, "sweep", "--config", str(conf))
        rows = rows_of(out)
        assert code == 0 and [r["U"] for r in rows] == ["0.0", "0.1", "0.2"]
        assert rows[0]["sup_err_thm1_literal"] == rows[0]["sup_err_thm1_recomputed"]

    def test_failed_tuple_recorded(self, tmp_path, capsys):
        conf = tmp_path / "s.ini"
        conf.write_text("[run]\ngrid = 11\n[sweep]\ndelta = 0.5, 5.0\n")
        code, out, _ = run(capsys, "sweep", "--config", str(conf))
        rows = rows_of(out)
        assert code == 0
        assert rows[0]["error"] == "" and rows[1]["error"].startswith("BeyondSaturation")
        assert rows[1]["sup_err_exact"] == ""

    def test_all_failed(self, tmp_path, capsys):
        conf = tmp_path / "s.ini"
        conf.write_text("[sweep]\ndelta = 5.0\n")
        assert run(capsys, "sweep", "--config", str(conf))[0] != 0


class TestSeries:
    def test_tables(self, capsys):
        code, out, _ = run(capsys, "series", "--series-order", "2")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 9
        by = {(r["source"], r["order"]): r for r in rows}
        assert by[("binomial-oracle", "2")]["exact"] == "93/625"
        assert by[("explog-composition", "2")]["coefficient"] == "0.1488"
        assert by[("paper-literal", "2")]["coefficient"] == "0.24"


class TestTransform:
    def grid_file(self, tmp_path, rho, name="rho.csv", nx=5, ny=4, L=20.0):
        lines = ["x,y,rho"]
        for i in range(nx):
            for j in range(ny):
                x, y = L * i / (nx - 1), j / (ny - 1)
                lines.append(f"{x!r},{y!r},{rho(x, y)!r}")
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_unit_density_file(self, tmp_path, capsys):
        src = self.grid_file(tmp_path, lambda x, y: 1.0)
        out = tmp_path / "mesh.csv"
        code, _, _ = run(capsys, "transform", "--density", str(src), "--out", str(out))
        assert code == 0
        text = out.read_text()
        assert text.startswith("# check_diffeomorphism=pass margin=")
        rows = rows_of("".join(text.splitlines(keepends=True)[1:]))
        assert all(float(r["s"]) == pytest.approx(float(r["yhat"]), abs=1e-12) for r in rows)
        delta = rows_of((tmp_path / "mesh_delta.csv").read_text())
        assert len(delta) == 5 and all(float(r["delta"]) == pytest.approx(1.0) for r in delta)

    def test_linear_preset(self, tmp_path, capsys):
        out = tmp_path / "mesh.json"
        code, _, _ = run(capsys, "transform", "--density-preset", "linear", "--format", "json", "--out", str(out))
        doc = json.loads(out.read_text())
        assert code == 0 and doc["check"]["passed"]
        assert all(d == pytest.approx(1.5, abs=1e-10) for _, d in doc["delta"])

    def test_negative_density(self, tmp_path, capsys):
        src = self.grid_file(tmp_path, lambda x, y: -1.0 if (x, y) == (10.0, 0.0) else 1.0)
        code, _, err = run(capsys, "transform", "--density", str(src))
        assert code == 5 and "line 10" in err

    def test_malformed(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text("x,y,rho\n0,0,1\n0,1\n")
        code, _, err = run(capsys, "transform", "--density", str(src))
        assert code == 4 and "line 3" in err

    def test_needs_density(self, capsys):
        assert run(capsys, "transform")[0] == 2
