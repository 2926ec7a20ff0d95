import json

import numpy as np
import pytest

from ecomplex.cli import EXIT_COMPUTATION, EXIT_INPUT, main

HAND_TRADE = "year,country,product,value\n2000,A,p1,10\n2000,A,p2,10\n2000,B,p1,20\n"


def data_rows(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


@pytest.fixture
def hand_matrix_file(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("country,product\nA,p1\nA,p2\nB,p1\n")
    return p


class TestIngest:
    def test_fixture(self, tmp_path):
        src = tmp_path / "t.csv"
        src.write_text(HAND_TRADE)
        assert main(["ingest", str(src), "--out", str(tmp_path / "o")]) == 0
        # RCA: (A,p1)=2/3, (A,p2)=2, (B,p1)=4/3
        assert data_rows(tmp_path / "o" / "matrix_2000.csv") == ["country,product", "A,p2", "B,p1"]
        side = json.loads((tmp_path / "o" / "matrix_2000.json").read_text())
        assert side["n_edges"] == 2 and side["threshold"] == 1.0

    def test_empty(self, tmp_path, capsys):
        src = tmp_path / "t.csv"
        src.write_text("")
        assert main(["ingest", str(src), "--out", str(tmp_path)]) == EXIT_INPUT
        assert "no data" in capsys.readouterr().err

    def test_negative(self, tmp_path, capsys):
        src = tmp_path / "t.csv"
        src.write_text("year,country,product,value\n2000,A,p,-5\n")
        assert main(["ingest", str(src), "--out", str(tmp_path)]) == EXIT_INPUT
        assert "line 2" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["ingest", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == EXIT_INPUT

    def test_env_out_dir(self, tmp_path, monkeypatch):
        src = tmp_path / "t.csv"
        src.write_text(HAND_TRADE)
        monkeypatch.setenv("ECOMPLEX_OUT", str(tmp_path / "envout"))
        from ecomplex.cli import build_parser

        args = build_parser().parse_args(["ingest", str(src)])
        assert args.out == str(tmp_path / "envout")


class TestReflect:
    def test_hand_trajectory(self, tmp_path, hand_matrix_file):
        assert main(["reflect", str(hand_matrix_file), "--depth", "2", "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "trajectory.csv")
        assert "country,A,2,1.75" in rows
        assert "country,B,2,1.5" in rows
        assert "product,p2,1,2.0" in rows

    def test_depth_zero(self, tmp_path, hand_matrix_file):
        assert main(["reflect", str(hand_matrix_file), "--depth", "0", "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "trajectory.csv")[1:]
        assert sorted(rows) == ["country,A,0,2.0", "country,B,0,1.0", "product,p1,0,2.0", "product,p2,0,1.0"]

    def test_gdp_without_overlap(self, tmp_path, hand_matrix_file, caplog):
        gdp = tmp_path / "g.csv"
        gdp.write_text("country,value\nX,1\nY,2\nZ,3\n")
        assert main(["reflect", str(hand_matrix_file), "--depth", "2", "--gdp", str(gdp), "--out", str(tmp_path)]) == 0
        assert not (tmp_path / "correlations.csv").exists()
        assert "skipped" in caplog.text

    def test_gdp_correlations(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("country,product\nA,p1\nA,p2\nA,p3\nB,p1\nC,p2\nC,p3\nD,p3\n")
        gdp = tmp_path / "g.csv"
        gdp.write_text("country,value\nA,40000\nB,2000\nC,15000\nD,900\n")
        assert main(["reflect", str(m), "--depth", "3", "--gdp", str(gdp), "--log-gdp", "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "correlations.csv")
        assert rows[0] == "level,pearson_r,abs_r,n_overlap"
        assert len(rows) == 5

    def test_json_format(self, tmp_path, hand_matrix_file):
        assert main(["reflect", str(hand_matrix_file), "--depth", "1", "--format", "json", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "trajectory.json").read_text())
        assert doc["metadata"]["parameters"]["depth"] == 1
        assert {"side": "country", "id": "A", "level": 1, "value": 1.5} in doc["rows"]

    def test_empty_matrix_is_computation_error(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("country,product\n")
        (tmp_path / "m.json").write_text(json.dumps({"countries": ["A"], "products": ["p"]}))
        assert main(["reflect", str(m), "--out", str(tmp_path)]) == EXIT_COMPUTATION


MICRO = {"grid": {"r": [0.7]}, "replicates": 1, "seed": 3,
         "base": {"n_countries": 12, "n_products": 40, "n_capabilities": 10, "q": 0.1}}


class TestSimulate:
    def test_micro(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(MICRO))
        assert main(["simulate", str(cfg), "--out", str(tmp_path)]) == 0
        summary = data_rows(tmp_path / "sweep_summary.csv")
        assert len(summary) == 2
        assert data_rows(tmp_path / "sweep_cell_000.csv")[0] == "replicate,country,capability_count,k_c0,k_c1"

    def test_bad_r_validated_first(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(dict(MICRO, grid={"r": [0.5, 1.5]})))
        out = tmp_path / "o"
        assert main(["simulate", str(cfg), "--out", str(out)]) == EXIT_INPUT
        assert not out.exists()

    def test_invalid_json(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{oops")
        assert main(["simulate", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT


class TestNull:
    def test_outputs(self, tmp_path):
        m = tmp_path / "m.csv"
        adj = np.random.default_rng(0).random((8, 10)) < 0.4
        m.write_text("country,product\n" + "".join(
            f"c{i},p{j}\n" for i in range(8) for j in range(10) if adj[i, j]))
        assert main(["null", str(m), "--level", "preserve_both", "--samples", "25", "--seed", "4", "--out", str(tmp_path)]) == 0
        assert len(data_rows(tmp_path / "null_distribution.csv")) == 26
        summary = json.loads((tmp_path / "null_summary.json").read_text())
        assert 0 <= summary["p_value"] <= 1
        assert summary["metadata"]["seed"] == 4

    def test_complete_matrix_flag(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("country,product\n" + "".join(f"c{i},p{j}\n" for i in range(3) for j in range(3)))
        # observed corr is undefined on a complete matrix
        assert main(["null", str(m), "--samples", "2", "--out", str(tmp_path)]) == EXIT_COMPUTATION

    def test_bad_level(self, tmp_path, hand_matrix_file):
        with pytest.raises(SystemExit) as exc:
            main(["null", str(hand_matrix_file), "--level", "nope"])
        assert exc.value.code == 2


def _regression_inputs(tmp_path, n=12):
    rows, g0, g1 = [], [], []
    for i in range(n):
        for j in range(15):
            if (i * 5 + j * 7) % 11 < 3 + i % 4:
                rows.append(f"c{i:02d},p{j}")
        g0.append(f"c{i:02d},{1000 + 900 * i}")
        g1.append(f"c{i:02d},{(1000 + 900 * i) * (1.1 + 0.03 * ((i * 7) % 5))}")
    m = tmp_path / "m.csv"
    m.write_text("country,product\n" + "\n".join(rows) + "\n")
    a, b = tmp_path / "g0.csv", tmp_path / "g1.csv"
    a.write_text("country,value\n" + "\n".join(g0) + "\n")
    b.write_text("country,value\n" + "\n".join(g1) + "\n")
    return m, a, b


class TestRegress:
    def test_outputs(self, tmp_path):
        m, a, b = _regression_inputs(tmp_path)
        assert main(["regress", str(m), "--gdp-t", str(a), "--gdp-t1", str(b), "--level", "2", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "regression.json").read_text())
        assert set(doc["coefficients"]) == {"a", "b1_gdp", "b2_k2", "b3_k3"}
        assert doc["n_observations"] == 12
        assert len(data_rows(tmp_path / "growth_scatter.csv")) == 13

    def test_insufficient_overlap(self, tmp_path):
        m, a, b = _regression_inputs(tmp_path)
        a.write_text("country,value\nc00,1\nc01,2\n")
        assert main(["regress", str(m), "--gdp-t", str(a), "--gdp-t1", str(b), "--out", str(tmp_path)]) == EXIT_COMPUTATION


class TestNewExports:
    def test_outputs(self, tmp_path):
        t0 = tmp_path / "t0.csv"
        t1 = tmp_path / "t1.csv"
        base = "year,country,product,value\n{y},A,p1,100\n{y},A,p2,50\n{y},B,p1,20\n{y},B,p3,80\n{y},C,p2,60\n{y},C,p3,40\n"
        t0.write_text(base.format(y=1992))
        t1.write_text(base.format(y=2000) + "2000,A,p3,500\n")
        assert main(["newexports", str(t0), str(t1), "--out", str(tmp_path)]) == 0
        rows = data_rows(tmp_path / "new_exports.csv")
        assert rows[0] == "country,k_c0,k_c1,mean_kp0,mean_kp1,n_new_products"
        assert rows[1].startswith("A,")
        assert "A,p3" in data_rows(tmp_path / "new_export_products.csv")


class TestOtherCommands:
    def test_baseline(self, tmp_path):
        src = tmp_path / "t.csv"
        src.write_text(HAND_TRADE)
        assert main(["baseline", str(src), "--out", str(tmp_path)]) == 0
        assert "B,1.0,0.0" in data_rows(tmp_path / "baseline_indices.csv")

    def test_labor(self, tmp_path, hand_matrix_file):
        attrs = tmp_path / "a.csv"
        attrs.write_text("product,attribute\np1,x\np1,y\np2,x\np2,y\np2,z\np2,w\n")
        assert main(["labor", str(hand_matrix_file), str(attrs), "--depth", "1", "--out", str(tmp_path)]) == 0
        assert "A,3.0,1.0" in data_rows(tmp_path / "labor_diversity.csv")
