import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from logspiral import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSerialization:
    def test_round_trip_floats(self):
        values = [math.pi, 1e-300, -2.5e17, 0.1 + 0.2]
        assert json.loads(cli.to_json(values)) == values

    def test_special_values(self):
        data = json.loads(cli.to_json({"x": math.nan, "z": 1 - 2j, "flag": np.bool_(True),
                                       "arr": np.arange(3), "none": None, "empty": []}))
        assert data == {"x": None, "z": {"re": 1.0, "im": -2.0}, "flag": True,
                        "arr": [0, 1, 2], "none": None, "empty": []}

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            cli.to_json(object())

    def test_csv_round_trip(self):
        text = cli.rows_to_csv(["a", "b"], [(1, math.pi), (2, -1e-20)])
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["a", "b"]
        assert float(rows[1][1]) == math.pi
        assert float(rows[2][1]) == -1e-20


class TestCommands:
    def test_verify_text(self, capsys):
        code, out, _ = run(capsys, "verify", "lu", "--seed", "3")
        assert code == 0
        assert all(line.startswith(("PASS", "INFO")) for line in out.splitlines())

    def test_verify_json_deterministic(self, capsys):
        _, first, _ = run(capsys, "verify", "dets", "--seed", "5", "--format", "json")
        _, second, _ = run(capsys, "verify", "dets", "--seed", "5", "--format", "json")
        assert first == second
        assert all(r["passed"] for r in json.loads(first))

    def test_solve_json(self, capsys, tmp_path):
        path = tmp_path / "branch.json"
        code, out, _ = run(capsys, "solve", "--M", "3", "--a", "1e4", "--a-end", "1e3", "--out", str(path))
        assert code == 0 and out == ""
        data = json.loads(path.read_text())
        assert data["complete"] and data["config"] == {"M": 3, "n": 1}
        assert len(data["samples"]) == 41
        assert max(s["theta_residual"] for s in data["samples"]) <= 1e-12

    def test_solve_single_target(self, capsys):
        code, out, _ = run(capsys, "solve", "--M", "3", "--n", "2", "--a", "100")
        data = json.loads(out)
        assert code == 0
        assert len(data["samples"]) == 1
        g = data["samples"][0]["g"]
        assert max(g) - min(g) <= 1e-10 * abs(g[0])

    def test_solve_even_exit_3(self, capsys):
        code, _, err = run(capsys, "solve", "--M", "4")
        assert code == 3
        assert "matrix C" in err

    def test_solve_bad_range(self, capsys):
        code, _, _ = run(capsys, "solve", "--M", "3", "--a", "10", "--a-end", "100")
        assert code == 2

    @pytest.mark.parametrize("argv", [["solve", "--M", "0"], ["solve", "--M", "3", "--a", "-1"],
                                      ["geometry", "--M", "2"], ["verify", "nope"],
                                      ["prandtl", "--a", "inf"]])
    def test_bad_flags_exit_2(self, capsys, argv):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2

    def test_table2_csv(self, capsys):
        code, out, _ = run(capsys, "table2", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert len(rows) == 2 * (1 + 1 + 2 + 2 + 3 + 3 + 4 + 4)
        assert max(float(r["abs_diff"]) for r in rows) <= 1e-10

    def test_scan_c(self, capsys):
        code, out, _ = run(capsys, "scan-c", "--max-M", "11")
        rows = json.loads(out)
        assert code == 0 and len(rows) == 10
        assert all(r["sigma_min"] > 0 for r in rows)
        assert run(capsys, "scan-c", "--max-M", "2")[0] == 2

    def test_geometry_csv(self, capsys):
        code, out, _ = run(capsys, "geometry", "--M", "2", "--a", "1e3", "--npoints", "50")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows[0] == ["m", "theta", "t", "re_z", "im_z", "Gamma", "gamma_density"]
        assert len(rows) == 1 + 2 * 50

    def test_geometry_single_branch(self, capsys):
        code, out, _ = run(capsys, "geometry", "--M", "1", "--a", "10", "--npoints", "5", "--format", "json")
        assert code == 0 and len(json.loads(out)) == 5

    def test_prandtl(self, capsys):
        code, out, _ = run(capsys, "prandtl", "--a", "100")
        rec = json.loads(out)
        assert code == 0
        assert rec["residual"] <= 1e-12
        assert rec["cross_route_difference"] <= 1e-12

    def test_expansion(self, capsys):
        code, out, _ = run(capsys, "expansion", "--M", "3")
        rec = json.loads(out)
        assert code == 0
        assert rec["E2_0"] == pytest.approx(math.sqrt(3))
        assert rec["theta_minus1"][0] == pytest.approx(math.pi / (3 * math.sqrt(3)))
        code, out, _ = run(capsys, "expansion", "--M", "2", "--format", "csv")
        assert code == 0 and out.startswith("M,n,theta_minus1_1")

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "logspiral", "prandtl", "--a", "10", "--format", "csv"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout.startswith("a,g,mu,residual")
