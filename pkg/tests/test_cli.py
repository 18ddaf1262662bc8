import csv
import io
import json
import pathlib

import numpy as np
import pytest

from curvetail.cli import main, read_values
from curvetail.errors import DataFileError
from curvetail.gpd import GpdParams, gpd_quantile, gpd_sample
from curvetail.increment import load_table, save_table, zero_table
from curvetail.validation import CSV_HEADER


def write_data(path, values):
    path.write_text("".join(f"{float(v)!r}\n" for v in values))
    return path


def pairs(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


@pytest.fixture
def data(tmp_path):
    return write_data(tmp_path / "x.txt", gpd_sample(40, GpdParams(xi=0.3), 2).values[::-1])


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestReadValues:
    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "v.txt"
        p.write_text("# header\n1.5\n\n2e3  # trailing\n -4\n")
        np.testing.assert_array_equal(read_values(p), [1.5, 2000.0, -4.0])

    @pytest.mark.parametrize("bad,line", [("1\nabc\n", 2), ("1\n2\nnan\n", 3), ("inf\n", 1)])
    def test_bad_tokens(self, tmp_path, bad, line):
        p = tmp_path / "v.txt"
        p.write_text(bad)
        with pytest.raises(DataFileError, match=f"line {line}"):
            read_values(p)


class TestFit:
    def test_fit_prints_estimate(self, data, capsys):
        code, out, err = run(["fit", data], capsys)
        assert code == 0
        got = pairs(out)
        assert got["n"] == "40" and got["convention"] == "k_half"
        assert np.isfinite(float(got["xi_hat"]))
        manifest = json.loads(err)
        assert manifest["command"] == "fit" and len(manifest["inputs"]["sha256"]) == 64

    def test_exact_quantile_data(self, tmp_path, capsys):
        g = (np.arange(1, 21) - 0.5) / 20
        p = write_data(tmp_path / "q.txt", gpd_quantile(g, GpdParams(xi=-0.7)))
        _, out, _ = run(["fit", p], capsys)
        assert float(pairs(out)["xi_hat"]) == pytest.approx(-0.7, abs=1e-9)

    def test_kprime_and_xy(self, data, tmp_path, capsys):
        xy = tmp_path / "xy.csv"
        code, out, _ = run(["fit", data, "--kprime", "--emit-xy", xy,
                            "--manifest", tmp_path / "m.json"], capsys)
        assert code == 0
        got = pairs(out)
        assert got["kprime_k"] == "4,6,8,10,14,16,18,20"
        rows = list(csv.reader(xy.open()))
        assert rows[0] == ["i", "u", "x", "y"] and len(rows) == 20
        assert json.loads((tmp_path / "m.json").read_text())["outputs"] == [str(xy)]

    def test_too_few_values(self, tmp_path, capsys):
        p = write_data(tmp_path / "s.txt", np.arange(12.0))
        code, _, err = run(["fit", p], capsys)
        assert code == 3 and "need ≥ 20 values, got 12" in err

    def test_nan_rejected(self, tmp_path, capsys):
        p = tmp_path / "s.txt"
        p.write_text("\n".join(["1"] * 25 + ["nan"]))
        code, _, err = run(["fit", p], capsys)
        assert code == 3 and "line 26" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["fit", tmp_path / "absent.txt"], capsys)
        assert code == 3

    def test_degenerate(self, tmp_path, capsys):
        p = write_data(tmp_path / "s.txt", [1.0] * 30)
        assert run(["fit", p], capsys)[0] == 3

    def test_unknown_option(self, data):
        with pytest.raises(SystemExit) as info:
            main(["fit", str(data), "--bogus"])
        assert info.value.code == 2


class TestPredict:
    def test_naive_and_adjusted(self, data, capsys):
        _, naive, _ = run(["predict", data, "--t", 400, "--naive"], capsys)
        _, adj, _ = run(["predict", data, "--t", 400], capsys)
        n, a = pairs(naive), pairs(adj)
        assert n["mode"] == "naive" and a["mode"] == "adjusted"
        assert float(a["xi_p"]) > float(n["xi_p"])
        assert float(a["e_ratio"]) == pytest.approx(400 / 41)

    def test_e_ratio_and_table(self, data, tmp_path, capsys):
        table = tmp_path / "zero.txt"
        save_table(zero_table(), table)
        _, a, _ = run(["predict", data, "--e-ratio", 5, "--table", table], capsys)
        _, b, _ = run(["predict", data, "--e-ratio", 5, "--naive"], capsys)
        assert pairs(a)["x_t"] == pairs(b)["x_t"]

    def test_level_outside_table(self, data, capsys):
        code, _, err = run(["predict", data, "--t", 5000], capsys)
        assert code == 2 and "outside the table range" in err

    def test_t_not_above_n(self, data, capsys):
        assert run(["predict", data, "--t", 30], capsys)[0] == 2

    def test_bad_table(self, data, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("version=9\n")
        assert run(["predict", data, "--t", 100, "--table", bad], capsys)[0] == 3


class TestCurves:
    def test_exponential_curve_is_antidiagonal(self, capsys):
        code, out, _ = run(["curves", "--xi", 0, "--points", 50], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) > 40
        for row in rows:
            assert float(row["y"]) == pytest.approx(-float(row["x"]), abs=1e-9)

    def test_comma_list_and_file(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        code, _, _ = run(["curves", "--xi=-1,1", "--convention", "k_half", "--out", out],
                         capsys)
        assert code == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["xi", "convention", "k", "n", "r", "x", "y"]
        assert {r[0] for r in rows[1:]} == {"-1.0", "1.0"}
        assert (tmp_path / "c.csv.manifest.json").is_file()

    def test_bad_number(self, capsys):
        assert run(["curves", "--xi", "one"], capsys)[0] == 2


class TestCalibrate:
    SMALL = ["--samples", 200, "--test-points", 200, "--levels", "1,2.380952380952381"]

    def test_failure_still_writes_table(self, tmp_path, capsys):
        out = tmp_path / "t.txt"
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"xi_test_grid": [-1, 0, 1]}))
        code, stdout, err = run(["calibrate", *self.SMALL, "--max-sweeps", 0, "--band", 1e-6,
                                 "--config", cfg, "--out", out], capsys)
        assert code == 5 and "calibration failed" in err
        table = load_table(out)
        assert table.meta["converged"] == "0,0"
        assert "converged=false" in stdout
        manifest = json.loads((tmp_path / "t.txt.manifest.json").read_text())
        assert manifest["seed"] == 20240521 and manifest["config"]["xi_test_grid"] == [-1, 0, 1]

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"speed": 1}')
        assert run(["calibrate", "--config", cfg, "--out", tmp_path / "t.txt"], capsys)[0] == 2

    def test_invalid_setting(self, tmp_path, capsys):
        assert run(["calibrate", "--samples", 5, "--out", tmp_path / "t.txt"], capsys)[0] == 2


class TestValidate:
    def test_csv_on_stdout(self, capsys):
        code, out, _ = run(["validate", "--spec", "gpd:1", "--samples", 300, "--test-points",
                            300, "--levels", "1", "19.047619047619047"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert tuple(rows[0]) == CSV_HEADER and len(rows) == 3
        assert rows[1][0] == "gpd" and rows[1][11] == "empirical"

    def test_manifest_is_reproducible(self, tmp_path, capsys):
        argv = ["validate", "--spec", "normal", "--samples", 200, "--test-points", 200,
                "--naive", "--mode", "analytic", "--levels", 2]
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            manifest = tmp_path / "m.json"
            assert run(argv + ["--out", out, "--manifest", manifest], capsys)[0] == 0
            outs.append((out.read_bytes(), manifest.read_text().replace(str(out), "OUT")))
        assert outs[0] == outs[1]

    def test_unknown_spec(self, capsys):
        code, _, err = run(["validate", "--spec", "cauchy"], capsys)
        assert code == 2 and "cauchy" in err


def test_zoo_list(capsys):
    code, out, _ = run(["zoo", "list"], capsys)
    assert code == 0 and len(out.splitlines()) == 19 and "reversed_burr" in out


@pytest.mark.parametrize("convention", ["basic", "k_half"])
def test_background_curves_match_golden(convention, tmp_path, capsys):
    golden = pathlib.Path(__file__).parent / "golden" / f"curves_{convention}.csv"
    out = tmp_path / "c.csv"
    run(["curves", "--xi=-2,-1,0,1,2", "--convention", convention, "--points", 100,
         "--out", out, "--manifest", tmp_path / "m.json"], capsys)
    want = list(csv.reader(golden.open()))
    got = list(csv.reader(out.open()))
    assert got[0] == want[0] and len(got) == len(want)
    for g, w in zip(got[1:], want[1:]):
        assert g[:4] == w[:4]
        np.testing.assert_allclose([float(v) for v in g[4:]], [float(v) for v in w[4:]],
                                   rtol=1e-12, atol=1e-14)
