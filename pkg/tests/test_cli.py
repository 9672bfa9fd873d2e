import csv
import io
import json
import subprocess
import sys

import pytest

from heavytail.cli import CHECKS, TAIL_IDS, main, parse_beta_grid, parse_field
from heavytail.errors import ParameterError

FAST = ["--samples", "20000", "--seed", "3"]

# one invocation per CLI-reachable checker
CASES = {
    "thm31": ["--n", "1", "--beta", "2", "--g", "inv1px2", "--method", "quad"],
    "cor32": ["--n", "1", "--beta", "3", "--g", "x1"],
    "eq35": ["--n", "2", "--beta", "2.5", "--g", "inv1px2"],
    "prop33": ["--n", "1", "--beta", "10", "--g", "tanh"],
    "thm34": ["--n", "2", "--beta", "3", "--g", "gauss"],
    "eq39": ["--n", "1", "--g", "explin:0.5"],
    "thm23": ["--n", "1", "--beta", "3", "--g", "tanh"],
    "eq211": ["--n", "1", "--beta", "3", "--g", "x1"],
    "eq212": ["--n", "1", "--beta", "3", "--g", "x1"],
    "thm24": ["--n", "1", "--beta", "1", "--g", "tanh", "--measure", "exponential", "--lam", "2"],
    "eq217": ["--g", "log1px2", "--lam", "0.5"],
    "eq218": ["--n", "2", "--g", "smoothnorm"],
    "thm41": ["--n", "2", "--beta", "6", "--g", "linear", "--p", "4"],
    "thm21": ["--n", "1", "--beta", "3", "--g", "inv1px2", "--g-scale", "0.5"],
    "cor22": ["--n", "1", "--g", "linear"],
    "eq55": ["--n", "1", "--beta", "3", "--set", "half_space", "--param", "-0.5"],
    "eq56": ["--n", "2", "--beta", "4", "--set", "ball", "--param", "1.2"],
    "thm51": ["--n", "1", "--beta", "2", "--g", "tanh"],
    "cor52": ["--n", "1", "--beta", "2", "--g", "tanh"],
    "hardy": ["--beta", "2"],
    "lower_bound": ["--n", "2", "--beta", "3"],
}


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_every_checker_has_a_case():
    assert set(CASES) == set(CHECKS)


@pytest.mark.parametrize("ident", sorted(CASES))
def test_check_every_id(ident, capsys):
    code, out, err = _run(["check", ident, *CASES[ident], *FAST], capsys)
    d = json.loads(out)
    assert d["id"] == ident
    assert code == 0, (d, err)
    assert d["verdict"] in ("holds", "reported")


def test_json_schema(capsys):
    code, out, _ = _run(["check", "thm31", *CASES["thm31"]], capsys)
    d = json.loads(out)
    assert code == 0
    assert list(d) == ["id", "params", "g", "method", "lhs", "rhs", "constant", "ratio", "tol",
                       "seed", "samples", "verdict", "runtime_ms"]
    assert d["params"] == {"n": 1, "beta": 2.0}
    assert d["lhs"]["value"] == pytest.approx(0.0625, rel=1e-9)
    assert d["runtime_ms"] is None


def test_timing_flag(capsys):
    _, out, _ = _run(["check", "hardy", "--beta", "2", "--timing"], capsys)
    assert json.loads(out)["runtime_ms"] > 0


def test_csv_single_row(capsys):
    code, out, _ = _run(["check", "thm31", *CASES["thm31"], "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and rows[0]["verdict"] == "holds"


def test_parameter_error_exit(capsys):
    code, out, err = _run(["check", "thm31", "--n", "1", "--beta", "0.4", "--g", "inv1px2"], capsys)
    assert code == 1 and out == "" and "beta" in err


@pytest.mark.parametrize("argv", [
    ["check", "nosuch", "--beta", "2"],
    ["check", "thm31", "--n", "1"],
    ["check", "thm31", "--n", "1", "--beta", "2", "--g", "sine"],
    ["check", "thm41", "--n", "2", "--beta", "6", "--p", "3"],
])
def test_usage_errors(argv, capsys):
    assert _run(argv, capsys)[0] == 1


def test_violated_exit(capsys):
    # forcing a negative tolerance on an exact equality flips the verdict
    code, out, _ = _run(["check", "cor22", "--n", "1", "--g", "const:0.5", "--tol", "-0.1"], capsys)
    assert code == 2 and json.loads(out)["verdict"] == "violated"


def test_tails_csv(capsys):
    code, out, _ = _run(["check", "cor44", "--n", "4", "--beta", "8", "--g", "linear",
                         "--samples", "1000000", "--seed", "42"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 20
    assert {r["branch"] for r in rows} == {"0", "1", "2"}
    assert all(r["verdict"] == "holds" for r in rows)
    assert "cor44" in TAIL_IDS


def test_tails_json(capsys):
    code, out, _ = _run(["tails", "--n", "2", "--beta", "4", "--g", "smoothnorm", "--format", "json",
                         *FAST], capsys)
    d = json.loads(out)
    assert code == 0 and d["params"]["k"] == 2 and len(d["rows"]) == 20


class TestSweep:
    def test_thm31_grid(self, capsys):
        code, out, _ = _run(["sweep", "thm31", "--n", "1,2,3", "--beta", "n,2n", "--g", "all", *FAST],
                            capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 3 * 2 * 7
        ran = [r for r in rows if r["verdict"] != "skipped"]
        assert all(r["verdict"] == "holds" for r in ran)
        # beta = n = 1 lies outside the constant's range
        skipped = [r for r in rows if r["verdict"] == "skipped"]
        assert {(r["n"], r["beta"]) for r in skipped} == {("1", "1")}
        assert code == 0

    def test_order(self, capsys):
        _, out, _ = _run(["sweep", "thm34,thm31", "--n", "2,1", "--beta", "3,2", "--g", "tanh,gauss",
                          *FAST], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        keys = [(r["id"], int(r["n"]), float(r["beta"]), r["g"]) for r in rows]
        assert keys == sorted(keys)

    def test_empty_grid(self, capsys):
        code, out, _ = _run(["sweep", "thm31", "--n", "", *FAST], capsys)
        assert code == 0 and out.strip().split(",")[0] == "id" and out.count("\n") == 1

    def test_invalid_cell_flagged(self, capsys):
        _, out, _ = _run(["sweep", "cor32", "--n", "1", "--beta", "1.5,3", "--g", "tanh", *FAST], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["verdict"] for r in rows] == ["skipped", "holds"]
        assert "beta" in rows[0]["error"] and rows[1]["error"] == ""

    def test_field_free_ids_not_repeated(self, capsys):
        _, out, _ = _run(["sweep", "hardy,lower_bound", "--n", "1,2", "--beta", "n+1", "--g", "all"],
                         capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        keys = [(r["id"], r["n"], r["beta"]) for r in rows]
        assert keys == [("hardy", "1", "2"), ("hardy", "1", "3"),
                        ("lower_bound", "1", "2"), ("lower_bound", "2", "3")]

    def test_beta_free_ids_not_repeated(self, capsys):
        _, out, _ = _run(["sweep", "eq39,eq217", "--n", "1,2", "--beta", "n,2n,3n", "--g", "tanh"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [(r["id"], r["n"]) for r in rows] == [("eq217", "1"), ("eq39", "1"), ("eq39", "2")]

    def test_precondition_failure_skipped(self, capsys):
        code, out, _ = _run(["sweep", "thm21", "--n", "1", "--beta", "2", "--g", "linear"], capsys)
        (row,) = csv.DictReader(io.StringIO(out))
        assert row["verdict"] == "skipped" and row["error"].startswith("precondition:")
        assert code == 0

    def test_json_format(self, capsys):
        _, out, _ = _run(["sweep", "hardy", "--n", "1", "--beta", "1.5,2", "--g", "inv1px2",
                          "--format", "json"], capsys)
        data = json.loads(out)
        assert [d["params"]["beta"] for d in data] == [1.5, 2.0]


class TestReport:
    def test_single_holds(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        main(["check", "hardy", "--beta", "2", "--output", str(path)])
        capsys.readouterr()
        code, out, _ = _run(["report", str(path)], capsys)
        d = json.loads(out)
        assert code == 0 and d["counts"] == {"holds": 1}

    def test_mixed_files_partitioned(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.csv"
        main(["check", "hardy", "--beta", "2", "--output", str(a)])
        main(["sweep", "thm31", "--n", "1", "--beta", "2,3", "--g", "inv1px2,tanh", "--output", str(b),
              *FAST])
        capsys.readouterr()
        _, out, _ = _run(["report", str(a), str(b)], capsys)
        d = json.loads(out)
        assert d["by_id"]["hardy"]["counts"] == {"holds": 1}
        assert d["by_id"]["thm31"]["counts"] == {"holds": 4}
        assert 0 < d["by_id"]["thm31"]["worst_ratio"] < 1

    def test_tails_plot_data(self, tmp_path, capsys):
        t = tmp_path / "tails.csv"
        main(["tails", "--n", "2", "--beta", "4", "--output", str(t), *FAST])
        capsys.readouterr()
        code, out, _ = _run(["report", str(t), "--plot-dir", str(tmp_path / "plots")], capsys)
        assert code == 0 and json.loads(out)["tails"][0]["rows"] == 20
        lines = (tmp_path / "plots" / "tails.bound.dat").read_text().splitlines()
        assert lines[0].startswith("#") and len(lines) == 21
        assert len(lines[1].split()) == 2

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("foo,bar\n1,2\n")
        assert _run(["report", str(bad)], capsys)[0] == 1
        junk = tmp_path / "junk.json"
        junk.write_text("{not json")
        assert _run(["report", str(junk)], capsys)[0] == 1
        assert _run(["report", str(tmp_path / "missing.json")], capsys)[0] == 1


class TestParsers:
    def test_beta_grid(self):
        assert parse_beta_grid("n,n+1,2n,1.5,10n", 3) == [3.0, 4.0, 6.0, 1.5, 30.0]

    def test_fields(self):
        assert parse_field("const:2", 2).constant == 2.0
        assert parse_field("tanh", 1, scale=0.5, shift=0.1).name != "tanh"
        with pytest.raises(ParameterError):
            parse_field("nosuch", 1)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "heavytail", "check", "thm31", "--n", "1", "--beta", "2",
                          "--g", "inv1px2", "--method", "quad"], capture_output=True, check=False)
    assert out.returncode == 0 and json.loads(out.stdout)["verdict"] == "holds"
    bad = subprocess.run([sys.executable, "-m", "heavytail", "check", "thm31", "--n", "1", "--beta", "0.4"],
                         capture_output=True, check=False)
    assert bad.returncode == 1 and b"error" in bad.stderr
