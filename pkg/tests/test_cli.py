from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from theta_gasket import cli
from theta_gasket.correlators import nested
from theta_gasket.geometry import MarkedDomain
from theta_gasket.walks import coefficients


def run(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), stdout=buf)
    return code, buf.getvalue()


def parse_csv(text):
    header = [ln[2:] for ln in text.splitlines() if ln.startswith("#")]
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    return dict(h.split("=", 1) for h in header), rows


class TestCommands:
    def test_eval_nested(self):
        code, out = run("eval", "family=nested", "q=0.1")
        assert code == 0
        cfg, rows = parse_csv(out)
        assert cfg == {"command": "eval", "family": "nested", "q": "0.1", "seed": "0"}
        assert float(rows[0]["theta_factor"]) == nested(MarkedDomain.from_q(0.1)).theta_factor

    def test_eval_list_and_points(self):
        _, out = run("eval", "family=ising", "q=0.1,0.2,0.3")
        assert len(parse_csv(out)[1]) == 3
        code, out = run("eval", "family=twist_boundary", "z1=0.1+0.2j", "z2=-0.3", "v=0.5")
        assert code == 0
        assert float(parse_csv(out)[1][0]["value"]) > 0

    def test_nome_row(self):
        _, out = run("nome", "g=0.035")
        row = parse_csv(out)[1][0]
        md = MarkedDomain.from_green(0.035)
        assert float(row["q"]) == md.nome.q
        assert float(row["q_hat"]) == md.nome.q_hat
        assert float(row["r"]) ** 2 == pytest.approx(float(row["k"]), rel=1e-12)
        assert math.log(float(row["q"])) * math.log(float(row["q_hat"])) == pytest.approx(math.pi ** 2)

    def test_coeffs_table(self):
        _, out = run("coeffs", "m=2", "n_max=6")
        rows = parse_csv(out)[1]
        tab = coefficients(2, 6)
        assert [int(r["a"]) for r in rows] == [tab[n] for n in range(-6, 7)]
        assert list(rows[0]) == ["m", "n", "a"]

    def test_verify_theta_passes(self):
        code, out = run("verify", "suite=theta")
        rows = parse_csv(out)[1]
        assert code == 0 and rows and all(r["passed"] == "1" for r in rows)

    def test_verify_failure_exit_code(self):
        # the strip suite carries a check against a reference constant that the limit misses
        code, out = run("verify", "suite=strip")
        assert code == cli.EXIT_VERIFY
        failed = [r["check"] for r in parse_csv(out)[1] if r["passed"] == "0"]
        assert failed == ["extrapolated_vs_reference"]

    def test_asymptotics_tables(self):
        for kind in ("strip", "annulus", "wallis"):
            code, out = run("asymptotics", f"kind={kind}")
            rows = parse_csv(out)[1]
            assert code == 0 and list(rows[0]) == ["kind", "delta", "value", "residual"]
        _, out = run("asymptotics", "kind=wallis", "grid=10,1000")
        res = [abs(float(r["residual"])) for r in parse_csv(out)[1]]
        assert res[1] < res[0]

    def test_simulate_identity(self):
        code, out = run("simulate", "event=identity", "mesh=8", "punctures=-0.3,0.3", "v=0,1", "samples=4000")
        rows = parse_csv(out)[1]
        assert code == 0 and len(rows) == 2
        for r in rows:
            assert abs(float(r["z_score"])) < 4

    def test_simulate_surround_ladder(self):
        _, out = run("simulate", "event=one_point_surround", "mesh=8", "r=0.1,0.3,0.6", "samples=2000")
        rows = parse_csv(out)[1]
        assert [r["x"] for r in rows] == ["0.1", "0.3", "0.6"]
        ps = [float(r["p_hat"]) for r in rows]
        assert ps == sorted(ps) and rows[0]["exact_target"] == ""

    def test_simulate_holes(self):
        code, out = run("simulate", "event=holes_disconnection", "mesh=12", "punctures=-0.4,0.4",
                        "eps=0.1,0.1", "samples=3000")
        row = parse_csv(out)[1][0]
        assert code == 0 and abs(float(row["z_score"])) < 4


class TestOutput:
    def test_columns_follow_schema(self):
        schema = cli.load_schema()["commands"]
        _, out = run("nome", "q=0.3")
        assert list(parse_csv(out)[1][0]) == list(schema["nome"]["columns"])

    def test_json_mirrors_csv(self):
        _, c = run("eval", "family=simple", "q=0.2,0.4")
        _, j = run("eval", "family=simple", "q=0.2,0.4", "--format", "json")
        cfg, rows = parse_csv(c)
        doc = json.loads(j)
        assert doc["config"] == cfg
        assert doc["rows"] == rows

    def test_config_file_and_override(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment\nfamily = nested\nq=0.1\n\n", encoding="utf-8")
        _, a = run("eval", "--config", str(p))
        _, b = run("eval", "--config", str(p), "q=0.3")
        assert parse_csv(a)[0]["q"] == "0.1"
        assert parse_csv(b)[0]["q"] == "0.3"

    def test_out_file(self, tmp_path):
        out = tmp_path / "t.csv"
        code, text = run("coeffs", "m=1", "--out", str(out))
        assert code == 0 and text == ""
        assert out.read_text(encoding="utf-8").startswith("# command=coeffs\n")

    def test_simulate_writes_json_report(self, tmp_path):
        out = tmp_path / "s.csv"
        run("simulate", "event=identity", "mesh=8", "punctures=0", "samples=500", "--out", str(out))
        doc = json.loads((tmp_path / "s.csv.json").read_text(encoding="utf-8"))
        assert "exact_target" in doc["rows"][0]


class TestSeeds:
    ARGS = ("simulate", "event=identity", "mesh=8", "punctures=-0.3,0.3", "samples=3000")

    def test_seed_precedence(self, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "11")
        assert parse_csv(run(*self.ARGS)[1])[0]["seed"] == "11"
        assert parse_csv(run(*self.ARGS, "seed=5")[1])[0]["seed"] == "5"
        assert parse_csv(run(*self.ARGS, "seed=5", "--seed", "3")[1])[0]["seed"] == "3"
        monkeypatch.delenv(cli.SEED_ENV)
        assert parse_csv(run(*self.ARGS)[1])[0]["seed"] == "0"

    def test_seed_changes_samples(self):
        a = parse_csv(run(*self.ARGS, "--seed", "1")[1])[1][0]["p_hat"]
        b = parse_csv(run(*self.ARGS, "--seed", "2")[1])[1][0]["p_hat"]
        assert a != b

    def test_byte_identical_across_workers(self):
        outs = {run(*self.ARGS, "v=0,1", "--seed", "9", "--threads", str(t))[1] for t in (1, 2, 8)}
        assert len(outs) == 1
        assert "threads" not in outs.pop()


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ("frobnicate",),
        ("eval", "family=nested"),
        ("eval", "family=nested", "q=0.1", "colour=red"),
        ("eval", "family=unknown", "q=0.1"),
        ("eval", "family=nested", "q=abc"),
        ("eval", "family=nested", "q=1.5"),
        ("eval", "family=nested", "q=0.1", "--seed", "x"),
        ("simulate", "event=identity", "mesh=8", "punctures=0", "samples=10", "--threads", "0"),
        ("simulate", "event=bogus", "mesh=8", "samples=10"),
        ("verify", "suite=nope"),
        ("coeffs", "broken"),
    ])
    def test_usage_errors(self, argv):
        assert run(*argv)[0] == cli.EXIT_USAGE

    def test_missing_config(self, tmp_path):
        assert run("eval", "--config", str(tmp_path / "absent.cfg"))[0] == cli.EXIT_USAGE

    def test_nonconvergence(self, monkeypatch):
        from theta_gasket.special import ConvergenceError

        def broken(*a, **k):
            raise ConvergenceError("series stalled")

        monkeypatch.setitem(cli.COMMANDS, "nome", broken)
        assert run("nome", "q=0.1")[0] == cli.EXIT_CONVERGENCE

    def test_entry_point_exit_status(self):
        proc = subprocess.run([sys.executable, "-m", "theta_gasket.cli", "verify", "suite=strip"],
                              capture_output=True, text=True)
        assert proc.returncode == cli.EXIT_VERIFY
        assert proc.stdout.startswith("# command=verify\n")
