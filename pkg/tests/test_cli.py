import csv
import io
import subprocess
import sys

import pytest

from skcodes.cli import build_parser, run_cli
from skcodes.ldpc import build_regular_ldpc, read_alist
from skcodes.lincode import read_code


def run(capsys, *argv):
    rc = run_cli(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


class TestCapacity:
    def test_model1(self, capsys):
        rc, out, _ = run(capsys, "capacity", "--model", "1", "--p", "0.068")
        header, row = out.splitlines()
        assert rc == 0 and header == "model,params,closed_form,capacity_bits"
        assert float(row.split(",")[-1]) == pytest.approx(0.6416, abs=5e-5)

    def test_model3_edges(self, capsys):
        rc, out, _ = run(capsys, "capacity", "--model", "3", "--edge", "1:2:0.05", "--edge", "2:3:0.1")
        assert rc == 0 and float(out.splitlines()[1].split(",")[-1]) == pytest.approx(0.5310044064107188)

    def test_model_file(self, capsys, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("model = 4\np = 0.05\nq = 0.3\n")
        rc, out, _ = run(capsys, "capacity", "--model-file", str(path))
        assert rc == 0 and out.splitlines()[1].startswith("4,")


class TestAudit:
    def test_model1_row(self, capsys):
        rc, out, _ = run(capsys, "audit", "--model", "1", "--p", "0.01", "--code", "hamming74")
        assert rc == 0
        assert out.splitlines()[1] == (
            "1,hamming74,7,3,p=1/100,4,4,0,49898447918253/50000000000000,1.277652067211515,rational"
        )

    def test_model2_row(self, capsys, tmp_path):
        out_path = tmp_path / "a.csv"
        rc, _, _ = run(capsys, "audit", "--model", "2", "--p", "0.05", "--q", "0.3", "--code", "hamming84",
                       "--xi", "0.1", "--eps-prime", "0.35", "--out", str(out_path))
        fields = out_path.read_text().splitlines()[1].split(",")
        assert rc == 0 and fields[7] == "0" and fields[6] == "2"

    def test_missing_constants_exit_1(self, capsys):
        rc, _, err = run(capsys, "audit", "--model", "2", "--p", "0.05", "--q", "0.3", "--code", "hamming84")
        assert rc == 1 and err.startswith("skcodes.evalbench: ParameterError:")

    def test_budget_exit_1(self, capsys):
        rc, _, err = run(capsys, "audit", "--model", "1", "--p", "0.1", "--budget", "100")
        assert rc == 1 and "CapacityError" in err

    def test_domain_exit_1(self, capsys):
        rc, _, err = run(capsys, "audit", "--model", "1", "--p", "0.7")
        assert rc == 1 and "DomainError" in err

    def test_missing_code_file_exit_1(self, capsys, tmp_path):
        rc, _, _ = run(capsys, "audit", "--model", "1", "--p", "0.1", "--code-file", str(tmp_path / "none"))
        assert rc == 1

    def test_code_file(self, capsys, tmp_path):
        rc, out, _ = run(capsys, "codegen", "--kind", "linear", "--code", "hamming74")
        path = tmp_path / "h.code"
        path.write_text(out)
        assert read_code(path).n == 7
        rc, out, _ = run(capsys, "audit", "--model", "1", "--p", "0.01", "--code-file", str(path))
        assert rc == 0 and out.splitlines()[1].split(",")[7] == "0"


class TestUsage:
    @pytest.mark.parametrize("argv", [
        [],
        ["nonsense"],
        ["capacity", "--model", "9"],
        ["simulate", "--p", "0.05"],
        ["simulate", "--p", "0.05", "--seed", "1", "--model", "2"],
        ["simulate", "--seed", "1"],
        ["mono", "--points", "1"],
    ])
    def test_exit_2(self, capsys, argv):
        rc, _, err = run(capsys, *argv)
        assert rc == 2 and "usage" in err

    def test_help_lists_defaults(self):
        sub = build_parser()._subparsers._group_actions[0].choices["simulate"]
        text = sub.format_help()
        for needle in ("default: 1000", "default: 60", "default: 3,6", "default: 1)"):
            assert needle in text

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "skcodes", "capacity", "--model", "1", "--p", "0.1"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.startswith("model,")


class TestSimulate:
    ARGS = ["simulate", "--p", "0.08,0.04", "--n", "96", "--blocks", "120", "--iters", "30", "--seed", "9"]

    def test_threads_byte_identical(self, capsys):
        _, one, _ = run(capsys, *self.ARGS, "--threads", "1")
        _, three, _ = run(capsys, *self.ARGS, "--threads", "3")
        assert one == three
        rows = list(csv.DictReader(io.StringIO(one)))
        assert [float(r["p"]) for r in rows] == [0.04, 0.08]

    def test_alist_input(self, capsys, tmp_path):
        path = tmp_path / "c.alist"
        rc, _, _ = run(capsys, "codegen", "--n", "96", "--seed", "9", "--out", str(path))
        assert rc == 0 and read_alist(path).same_structure(build_regular_ldpc(96, 3, 6, seed=9))
        _, from_file, _ = run(capsys, "simulate", "--ldpc", str(path), "--p", "0.08,0.04", "--blocks", "120",
                              "--iters", "30", "--seed", "9")
        _, built, _ = run(capsys, *self.ARGS)
        strip = lambda text: [row[2:] for row in csv.reader(io.StringIO(text))][1:]
        assert strip(from_file) == strip(built)


class TestMono:
    def test_repetition(self, capsys):
        rc, out, _ = run(capsys, "mono", "--code", "rep3", "--grid", "0.05,0.1")
        assert rc == 0
        assert out.splitlines() == [
            "code,n,m,p,p_err", "rep3,3,2,1/20,29/4000", "rep3,3,2,1/10,7/250", "# strictly_increasing=1",
        ]

    def test_default_grid(self, capsys):
        rc, out, _ = run(capsys, "mono", "--code", "hamming74")
        lines = out.splitlines()
        assert rc == 0 and len(lines) == 22 and lines[-1] == "# strictly_increasing=1"

    def test_bad_grid_exit_1(self, capsys):
        rc, _, err = run(capsys, "mono", "--grid", "0.2,0.1")
        assert rc == 1 and "DomainError" in err
