import json
import subprocess
import sys

from hybrid_precoding.cli import main
from hybrid_precoding.harness import read_results

SMALL = ["--override", "config.nt_v=4", "--override", "config.nt_h=2", "--override", "config.nt_rf=2",
         "--override", "config.ns=2", "--override", "config.K=16", "--override", "config.D=8"]


def test_count_partitions(capsys):
    assert main(["count-partitions", "--nt", "8", "--nrf", "2"]) == 0
    assert capsys.readouterr().out.strip() == "127 (1.2700e+02)"
    assert main(["count-partitions", "--nt", "64", "--nrf", "4"]) == 0
    assert "1.4178e+37" in capsys.readouterr().out


def test_count_partitions_invalid(capsys):
    assert main(["count-partitions", "--nt", "2", "--nrf", "3"]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "ConfigError"


def test_selftest(capsys):
    assert main(["selftest", "--instances", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and all(line.startswith("PASS") for line in out)


def test_run_to_file_with_summary(tmp_path):
    out, summ = tmp_path / "r.csv", tmp_path / "s.json"
    code = main(["run", "--out", str(out), "--summary", str(summ), "--threads", "2",
                 "--override", "schemes=[\"FD\", \"PCA-DS\"]", "--override", "trials=2",
                 "--override", "architecture=both"] + SMALL)
    assert code == 0
    rows = read_results(str(out))
    assert len(rows) == 2 * 2 * 2
    assert len(json.load(open(summ))) == 4


def test_run_json_to_stdout(capsys):
    assert main(["run", "--format", "json", "--override", "schemes=[\"DFT\"]"] + SMALL) == 0
    (rec,) = json.loads(capsys.readouterr().out)
    assert rec["scheme"] == "DFT"


def test_run_validation_error(capsys):
    assert main(["run", "--override", "schemes=[\"PCA-FCA:vertical\"]"]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert set(err) == {"error", "message"}


def test_run_missing_spec_file(capsys, tmp_path):
    assert main(["run", "--spec", str(tmp_path / "nope.json")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "OSError"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hybrid_precoding", "count-partitions", "--nt", "3", "--nrf", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("3 ")
