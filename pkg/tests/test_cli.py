import csv
import json
import subprocess
import sys

import pytest

from penbm.cli import main


def run(*args):
    return main([str(a) for a in args])


def test_sample_shape_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--kind", "ascent", "--method", "from-meander", "--n", 1000, "--m", 4096,
            "--seed", 42]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b, "--workers", 3) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert len(rows) == 1001 and len(rows[0]) == 4097
    man = json.loads((tmp_path / "a.csv.json").read_text())
    assert man["kind"] == "ascent" and man["n"] == 1000 and man["params"]["method"] == "from-meander"


def test_sample_weighted_manifest(tmp_path):
    out = tmp_path / "w.csv"
    assert run("sample", "--kind", "ascent", "--method", "co-ascent-reweight", "--n", 5, "--m", 16,
               "--out", out) == 0
    assert len(json.loads((tmp_path / "w.csv.json").read_text())["weights"]) == 5


def test_sample_domain_error(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert run("sample", "--kind", "williams-drift", "--h", 0.5, "--out", out) == 2
    assert "requires h < 0" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_partition(tmp_path, capsys):
    assert run("partition", "--nu", -1, "--h", 0, "--t", 20, 40, 60) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    dev = [abs(float(r["ratio"]) - 1) for r in rows]
    assert dev == sorted(dev, reverse=True) and dev[-1] < 0.05 and rows[0]["region"] == "L1"
    out = tmp_path / "p.csv"
    assert run("partition", "--nu", 0, "--h", 1, "--t", 4, 10, "--out", out) == 0
    for r in csv.DictReader(out.open()):
        assert float(r["log_exact"]) == pytest.approx(float(r["t"]) / 2, abs=1e-6)
    assert run("partition", "--nu", 0, "--h", 0) == 2


def test_verify_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "--experiment", "updown", "--experiment", "bridge", "--seed", 3,
               "--scale", 0.2, "--out", a) == 0
    assert run("verify", "--experiment", "updown", "--experiment", "bridge", "--seed", 3,
               "--scale", 0.2, "--out", b, "--workers", 2) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["pass"] and doc["seed"] == 3 and doc["n_reports"] == len(doc["reports"])
    assert doc["config"]["experiments"] == "updown,bridge"
    assert (tmp_path / "a.json.timing.json").exists()


def test_verify_config_file(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[verify]\ntheorem = 1.1\nnu = 2\nh = -1\nt_ladder = 10, 20\nn = 500\nm = 128\n"
                   f"seed = 1\nout = {tmp_path / 'r.json'}\n")
    code = run("verify", cfg)
    doc = json.loads((tmp_path / "r.json").read_text())
    assert code == (0 if doc["pass"] else 1)
    assert {r["experiment"] for r in doc["reports"]} >= {"theorem-1.1/L3/argmax-uniform"}


@pytest.mark.parametrize("text", ["[verify]\nbogus = 1\n", "[other]\nseed = 1\n",
                                  "[verify]\nseed = abc\n", "not an ini file",
                                  "[verify]\ntheorem = 1.2\nnu = -1\nh = 0\n",
                                  "[verify]\nsuite = nope\n"])
def test_verify_bad_config(tmp_path, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    out = tmp_path / "out.json"
    assert run("verify", cfg, "--out", out) == 2
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.ini"]


def test_verify_failure_exit_code(tmp_path):
    # the (-2, 1) partition ratio is still 9% off at t = 60, so this experiment fails
    assert run("verify", "--experiment", "partition-asymptotics", "--out", tmp_path / "r.json") == 1


def test_list_experiments(capsys):
    assert run("list-experiments") == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("theorem-1.1/L2\ttheorem-1.1\t") for line in lines)


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "penbm.cli", "list-experiments"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "pitman" in r.stdout
