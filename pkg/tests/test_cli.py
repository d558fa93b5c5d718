import json
import os
import subprocess
import sys

import numpy as np
import pytest

from divmoments.cli import main, parse_run_config, read_config, UsageError


def run_cli(args, tmp_path, capsys):
    rc = main(list(args) + ["--cache-dir", str(tmp_path / "cache")])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_delta_csv(tmp_path, capsys):
    rc, out, _ = run_cli(["delta", "--x", "1,2,10.5"], tmp_path, capsys)
    assert rc == 0
    lines = out.splitlines()
    assert lines[0].startswith("# delta: columns x, D, delta")
    assert lines[1] == "x,D,delta"
    assert len(lines) == 5
    assert lines[2].split(",")[1] == "1"


def test_json_schema(tmp_path, capsys):
    rc, out, _ = run_cli(["count", "--Ns", "3,3,3,3,3,3,3", "--signs", "++++---", "--delta", "0.1",
                          "--format", "json"], tmp_path, capsys)
    assert rc == 0
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["command"] == "count"
    assert doc["columns"] == ["lemma_id", "box", "delta", "count", "bound", "ratio"]
    assert doc["rows"][0][0] == 8


def test_gnuplot_format(tmp_path, capsys):
    rc, out, _ = run_cli(["bump", "--a", "1.2", "--delta", "0.2", "--smooth", "4", "--profile",
                          "--format", "gnuplot"], tmp_path, capsys)
    assert rc == 0
    data = np.loadtxt(out.splitlines())
    assert data.shape == (201, 2)
    assert data[:, 1].max() == 1.0


def test_output_file_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["report", "--kind", "voronoi", "--T", "2000", "--N", "8,16", "--samples", "256", "--seed", "7"]
    assert run_cli(args + ["-o", str(a)], tmp_path, capsys)[0] == 0
    assert run_cli(args + ["-o", str(b), "--threads", "3"], tmp_path, capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    run_cli(args[:-1] + ["8", "-o", str(c)], tmp_path, capsys)
    assert c.read_bytes() != a.read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# moment defaults\nk = 2\ngrid = 100,1000\nformat = json\n")
    rc, out, _ = run_cli(["moment", "--config", str(cfg)], tmp_path, capsys)
    assert rc == 0
    doc = json.loads(out)
    assert [r[0] for r in doc["rows"]] == [2.0, 2.0]
    rc, out, _ = run_cli(["moment", "--config", str(cfg), "--k", "3", "--format", "csv"], tmp_path, capsys)
    assert rc == 0 and out.splitlines()[2].startswith("3.0,")


def test_read_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("quad-order = 10\n\n# x\nabsolute = yes  # trailing\n")
    assert read_config(p) == {"quad_order": "10", "absolute": "yes"}
    p.write_text("novalue\n")
    with pytest.raises(UsageError):
        read_config(p)


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("k = 2\nbogus = 1\n")
    rc, _, err = run_cli(["moment", "--config", str(cfg)], tmp_path, capsys)
    assert rc == 2 and "bogus" in err


@pytest.mark.parametrize("args", [
    [],
    ["moment"],
    ["moment", "--k", "2", "--quad-order", "40"],
    ["count", "--Ns", "3,3", "--signs", "+-", "--delta", "0.1"],
    ["bump", "--a", "1", "--delta", "0.5", "--smooth", "2"],
    ["moment", "--k", "2", "--grid", "1e7"],
    ["delta", "--x", "abc"],
    ["series", "--k", "4", "--l", "2", "--y", "8", "--threads", "0"],
])
def test_usage_errors(args, tmp_path, capsys):
    assert run_cli(args, tmp_path, capsys)[0] == 2


def test_resource_error_exit_code(tmp_path, capsys):
    rc, _, err = run_cli(["count", "--Ns", "200,200,200,200,200", "--signs", "++---", "--delta", "0.1"],
                         tmp_path, capsys)
    assert rc == 3 and "resource" in err


def test_series_cache_reproduces_and_detects_corruption(tmp_path, capsys):
    args = ["series", "--k", "4", "--l", "2", "--y", "12"]
    rc, first, _ = run_cli(args, tmp_path, capsys)
    assert rc == 0
    files = [f for f in os.listdir(tmp_path / "cache") if f.endswith(".npy")]
    assert len(files) == 1
    rc, second, _ = run_cli(args, tmp_path, capsys)
    assert rc == 0 and second == first
    path = tmp_path / "cache" / files[0]
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0x01
    path.write_bytes(bytes(raw))
    rc, _, err = run_cli(args, tmp_path, capsys)
    assert rc == 4 and "integrity" in err


def test_sieve_cache_round_trip(tmp_path, capsys):
    rc, first, _ = run_cli(["sieve", "--X", "10000"], tmp_path, capsys)
    assert rc == 0
    assert first.splitlines()[2].split(",")[1] == "93668"
    rc, second, _ = run_cli(["sieve", "--X", "10000"], tmp_path, capsys)
    assert second == first


def test_global_flags_before_and_after_command(tmp_path):
    a = parse_run_config(["--format", "json", "delta", "--x", "5"])
    b = parse_run_config(["delta", "--x", "5", "--format", "json"])
    assert a.format == b.format == "json"
    assert a.parameters == b.parameters


def test_module_entry_point(tmp_path):
    env = dict(os.environ, DIVMOMENTS_CACHE_DIR=str(tmp_path))
    out = subprocess.run([sys.executable, "-m", "divmoments", "delta", "--x", "100"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0
    assert out.stdout.splitlines()[2].startswith("100.0,482,")
