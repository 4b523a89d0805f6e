"""CLI: parsing, validation, output formats, reproducibility."""

import json
import subprocess
import sys

import pytest

from expsum.cli import (
    CAPS,
    ParseError,
    ValidationError,
    load_config,
    main,
    parse_int_list,
)


def test_parse_int_list_forms():
    assert parse_int_list("3,5,7") == [3, 5, 7]
    assert parse_int_list("1..5") == [1, 2, 3, 4, 5]
    assert parse_int_list("1..3,9,20..21") == [1, 2, 3, 9, 20, 21]
    assert parse_int_list("7") == [7]


def test_parse_int_list_errors():
    with pytest.raises(ParseError):
        parse_int_list("a..b")
    with pytest.raises(ParseError):
        parse_int_list("1.5")
    with pytest.raises(ParseError):
        parse_int_list("")


def test_load_config_accepts_known_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"q": "3..5", "jobs": 2, "format": "csv"}))
    cfg = load_config(str(path))
    assert cfg["q"] == "3..5"


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"qq": 3}))
    with pytest.raises(ValidationError):
        load_config(str(path))


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("not json")
    with pytest.raises(ParseError):
        load_config(str(path))
    with pytest.raises(ParseError):
        load_config(str(tmp_path / "missing.json"))


def test_exit_code_2_on_bad_usage(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert main(["hyperkl3", "--config", str(bad)]) == 2
    assert main(["charsum-pp", "--p", "3", "--gamma-max", "99"]) == 2
    assert main(["voronoi", "--q", "0"]) == 2
    assert main(["kloosterman", "--q", str(CAPS["q"] + 1)]) == 2
    assert main(["df", "--p", "4"]) == 2  # not a prime
    capsys.readouterr()


def test_kloosterman_golden_first_rows(capsys):
    assert main(["kloosterman", "--q", "5"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0] == "q,m,value,split_value,abs_diff"
    assert out[1].startswith("5,0,-1.000000000000e+00,")
    assert len(out) == 6


def test_csv_json_same_content(capsys):
    assert main(["hyperkl3", "--q", "7"]) == 0
    csv_text = capsys.readouterr().out
    assert main(["hyperkl3", "--q", "7", "--format", "json"]) == 0
    json_text = capsys.readouterr().out
    rows = json.loads(json_text)
    header = csv_text.strip().split("\n")[0].split(",")
    first_csv = dict(zip(header, csv_text.strip().split("\n")[1].split(",")))
    assert {k: str(v) for k, v in rows[0].items()} == first_csv


def test_out_file_and_jobs_reproducibility(tmp_path):
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    assert main(["voronoi", "--q", "3,4", "--X", "50", "--out", str(f1)]) == 0
    assert main(
        ["voronoi", "--q", "3,4", "--X", "50", "--out", str(f2), "--jobs", "4"]
    ) == 0
    assert f1.read_bytes() == f2.read_bytes()
    assert len(f1.read_bytes()) > 0


def test_charsum_prime_runs(capsys):
    assert main(["charsum-prime", "--p", "5"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0].startswith("p,s1,t1,s2,t2,lam1,lam2,m,value,completed")
    assert len(out) == 26


def test_distribution_runs(capsys):
    assert main(["distribution", "--q", "3,4", "--X", "1000"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0] == "X,q,a,ap_sum,coprime_mean,delta,max_abs_delta,slope_fit"
    stars = [line for line in out[1:] if line.split(",")[2] == "*"]
    assert len(stars) == 2


def test_bilinear_csv_shape(capsys):
    assert main(["bilinear", "--q", "27", "--N", "2"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0].startswith("q,p,M,N,abs_S,trivial")
    assert len(out) == 2


def test_glue_runs(capsys):
    assert main(["glue", "--q", "15"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0] == "d,q,re,im,bound,ratio,crt_residual,active_k"
    # 15 has four squarefree divisors: 1, 3, 5, 15
    assert len(out) == 5


def test_timings_go_to_stderr_not_stdout(capsys):
    assert main(["hyperkl3", "--q", "5"]) == 0
    captured = capsys.readouterr()
    assert "[time]" not in captured.out
    assert "[time]" in captured.err


def test_module_invocation_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "expsum.cli", "kloosterman", "--q", "5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("q,m,value")
