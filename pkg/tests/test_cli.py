import json

import pytest

from selmerforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_symbols_json(capsys):
    code, out = run(capsys, "symbols", "5", "7")
    assert code == 0
    assert json.loads(out) == {"a": 5, "b": 7, "jacobi": -1}


def test_symbols_with_place_tsv(capsys):
    code, out = run(capsys, "symbols", "5", "7", "--place", "7", "--format", "tsv")
    assert code == 0
    rows = dict(line.split("\t") for line in out.strip().splitlines())
    assert rows["jacobi"] == "-1"
    assert rows["hilbert"] == "-1"


def test_selmer_rank(capsys):
    code, out = run(capsys, "selmer", "rank", "--curve", "0,1,-1")
    assert code == 0
    assert json.loads(out) == {"dim": 2}
    code, out = run(capsys, "selmer", "rank", "--curve", "0,5,-5")
    assert json.loads(out) == {"dim": 3}


def test_selmer_chain_both_formats(capsys):
    for chain in ("7,1;11,0", "7:1,11:0"):
        code, out = run(capsys, "selmer", "chain", "--curve", "0,5,-5",
                        "--chain", chain)
        assert code == 0
        assert json.loads(out) == {"dims": [3, 1, 1]}


def test_parity_check(capsys):
    code, out = run(capsys, "parity", "check", "--curve=-17,11,23",
                    "--twist", "241")
    assert code == 0
    assert json.loads(out) == {"parityFlips": True, "ratio": -1}


def test_generic_check_negative(capsys):
    # verified-negative answers exit with code 1
    code, out = run(capsys, "generic", "check", "--curve", "0,1,-1", "--n", "2")
    assert code == 1
    assert json.loads(out)["generic"] is False


def test_finfield_solve(capsys):
    code, out = run(capsys, "finfield", "solve", "--q", "13",
                    "--c", "1,2,3,4,5,6", "--delta", "1,1,1", "--lam", "0,0,0")
    assert code == 0
    sol = json.loads(out)
    assert set(sol) >= {"u", "v", "s"}


def test_invalid_curve_exit_code(capsys):
    code, _ = run(capsys, "selmer", "rank", "--curve", "bogus")
    assert code == 3


def test_invalid_twist_exit_code(capsys):
    code, _ = run(capsys, "parity", "check", "--curve", "0,5,-5",
                  "--twist", "2161")
    assert code == 3


def test_verify_missing_file(capsys):
    code, _ = run(capsys, "verify", "/nonexistent/cert.json")
    assert code == 3


def test_verify_malformed_certificate(tmp_path, capsys):
    path = tmp_path / "cert.json"
    path.write_text('{"curve": [0, 1, -1]}')
    code, _ = run(capsys, "verify", str(path))
    assert code == 3


def test_env_variable_default(capsys, monkeypatch):
    monkeypatch.setenv("SELMERFORGE_FORMAT", "tsv")
    code, out = run(capsys, "selmer", "rank", "--curve", "0,5,-5")
    assert code == 0
    assert out.strip() == "dim\t3"
    # explicit flag overrides the environment
    code, out = run(capsys, "selmer", "rank", "--curve", "0,5,-5",
                    "--format", "json")
    assert json.loads(out) == {"dim": 3}


def test_out_flag_writes_file(tmp_path, capsys):
    path = tmp_path / "result.json"
    code, _ = run(capsys, "symbols", "3", "11", "--out", str(path))
    assert code == 0
    assert json.loads(path.read_text()) == {"a": 3, "b": 11, "jacobi": 1}
