import json
from pathlib import Path

import pytest

from pir.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_REJECTED, EXIT_USAGE, main

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
ACCEPTED = [
    "nil", "alloc_free", "client0_system", "client1_system", "client2_system", "client3",
    "client3_system", "heap_system", "client4_system", "infheap", "consistency_example", "leak",
]


def corpus(name):
    return str(CORPUS / f"{name}.pir")


def test_check_accepts(capsys):
    assert main(["check", corpus("nil")]) == EXIT_OK
    assert capsys.readouterr().out.startswith("ACCEPTED  derivation with 1 node(s)")


def test_check_rejects(capsys):
    assert main(["check", corpus("client_err_system")]) == EXIT_REJECTED
    assert capsys.readouterr().out.startswith("REJECTED")


def test_check_inconclusive(capsys):
    assert main(["check", corpus("heap_system"), "--budget", "5"]) == EXIT_INCONCLUSIVE
    assert capsys.readouterr().out.startswith("INCONCLUSIVE")


def test_derivation_to_stdout(capsys):
    assert main(["check", corpus("alloc_free"), "--derivation", "-"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("t") and "|-" in lines[1]


@pytest.mark.parametrize("name", ACCEPTED)
def test_self_certification(name, tmp_path, capsys):
    out = tmp_path / f"{name}.deriv"
    assert main(["check", corpus(name), "--derivation", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["validate", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("VALID")


def test_validate_rejects_corruption(tmp_path, capsys):
    out = tmp_path / "d"
    main(["check", corpus("alloc_free"), "--derivation", str(out)])
    text = out.read_text().replace("tFree", "tPaz", 1)
    out.write_text(text)
    capsys.readouterr()
    assert main(["validate", str(out)]) == EXIT_REJECTED
    assert "tPaz" in capsys.readouterr().out


def test_validate_format_error(tmp_path):
    bad = tmp_path / "empty"
    bad.write_text("")
    assert main(["validate", str(bad)]) == EXIT_USAGE


def test_run_text(capsys):
    assert main(["run", corpus("alloc_free")]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("step1  rAll") and out[-1] == "HALT terminated"


def test_run_json_is_deterministic(capsys):
    main(["run", corpus("client2_system"), "--seed", "3", "--json-trace"])
    first = capsys.readouterr().out
    main(["run", corpus("client2_system"), "--seed", "3", "--trace", "json"])
    assert capsys.readouterr().out == first
    records = [json.loads(line) for line in first.splitlines()]
    assert "halt" in records[-1]
    assert all(r["step"] == k for k, r in enumerate(records[:-1], 1))


def test_run_reports_error(capsys):
    codes = set()
    for seed in range(30):
        codes.add(main(["run", corpus("client_err_system"), "--seed", str(seed)]))
    capsys.readouterr()
    assert EXIT_REJECTED in codes


def test_explore_exit_codes(capsys):
    assert main(["explore", corpus("client_err_system")]) == EXIT_REJECTED
    assert "error trace 1" in capsys.readouterr().out
    assert main(["explore", corpus("nil")]) == EXIT_OK
    assert main(["explore", corpus("client4_system"), "--max-states", "20"]) == EXIT_INCONCLUSIVE


def test_fmt_round_trips(capsys, tmp_path):
    assert main(["fmt", corpus("client3_system")]) == EXIT_OK
    text = capsys.readouterr().out
    again = tmp_path / "again.pir"
    again.write_text(text)
    main(["fmt", str(again)])
    assert capsys.readouterr().out == text


def test_usage_errors(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.pir")]) == EXIT_USAGE
    bad = tmp_path / "bad.pir"
    bad.write_text("c!(.nil")
    assert main(["check", str(bad)]) == EXIT_USAGE
    assert "1:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["check"])
    assert exc.value.code == EXIT_USAGE


def test_run_rejects_negative_steps():
    assert main(["run", corpus("nil"), "--steps", "-1"]) == EXIT_USAGE
