"""CLI dispatch, exit codes, deterministic JSON reports."""

import json

import pytest

from hydroham import catalog
from hydroham.cli import main
from hydroham.fileio import dump_operator


@pytest.fixture
def gas_file(tmp_path):
    op, _ = catalog.instantiate("P_gas")
    path = tmp_path / "gas.json"
    path.write_text(json.dumps(dump_operator(op)))
    return str(path)


def test_check_gas_passes(gas_file, capsys):
    assert main(["check", gas_file]) == 0
    out = capsys.readouterr().out
    assert "overall: proven_pass" in out


def test_check_broken_operator(tmp_path, capsys):
    doc = {
        "dimension": 1, "components": 2, "variables": ["u1", "u2"],
        "metrics": {"x": [["0", "1"], ["0", "0"]]},
        "b": {"x": [[["0", "0"], ["0", "0"]], [["0", "0"], ["0", "0"]]]},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["check", str(path)]) == 1
    assert "FAIL a1" in capsys.readouterr().out


def test_fkt_quartic_fails_with_coefficient(tmp_path, capsys):
    path = tmp_path / "quartic.json"
    path.write_text(json.dumps({"f": "a^4 + b^2 + c^2"}))
    assert main(["fkt", str(path)]) == 1
    out = capsys.readouterr().out
    assert "-1152*a^2" in out and "da^4" in out


def test_fkt_boyer_finley_passes(tmp_path, capsys):
    path = tmp_path / "bf.json"
    path.write_text(json.dumps({"f": "a^2 + b^2 - 2*exp(c)"}))
    assert main(["fkt", str(path)]) == 0


def test_fkt_degenerate_inapplicable(tmp_path, capsys):
    path = tmp_path / "deg.json"
    path.write_text(json.dumps({"f": "a^2 + b^2"}))
    assert main(["fkt", str(path)]) == 2
    assert "inapplicable" in capsys.readouterr().out


def test_catalog_verify_all_row_count(capsys):
    assert main(["catalog", "verify", "--all"]) == 0
    out = capsys.readouterr().out
    rows = [l for l in out.splitlines() if l.split(":")[0].strip()
            in {e.id for e in catalog.list_entries()}]
    assert len(rows) == 31


def test_catalog_export_and_check(tmp_path, capsys):
    out_path = tmp_path / "op.json"
    assert main(["catalog", "export", "T2.7/rank2_P_5",
                 "-o", str(out_path)]) == 0
    capsys.readouterr()
    assert main(["check", str(out_path)]) == 0


def test_transform_command(tmp_path, gas_file, capsys):
    change = tmp_path / "change.json"
    change.write_text(json.dumps({
        "forward": {"u1": "v1", "u2": "v2", "u3": "v3 + v1"},
        "inverse": {"v1": "u1", "v2": "u2", "v3": "u3 - u1"},
    }))
    emitted = tmp_path / "pushed.json"
    assert main(["transform", gas_file, str(change),
                 "--emit", str(emitted)]) == 0
    capsys.readouterr()
    assert main(["check", str(emitted)]) == 0


def test_pencil_command(gas_file, capsys):
    assert main(["pencil", gas_file, "--compatibility"]) == 0
    out = capsys.readouterr().out
    assert "degenerate: True" in out and "generic rank: 2" in out


def test_system_and_dispersion(tmp_path, gas_file, capsys):
    density = tmp_path / "h.json"
    density.write_text(json.dumps({
        "h": "1/2*u1*(u2^2 + u3^2) + k(u1)",
        "functions": [{"name": "k", "args": ["u1"]}],
    }))
    assert main(["system", gas_file, str(density), "--classify"]) == 0
    out = capsys.readouterr().out
    assert "euler-lagrange-reducible" in out
    assert main(["dispersion", gas_file, str(density)]) == 0


def test_reduction_command(tmp_path, gas_file, capsys):
    density = tmp_path / "h.json"
    density.write_text(json.dumps({
        "h": "1/2*u1*(u2^2 + u3^2) + k(u1)",
        "functions": [{"name": "k", "args": ["u1"]}],
    }))
    cand = tmp_path / "cand.json"
    cand.write_text(json.dumps({
        "m": 1, "u": ["3", "1", "4"], "lambda": ["R1"], "mu": ["R1^2"],
    }))
    assert main(["reduction", gas_file, str(density), str(cand)]) == 0


def test_legendre_command(tmp_path, capsys):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({
        "h": "1/2*rho*(u^2 + v^2) + 1/2*rho^2",
        "inverse": "rhot - 1/2*(u^2 + v^2)",
    }))
    assert main(["legendre", str(path)]) == 0
    assert "f(a, b, c)" in capsys.readouterr().out


def test_json_reports_byte_identical(tmp_path, gas_file, capsys):
    assert main(["--format", "json", "--seed", "7", "check", gas_file]) == 0
    first = capsys.readouterr().out
    assert main(["--format", "json", "--seed", "7", "check", gas_file]) == 0
    second = capsys.readouterr().out
    assert first == second
    doc = json.loads(first)
    assert doc["overall"] == "proven_pass"
    assert list(doc) == sorted(doc)


def test_input_errors_exit_3(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", str(bad)]) == 3
    with pytest.raises(SystemExit) as err:
        main(["bogus-subcommand"])
    assert err.value.code == 3
    with pytest.raises(SystemExit) as err2:
        main(["--bogus-flag", "check", "x.json"])
    assert err2.value.code == 3
