import json
import subprocess
import sys

import pytest

from cqsdc.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_default(capsys):
    code, out, _ = run_cli(capsys, "run", "--message", "00", "--seed", "7")
    rep = json.loads(out)
    assert code == 0
    assert list(rep) == ["command", "config", "results", "paper_claim_audit"]
    assert rep["results"]["rounds"][0]["secret_out"] == "00"


def test_run_odd_message_is_usage_error(capsys):
    code, out, err = run_cli(capsys, "run", "--message", "0")
    assert code == 2 and out == "" and "usage error" in err


def test_bad_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["run", "--bogus"])
    assert e.value.code == 2


def test_groups_mismatch(capsys):
    assert run_cli(capsys, "run", "--message", "0011", "--groups", "3")[0] == 2


def test_run_deterministic(capsys):
    a = run_cli(capsys, "run", "--message", "1110", "--seed", "7")[1]
    b = run_cli(capsys, "run", "--message", "1110", "--seed", "7")[1]
    assert a == b


def test_abort_exit_code(capsys):
    codes = {run_cli(capsys, "run", "--message", "00", "--check-fraction", "0.9",
                     "--attack", "cnot", "--a", "0", "--b", "1", "--seed", str(s))[0] for s in range(3)}
    assert codes == {3}


def test_attack_cnot(capsys):
    code, out, _ = run_cli(capsys, "attack", "cnot", "--a", "0", "--b", "1", "--basis", "z", "--trials", "500")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["exact"]["value"] == 1.0
    assert rep["paper_claim_audit"][0]["agrees"] is True


def test_attack_intercept_matching_bases(capsys):
    out = run_cli(capsys, "attack", "intercept", "--eve-basis", "x", "--basis", "x", "--trials", "200")[1]
    assert json.loads(out)["results"]["exact"]["value"] == 0.0


def test_attack_entangle_identity(capsys):
    out = run_cli(capsys, "attack", "entangle", "--p", "identity", "--basis", "z", "--trials", "200")[1]
    assert json.loads(out)["results"]["exact"]["value"] == 0.0


def test_attack_disagreement_is_reported_not_fatal(capsys):
    code, out, _ = run_cli(capsys, "attack", "cnot", "--a", "0.7071067811865476",
                           "--b", "-0.7071067811865476", "--basis", "x", "--trials", "200")
    assert code == 0
    assert json.loads(out)["paper_claim_audit"][0]["agrees"] is False


def test_attack_bad_unitary(capsys):
    assert run_cli(capsys, "attack", "entangle", "--p", "1,1,0,1")[0] == 2


def test_verify(capsys):
    code, out, _ = run_cli(capsys, "verify")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["all_passed"]
    items = {i["name"]: i for i in rep["results"]["items"]}
    assert items["table3_rows"]["detail"]["matched"] == "32/32"
    assert items["posterior_alice_bits_only"]["detail"]["buckets"] == 4
    assert items["posterior_all_classical_bits"]["detail"]["buckets"] == 8
    assert rep["paper_claim_audit"]


def test_efficiency_json(capsys):
    rep = json.loads(run_cli(capsys, "efficiency")[1])
    rows = {r["protocol"]: r for r in rep["results"]["rows"]}
    assert (rows["Proposed protocol"]["eta1_percent"], rows["Proposed protocol"]["eta2_percent"]) == ("22.22", "33.33")


def test_text_format(capsys):
    out = run_cli(capsys, "efficiency", "--format", "text")[1]
    assert "results.rows[2].eta1_percent: \"22.22\"" in out


def test_json_roundtrip(capsys):
    out = run_cli(capsys, "run", "--message", "01")[1]
    assert json.dumps(json.loads(out), indent=2) + "\n" == out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "cqsdc", "efficiency"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["command"] == ["efficiency"]
