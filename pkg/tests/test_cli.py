import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from probeq.cli import fixture_text, main, parse_word
from probeq.documents import print_document

from helpers import rand_weighted, SMALL_VPA_ALPHABET as AB, rand_vpa


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_parse_word():
    assert parse_word("") == ()
    assert parse_word("ab") == ("a", "b")
    assert parse_word("c i r") == ("c", "i", "r")
    assert parse_word("c,i ,r") == ("c", "i", "r")


def test_fig2_fixtures_equivalent(capsys):
    code, rep = report(capsys, "cost-equiv", "fig2-B", "fig2-C", "--seed", "7")
    assert code == 0 and rep["verdict"] == "probably-equivalent"
    code, rep = report(capsys, "cost-equiv", "fig2-B.json", "fig2-C", "--mode", "deterministic")
    assert code == 0 and rep["verdict"] == "equivalent"


def test_squaring_fixtures(capsys):
    assert run(capsys, "acit", "sq10", "sq10")[0] == 0
    code, rep = report(capsys, "acit", "sq10", "sq10-plus1")
    assert code == 1 and rep["verdict"] == "unequal"


def test_output_is_deterministic(capsys):
    outs = {run(capsys, "cost-equiv", "fig2-B", "fig2-C", "--seed", "3")[1] for _ in range(3)}
    assert len(outs) == 1
    outs = {run(capsys, "acit", "sq10", "sq10-plus1", "--seed", "5")[1] for _ in range(3)}
    assert len(outs) == 1


def test_witness_is_confirmed_by_eval(capsys, tmp_path):
    r = random.Random(0)
    found = 0
    for k in range(20):
        a, b = rand_weighted(r, 2, "ab"), rand_weighted(r, 2, "ab")
        pa, pb = tmp_path / f"a{k}.json", tmp_path / f"b{k}.json"
        pa.write_text(print_document(a))
        pb.write_text(print_document(b))
        for mode in ("randomized", "deterministic"):
            code, rep = report(capsys, "equiv", str(pa), str(pb), "--mode", mode)
            if code == 1:
                found += 1
                word = " ".join(rep["witness"])
                code2, ev = report(capsys, "eval", str(pa), str(pb), "--word", word)
                assert code2 == 1 and ev["values"][0] != ev["values"][1]
    assert found > 0


def test_eval_cost_point(capsys):
    code, rep = report(capsys, "eval", "fig2-B", "fig2-C", "--point", "3")
    assert code == 0 and rep["values"][0] == rep["values"][1]
    assert run(capsys, "eval", "fig2-B")[0] == 2


def test_distribution(capsys):
    code, rep = report(capsys, "distribution", "fig2-B", "--window=-3:3")
    assert code == 0
    assert rep["window"] == [[-3, 3]]
    coeffs = {tuple(v)[0]: c for v, c in rep["coefficients"]}
    # weight-1 paths: stop at 0 after one loop (1/12) plus the detours through state 1 (1/24)
    assert abs(Fraction(coeffs[1]) - Fraction(1, 8)) <= Fraction(rep["tail_bound"])
    assert Fraction(rep["tail_bound"]) <= Fraction(1, 10 ** 6)


def test_vpa_commands(capsys, tmp_path):
    v = rand_vpa(random.Random(1), 2, AB)
    p = tmp_path / "v.json"
    p.write_text(print_document(v))
    code, rep = report(capsys, "vpa-equiv", str(p), str(p))
    assert code == 0 and rep["verdict"] == "probably-equivalent"
    code, out, _ = run(capsys, "vpa-to-circuit", str(p), "--k", "1")
    assert code == 0 and json.loads(out)["kind"] == "circuit"
    code, out, _ = run(capsys, "circuit-to-vpa", "sq10")
    assert code == 0 and json.loads(out)["kind"] == "vpa"


def test_usage_errors(capsys):
    assert run(capsys, "equiv", "nofile", "fig2-B")[0] == 2
    assert run(capsys, "equiv", "fig2-B", "fig2-C")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "distribution", "fig2-B", "--window", "x")[0] == 2


def test_budget_exit(capsys):
    code, _, err = run(capsys, "acit", "sq10", "sq10", "--mode", "deterministic", "--budget", "10")
    assert code == 3 and "budget" in err


@pytest.mark.parametrize("text,code", [
    ('{"kind": "weighted", "version": 1, "states": 1, "alphabet": ["a"], "initial": [0.5], '
     '"final": ["1"], "transitions": {}}', 2),
    ("{not json", 2),
])
def test_bad_documents_exit_2(text, code):
    proc = subprocess.run([sys.executable, "-m", "probeq", "zeroness", "-"], input=text,
                          capture_output=True, text=True)
    assert proc.returncode == code
    assert proc.stderr.startswith("error:")


def test_stdin_document():
    proc = subprocess.run([sys.executable, "-m", "probeq", "acit", "-", "sq10"],
                          input=fixture_text("sq10"), capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "probably-equal"
