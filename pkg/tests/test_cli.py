"""Problem files, hierarchy runs, reports and the command-line contract."""

import dataclasses
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ncpoly.cli import (ParseError, RunFlags, RunReport, emit_report, format_problem,
                        parse_problem, run)
from ncpoly.problems import (FermionSpec, bell_problem, builtin_corpus, chsh_scenario,
                             fermion_problem, hermitize_two_body)
from ncpoly.sdp import parse_sdpa

CORPUS = builtin_corpus()

EXAMPLE = """\
# worked example
vars x1 x2 hermitian
rule x1^2 = x1
obj: x1*x2 + x2*x1
constraint: -x2^2 + x2 + 1/2 >= 0
"""

GENERALIZED = """\
vars x1 x2 hermitian
rule x1^2 = x1
objective: x1*x2 + x2*x1
constraint: -x2^2 + x2 + 1/2 >= 0
ket0: 3*x1 + 2*x2 - 1
expect>=0: -x1 + 1/3
"""

INFEASIBLE = """\
vars x hermitian
objective: x
constraint: x >= 1
constraint: x <= -1
ball: 4
"""


def same(p, q):
    return dataclasses.replace(p, name="") == dataclasses.replace(q, name="")


# --- parsing -------------------------------------------------------------------

def test_parse_example_files_match_corpus():
    assert same(parse_problem(EXAMPLE), CORPUS[0].problem)
    assert same(parse_problem(GENERALIZED), CORPUS[2].problem)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError):
        parse_problem("vars x1 hermitian\n")
    with pytest.raises(ParseError):
        parse_problem("vars x1 hermitian\nobjective:\n")
    with pytest.raises(ParseError) as err:
        parse_problem("vars x1 hermitian\nobjective: x1 + y2\n")
    assert err.value.line == 2 and err.value.col > 1
    with pytest.raises(ParseError) as err:
        parse_problem("vars a operator\nobjective: a\n")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        parse_problem("vars x1 hermitian\nobjective: x1 +* x1\n")


def test_parse_operators_and_shorthands():
    p = parse_problem("vars a operator\nobjective: a'*a + a*a'\nball: 1\n")
    assert p.alphabet.size == 2
    q = parse_problem("vars x y hermitian\nidempotent x y\ncommute x | y\n"
                      "maximize: x*y + y*x\narchimedean\n")
    assert q.sense == "max" and len(q.rewrite) == 3


@pytest.mark.parametrize("problem", [e.problem for e in CORPUS] + [
    bell_problem(chsh_scenario()), bell_problem(chsh_scenario(), classical=True),
    fermion_problem(FermionSpec(3, 2, h=hermitize_two_body(
        np.random.default_rng(0).normal(size=(3,) * 4))))])
def test_print_parse_round_trip(problem):
    text = format_problem(problem)
    back = parse_problem(text)
    assert same(back, problem)
    assert format_problem(back) == text


# --- runs ----------------------------------------------------------------------

def test_run_worked_examples():
    for entry, value in ((CORPUS[0], -0.75), (CORPUS[2], -2 / 3)):
        rep = run(entry.problem, 2, RunFlags(extract=True, certify=True))
        assert [r["k"] for r in rep.records] == [1, 2]
        for r in rep.records:
            assert r["primal_obj"] == pytest.approx(value, abs=1e-6)
        assert rep.records[-1]["flat"] is True
        assert rep.optimizer["dimension"] == 2 and rep.optimizer["passed"]
        assert rep.certificate["lambda"] == pytest.approx(value, abs=1e-6)
        assert rep.solved


def test_run_chsh():
    rep = run(bell_problem(chsh_scenario()), 1)
    assert rep.records[0]["primal_obj"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert rep.records[0]["flat"] is None


def test_stop_on_flat_and_parallel_orders():
    rep = run(CORPUS[0].problem, 3, RunFlags(stop_on_flat=True))
    assert [r["k"] for r in rep.records] == [1, 2]
    par = run(CORPUS[0].problem, 3, RunFlags(parallel_orders=True))
    seq = run(CORPUS[0].problem, 3)
    assert [r["primal_obj"] for r in par.records] == pytest.approx(
        [r["primal_obj"] for r in seq.records], abs=1e-9)


def test_monotonicity_warning():
    rep = RunReport("x", "min", 1, 2, 0)
    from ncpoly.cli import _check_monotone
    recs = [{"k": 1, "primal_obj": 0.0, "status": "optimal"},
            {"k": 2, "primal_obj": -1.0, "status": "optimal"}]
    _check_monotone(recs, CORPUS[0].problem, rep)
    assert any("accuracy" in w for w in rep.warnings)


def test_sdpa_export(tmp_path):
    run(CORPUS[0].problem, 2, RunFlags(export_sdpa=str(tmp_path / "ex_{k}.dat-s")))
    data = parse_sdpa((tmp_path / "ex_1.dat-s").read_text())
    assert data.num_vars == 5 and data.block_sizes == [3, 1, -2]
    assert (tmp_path / "ex_2.dat-s").exists()


# --- reports -------------------------------------------------------------------

def test_json_report():
    rep = run(CORPUS[0].problem, 2, RunFlags(extract=True))
    text = emit_report(rep, "json")
    assert '"flat": true' in text and '"dimension": 2' in text
    data = json.loads(text)
    assert json.dumps(data, sort_keys=True, indent=2) == text
    assert data["records"][1]["ranks"] == [2, 2]


def test_empty_run_and_table():
    rep = run(CORPUS[0].problem, 0)
    assert json.loads(emit_report(rep, "json"))["records"] == []
    table = emit_report(run(CORPUS[0].problem, 3), "table").splitlines()
    rows = [l for l in table if l.lstrip()[:1].isdigit()]
    assert len(rows) == 3
    widths = {len(l) for l in table[1:3]}
    assert len(widths) == 1


# --- command line ----------------------------------------------------------------

def cli(*args, stdin=None):
    return subprocess.run([sys.executable, "-m", "ncpoly", *args], input=stdin,
                          capture_output=True, text=True, timeout=300)


def test_exit_codes(tmp_path):
    good = tmp_path / "ex.txt"
    good.write_text(EXAMPLE)
    out = cli(str(good), "-k", "2", "--extract", "--certify")
    assert out.returncode == 0, out.stderr
    data = json.loads(out.stdout)
    assert data["optimizer"]["dimension"] == 2
    assert data["records"][-1]["primal_obj"] == pytest.approx(-0.75, abs=1e-6)
    bad = cli("-", stdin="vars x hermitian\nobjective: x + z\n")
    assert bad.returncode == 2 and "line 2" in bad.stderr
    assert cli(str(tmp_path / "missing.txt")).returncode == 2
    assert cli("-", stdin=INFEASIBLE).returncode == 3


def test_table_format_from_stdin():
    out = cli("-", "-k", "2", "--format", "table", stdin=GENERALIZED)
    assert out.returncode == 0
    assert "-0.66666667" in out.stdout
