# test_cli.py - Command-line front end
"""
Tests for run() on the shipped fixtures, the JSON report, exit codes and the
argparse entry point.
"""

import json
from fractions import Fraction

from ominal.cli import ERROR, Report, main, render, run, to_json
from ominal.config import REPORT_SCHEMA, Budget, BudgetLimits, load_session_config
from ominal.logic import equivalent
from ominal.sexpr import parse_formula

CONFIG = load_session_config(environ={})


# ===================== RUN =====================


def test_qe_report(crosses):
    report = run("qe between", crosses, CONFIG)
    assert report.exit_code == 0, f"unexpected error {report.error}"
    assert equivalent(report.result, parse_formula("(< x z)")), f"got {report.result}"
    data = report.as_dict()
    assert data["schema"] == REPORT_SCHEMA, "versioned schema"
    assert data["verdict"] == "computed", "constructions report 'computed'"
    assert isinstance(data["result"], str), "formulas serialize as S-expressions"


def test_properties_and_exit_codes(crosses):
    dd = run("check dd crosses", crosses, CONFIG)
    assert dd.verdict is False and dd.exit_code == 1, "crosses are not downward directed"
    assert len(dd.witnesses) == 1, "a pair of index points explains the failure"
    assert run("consistent crosses 2", crosses, CONFIG).verdict is True, "every two crosses meet"
    three = run(["consistent", "crosses", "3"], crosses, CONFIG)
    assert three.verdict is False and three.exit_code == 1, "three generic crosses do not meet"


def test_sat_and_entails(crosses):
    sat = run("sat diagonal", crosses, CONFIG)
    assert sat.verdict is True and len(sat.witnesses) == 1, "the diagonal is nonempty"
    no = run(["entails", "upper-half", "diagonal"], crosses, CONFIG)
    assert no.verdict is False and no.witnesses, "a countermodel is reported"
    assert run("dim diagonal", crosses, CONFIG).result == 1, "the diagonal is a line"


def test_input_errors(crosses):
    unknown = run("frobnicate", crosses, CONFIG)
    assert unknown.verdict == ERROR and unknown.exit_code == 2, "unknown command"
    missing = run("check dd nowhere", crosses, CONFIG)
    assert missing.error["type"] == "ResolutionError" and missing.exit_code == 2, "unknown family"
    precondition = run("fft fip crosses", crosses, CONFIG)
    assert precondition.error["type"] == "PreconditionError", "crosses are not 4-consistent"
    bad_formula = run(["qe", "(and (< x"], crosses, CONFIG)
    assert bad_formula.error["type"] == "ParseError" and "line" in bad_formula.error, "positions are reported"


def test_budget_exhaustion(crosses):
    report = run("qe between", crosses, CONFIG, Budget(BudgetLimits(qe_atoms=1)))
    assert report.exit_code == 3, f"expected budget exit, got {report.error}"
    assert report.budget["qe_atoms"]["limit"] == 1, "usage is reported with the error"


def test_disjoint_max_grows_its_limit(boxes):
    report = run("disjoint-max ten-shifts", boxes, CONFIG)
    assert report.result == {"k": 10, "exact": True}, f"[t, t+1] for t in [0, 10] has 10 disjoint members, got {report.result}"
    assert len(report.witnesses) == 10, "one index point per disjoint member"
    capped = run("disjoint-max ten-shifts --k-max 4", boxes, CONFIG)
    assert capped.result == {"k": 4, "exact": False}, "an explicit limit is not grown"


def test_curve_limit_command(boxes):
    report = run("curve-limit square diagonal --endpoint left", boxes, CONFIG)
    assert list(report.result) == ["left"], "one endpoint requested"
    assert equivalent(report.result["left"], parse_formula("(and (= x 0) (= y 0))")), "diagonal starts at the origin"


# ===================== SERIALIZATION =====================


def test_to_json_rationals():
    assert to_json(Fraction(1, 2)) == "1/2", "rationals are exact strings"
    assert to_json(Fraction(3)) == "3", "integers drop the denominator"
    assert to_json((Fraction(-1, 3), 2)) == ["-1/3", 2], "tuples become lists"


def test_render_formats():
    report = Report("qe true", {"formula": "true"}, result=Fraction(5, 4))
    data = json.loads(render(report, "json"))
    assert data["result"] == "5/4", "json report"
    text = render(report, "text")
    assert "result: 5/4" in text and "command: qe true" in text, f"text report:\n{text}"


# ===================== ENTRY POINT =====================


def test_main_json(capsys):
    code = main(["--format", "json", "fixture:crosses", "sat", "diagonal"])
    data = json.loads(capsys.readouterr().out)
    assert code == 0, "satisfiable"
    assert data["schema"] == REPORT_SCHEMA and data["verdict"] is True, f"unexpected report {data}"


def test_main_fixtures(capsys):
    assert main(["fixtures"]) == 0
    assert "a-topology" in capsys.readouterr().out.split(), "fixture names are listed"
    assert main(["fixtures", "crosses"]) == 0
    assert "(family crosses" in capsys.readouterr().out, "fixture text is printed"
    assert main(["fixtures", "nope"]) == 2, "unknown fixture"


def test_main_missing_document(capsys, tmp_path):
    code = main([str(tmp_path / "missing.sexp"), "qe", "true"])
    data = json.loads(capsys.readouterr().out)
    assert code == 2 and data["error"]["type"] == "ParseError", f"unexpected report {data}"


def test_main_document_file(capsys, tmp_path):
    path = tmp_path / "doc.sexp"
    path.write_text("(formula unit (< 0 x 1))\n", encoding="utf-8")
    code = main(["--mode", "dlo", str(path), "qe", "(exists (x) unit)"])
    data = json.loads(capsys.readouterr().out)
    assert code == 0 and data["result"] == "true", f"unexpected report {data}"
