import json
import math

import pytest
from hypothesis import given

from anchorcrc import AnalysisConfig, ValidationError, analyze, run_analysis
from anchorcrc import cli
from anchorcrc.formats import (
    parse_counts,
    parse_records,
    render_counts,
    render_reports,
    render_summary,
    round_half_away,
)
from anchorcrc.simulation import SimScenario, run_scenario
from anchorcrc.variance import var5

from .conftest import CRISP, tables

CRISP_KV = "n15 = 169\nn2 = 12\nn4 = 52\nn6 = 19\nn37 = 777\nn_tot = 1029\n"


def _crisp_csv(stratum=None):
    rows = ["id,stream1_positive,in_anchor,anchor_result" + (",stratum" if stratum else "")]
    groups = [(12, 1, 1, "1"), (52, 1, 0, ""), (19, 0, 1, "1"), (166, 0, 1, "0"), (3, 1, 1, "0")]
    i = 0
    for count, s1, anchor, result in groups:
        for _ in range(count):
            extra = f",{stratum}" if stratum else ""
            rows.append(f"r{i},{s1},{anchor},{result}{extra}")
            i += 1
    return "\n".join(rows) + "\n"


def test_parse_counts_kv_and_json():
    assert parse_counts(CRISP_KV) == CRISP
    assert parse_counts(json.dumps(CRISP.to_dict())) == CRISP


def test_parse_counts_errors():
    with pytest.raises(ValidationError, match="sum"):
        parse_counts(CRISP_KV.replace("n37 = 777", "n37 = 770"))
    with pytest.raises(ValidationError, match="missing"):
        parse_counts("n15 = 1\nn2 = 2\n")


@given(tables())
def test_counts_round_trip(t):
    for fmt in ("json", "kv"):
        once = render_counts(parse_counts(render_counts(t, fmt)), fmt)
        assert once == render_counts(t, fmt)
        assert parse_counts(once) == t


def test_parse_records(tmp_path):
    path = tmp_path / "crisp.csv"
    path.write_text(_crisp_csv())
    records = parse_records(path)
    assert len(records) == 252
    with pytest.raises(ValidationError, match="duplicate"):
        parse_records("id,stream1_positive,in_anchor,anchor_result\na,1,0,\na,0,0,\n")
    with pytest.raises(ValidationError, match="line 2"):
        parse_records("id,stream1_positive,in_anchor,anchor_result\na,1,1,\n")
    with pytest.raises(ValidationError, match="non-boolean"):
        parse_records("id,stream1_positive,in_anchor,anchor_result\na,maybe,0,\n")


def test_unvalidated_flags_excluded():
    text = "id,stream1_positive,in_anchor,anchor_result,validated\na,1,0,,0\nb,1,0,,1\n"
    records, excluded = parse_records(text, with_exclusions=True)
    assert excluded == 1
    assert [r.stream1_positive for r in records] == [False, True]


@pytest.mark.parametrize(
    "x, expected", [(0.05, "0.1"), (0.15, "0.2"), (-0.25, "-0.3"), (161.5266, "161.5"), (math.nan, "NA")]
)
def test_rounding(x, expected):
    assert round_half_away(x) == expected


def test_single_stratum_equals_unstratified(tmp_path):
    plain = tmp_path / "plain.csv"
    plain.write_text(_crisp_csv())
    strat = tmp_path / "strat.csv"
    strat.write_text(_crisp_csv(stratum="A"))
    common = dict(mode="records", draws=2000, seed=3, output_format="json")
    a = run_analysis(AnalysisConfig(input=plain, population=1029, **common))
    b = run_analysis(
        AnalysisConfig(input=strat, population={"A": 1029}, stratify_by="stratum", **common)
    )
    assert a == b


def test_two_strata_sum():
    a = CRISP.__class__(100, 4, 30, 15, 400, 549)
    b = CRISP.__class__(69, 8, 22, 4, 377, 480)
    n5 = analyze({"a": a, "b": b}, draws=500, seed=1)[0]
    # by hand: 34 + 15*515/115 + 30 + 4*450/73
    assert n5.point_N == pytest.approx(34 + 15 * 515 / 115 + 30 + 4 * 450 / 73)
    for variant in ("unadjusted", "fpc1", "fpc2"):
        expected = var5(a, variant).var_N + var5(b, variant).var_N
        assert n5.se[variant] ** 2 == pytest.approx(expected)
    chap = analyze({"a": a, "b": b}, draws=0, methods=("chapman",))[0]
    assert "logit" not in chap.intervals and chap.diagnostics


def test_render_reports_formats():
    reports = analyze(CRISP, draws=1000, seed=0)
    doc = json.loads(render_reports(reports, "json"))
    assert [r["method"] for r in doc] == ["N5", "RS", "Chapman"]
    assert doc[0]["point"] == reports[0].point_N
    md = render_reports(reports, "markdown")
    assert "161.5 [22.3], [19.1], [20.3]" in md
    assert render_reports(reports, "csv").startswith("method,quantity,variant,value")


def test_tiny_simulation_schema():
    s = SimScenario(n_tot=50, n_true=10, anchor_size=15, credible_draws=200)
    doc = json.loads(render_summary(run_scenario(s, replications=30), "json"))
    assert set(doc) == {"scenario", "replications", "estimators", "fallback_counts"}
    assert set(doc["estimators"]) == {"N5", "RS", "Chapman"}
    for est in doc["estimators"].values():
        assert set(est) == {"mean", "sd", "avg_se", "coverage", "avg_width"}
        for cov in est["coverage"].values():
            assert cov is None or 0.0 <= cov <= 1.0
        for width in est["avg_width"].values():
            assert width is None or width >= 0.0


def test_one_replication_renders_na():
    s = SimScenario(n_tot=50, n_true=10, anchor_size=15, credible_draws=50)
    summary = run_scenario(s, replications=1)
    assert "(NA)" in render_summary(summary, "markdown")
    assert json.loads(render_summary(summary, "json"))["estimators"]["N5"]["sd"] is None


def test_cli_estimate(tmp_path, capsys):
    path = tmp_path / "crisp.txt"
    path.write_text(CRISP_KV)
    assert cli.main(["estimate", "--input", str(path), "--format", "json", "--draws", "500"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc[0]["point"] == pytest.approx(161.5266, abs=1e-4)


def test_cli_tabulate(tmp_path, capsys):
    path = tmp_path / "crisp.csv"
    path.write_text(_crisp_csv())
    assert cli.main(["tabulate", "--input", str(path), "--population", "1029"]) == 0
    assert parse_counts(capsys.readouterr().out) == CRISP


def test_cli_validation_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(CRISP_KV.replace("n_tot = 1029", "n_tot = 1000"))
    assert cli.main(["estimate", "--input", str(path)]) == 2
    assert "sum" in capsys.readouterr().err
    assert cli.main(["estimate", "--input", str(tmp_path / "missing.txt")]) == 2
    assert cli.main(["simulate", "--preset", "nope"]) == 2


def test_cli_numeric_exit_code(monkeypatch, tmp_path):
    def boom(args):
        raise ZeroDivisionError("degenerate")

    monkeypatch.setattr(cli, "cmd_presets", boom)
    assert cli.main(["presets"]) == 3


def test_cli_presets_and_simulate(capsys, monkeypatch):
    assert cli.main(["presets"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 60
    monkeypatch.setenv(cli.SEED_ENV, "5")
    argv = ["simulate", "--n-tot", "50", "--n-true", "10", "--anchor-size", "15",
            "--replications", "5", "--draws", "100", "--format", "json"]
    assert cli.main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scenario"]["master_seed"] == 5 and doc["replications"] == 5
