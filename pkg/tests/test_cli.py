import json

import pytest
from click.testing import CliRunner

from motivic_bpgl.chartio import ChartDocument, parse_homotopy_tsv
from motivic_bpgl.cli import main, parse_window


@pytest.fixture
def run():
    runner = CliRunner()

    def _run(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return _run


def test_parse_window():
    assert parse_window("s=-2..4, w=0..1") == {"s": (-2, 4), "w": (0, 1)}
    assert parse_window(None) is None


def test_coefficients(run):
    res = run("coefficients", "--field", "R", "--prime", "2")
    assert res.exit_code == 0
    body = json.loads(res.output)
    assert [g["name"] for g in body["generators"]] == ["rho", "tau"]
    assert body["algebra_relations"] == ["tau0^2 = rho*tau1", "tau1^2 = 0"]


def test_ext_emits_valid_chart(run):
    res = run("ext", "--field", "C", "--module", "L:1", "--window", "s=-2..6,f=0..3,w=-2..3")
    assert res.exit_code == 0
    doc = ChartDocument.from_json(res.output)
    assert doc.meta["module"] == "L:1" and doc.classes


def test_ext_bimodule(run):
    res = run("ext", "--module", "LL:1:2", "--window", "s=-8..4,f=0..2,w=-4..2")
    assert res.exit_code == 0
    doc = ChartDocument.from_json(res.output)
    assert any(c.tag == "B" for c in doc.classes)


def test_decompose(run):
    body = json.loads(run("decompose", "--k", "4").output)
    assert body["core"] == "L(3)" and body["core_rank"] == 7
    body = json.loads(run("decompose", "--k", "3", "--n", "-1").output)
    assert body["core"] in ("M_p", "0")


def test_homotopy_tsv_and_variant(run):
    res = run("homotopy", "BPGL0", "--field", "Fq:3", "--window", "s=-2..2,f=0..8,w=-3..0")
    assert res.exit_code == 0
    assert parse_homotopy_tsv(res.output)[(-1, -2)] == "Z/8"
    res = run("homotopy", "BPGL0", "--field", "Fq:3", "--window", "s=-2..2,f=0..8,w=-3..0", "--variant", "literal")
    assert parse_homotopy_tsv(res.output)[(-1, -2)] == "Z/16"
    body = json.loads(run("homotopy", "BPGL1", "--format", "json", "--window", "s=0..4,f=0..4,w=0..2").output)
    assert body["meta"]["target"] == "BPGL1"


def test_cooperations_and_nline(run):
    res = run("cooperations", "BPGL1", "--k-max", "2", "--window", "s=-2..8,f=0..4,w=-2..4")
    assert res.exit_code == 0 and res.output.startswith("s\tw\tgroup")
    body = json.loads(run("nline", "--n", "2", "--max-total", "3", "--format", "json",
                          "--window", "s=0..10,f=0..4,w=0..4").output)
    assert body["summands"] == {"1,1": "L(0)", "1,2": "L(1)", "2,1": "L(1)"}


def test_render(run, tmp_path):
    src = tmp_path / "chart.json"
    out = tmp_path / "chart.svg"
    run("--out", str(src), "ext", "--module", "M", "--window", "s=0..4,f=0..3,w=-1..2")
    ChartDocument.from_json(src.read_text())
    res = run("--out", str(out), "render", str(src))
    assert res.exit_code == 0 and res.output == ""
    assert out.read_text().startswith("<?xml")


def test_config_file(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"homotopy": {"field": "Fq:3", "window": "s=-2..2,f=0..8,w=-3..0"}}))
    res = run("--config", str(cfg), "homotopy", "BPGL0")
    assert parse_homotopy_tsv(res.output)[(-1, -2)] == "Z/8"


def test_verify_exit_codes(run):
    res = run("verify", "collapse", "--window", "s=-6..6,f=0..4,w=-6..6")
    assert res.exit_code == 0
    assert json.loads(res.output)["collapse"]["ok"]
    res = run("verify", "soule", "--field", "Fq:5", "--window", "s=-2..2,f=0..10,w=-4..0")
    assert res.exit_code == 0


def test_unknown_flag_exits_2(run):
    res = CliRunner().invoke(main, ["ext", "--bogus"])
    assert res.exit_code == 2


@pytest.mark.parametrize("args", [["coefficients", "--field", "Fq:4"],
                                  ["ext", "--module", "Q:1"],
                                  ["ext", "--module", "LL:1:2", "--algebra", "E0"],
                                  ["decompose", "--k", "-1"]])
def test_errors_are_json_with_exit_1(run, args):
    res = run(*args)
    assert res.exit_code == 1
    body = json.loads(res.output)
    assert body["error"] == "ConfigurationError" and body["message"]


def test_bad_window_exits_2():
    res = CliRunner().invoke(main, ["ext", "--window", "s=4..0"])
    assert res.exit_code == 2
