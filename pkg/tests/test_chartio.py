import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from motivic_bpgl.adams import differential_rules, e2_page, homotopy, run_ss
from motivic_bpgl.chartio import (ChartClass, ChartDocument, ChartEdge, document_from_chart, document_from_page,
                                  module_from_json, module_to_json, parse_homotopy_tsv, render_svg)
from motivic_bpgl.comodules import _pair, brown_gitler, lightning_flash, unit_module
from motivic_bpgl.ext import ext_chart
from motivic_bpgl.grading import ConfigurationError, FieldSpec

SVG = "{http://www.w3.org/2000/svg}"

classes = st.builds(ChartClass, st.integers(-10, 10), st.integers(0, 6), st.integers(-6, 6),
                    st.text(max_size=8), st.sampled_from(["", "B", "[k=1]"]),
                    st.one_of(st.none(), st.integers(1, 5)))


@st.composite
def documents(draw):
    cs = draw(st.lists(classes, max_size=8))
    edges = []
    for a in range(len(cs)):
        for b in range(len(cs)):
            d = (cs[b].s - cs[a].s, cs[b].f - cs[a].f, cs[b].w - cs[a].w)
            if d == (0, 1, 0) and draw(st.booleans()):
                edges.append(ChartEdge(a, b, "v0"))
            elif d[0] == -1 and d[2] == 0 and d[1] >= 2 and draw(st.booleans()):
                edges.append(ChartEdge(a, b, f"d{d[1]}"))
    return ChartDocument({"op": "test"}, cs, edges)


@given(documents())
def test_json_round_trip(doc):
    again = ChartDocument.from_json(doc.to_json())
    assert again == doc
    assert again.to_json() == doc.to_json()


@given(documents())
def test_svg_is_deterministic_and_well_formed(doc):
    a, b = render_svg(doc), render_svg(doc)
    assert a == b
    root = ET.fromstring(a)
    assert root.tag == SVG + "svg"


def test_validate_rejects_bad_edges():
    cs = [ChartClass(0, 0, 0), ChartClass(0, 1, 0)]
    with pytest.raises(ConfigurationError):
        ChartDocument({}, cs, [ChartEdge(0, 5, "v0")]).validate()
    with pytest.raises(ConfigurationError):
        ChartDocument({}, cs, [ChartEdge(0, 1, "d2")]).validate()
    with pytest.raises(ConfigurationError):
        ChartDocument({}, cs, [ChartEdge(0, 1, "sq")]).validate()
    ChartDocument({}, cs, [ChartEdge(0, 1, "v0")]).validate()


def test_schema_is_checked():
    with pytest.raises(ConfigurationError):
        ChartDocument.from_json('{"schema": "chart/v0"}')


def test_empty_document_renders():
    root = ET.fromstring(render_svg(ChartDocument()))
    assert root.find(f"{SVG}g[@class='classes']") is not None


def test_single_tower_over_C():
    win = {"s": (0, 0), "f": (0, 4), "w": (0, 0)}
    chart = ext_chart(unit_module(_pair(FieldSpec("C", 2), 0)), win)
    doc = document_from_chart(chart)
    assert [(c.s, c.f, c.w) for c in doc.classes] == [(0, f, 0) for f in range(5)]
    assert sorted((e.source, e.target, e.kind) for e in doc.edges) == [(f, f + 1, "v0") for f in range(4)]
    page = e2_page(FieldSpec("C", 2), "BPGL0", win)
    svg = render_svg(document_from_page(page))
    root = ET.fromstring(svg)
    assert len(root.findall(f".//{SVG}circle")) == 1
    assert len(root.findall(f".//{SVG}polygon")) == 1


def test_chart_edges_match_product_degrees():
    spec = FieldSpec("R", 2)
    chart = ext_chart(lightning_flash(spec, 1), {"s": (-3, 6), "f": (0, 3), "w": (-3, 3)})
    doc = document_from_chart(chart)
    kinds = {e.kind for e in doc.edges}
    assert {"v0", "v1", "rho"} <= kinds
    assert doc.meta["spec"] == spec.to_dict() and doc.meta["prime"] == 2


def test_page_document_has_differentials():
    spec = FieldSpec("F", 2, 5)
    win = {"s": (-2, 2), "f": (0, 6), "w": (-4, 0)}
    einf = run_ss(e2_page(spec, "BPGL0", win), differential_rules(spec))
    doc = document_from_page(einf)
    kinds = sorted({e.kind for e in doc.edges})
    assert kinds == ["d2", "d3", "d4"]
    live = document_from_page(einf, include_dead=False)
    assert len(live.classes) < len(doc.classes)


@pytest.mark.parametrize("M", [lambda: lightning_flash(FieldSpec("F", 3, 7), 2),
                               lambda: brown_gitler(FieldSpec("R", 2), 0, 4)])
def test_module_json_round_trip(M):
    M = M()
    N = module_from_json(module_to_json(M))
    assert (N.degrees, N.labels, N.tag, N.n) == (M.degrees, M.labels, M.tag, M.n)
    assert {E: rows for E, rows in N.action.items() if any(rows)} == {E: rows for E, rows in M.action.items() if any(rows)}
    N.check()


def test_homotopy_tsv_parses():
    h = homotopy(FieldSpec("F", 2, 3), window={"s": (-2, 2), "f": (0, 8), "w": (-4, 0)})
    table = parse_homotopy_tsv(h.to_tsv())
    assert table[(0, 0)] == "Z_2"
    assert table[(-1, -2)] == "Z/8"
    assert table[(-1, -4)] == "Z/16"
