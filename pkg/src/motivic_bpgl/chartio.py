"""Chart documents, JSON round-trips, SVG rendering and TSV tables."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from html import escape

from .grading import ConfigurationError, FieldSpec

SCHEMA = "chart/v1"
MODULE_SCHEMA = "module/v1"
EDGE_KINDS = ("v0", "v1", "rho", "tau", "theta", "u", "gamma", "zeta")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#393b79", "#637939")


@dataclass(frozen=True)
class ChartClass:
    s: int
    f: int
    w: int
    label: str = ""
    tag: str = ""
    extent: int | None = 1  # length of the v_0-tower this entry stands for; None = infinite


@dataclass(frozen=True)
class ChartEdge:
    source: int
    target: int
    kind: str  # one of EDGE_KINDS or "d<r>"


@dataclass
class ChartDocument:
    meta: dict = field(default_factory=dict)
    classes: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    @property
    def spec(self) -> FieldSpec | None:
        sp = self.meta.get("spec")
        return None if sp is None else FieldSpec(sp["field"], sp["p"], sp.get("q"))

    def validate(self) -> None:
        """Endpoints exist and every edge moves by its kind's degree."""
        n = len(self.classes)
        spec = self.spec
        for e in self.edges:
            if not (0 <= e.source < n and 0 <= e.target < n):
                raise ConfigurationError(f"edge {e} has a missing endpoint")
            a, b = self.classes[e.source], self.classes[e.target]
            d = (b.s - a.s, b.f - a.f, b.w - a.w)
            if not _degree_ok(e.kind, d, spec):
                raise ConfigurationError(f"edge kind {e.kind} does not fit the shift {d}")

    def to_json(self) -> str:
        body = {"schema": SCHEMA, "meta": self.meta,
                "classes": [asdict(c) for c in self.classes],
                "edges": [asdict(e) for e in self.edges]}
        return json.dumps(body, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChartDocument":
        body = json.loads(text)
        if body.get("schema") != SCHEMA:
            raise ConfigurationError(f"expected schema {SCHEMA}, got {body.get('schema')!r}")
        doc = cls(body.get("meta", {}), [ChartClass(**c) for c in body.get("classes", [])],
                  [ChartEdge(**e) for e in body.get("edges", [])])
        doc.validate()
        return doc


def _generator_degrees(spec: FieldSpec | None) -> dict:
    if spec is None:
        return {}
    p = spec.p
    out = {"v0": (0, 1, 0), "v1": (2 * p - 2, 1, p - 1)}
    if spec.field == "C":
        out["tau"] = (0, 0, -1)
    elif spec.field == "R" and p == 2:
        out.update(rho=(-1, 0, -1), tau=(0, 0, -1))
    elif spec.field == "R":
        out["theta"] = (0, 0, -2)
    else:
        i = spec.i
        y = "tau" if p == 2 else "zeta"
        x = "u" if spec.bockstein_trivial else ("rho" if p == 2 else "gamma")
        out.update({x: (-1, 0, -i), y: (0, 0, -i)})
    return out


def _degree_ok(kind: str, d: tuple, spec: FieldSpec | None) -> bool:
    if kind.startswith("d") and kind[1:].isdigit():
        return d == (-1, int(kind[1:]), 0)
    if kind not in EDGE_KINDS:
        return False
    gen = _generator_degrees(spec).get(kind)
    if gen is None:
        return spec is None
    if kind in ("v0", "v1"):
        return d == gen
    # coefficient edges may stand for a power of the generator
    for e in range(1, 65):
        if d == tuple(e * x for x in gen):
            return True
    return False


def _kind(name: str) -> str:
    base = name.split("^")[0]
    return base if base in EDGE_KINDS else name


def _meta(spec: FieldSpec, window: dict, op: str, extra: dict | None = None) -> dict:
    meta = {"spec": spec.to_dict(), "prime": spec.p, "window": {k: list(v) for k, v in window.items()},
            "op": op}
    meta.update(extra or {})
    return meta


def document_from_chart(chart) -> ChartDocument:
    """One entry per basis class, with edges from every recorded product."""
    classes, where = [], {}
    for deg in sorted(chart.dims):
        for j in range(chart.dims[deg]):
            labels = chart.labels.get(deg, [])
            tags = chart.tags.get(deg, [])
            where[(deg, j)] = len(classes)
            classes.append(ChartClass(deg[0], deg[1], deg[2], labels[j] if j < len(labels) else "",
                                      tags[j] if j < len(tags) else ""))
    edges = []
    for name in sorted(chart.products):
        kind = _kind(name)
        for deg in sorted(chart.products[name]):
            tgt = chart.target(name, deg)
            for j, row in enumerate(chart.products[name][deg]):
                for l, c in sorted(row.items()):
                    if c and (tgt, l) in where:
                        edges.append(ChartEdge(where[(deg, j)], where[(tgt, l)], kind))
    extra = {k: v for k, v in chart.meta.items() if isinstance(v, (str, int, float, bool))}
    extra["producer"] = chart.meta.get("op", "")
    extra["n"] = chart.n
    doc = ChartDocument(_meta(chart.spec, chart.window, "ext", extra), classes, edges)
    doc.validate()
    return doc


def document_from_page(page, include_dead: bool = True) -> ChartDocument:
    """One entry per v_0-tower.  Differentials in the page log become d<r> edges."""
    classes, where = [], {}
    f1 = page.window["f"][1]
    for j, t in enumerate(page.towers):
        if t.height == 0 and not include_dead:
            continue
        s, f, w = t.deg
        if f > f1 or not (page.window["s"][0] <= s <= page.window["s"][1]):
            continue
        where[j] = len(classes)
        ext = t.height if t.height != 0 else None
        classes.append(ChartClass(s, f, w, t.label, t.summand, ext))
    edges = []
    for r, a, b in page.log:
        if a in where and b in where:
            src = classes[where[a]]
            tgt = page.towers[b]
            lift = src.f + r - tgt.deg[1]
            # the differential lands on v_0^lift times the target tower's bottom class
            classes.append(ChartClass(tgt.deg[0], tgt.deg[1] + lift, tgt.deg[2],
                                      f"{tgt.label} v0^{lift}", tgt.summand, 1))
            edges.append(ChartEdge(where[a], len(classes) - 1, f"d{r}"))
    doc = ChartDocument(_meta(page.spec, page.window, "ss_page", {"page": page.r, "n": page.n}), classes, edges)
    doc.validate()
    return doc


# ---------------------------------------------------------------- SVG

_XML_INVALID = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ufffe\uffff\ud800-\udfff]")


def _text(s: str) -> str:
    """Escape for XML, dropping characters XML 1.0 cannot carry."""
    return escape(_XML_INVALID.sub("", s))


def _palette(doc: ChartDocument) -> dict:
    tags = sorted({c.tag for c in doc.classes})
    return {t: PALETTE[j % len(PALETTE)] for j, t in enumerate(tags)}


def render_svg(doc: ChartDocument, unit: int = 40, margin: int = 40, collapse_weight: bool = True) -> str:
    """(s, f) chart with the weight suppressed and shown in hover titles.

    Entries at the same (s, f) with the same summand tag are drawn as one dot
    when ``collapse_weight`` is set.  An infinite tower gets an arrow to the
    top of the grid, and a finite tower a vertical bar of its height.
    """
    win = doc.meta.get("window", {})
    ss = [c.s for c in doc.classes]
    fs = [c.f for c in doc.classes]
    s0, s1 = win.get("s", [min(ss, default=0), max(ss, default=0)])
    f0, f1 = win.get("f", [min(fs, default=0), max(fs, default=0)])
    width = (s1 - s0) * unit + 2 * margin
    height = (f1 - f0) * unit + 2 * margin
    colors = _palette(doc)

    def xy(s, f):
        return margin + (s - s0) * unit, height - margin - (f - f0) * unit

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<g class="grid" stroke="#dddddd" stroke-width="1">']
    for s in range(s0, s1 + 1):
        x, _ = xy(s, 0)
        out.append(f'<line x1="{x}" y1="{margin}" x2="{x}" y2="{height - margin}"/>')
    for f in range(f0, f1 + 1):
        _, y = xy(0, f)
        out.append(f'<line x1="{margin}" y1="{y}" x2="{width - margin}" y2="{y}"/>')
    out.append("</g>")
    out.append('<g class="axes" font-family="sans-serif" font-size="10" fill="#555555">')
    for s in range(s0, s1 + 1):
        x, _ = xy(s, f0)
        out.append(f'<text x="{x}" y="{height - margin / 3:.0f}" text-anchor="middle">{s}</text>')
    for f in range(f0, f1 + 1):
        _, y = xy(s0, f)
        out.append(f'<text x="{margin / 3:.0f}" y="{y}" text-anchor="middle">{f}</text>')
    out.append("</g>")

    # dot positions: group entries, then spread groups sharing an (s, f) spot
    groups: dict = {}
    for j, c in enumerate(doc.classes):
        key = (c.s, c.f, c.tag, c.extent) if collapse_weight else (c.s, c.f, c.tag, c.extent, j)
        groups.setdefault(key, []).append(j)
    spots: dict = {}
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        spots.setdefault(key[:2], []).append(key)
    pos = {}
    for (s, f), keys in spots.items():
        x, y = xy(s, f)
        for t, key in enumerate(keys):
            dx = (t - (len(keys) - 1) / 2) * min(8, unit / (len(keys) + 1))
            for j in groups[key]:
                pos[j] = (round(x + dx, 2), y)

    out.append('<g class="edges" stroke-width="1.5" fill="none">')
    seen = set()
    for e in sorted(doc.edges, key=lambda e: (e.kind, e.source, e.target)):
        a, b = pos[e.source], pos[e.target]
        key = (a, b, e.kind)
        if key in seen:
            continue
        seen.add(key)
        style = {"v0": 'stroke="#000000"', "v1": 'stroke="#000000"'}.get(
            e.kind, 'stroke="#cc0000"' if e.kind.startswith("d") else 'stroke="#555555" stroke-dasharray="3,2"')
        out.append(f'<line class="{_text(e.kind)}" x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" {style}/>')
    out.append("</g>")

    out.append('<g class="classes">')
    _, ytop = xy(0, f1)
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = groups[key]
        c0 = doc.classes[members[0]]
        x, y = pos[members[0]]
        color = colors[c0.tag]
        title = "; ".join(f"w={doc.classes[j].w} {doc.classes[j].label}".strip() for j in members)
        if c0.extent is None:
            out.append(f'<line class="tower" x1="{x}" y1="{y}" x2="{x}" y2="{ytop - unit / 3:.0f}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<polygon points="{x - 3},{ytop - unit / 3 + 6:.0f} {x + 3},{ytop - unit / 3 + 6:.0f} '
                       f'{x},{ytop - unit / 3:.0f}" fill="{color}"/>')
        elif c0.extent > 1:
            top = max(ytop, y - (c0.extent - 1) * unit)
            out.append(f'<line class="tower" x1="{x}" y1="{y}" x2="{x}" y2="{top}" stroke="{color}" '
                       f'stroke-width="1.5"/>')
        out.append(f'<circle cx="{x}" cy="{y}" r="3.5" fill="{color}"><title>{_text(title)}</title></circle>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- modules and tables


def module_to_json(M) -> str:
    body = {"schema": MODULE_SCHEMA, "spec": M.pair.spec.to_dict(), "n": M.n, "tag": M.tag,
            "generators": [{"label": lab, "degree": [d.s, d.w]} for lab, d in zip(M.labels, M.degrees)],
            "action": {str(E): [{str(k): c for k, c in sorted(row.items())} for row in rows]
                       for E, rows in sorted(M.action.items())}}
    return json.dumps(body, indent=1, sort_keys=True)


def module_from_json(text: str):
    from .comodules import _pair
    from .modules import FinModule

    body = json.loads(text)
    if body.get("schema") != MODULE_SCHEMA:
        raise ConfigurationError(f"expected schema {MODULE_SCHEMA}, got {body.get('schema')!r}")
    sp = body["spec"]
    pair = _pair(FieldSpec(sp["field"], sp["p"], sp.get("q")), body["n"])
    gens = body["generators"]
    action = {int(E): [{int(k): c for k, c in row.items()} for row in rows] for E, rows in body["action"].items()}
    return FinModule(pair, [tuple(g["degree"]) for g in gens], [g["label"] for g in gens], action, body.get("tag", ""))


def homotopy_tsv(table) -> str:
    return table.to_tsv()


def parse_homotopy_tsv(text: str) -> dict:
    """{(s, w): group descriptor} from a homotopy TSV."""
    out = {}
    lines = text.strip().splitlines()
    for line in lines[1:]:
        s, w, group, _ = (line.split("\t") + [""])[:4]
        out[(int(s), int(w))] = group
    return out
