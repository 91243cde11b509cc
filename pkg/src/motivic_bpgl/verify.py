"""Cross-check suites shared by the CLI and the test-suite."""
from __future__ import annotations

from .grading import FieldSpec


def _diff(a: dict, b: dict) -> dict:
    keys = set(a) | set(b)
    return {str(k): [a.get(k, 0), b.get(k, 0)] for k in sorted(keys) if a.get(k, 0) != b.get(k, 0)}


def oracle_modules(spec: FieldSpec, n: int) -> list:
    from .comodules import _pair, brown_gitler, lightning_flash, unit_module

    ring = _pair(spec, 1).ring
    mods = [unit_module(_pair(spec, n, ring)),
            lightning_flash(spec, 1, ring).restrict(n),
            lightning_flash(spec, 2, ring).restrict(n),
            brown_gitler(spec, 0, 2, ring).restrict(n)]
    for M, name in zip(mods, ("M", "L(1)", "L(2)", "B0(2)")):
        M.tag = name
    return mods


def oracle(spec: FieldSpec, window=None) -> dict:
    from .cobar import cobar_ext_oracle
    from .ext import ext_chart

    bad = {}
    for n in (0, 1):
        for M in oracle_modules(spec, n):
            res = ext_chart(M, window, products=False).dims
            cob = cobar_ext_oracle(M, window)
            d = _diff(res, cob)
            if d:
                bad[f"E{n}:{M.tag}"] = d
    return {"ok": not bad, "mismatches": bad}


def closed_forms(spec: FieldSpec, window=None) -> dict:
    from .closed_forms import Descriptor, closed_form_chart, compare
    from .comodules import _pair, unit_module
    from .ext import ext_chart

    out = {"ok": True, "mismatches": {}, "literal_form": {}}
    for n, kind in ((0, "ExtE0"), (1, "ExtE1")):
        chart = ext_chart(unit_module(_pair(spec, n)), window, products=False)
        for variant in ("corrected", "literal"):
            d = compare(chart, closed_form_chart(Descriptor(kind, spec, variant=variant), window))
            key = "mismatches" if variant == "corrected" else "literal_form"
            if d:
                out[key][kind] = {str(k): list(v) for k, v in d.items()}
    out["ok"] = not out["mismatches"]
    return out


def bockstein(spec: FieldSpec, window=None) -> dict | None:
    from .adams import bockstein_ss
    from .comodules import _pair, unit_module
    from .ext import ext_chart

    if spec.field != "F":
        return None
    bad = {}
    for n in (0, 1):
        d = _diff(bockstein_ss(spec, n, window).dims, ext_chart(unit_module(_pair(spec, n)), window,
                                                                 products=False).dims)
        if d:
            bad[f"E{n}"] = d
    return {"ok": not bad, "mismatches": bad}


def collapse(spec: FieldSpec, window=None, k_max: int = 4) -> dict:
    from .adams import verify_collapse

    out = {"ok": True, "candidates": {}, "excluded": {}}
    for k in range(k_max + 1):
        rep = verify_collapse(spec, k, window)
        out["excluded"][k] = dict(rep.excluded)
        if rep.candidates:
            out["candidates"][k] = rep.candidates
            out["ok"] = False
    return out


def soule(spec: FieldSpec, window=None) -> dict | None:
    from .adams import homotopy, soule_table

    if spec.field != "F":
        return None
    got = homotopy(spec, "BPGL0", window)
    want = soule_table(spec, window)
    d = {str(k): [got.descriptor(*k), want.descriptor(*k)]
         for k in sorted(set(got.entries) | set(want.entries)) if got.descriptor(*k) != want.descriptor(*k)}
    return {"ok": not d, "mismatches": d}


SUITES = {"oracle": oracle, "closed-forms": closed_forms, "bockstein": bockstein, "collapse": collapse,
          "soule": soule}


def run(name: str, spec: FieldSpec, window=None):
    return SUITES[name](spec, window)
