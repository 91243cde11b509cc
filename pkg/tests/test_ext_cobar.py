import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIELDS, field_id
from motivic_bpgl.closed_forms import (Descriptor, closed_form_chart, compare, families, real_triangle_report,
                                       torsion_generators)
from motivic_bpgl.cobar import CobarComplex, cobar_ext_oracle
from motivic_bpgl.comodules import _pair, brown_gitler, lightning_flash, unit_module
from motivic_bpgl.ext import _unit_resolution, ext_between, ext_bimodule, ext_chart, minimal_resolution, wrong_side_check
from motivic_bpgl.grading import ConfigurationError, Degree, FieldSpec

SMALL = {"s": (-4, 8), "f": (0, 4), "w": (-4, 4)}


def polynomial_ext_dim(p: int, s: int, f: int, w: int) -> int:
    """dim of F_p[tau, v0, v1] in (s, f, w): v1^c v0^(f-c) tau^t."""
    step = 2 * p - 2
    if s % step or f < 0:
        return 0
    c = s // step
    return int(0 <= c <= f and w <= c * (p - 1))


@pytest.mark.parametrize("p", [2, 3])
def test_ext_E1_over_C_is_polynomial(p):
    win = {"s": (-2, 10), "f": (0, 4), "w": (-3, 5)}
    ch = ext_chart(unit_module(_pair(FieldSpec("C", p), 1)), win, products=False)
    for s in range(-2, 11):
        for f in range(5):
            for w in range(-3, 6):
                assert ch.dim(s, f, w) == polynomial_ext_dim(p, s, f, w), (s, f, w)


def test_products_over_C():
    ch = ext_chart(unit_module(_pair(FieldSpec("C", 2), 1)), SMALL)
    assert ch.product_degrees["v0"] == (0, 1, 0)
    assert ch.product_degrees["v1"] == (2, 1, 1)
    for deg in [(0, 0, 0), (2, 1, 1), (0, 2, -1)]:
        assert ch.product_rank("v0", deg) == 1
        assert ch.product_rank("v1", deg) == 1
    assert ch.product_rank("tau", (0, 1, 0)) == 1


@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
def test_resolution_d_squared(spec):
    res = _unit_resolution(_pair(spec, 1), 4)
    assert res.check_dd()
    assert res.generator_degrees(0) == [Degree(0, 0)]
    B = brown_gitler(spec, 0, 2)
    assert minimal_resolution(B, 3).check_dd()


@pytest.mark.parametrize("spec", [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("F", 3, 7)], ids=field_id)
def test_cobar_d_squared(spec):
    cb = CobarComplex(lightning_flash(spec, 1))
    p = spec.p
    for f in (1, 2, 3):
        for T in [(f * (2 * p - 2), f * (p - 1)), (f, 0), (2 * p - 1, p - 1)]:
            assert cb.check_d_squared(f, T)


@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
@pytest.mark.parametrize("n", [0, 1])
def test_resolution_matches_cobar(spec, n):
    for M in [unit_module(_pair(spec, n)), lightning_flash(spec, 2).restrict(n)]:
        res = ext_chart(M, SMALL, products=False).dims
        cob = cobar_ext_oracle(M, SMALL)
        keys = set(res) | set(cob)
        assert {k: (res.get(k, 0), cob.get(k, 0)) for k in keys if res.get(k, 0) != cob.get(k, 0)} == {}


@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
def test_wrong_side_shortcut(spec):
    assert wrong_side_check(lightning_flash(spec, 2), SMALL) == {}
    with pytest.raises(ConfigurationError):
        wrong_side_check(unit_module(_pair(spec, 0)), SMALL)


def test_ext_from_unit_equals_ext_chart():
    spec = FieldSpec("R", 2)
    L = lightning_flash(spec, 1)
    a = ext_between(unit_module(L.pair), L, SMALL, products=False)
    b = ext_chart(L, SMALL, products=False)
    assert a.nonzero() == b.nonzero()


# ---------- closed forms

@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
@pytest.mark.parametrize("text", ["ExtE0", "ExtE1", "ExtL:1", "ExtL:2"])
def test_corrected_closed_forms(spec, text):
    d = Descriptor.parse(text, spec, variant="corrected")
    if d.kind == "ExtL":
        M = lightning_flash(spec, d.m)
    else:
        M = unit_module(_pair(spec, 0 if d.kind == "ExtE0" else 1))
    assert compare(ext_chart(M, SMALL, products=False), closed_form_chart(d, SMALL)) == {}


@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
@pytest.mark.parametrize("k,m", [(0, 1), (1, 1), (1, 2), (2, 3)])
def test_bimodule_closed_form_k_le_m(spec, k, m):
    win = {"s": (-12, 6), "f": (0, 3), "w": (-6, 4)}
    got = ext_bimodule(spec, k, m, win, products=False)
    want = closed_form_chart(Descriptor("ExtLL", spec, k, m, "corrected"), win)
    assert compare(got, want) == {}


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("k,m", [(1, 0), (2, 0), (3, 1)])
def test_bimodule_closed_form_over_C_k_gt_m(p, k, m):
    spec = FieldSpec("C", p)
    win = {"s": (-16, 6), "f": (0, 4), "w": (-8, 4)}
    got = ext_bimodule(spec, k, m, win, products=False)
    want = closed_form_chart(Descriptor("ExtLL", spec, k, m, "corrected"), win)
    assert compare(got, want) == {}


@pytest.mark.parametrize("k,m", [(1, 0), (2, 0), (3, 1)])
def test_real_triangle(k, m):
    win = {"s": (-16, 6), "f": (0, 5), "w": (-8, 4)}
    assert real_triangle_report(ext_bimodule(FieldSpec("R", 2), k, m, win), k, m) == []


def test_k_gt_m_not_tabulated_over_twisted_fields():
    with pytest.raises(ConfigurationError):
        families(Descriptor("ExtLL", FieldSpec("F", 3, 7), 2, 1))


def test_descriptor_parse_errors():
    spec = FieldSpec("C", 2)
    for bad in ["ExtL", "ExtLL:1", "Ext", "ExtL:x"]:
        with pytest.raises(ConfigurationError):
            Descriptor.parse(bad, spec)
    with pytest.raises(ConfigurationError):
        Descriptor("ExtE1", spec, variant="other")


@given(p=st.sampled_from([2, 3]), k=st.integers(0, 5), m=st.integers(0, 5))
def test_torsion_generator_count(p, k, m):
    """k m from the free cells plus min(k, m) bottom classes, all in odd stems."""
    gens = torsion_generators(p, k, m)
    assert len(gens) == k * m + min(k, m)
    assert all(s % 2 for s, _ in gens)


def test_b_tags_at_torsion_degrees():
    spec = FieldSpec("C", 2)
    win = {"s": (-12, 6), "f": (0, 3), "w": (-6, 4)}
    ch = ext_bimodule(spec, 1, 2, win)
    tagged = {(s, w) for (s, f, w), tags in ch.tags.items() if "B" in tags}
    negative = {(s, w) for s, w in torsion_generators(2, 1, 2) if s < 0}
    assert negative and negative <= tagged


@settings(max_examples=10)
@given(spec=st.sampled_from(FIELDS), m=st.integers(0, 2))
def test_ext_dims_are_window_independent(spec, m):
    L = lightning_flash(spec, m)
    big = ext_chart(L, {"s": (-6, 8), "f": (0, 3), "w": (-4, 4)}, products=False)
    small = ext_chart(L, {"s": (-2, 4), "f": (0, 2), "w": (-2, 2)}, products=False)
    for (s, f, w), d in small.dims.items():
        assert big.dim(s, f, w) == d


@pytest.mark.parametrize("k,m", [(3, 1), (2, 2), (1, 3)])
def test_b_tagging_preserves_product_ranks(k, m):
    """Tagging may change the basis at a degree; every product rank is basis-free."""
    from motivic_bpgl.ext import tag_b_summand

    spec = FieldSpec("C", 2)
    win = {"s": (-14, 6), "f": (0, 3), "w": (-6, 3)}
    raw = ext_between(lightning_flash(spec, k), lightning_flash(spec, m), win)
    before = {(n, d): raw.product_rank(n, d) for n, t in raw.products.items() for d in t}
    tag_b_summand(raw)
    assert {(n, d): raw.product_rank(n, d) for n, t in raw.products.items() for d in t} == before
    for deg, tags in raw.tags.items():
        for j, t in enumerate(tags):
            if t == "B":
                assert not raw.products["v0"][deg][j] and not raw.products["v1"][deg][j]
