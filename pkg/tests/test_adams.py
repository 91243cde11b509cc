import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIELDS, field_id
from motivic_bpgl.adams import (DifferentialRule, RuleConsistencyError, assemble_homotopy, bimodule_generators,
                                bockstein_ss, cooperations, cooperations_formula, differential_rules, e2_page,
                                homotopy, n_line, run_ss, soule_table, stratum_summand, verify_collapse)
from motivic_bpgl.comodules import _pair, unit_module
from motivic_bpgl.ext import ext_chart
from motivic_bpgl.grading import ConfigurationError, FieldSpec

PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def val(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# ---------- rules

def test_rules_over_F5_at_2():
    rules = differential_rules(FieldSpec("F", 2, 5), s_max=2)
    assert [r.describe() for r in rules] == ["d_2(tau) = uv0^2", "d_3(tau^2) = utauv0^3", "d_4(tau^4) = utau^3v0^4"]


def test_twisted_rule_variants_over_F3():
    spec = FieldSpec("F", 2, 3)
    assert [r.r for r in differential_rules(spec, s_max=3)] == [3, 4, 5]
    assert [r.r for r in differential_rules(spec, s_max=3, variant="literal")] == [4, 5, 6]


@pytest.mark.parametrize("spec", [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("C", 3), FieldSpec("R", 3)],
                         ids=field_id)
def test_no_rules_over_C_and_R(spec):
    assert differential_rules(spec) == []
    assert differential_rules(spec, "BPGL1") == []


@given(q=st.sampled_from(PRIMES), p=st.sampled_from([2, 3]))
def test_rules_lie_on_the_degree_law(q, p):
    if q == p:
        return
    spec = FieldSpec("F", p, q)
    for rule in differential_rules(spec, s_max=4):
        s, f, w = rule.source_deg
        t = rule.target_deg
        assert t == (s - 1, f + rule.r, w)
        assert rule.r >= 2


def test_rule_degree_law_is_enforced():
    with pytest.raises(ConfigurationError):
        DifferentialRule(2, 0, "tau", "uv0^2", (0, 0, -1), (-1, 2, 0))


def test_rule_argument_errors():
    with pytest.raises(ConfigurationError):
        differential_rules(FieldSpec("F", 2, 5), "BPGL2")
    with pytest.raises(ConfigurationError):
        differential_rules(FieldSpec("F", 2, 5), variant="unknown")


# ---------- pages and homotopy

def test_C_collapses_to_Z2_tau_tower():
    h = homotopy(FieldSpec("C", 2))
    assert h.descriptor(0, 0) == "Z_2"
    assert h.descriptor(0, -1) == "Z_2"
    assert h.descriptor(-1, -1) == "0"
    assert h.flags == []


def test_twisted_off_by_one_over_F3():
    spec = FieldSpec("F", 2, 3)
    assert homotopy(spec).descriptor(-1, -2) == "Z/8"
    assert homotopy(spec, variant="literal").descriptor(-1, -2) == "Z/16"
    assert homotopy(spec).descriptor(-1, -1) == "Z/2"


def test_missing_target_raises():
    spec = FieldSpec("F", 2, 5)
    page = e2_page(spec, "BPGL0", {"s": (-4, 4), "f": (0, 6), "w": (-4, 0)})
    page.towers = [t for t in page.towers if t.mono != (1, 0, 0)]
    with pytest.raises(RuleConsistencyError):
        run_ss(page, differential_rules(spec))


@pytest.mark.parametrize("spec", [s for s in FIELDS if s.field == "F"], ids=field_id)
def test_every_positive_y_power_supports_a_differential(spec):
    win = {"s": (-4, 4), "f": (0, 12), "w": (-12, 0)}
    einf = run_ss(e2_page(spec, "BPGL0", win), differential_rules(spec))
    for t in einf.towers:
        if t.mono is None or t.mono[0]:
            continue
        # every y^n x with n > 0 supports a differential
        assert (t.height == 0) == (t.mono[1] > 0), t.label


@settings(max_examples=25)
@given(q=st.sampled_from(PRIMES), p=st.sampled_from([2, 3]))
def test_tower_heights_sum_to_soule_orders(q, p):
    if q == p:
        return
    spec = FieldSpec("F", p, q)
    win = {"s": (-2, 2), "f": (0, 16), "w": (-6, 0)}
    einf = run_ss(e2_page(spec, "BPGL0", win), differential_rules(spec))
    table = assemble_homotopy(einf)
    dims = einf.dims()
    for w in range(-6, 0):
        column = sum(d for (s, f, ww), d in dims.items() if s == -1 and ww == w)
        assert table.order_exponent(-1, w) == column == val(q ** -w - 1, p)
    assert table.descriptor(0, 0) == f"Z_{p}"


def test_soule_table_requires_finite_field():
    with pytest.raises(ConfigurationError):
        soule_table(FieldSpec("C", 2))


def test_homotopy_table_serialisation():
    h = homotopy(FieldSpec("F", 2, 3), window={"s": (-2, 2), "f": (0, 8), "w": (-3, 0)})
    tsv = h.to_tsv().splitlines()
    assert tsv[0] == "s\tw\tgroup\tgenerators"
    assert any(line.startswith("-1\t-2\tZ/8\t") for line in tsv)
    d = h.to_dict()
    row = next(g for g in d["groups"] if (g["s"], g["w"]) == (-1, -2))
    assert row["group"] == "Z/8"


# ---------- Bockstein path

@pytest.mark.parametrize("spec", [s for s in FIELDS if s.field == "F"] + [FieldSpec("F", 5, 2)], ids=field_id)
@pytest.mark.parametrize("n", [0, 1])
def test_bockstein_path_matches_resolution(spec, n):
    win = {"s": (-4, 10), "f": (0, 5), "w": (-10, 4)}
    b = bockstein_ss(spec, n, win)
    e = ext_chart(unit_module(_pair(spec, n)), win, products=False)
    assert b.nonzero() == e.nonzero()


def test_bockstein_survivors_at_5():
    spec = FieldSpec("F", 5, 2)
    win = {"s": (-1, -1), "f": (0, 0), "w": (-20, 0)}
    b = bockstein_ss(spec, 0, win)
    labels = sorted(lab for labs in b.labels.values() for lab in labs)
    assert labels == ["gamma", "gammazeta", "gammazeta^2", "gammazeta^3", "gammazeta^4"]


def test_bockstein_errors():
    with pytest.raises(ConfigurationError):
        bockstein_ss(FieldSpec("C", 2), 0)
    with pytest.raises(ConfigurationError):
        bockstein_ss(FieldSpec("F", 2, 3), 2)


# ---------- cooperations and the n-line

W = {"s": (-4, 12), "f": (0, 8), "w": (-6, 8)}


def test_stratum_two_at_2():
    sd = stratum_summand("BPGL1", FieldSpec("C", 2), 2, W)
    assert (sd.m, sd.core_ok, sd.free, sd.shift) == (1, True, [], (4, 2))


@pytest.mark.parametrize("k,m,free", [(0, 0, 0), (1, 0, 0), (2, 1, 0), (3, 1, 0), (4, 3, 0), (5, 3, 0), (6, 4, 1)])
def test_cooperation_strata_over_C(k, m, free):
    spec = FieldSpec("C", 2)
    sd = stratum_summand("BPGL1", spec, k, W)
    assert (sd.m, sd.core_ok, len(sd.free)) == (m, True, free)
    assert sd.table.ranks() == cooperations_formula("BPGL1", spec, k, sd.free, W).ranks()


def test_cooperations_sum_over_strata():
    spec = FieldSpec("C", 2)
    total = cooperations("BPGL1", spec, 3, W)
    assert sorted(total.parts) == [0, 1, 2, 3]
    assert total.descriptor(0, 0) == "Z_2"
    with pytest.raises(ConfigurationError):
        cooperations("BPGL7", spec, 1, W)


def test_bpgl0_cooperations_are_ring_plus_free():
    spec = FieldSpec("C", 2)
    sd = stratum_summand("BPGL0", spec, 0, W)
    assert sd.core_ok


def test_two_line_summand():
    nl = n_line(2, FieldSpec("C", 2), W, max_total=3)
    assert sorted(nl.parts) == [(1, 1), (1, 2), (2, 1)]
    part = nl.parts[(1, 1)]
    assert part.meta["label"] == "L(0)" and part.meta["m"] == 0
    assert part.descriptor(4, 2) == "Z_2"
    assert nl.parts[(1, 2)].meta["label"] == "L(1)"
    with pytest.raises(ConfigurationError):
        n_line(0, FieldSpec("C", 2), W)


# ---------- collapse

@pytest.mark.parametrize("spec", [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("F", 2, 3), FieldSpec("C", 3)],
                         ids=field_id)
@pytest.mark.parametrize("k", [1, 2, 4])
def test_collapse_has_no_candidates(spec, k):
    rep = verify_collapse(spec, k, {"s": (-8, 8), "f": (0, 6), "w": (-8, 8)})
    assert rep.ok and rep.candidates == []
    assert sum(rep.excluded.values()) > 0


def test_bimodule_generator_kinds():
    gens = bimodule_generators(2, 1, 3)
    kinds = [g.kind for g in gens]
    assert kinds.count("x") == 1 and kinds.count("xj") == 2
    assert kinds.count("b") == 1 * 3 + 1
    gens = bimodule_generators(2, 3, 1)
    assert [g.kind for g in gens][:3] == ["x", "y", "y"]
    assert gens[0].deg == (0, 2, 0)
