from collections import defaultdict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIELDS, field_id
from motivic_bpgl import linalg
from motivic_bpgl.comodules import (brown_gitler, check_stratum_isomorphism, flash_ses, homology_BPGL, lightning_flash,
                                    quotient_dual, tensor, unit_module, _pair)
from motivic_bpgl.grading import ConfigurationError, Degree, FieldSpec, legendre
from motivic_bpgl.margolis import (is_free, margolis_homology, p_adic_digits, s_map, s_top_monomial,
                                   split_free_summands, stable_equivalence)
from motivic_bpgl.modules import ModuleError, free_module, identity_map, present
from motivic_bpgl.steenrod import WeightedMonomial

fields = st.sampled_from(FIELDS)
gen_degrees = st.lists(st.tuples(st.integers(-6, 6), st.integers(-3, 3)), min_size=1, max_size=3)


def _images_independent(f) -> bool:
    by_deg = defaultdict(list)
    for j, d in enumerate(f.src.degrees):
        by_deg[d].append(f.images[j])
    for d, imgs in by_deg.items():
        cols = sorted({k for v in imgs for k in v})
        pos = {k: i for i, k in enumerate(cols)}
        rows = [linalg.sparse_row({pos[k]: c for k, c in v.items()}, len(cols), f.src.p) for v in imgs]
        if linalg.rank(rows, len(cols), f.src.p) != len(imgs):
            return False
    return True


# ---------- free modules and Margolis homology

@given(spec=fields, n=st.sampled_from([0, 1]), degs=gen_degrees)
def test_free_modules_are_margolis_acyclic(spec, n, degs):
    F = free_module(_pair(spec, n), degs)
    F.check()
    for i in range(n + 1):
        assert margolis_homology(F, i).total_dim == 0
    assert is_free(F)
    assert F.rank == len(degs) * 2 ** (n + 1)


@given(spec=fields, degs=gen_degrees, k=st.integers(0, 3))
def test_margolis_homology_ignores_free_summands(spec, degs, k):
    L = lightning_flash(spec, k)
    M = L.direct_sum(free_module(L.pair, degs))
    for i in (0, 1):
        assert margolis_homology(M, i).dims() == margolis_homology(L, i).dims()


@pytest.mark.parametrize("spec", FIELDS, ids=field_id)
def test_margolis_of_unit_and_flashes(spec):
    p = spec.p
    M = unit_module(_pair(spec, 1))
    assert margolis_homology(M, 0).dims() == {Degree(0, 0): 1}
    assert margolis_homology(M, 1).dims() == {Degree(0, 0): 1}
    for k in range(1, 5):
        L = lightning_flash(spec, k)
        assert L.rank == 2 * k + 1
        assert margolis_homology(L, 0).dims() == {Degree(0, 0): 1}
        assert margolis_homology(L, 1).dims() == {Degree(k * (2 * p - 2), k * (p - 1)): 1}
        assert not is_free(L)


def test_square_zero_is_enforced():
    pair = _pair(FieldSpec("C", 2), 0)
    from motivic_bpgl.modules import FinModule
    bad = FinModule(pair, [Degree(2, 0), Degree(1, 0), Degree(0, 0)], ["a", "b", "c"], {1: [{1: 1}, {2: 1}, {}]})
    with pytest.raises(ModuleError):
        margolis_homology(bad, 0)


# ---------- lightning flash sequence

@settings(max_examples=40)
@given(spec=fields, k=st.integers(1, 5))
def test_flash_short_exact_sequence(spec, k):
    sub, L, inc, Qt, cok = flash_ses(spec, k)
    assert inc.is_module_map()
    assert _images_independent(inc)
    proj = Qt.projection()
    assert proj.is_module_map()
    assert all(not v for v in inc.compose(proj).images)
    assert L.rank == sub.rank + cok.rank
    Q = Qt.Q
    assert sorted(Q.degrees) == sorted(cok.degrees)
    for i in (0, 1):
        assert margolis_homology(Q, i).dims() == margolis_homology(cok, i).dims()


def test_quotient_dual_cells():
    cok = quotient_dual(_pair(FieldSpec("C", 3), 1))
    assert cok.degrees == [Degree(0, 0), Degree(5, 2)]
    with pytest.raises(ConfigurationError):
        quotient_dual(_pair(FieldSpec("C", 3), 0))


def test_lightning_flash_degrees_p3():
    # L_3(2): five cells
    L = lightning_flash(FieldSpec("C", 3), 2)
    assert sorted(tuple(d) for d in L.degrees) == [(0, 0), (4, 2), (5, 2), (8, 4), (9, 4)]


# ---------- splitting

@settings(max_examples=30)
@given(spec=fields, k=st.integers(0, 7), degs=gen_degrees)
def test_split_is_idempotent(spec, k, degs):
    B = brown_gitler(spec, 0, k)
    sp = split_free_summands(B)
    assert sp.projection.is_module_map()
    assert B.rank == sp.core.rank + 4 * len(sp.free)
    again = split_free_summands(sp.core)
    assert again.free == [] and again.core.rank == sp.core.rank
    padded = split_free_summands(sp.core.direct_sum(free_module(sp.core.pair, degs)))
    assert padded.core.rank == sp.core.rank
    assert len(padded.free) == len(degs)


def count_weighted_monomials(p: int, k: int) -> int:
    """Monomials xi_1^a1 xi_2^a2 ... tau_1^e1 tau_2^e2 ... (e_i in {0, 1}) of
    weight sum (a_i + e_i) p^i <= k, counted by a direct recursion."""
    weights = []
    i = 1
    while p ** i <= k:
        weights.append(p ** i)
        i += 1

    def count(j, budget):
        if j == len(weights):
            return 1
        wt = weights[j]
        total = 0
        for e in (0, 1):
            for a in range((budget - e * wt) // wt + 1 if budget >= e * wt else 0):
                total += count(j + 1, budget - (a + e) * wt)
        return total

    return count(0, k)


@pytest.mark.parametrize("p,k", [(2, k) for k in range(9)] + [(3, k) for k in range(0, 9, 2)])
def test_brown_gitler_rank_and_core(p, k):
    B = brown_gitler(FieldSpec("C", p), 0, k)
    assert B.rank == count_weighted_monomials(p, k)
    sp = split_free_summands(B)
    assert sp.core.rank == 2 * legendre(k, p) + 1
    assert B.rank == sp.core.rank + 4 * len(sp.free)


@pytest.mark.parametrize("spec", [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("F", 3, 7)], ids=field_id)
@pytest.mark.parametrize("k", [2, 3, 4, 6])
def test_s_map_is_stable_equivalence(spec, k):
    B = brown_gitler(spec, 0, k)
    f, L, _ = s_map(spec, k, B)
    assert f.is_module_map()
    assert stable_equivalence(f)
    assert stable_equivalence(f.compose(split_free_summands(B).projection))


@given(p=st.sampled_from([2, 3, 5]), k=st.integers(1, 60))
def test_s_top_monomial_sits_in_degree_of_top_generator(p, k):
    if k < p:
        return
    m = legendre(k, p)
    assert s_top_monomial(k, p).degree(p) == Degree(m * (2 * p - 2) + 1, m * (p - 1))


def test_s_top_monomial_examples():
    assert s_top_monomial(4, 2) == WeightedMonomial((), 0b100)
    assert s_top_monomial(6, 2) == WeightedMonomial((1,), 0b100)
    assert s_top_monomial(3, 2) == WeightedMonomial((), 0b10)
    assert p_adic_digits(11, 3) == [2, 0, 1]
    with pytest.raises(ModuleError):
        s_top_monomial(1, 2)


def test_identity_is_stable_equivalence():
    L = lightning_flash(FieldSpec("R", 2), 2)
    assert stable_equivalence(identity_map(L))


# ---------- comodule constructions

@pytest.mark.parametrize("spec", [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("F", 3, 7)], ids=field_id)
@pytest.mark.parametrize("n,k", [(0, 1), (0, 3), (1, 2), (1, 4)])
def test_strata_are_suspended_brown_gitler(spec, n, k):
    assert check_stratum_isomorphism(spec, n, k)


def test_homology_strata_ranks():
    H = homology_BPGL(FieldSpec("C", 2), 1, 3)
    ranks = H.stratum_ranks()
    assert [ranks[k] for k in range(4)] == [brown_gitler(FieldSpec("C", 2), 0, k).rank for k in range(4)]


@given(spec=fields, a=st.integers(0, 2), b=st.integers(0, 2))
@settings(max_examples=20)
def test_tensor_of_flashes(spec, a, b):
    A, B = lightning_flash(spec, a), lightning_flash(spec, b)
    T = tensor(A, B)
    T.check()
    assert T.rank == A.rank * B.rank
    core = split_free_summands(T).core
    L = lightning_flash(spec, a + b)
    for i in (0, 1):
        assert margolis_homology(core, i).dims() == margolis_homology(L, i).dims()


def test_presentation_rejects_inhomogeneous_relation():
    pair = _pair(FieldSpec("C", 2), 1)
    with pytest.raises(ModuleError):
        present(pair, [(0, 0), (1, 0)], [{(0, 0): 1, (1, 0): 1}])


def test_brown_gitler_arguments():
    with pytest.raises(ConfigurationError):
        brown_gitler(FieldSpec("C", 2), 1, 2)
    with pytest.raises(ConfigurationError):
        brown_gitler(FieldSpec("C", 2), 0, -1)
