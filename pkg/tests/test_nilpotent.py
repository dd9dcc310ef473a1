import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapselab.errors import DecompositionFailedError, StepCapExceededError
from collapselab.fixtures import (
    abelian_mod_oracle,
    free_abelian_context,
    heisenberg_context,
    heisenberg_mod_oracle,
    unitriangular_context,
)
from collapselab.group_core import (
    GroupContext,
    ball_enumerate,
    commutator,
    evaluate,
    permutation,
)
from collapselab.intlinalg import (
    invariant_factors,
    quotient_invariants,
    rational_rank,
    smith_normal_form,
    solve_left_integer,
)
from collapselab.nilpotent import (
    RankReport,
    abelianization_coordinates,
    almost_nilpotent_rank,
    basic_commutators,
    element_power,
    lower_central_series,
    rank_of_graded_subgroup,
    refine_lcs,
    standard_form,
    stratum_quotient,
    stratum_vector,
)
from collapselab.subgroups import canonical_transversal, coset_table, schreier_generators
from collapselab.words import SymmetricGeneratingSet


# --- integer linear algebra against an independent oracle -------------------

int_matrices = st.lists(
    st.lists(st.integers(-9, 9), min_size=1, max_size=4),
    min_size=1,
    max_size=4,
).filter(lambda rows: len({len(r) for r in rows}) == 1)


@given(int_matrices)
@settings(max_examples=60, deadline=None)
def test_smith_normal_form_properties(rows):
    U, S, V = smith_normal_form(rows)
    m, n = len(rows), len(rows[0])
    # S = U * A * V exactly
    UA = [[sum(U[i][k] * rows[k][j] for k in range(m)) for j in range(n)] for i in range(m)]
    UAV = [[sum(UA[i][k] * V[k][j] for k in range(n)) for j in range(n)] for i in range(m)]
    assert [list(r) for r in S] == UAV
    diag = [S[i][i] for i in range(min(m, n))]
    for i in range(m):
        for j in range(n):
            if i != j:
                assert S[i][j] == 0
    for a, b in zip(diag, diag[1:]):
        if a != 0 and b != 0:
            assert b % a == 0
        if a == 0:
            assert b == 0


@given(int_matrices)
@settings(max_examples=40, deadline=None)
def test_invariant_factors_match_sympy(rows):
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf

    M = sympy.Matrix(rows)
    ours = sorted(abs(d) for d in invariant_factors(rows))
    theirs = sympy_snf(M)
    sy = sorted(
        abs(int(theirs[i, i]))
        for i in range(min(theirs.shape))
        if int(theirs[i, i]) != 0
    )
    assert ours == sy


@given(int_matrices, st.lists(st.integers(-4, 4), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_solve_left_integer_roundtrip(rows, xs):
    xs = (xs * len(rows))[: len(rows)]
    n = len(rows[0])
    target = [sum(x * r[j] for x, r in zip(xs, rows)) for j in range(n)]
    sol = solve_left_integer(rows, target)
    assert sol is not None
    back = [sum(s * r[j] for s, r in zip(sol, rows)) for j in range(n)]
    assert back == target


def test_quotient_invariants_z2_mod_sublattice():
    free, torsion = quotient_invariants([(1, 0), (0, 1)], [(2, 0), (0, 1)])
    assert (free, torsion) == (0, (2,))


# --- basic commutators -------------------------------------------------------

def test_abelian_commutators_vanish():
    ctx = free_abelian_context(2)
    assert basic_commutators(ctx, weight=1).entries == ()


def test_heisenberg_weight1_is_center():
    ctx = heisenberg_context()
    c1 = basic_commutators(ctx, weight=1)
    els = {el.data[0][2] for el in c1.elements()}
    assert els == {1, -1}
    for el in c1.elements():
        assert el.data[0][1] == 0 and el.data[1][2] == 0


def test_heisenberg_weight2_empty():
    ctx = heisenberg_context()
    assert basic_commutators(ctx, weight=2).entries == ()


# --- lower central series ----------------------------------------------------

def test_z3_step_1():
    assert lower_central_series(free_abelian_context(3)).step == 1


def test_heisenberg_step_2():
    lcs = lower_central_series(heisenberg_context())
    assert lcs.step == 2
    level1 = lcs.level_generators(1)
    assert {el.data[0][2] for _, el in level1} == {1, -1}


def test_ut4_step_3():
    assert lower_central_series(unitriangular_context(4)).step == 3


def test_step_cap_exceeded_for_non_nilpotent_permutation_group():
    # S3 is not nilpotent: its commutator chain never vanishes
    s3 = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(s3)}

    def compose(p, q):
        return tuple(p[q[i]] for i in range(3))

    def perm_of(g):
        return permutation([idx[compose(g, x)] for x in s3])

    ctx = GroupContext(
        gens=SymmetricGeneratingSet(4, (2, 1, 4, 3)),
        images=(perm_of((1, 2, 0)), perm_of((2, 0, 1)), perm_of((1, 0, 2)), perm_of((1, 0, 2))),
    )
    with pytest.raises(StepCapExceededError):
        lower_central_series(ctx, step_cap=6)


# --- abelianization coordinates ----------------------------------------------

def test_z2_level1_rank2():
    lcs = lower_central_series(free_abelian_context(2))
    assert abelianization_coordinates(lcs, 1) == (2, ())


def test_heisenberg_level_ranks():
    lcs = lower_central_series(heisenberg_context())
    assert abelianization_coordinates(lcs, 1) == (2, ())
    assert abelianization_coordinates(lcs, 2) == (1, ())


def test_ambient_quotient_torsion():
    # <a^2, b> inside Z^2: quotient has torsion divisor 2
    ctx = free_abelian_context(2)
    amb = [stratum_vector(ctx.image(1), 1), stratum_vector(ctx.image(3), 1)]
    sub = [
        stratum_vector(element_power(ctx.image(1), 2), 1),
        stratum_vector(ctx.image(3), 1),
    ]
    assert stratum_quotient(amb, sub) == (0, (2,))


def test_permutation_backend_rank_zero():
    oracle = heisenberg_mod_oracle(2)
    ctx = GroupContext(
        gens=SymmetricGeneratingSet(4, (2, 1, 4, 3)), images=oracle.images
    )
    lcs = lower_central_series(ctx, step_cap=4)
    assert abelianization_coordinates(lcs, 1) == (0, ())
    assert refine_lcs(lcs).rank == 0


# --- refinement ---------------------------------------------------------------

def test_refine_z2():
    ref = refine_lcs(lower_central_series(free_abelian_context(2)))
    assert ref.rank == 2
    assert [lev.free_rank for lev in ref.levels] == [2]
    assert [g.word for g in ref.levels[0].generators] == [(1,), (3,)]


def test_refine_heisenberg():
    ref = refine_lcs(lower_central_series(heisenberg_context()))
    assert ref.rank == 3
    assert [lev.free_rank for lev in ref.levels] == [2, 1]
    assert all(len(g.word) <= 3 * 2**2 - 2 for g in ref.flattened())


def test_refine_ut4():
    ref = refine_lcs(lower_central_series(unitriangular_context(4)))
    assert ref.rank == 6
    assert [lev.free_rank for lev in ref.levels] == [3, 2, 1]
    assert all(len(g.word) <= ref.length_bound for g in ref.flattened())


@pytest.mark.parametrize("make_ctx", [heisenberg_context, lambda: unitriangular_context(4)])
def test_refined_generator_normality_into_next_level(make_ctx):
    # [ambient gen, level-s gen] vanishes on stratum s and lands in the
    # coordinate span of the next level's generators
    ctx = make_ctx()
    lcs = lower_central_series(ctx)
    ref = refine_lcs(lcs)
    for lev in ref.levels:
        for g in lev.generators:
            for i in range(1, ctx.gens.size + 1):
                c = commutator(ctx.image(i), g.element)
                if c.is_identity():
                    continue
                vs = stratum_vector(c, lev.level)
                assert all(x == 0 for x in vs)
                if lev.level < lcs.step:
                    nxt = [
                        stratum_vector(el, lev.level + 1)
                        for _, el in lcs.level_generators(lev.level)
                    ]
                    v = stratum_vector(c, lev.level + 1)
                    assert rational_rank(nxt + [v]) == rational_rank(nxt)


def test_rank_report():
    ref = refine_lcs(lower_central_series(heisenberg_context()))
    report = RankReport.from_refinement(ref)
    assert report.rank == 3 and report.step == 2
    assert report.per_level == ((2, ()), (1, ()))
    assert report.rank <= report.length_upper_bound


# --- rank of graded subgroups ---------------------------------------------------

def test_rank_all_powers_one():
    ref = refine_lcs(lower_central_series(heisenberg_context()))
    assert rank_of_graded_subgroup(ref, (1, 1, 1)) == 3


def test_rank_heisenberg_powers_235():
    ref = refine_lcs(lower_central_series(heisenberg_context()))
    assert rank_of_graded_subgroup(ref, (2, 3, 5)) == 3


def test_rank_z2_powers():
    ref = refine_lcs(lower_central_series(free_abelian_context(2)))
    assert rank_of_graded_subgroup(ref, (7, 11)) == 2


def test_rank_scaling_invariance_50_random_tuples():
    rng = random.Random(7)
    for name, ctx in [("z2", free_abelian_context(2)), ("heis", heisenberg_context())]:
        ref = refine_lcs(lower_central_series(ctx))
        m = len(ref.flattened())
        for _ in range(50):
            powers = tuple(rng.randint(1, 20) for _ in range(m))
            assert rank_of_graded_subgroup(ref, powers) == ref.rank


def test_rank_rejects_nonpositive_powers():
    ref = refine_lcs(lower_central_series(free_abelian_context(2)))
    with pytest.raises(ValueError):
        rank_of_graded_subgroup(ref, (0, 1))


# --- standard form --------------------------------------------------------------

def test_standard_form_identity():
    ctx = heisenberg_context()
    ref = refine_lcs(lower_central_series(ctx))
    sf = standard_form(ctx.identity, ref, (2, 2, 2))
    assert sf.exponents == (0, 0, 0)
    assert sf.residual.is_identity()


def brute_force_power_subgroup(ctx, gens, powers, depth):
    """Ball of <g_i^{a_i}> by plain set products (independent of the solver)."""
    seeds = []
    for el, a in zip(gens, powers):
        p = element_power(el, a)
        seeds += [p, p.inverse()]
    out = {ctx.identity}
    frontier = {ctx.identity}
    for _ in range(depth):
        frontier = {g * s for g in frontier for s in seeds}
        out |= frontier
    return out


def test_standard_form_heisenberg_example():
    ctx = heisenberg_context()
    ref = refine_lcs(lower_central_series(ctx))
    g = evaluate((1, 1, 1, 3, 3), ctx)  # x^3 y^2
    powers = (2, 2, 2)
    sf = standard_form(g, ref, powers)
    assert sf.exponents == (1, 0, 0)
    assert sf.index_bound == 8
    # exhaustive oracle: search all exponent tuples, verify the residual by
    # membership in a brute-forced ball of the power subgroup
    flat = [gg.element for gg in ref.flattened()]
    n_a = brute_force_power_subgroup(ctx, flat, powers, depth=4)
    valid = []
    for bs in itertools.product(*(range(a) for a in powers)):
        prefix = ctx.identity
        for el, b in zip(flat, bs):
            prefix = prefix * element_power(el, b)
        if prefix.inverse() * g in n_a:
            valid.append(bs)
    assert sf.exponents in valid
    assert sf.residual in n_a


def test_standard_form_z2_example():
    ctx = free_abelian_context(2)
    ref = refine_lcs(lower_central_series(ctx))
    g = evaluate((1,) * 5 + (3,) * 4, ctx)  # a^5 b^4
    sf = standard_form(g, ref, (2, 3))
    assert sf.exponents == (1, 1)
    assert sf.residual_exponents == (4, 3)
    assert sf.index_bound == 6
    # integer-division oracle
    assert (5 % 2, 4 % 3) == sf.exponents


def test_standard_form_random_reassembly():
    ctx = heisenberg_context()
    ref = refine_lcs(lower_central_series(ctx))
    ball = ball_enumerate(ctx, 5)
    rng = random.Random(3)
    els = list(ball.elements())
    powers = (2, 3, 5)
    for _ in range(60):
        g = rng.choice(els)
        sf = standard_form(g, ref, powers)
        prefix = ctx.identity
        for i, (gg, b) in enumerate(zip(ref.flattened(), sf.exponents)):
            assert 0 <= b < powers[i]
            prefix = prefix * element_power(gg.element, b)
        assert prefix * sf.residual == g
        for r, a in zip(sf.residual_exponents, powers):
            assert r % a == 0


def test_standard_form_coset_count_matches_index_bound():
    # Z^2 with powers (a1, a2): the mod-(a1, a2) oracle has exactly a1*a2 cosets
    ctx = free_abelian_context(2)
    for a1, a2 in [(2, 3), (3, 4)]:
        oracle = abelian_mod_oracle([a1, a2])
        assert coset_table(ctx, oracle).index == a1 * a2


# --- almost nilpotent rank --------------------------------------------------------

def subgroup_context_from_schreier(ctx, oracle):
    trans = canonical_transversal(coset_table(ctx, oracle), ctx)
    S = schreier_generators(trans, ctx, oracle)
    els = []
    seen = set()
    for e in S.entries:
        if e.element not in seen:
            els.append(e.element)
            seen.add(e.element)
    # symmetrize
    for e in list(els):
        if e.inverse() not in seen:
            els.append(e.inverse())
            seen.add(e.inverse())
    lookup = {el: i + 1 for i, el in enumerate(els)}
    pairing = tuple(lookup[el.inverse()] for el in els)
    return GroupContext(gens=SymmetricGeneratingSet(len(els), pairing), images=tuple(els))


def test_almost_nilpotent_rank_heisenberg_index4():
    ctx = heisenberg_context()
    oracle = heisenberg_mod_oracle(2, subgroup_gens=[(0, 0, 1)])
    tab = coset_table(ctx, oracle)
    sub = subgroup_context_from_schreier(ctx, oracle)
    sub_ref = refine_lcs(lower_central_series(sub))
    assert sub_ref.rank == 3
    assert almost_nilpotent_rank(sub_ref, tab) == 3
    full_ref = refine_lcs(lower_central_series(ctx))
    assert full_ref.rank == sub_ref.rank


def test_rank_zero_for_finite_permutation_group():
    oracle = heisenberg_mod_oracle(2)
    ctx = GroupContext(gens=SymmetricGeneratingSet(4, (2, 1, 4, 3)), images=oracle.images)
    ref = refine_lcs(lower_central_series(ctx, step_cap=4))
    assert almost_nilpotent_rank(ref) == 0
