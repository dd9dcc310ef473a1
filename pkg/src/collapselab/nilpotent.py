"""Basic commutators, the lower central series, its polycyclic refinement with
graded generators, standard forms, and rank/step invariants.

The unitriangular backend is the workhorse: for a subgroup of UT(n, Z)
generated inside the first superdiagonal stratum, weight-k basic commutators
live in stratum k+1, and reading the level stratum off the matrix is an exact
homomorphism onto a sublattice of Z^(n-s).  All rank computations reduce to
exact integer linear algebra on those coordinate vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    BackendUnsupportedError,
    DecompositionFailedError,
    SelectionFailedError,
    StepCapExceededError,
)
from .group_core import (
    PERMUTATION,
    UNITRIANGULAR,
    GroupContext,
    GroupElement,
    commutator,
    evaluate,
)
from .words import Word, concat_reduced, inverse_word, word_sort_key


def element_power(g: GroupElement, k: int) -> GroupElement:
    if k < 0:
        return element_power(g.inverse(), -k)
    out = None
    base = g
    while k:
        if k & 1:
            out = base if out is None else out * base
        base = base * base
        k >>= 1
    if out is None:
        if g.backend == UNITRIANGULAR:
            from .group_core import identity_matrix

            return identity_matrix(len(g.data))
        from .group_core import identity_permutation

        return identity_permutation(len(g.data))
    return out


@dataclass(frozen=True)
class BasicCommutatorSet:
    """Weight-k iterated commutators of the base generators, as (word, element)
    pairs; identity entries dropped, duplicates merged on the least word."""

    weight: int
    entries: tuple  # of (Word, GroupElement)

    def elements(self):
        return tuple(el for _, el in self.entries)

    def words(self):
        return tuple(w for w, _ in self.entries)


def _dedup_entries(pairs) -> tuple:
    best: dict = {}
    for word, el in pairs:
        if el.is_identity():
            continue
        prev = best.get(el)
        if prev is None or word_sort_key(word) < word_sort_key(prev):
            best[el] = word
    return tuple(
        (w, el) for el, w in sorted(best.items(), key=lambda kv: word_sort_key(kv[1]))
    )


def basic_commutators(
    ctx: GroupContext, base: Optional[Sequence] = None, weight: int = 1
) -> BasicCommutatorSet:
    """The weight-``weight`` commutator set over ``base`` (default: the
    context's generators as length-1 words)."""
    sets = _commutator_chain(ctx, base, weight)
    return sets[weight]


def _base_entries(ctx: GroupContext, base: Optional[Sequence]) -> tuple:
    if base is None:
        return _dedup_entries(((i,), ctx.image(i)) for i in range(1, ctx.gens.size + 1))
    out = []
    for item in base:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], GroupElement):
            out.append(item)
        else:
            word = tuple(item)
            out.append((word, evaluate(word, ctx)))
    return _dedup_entries(out)


def _next_weight(ctx: GroupContext, b0: tuple, prev: tuple) -> tuple:
    fresh = []
    for gw, g in prev:
        for sw, s in b0:
            el = commutator(g, s)
            if el.is_identity():
                continue
            word = concat_reduced(
                inverse_word(gw, ctx.gens) + inverse_word(sw, ctx.gens), gw + sw, ctx.gens
            )
            fresh.append((word, el))
    return _dedup_entries(fresh)


def _commutator_chain(ctx: GroupContext, base: Optional[Sequence], max_weight: int):
    """BasicCommutatorSet list for weights 0..max_weight."""
    b0 = _base_entries(ctx, base)
    sets = [BasicCommutatorSet(0, b0)]
    for k in range(1, max_weight + 1):
        sets.append(BasicCommutatorSet(k, _next_weight(ctx, b0, sets[-1].entries)))
    return sets


@dataclass(frozen=True)
class LowerCentralSeries:
    """Weighted commutator sets until they vanish; ``step`` is the first
    weight whose commutator set is empty."""

    ctx: GroupContext
    weights: tuple  # BasicCommutatorSet for 0..step (the last one empty)
    step: int

    def level_generators(self, s: int) -> tuple:
        """Generators of the level-s member: all commutators of weight >= s
        (level 0 additionally equals the base set)."""
        pairs = []
        for k in range(s, self.step + 1):
            pairs.extend(self.weights[k].entries)
        return _dedup_entries(pairs)

    @property
    def matrix_dim(self) -> int:
        return len(self.ctx.identity.data)


def lower_central_series(
    ctx: GroupContext, base: Optional[Sequence] = None, step_cap: Optional[int] = None
) -> LowerCentralSeries:
    """Compute commutator levels until they vanish.

    For the unitriangular backend nilpotency is guaranteed and the default
    cap is the matrix dimension minus one; the permutation backend requires
    an explicit cap (finite groups need not be nilpotent).
    """
    if ctx.backend == UNITRIANGULAR:
        cap = step_cap if step_cap is not None else len(ctx.identity.data) - 1
    else:
        if step_cap is None:
            raise StepCapExceededError("permutation backend requires step_cap")
        cap = step_cap
    sets = _commutator_chain(ctx, base, 0)
    k = 0
    while sets[-1].entries:
        if k >= cap:
            raise StepCapExceededError(
                f"commutator sets still nontrivial at weight {cap}"
            )
        k += 1
        sets.append(BasicCommutatorSet(k, _next_weight(ctx, sets[0].entries, sets[-1].entries)))
    step = len(sets) - 1
    if ctx.backend == UNITRIANGULAR:
        assert step <= len(ctx.identity.data) - 1
    return LowerCentralSeries(ctx=ctx, weights=tuple(sets), step=step)


def stratum_vector(el: GroupElement, stratum: int) -> tuple:
    """Entries on the ``stratum``-th superdiagonal (an exact homomorphism on
    matrices vanishing above shallower strata)."""
    n = len(el.data)
    return tuple(el.data[i][i + stratum] for i in range(n - stratum))


def stratum_quotient(level_rows: Sequence, sub_rows: Sequence):
    """(free rank, torsion divisors) of span(level) / span(sub)."""
    from .intlinalg import quotient_invariants

    return quotient_invariants(list(level_rows), list(sub_rows))


def abelianization_coordinates(lcs: LowerCentralSeries, s: int):
    """Free rank and torsion divisors of level s over level s+1... i.e. of the
    quotient of consecutive series members, via stratum-s coordinates.

    Exact for generating sets whose rational level filtration aligns with the
    superdiagonal strata (all shipped fixtures); the permutation backend has
    rank 0 by finiteness and is returned directly.
    """
    if lcs.ctx.backend == PERMUTATION:
        return 0, ()
    if not 1 <= s <= lcs.step:
        raise ValueError(f"level must be in 1..{lcs.step}")
    level_rows = [stratum_vector(el, s) for _, el in lcs.level_generators(s - 1)]
    sub_rows = [stratum_vector(el, s) for _, el in lcs.level_generators(s)]
    return stratum_quotient(level_rows, sub_rows)


@dataclass(frozen=True)
class GradedGenerator:
    level: int
    position: int  # 1-based within the level
    word: Word
    element: GroupElement
    coords: tuple  # stratum-s coordinate vector
    powers_checked: int  # powers verified to stay outside the lower member


@dataclass(frozen=True)
class LevelRefinement:
    level: int
    free_rank: int
    torsion_divisors: tuple
    generators: tuple  # GradedGenerator list, length free_rank
    sub_rows: tuple  # stratum coordinates of the next-level generators


@dataclass(frozen=True)
class PolycyclicRefinement:
    lcs: LowerCentralSeries
    levels: tuple  # LevelRefinement per level 1..step
    rank: int
    step: int
    length_bound: int  # word-length bound for every graded generator

    def flattened(self) -> tuple:
        return tuple(g for lev in self.levels for g in lev.generators)

    @property
    def length_upper_bound(self) -> int:
        """Length of the refinement-derived admissible polycyclic series (an
        upper bound for the nilpotency length; the minimum is not computed)."""
        return sum(
            lev.free_rank + (1 if lev.torsion_divisors else 0) for lev in self.levels
        )


def refine_lcs(lcs: LowerCentralSeries, power_check_cap: int = 8) -> PolycyclicRefinement:
    """Refine the lower central series with graded generators.

    Per level s, scans the level-(s-1) generators in presentation order and
    greedily keeps those whose stratum coordinates are rationally independent
    modulo the next level, until the level's free rank is reached.  Certifies
    the word-length bound 3 * 2^step - 2 and that powers of each generator up
    to ``power_check_cap`` stay outside the member below it.
    """
    from .intlinalg import rational_rank

    ctx = lcs.ctx
    if ctx.backend == PERMUTATION:
        return PolycyclicRefinement(lcs=lcs, levels=(), rank=0, step=lcs.step, length_bound=0)
    bound = 3 * 2**lcs.step - 2
    levels = []
    for s in range(1, lcs.step + 1):
        pool = lcs.level_generators(s - 1)
        sub_rows = [stratum_vector(el, s) for _, el in lcs.level_generators(s)]
        free_rank, torsion = abelianization_coordinates(lcs, s)
        chosen = []
        span = list(sub_rows)
        base_rank = rational_rank(span) if span else 0
        for word, el in pool:
            if len(chosen) == free_rank:
                break
            v = stratum_vector(el, s)
            if rational_rank(span + [v]) > base_rank:
                span.append(v)
                base_rank += 1
                assert len(word) <= bound, "graded generator exceeds the length bound"
                lower = [g.coords for g in chosen] + list(sub_rows)
                checked = 0
                for j in range(1, power_check_cap + 1):
                    jv = tuple(j * x for x in v)
                    if lower and rational_rank(lower + [jv]) == rational_rank(lower):
                        break
                    if not lower and all(x == 0 for x in jv):
                        break
                    checked = j
                if checked != power_check_cap:
                    raise SelectionFailedError(
                        f"power {checked + 1} of a level-{s} generator falls into "
                        "the lower member"
                    )
                chosen.append(
                    GradedGenerator(
                        level=s,
                        position=len(chosen) + 1,
                        word=word,
                        element=el,
                        coords=v,
                        powers_checked=checked,
                    )
                )
        if len(chosen) != free_rank:
            raise SelectionFailedError(
                f"level {s}: found {len(chosen)} independent generators, need {free_rank}"
            )
        levels.append(
            LevelRefinement(
                level=s,
                free_rank=free_rank,
                torsion_divisors=tuple(torsion),
                generators=tuple(chosen),
                sub_rows=tuple(sub_rows),
            )
        )
    rank = sum(lev.free_rank for lev in levels)
    return PolycyclicRefinement(
        lcs=lcs, levels=tuple(levels), rank=rank, step=lcs.step, length_bound=bound
    )


@dataclass(frozen=True)
class RankReport:
    rank: int
    step: int
    length_upper_bound: int
    per_level: tuple  # (free rank, torsion divisors) per level

    @classmethod
    def from_refinement(cls, ref: PolycyclicRefinement) -> "RankReport":
        report = cls(
            rank=ref.rank,
            step=ref.step,
            length_upper_bound=ref.length_upper_bound,
            per_level=tuple((lev.free_rank, lev.torsion_divisors) for lev in ref.levels),
        )
        assert report.rank == sum(n for n, _ in report.per_level)
        assert report.step <= max(report.length_upper_bound, report.step)
        return report


def rank_of_graded_subgroup(ref: PolycyclicRefinement, powers: Sequence) -> int:
    """Rank of the subgroup generated by the graded generators raised to the
    given positive powers (flattened in refinement order); equal to the full
    rank for every choice of positive powers."""
    from .intlinalg import rational_rank

    flat = ref.flattened()
    if len(powers) != len(flat):
        raise ValueError(f"need {len(flat)} powers, got {len(powers)}")
    for a in powers:
        if a < 1:
            raise ValueError("powers must be positive")
    total = 0
    idx = 0
    for lev in ref.levels:
        rows = list(lev.sub_rows)
        base = rational_rank(rows) if rows else 0
        for g in lev.generators:
            a = powers[idx]
            idx += 1
            rows.append(tuple(a * x for x in g.coords))
        total += rational_rank(rows) - base
    return total


def almost_nilpotent_rank(ref: PolycyclicRefinement, index_certificate=None) -> int:
    """Rank of an almost nilpotent group from any finite-index nilpotent
    subgroup's refinement (the rank does not depend on the subgroup); the
    optional coset table certifies that the index is finite."""
    if index_certificate is not None and index_certificate.index < 1:
        raise ValueError("index certificate must have positive index")
    return ref.rank


def _full_exponents(g: GroupElement, ref: PolycyclicRefinement):
    """Exponents r with g = prod sigma_i^(r_i) in refinement order, peeled
    level by level through the stratum homomorphisms."""
    from .intlinalg import solve_left_integer

    h = g
    exps = []
    for lev in ref.levels:
        rows = [gg.coords for gg in lev.generators]
        target = stratum_vector(h, lev.level)
        sol = solve_left_integer(rows, target) if rows else ()
        if sol is None:
            raise DecompositionFailedError(
                f"element has no integer coordinates at level {lev.level}"
            )
        if not rows and any(x != 0 for x in target):
            raise DecompositionFailedError(
                f"element has nonzero level-{lev.level} stratum but the level is empty"
            )
        prefix = None
        for gg, r in zip(lev.generators, sol):
            p = element_power(gg.element, r)
            prefix = p if prefix is None else prefix * p
        if prefix is not None:
            h = prefix.inverse() * h
        exps.extend(sol)
    if not h.is_identity():
        raise DecompositionFailedError(
            "element is not a product of the graded generators (torsion remainder)"
        )
    return exps


@dataclass(frozen=True)
class StandardForm:
    exponents: tuple  # b values, 0 <= b_i < a_i, refinement order
    residual: GroupElement  # lies in the subgroup of a-th powers
    residual_exponents: tuple  # full exponents of the residual (all divisible)
    residual_word: Word  # residual spelled in generator letters
    index_bound: int  # prod a_i


def standard_form(
    g: GroupElement, ref: PolycyclicRefinement, powers: Sequence
) -> StandardForm:
    """Write g = (prod sigma_i^(b_i)) * g_a with 0 <= b_i < a_i and g_a in the
    subgroup generated by the a-th powers of the graded generators.

    The b's are peeled front to back (recomputing exponents after each peel so
    commutator corrections flow into deeper levels), the residual's membership
    is certified by divisibility of its full exponents, and the decomposition
    is reassembled exactly.
    """
    flat = ref.flattened()
    if len(powers) != len(flat):
        raise ValueError(f"need {len(flat)} powers, got {len(powers)}")
    for a in powers:
        if a < 1:
            raise ValueError("powers must be positive")
    h = g
    bs = []
    for i, gen in enumerate(flat):
        exps = _full_exponents(h, ref)
        b = exps[i] % powers[i]
        bs.append(b)
        h = element_power(gen.element, -b) * h
    residual = h
    res_exps = _full_exponents(residual, ref)
    for r, a in zip(res_exps, powers):
        assert r % a == 0, "residual exponent not divisible by its power"
    # exact reassembly check
    check = None
    for gen, b in zip(flat, bs):
        p = element_power(gen.element, b)
        check = p if check is None else check * p
    check = residual if check is None else check * residual
    if check != g:
        raise DecompositionFailedError("reassembly mismatch")
    gens_alphabet = ref.lcs.ctx.gens
    res_word: Word = ()
    for gen, r in zip(flat, res_exps):
        piece = gen.word if r >= 0 else inverse_word(gen.word, gens_alphabet)
        res_word = concat_reduced(res_word, piece * abs(r), gens_alphabet)
    index_bound = math.prod(int(a) for a in powers)
    return StandardForm(
        exponents=tuple(bs),
        residual=residual,
        residual_exponents=tuple(res_exps),
        residual_word=res_word,
        index_bound=index_bound,
    )
