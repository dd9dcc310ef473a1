import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapselab.errors import LetterOutOfRangeError, NotFoundWithinCapError
from collapselab.fixtures import free_abelian_context, heisenberg_context
from collapselab.group_core import ball_enumerate, evaluate
from collapselab.words import (
    Ordering,
    SymmetricGeneratingSet,
    canonical_presentation,
    compare_presentations,
    enumerate_reduced_words,
    inverse_word,
    is_reduced,
    min_word,
    normalize_letters,
    reduce_word,
    word_sort_key,
)

FREE2 = SymmetricGeneratingSet.from_free_pairs(2)  # a, a^-1, b, b^-1


def test_pairing_must_be_involution():
    with pytest.raises(ValueError):
        SymmetricGeneratingSet(3, (2, 3, 1))


def test_reduce_full_cancellation():
    assert reduce_word((1, 2), FREE2) == ()


def test_reduce_inner_cancellation():
    # s1 s3 s3^-1 ... -> letters: a b b^-1 a  cancels to a a
    assert reduce_word((1, 3, 4, 1), FREE2) == (1, 1)


def test_reduce_letter_out_of_range():
    with pytest.raises(LetterOutOfRangeError):
        reduce_word((0,), FREE2)
    with pytest.raises(LetterOutOfRangeError):
        reduce_word((5,), FREE2)


@given(st.lists(st.integers(1, 4), max_size=12))
def test_reduce_idempotent_and_reduced(letters):
    w = reduce_word(letters, FREE2)
    assert is_reduced(w, FREE2)
    assert reduce_word(w, FREE2) == w


@given(st.lists(st.integers(1, 4), max_size=12))
def test_reduce_preserves_element(letters):
    # evaluate-and-compare oracle in the Z^2 matrix backend
    ctx = free_abelian_context(2)
    w = reduce_word(letters, ctx.gens)
    assert evaluate(letters, ctx) == evaluate(w, ctx)


def test_normalize_negative_shorthand():
    assert normalize_letters([1, -1, 3, -2], FREE2) == (1, 2, 3, 1)


def test_ordering_example_chain():
    w1, w2, w3, w4 = (2, 1, 3, 5), (2, 1, 4, 3), (2, 2, 4, 6), (1, 1, 1, 4, 4, 2)
    assert compare_presentations(w1, w2) is Ordering.LESS
    assert compare_presentations(w2, w3) is Ordering.LESS
    assert compare_presentations(w3, w4) is Ordering.LESS
    assert compare_presentations(w2, w2) is Ordering.EQUAL
    assert compare_presentations(w3, w1) is Ordering.GREATER


def test_four_presentations_select_least():
    presentations = [(1, 1, 1, 4, 4, 2), (2, 1, 4, 3), (2, 1, 3, 5), (2, 2, 4, 6)]
    assert min_word(presentations) == (2, 1, 3, 5)


@given(
    st.lists(st.integers(1, 4), max_size=6),
    st.lists(st.integers(1, 4), max_size=6),
    st.lists(st.integers(1, 4), max_size=6),
)
def test_ordering_total_and_transitive(a, b, c):
    wa, wb, wc = (reduce_word(x, FREE2) for x in (a, b, c))
    results = [compare_presentations(wa, wb), compare_presentations(wb, wa)]
    if wa == wb:
        assert results == [Ordering.EQUAL, Ordering.EQUAL]
    else:
        assert sorted(r.name for r in results) == ["GREATER", "LESS"]
    if (
        compare_presentations(wa, wb) is Ordering.LESS
        and compare_presentations(wb, wc) is Ordering.LESS
    ):
        assert compare_presentations(wa, wc) is Ordering.LESS


def test_canonical_identity():
    ctx = free_abelian_context(2)
    cw = canonical_presentation(ctx.identity, ctx, 2)
    assert cw.letters == () and cw.certified


def test_canonical_ab_in_z2():
    ctx = free_abelian_context(2)
    g = evaluate((1, 3), ctx)
    cw = canonical_presentation(g, ctx, 4)
    assert cw.letters == (1, 3)
    assert len(cw.letters) == 2


def test_canonical_not_found_within_cap():
    ctx = free_abelian_context(2)
    far = evaluate((1,) * 6, ctx)
    with pytest.raises(NotFoundWithinCapError):
        canonical_presentation(far, ctx, 3)


def brute_force_canonical(g, ctx, radius):
    """Independent oracle: scan every reduced word in presentation order."""
    for w in enumerate_reduced_words(ctx.gens, radius):
        if evaluate(w, ctx) == g:
            return w
    return None


@pytest.mark.parametrize("ctx_name", ["z2", "heis"])
def test_canonical_matches_brute_force(ctx_name):
    ctx = free_abelian_context(2) if ctx_name == "z2" else heisenberg_context()
    ball = ball_enumerate(ctx, 3)
    for el in ball.elements():
        w = ball.word_of(el)
        if len(w) > 3:
            break
        assert brute_force_canonical(el, ctx, 3) == w


def test_prefix_suffix_canonicality():
    # every cut of a certified canonical word yields canonical halves
    ctx = heisenberg_context()
    ball = ball_enumerate(ctx, 4)
    words = [ball.word_of(el) for el in itertools.islice(ball.elements(), 60)]
    for w in words:
        for k in range(1, len(w)):
            head, tail = w[:k], w[k:]
            assert ball.word_of(evaluate(head, ctx)) == head
            assert ball.word_of(evaluate(tail, ctx)) == tail


def test_length_subadditive():
    ctx = heisenberg_context()
    ball = ball_enumerate(ctx, 4)
    els = list(itertools.islice(ball.elements(), 25))
    for g in els:
        for h in els:
            prod = g * h
            w = ball.word_of(prod)
            if w is not None:
                assert len(w) <= len(ball.word_of(g)) + len(ball.word_of(h))


def test_inverse_word_evaluates_to_inverse():
    ctx = heisenberg_context()
    w = (1, 3, 3, 2)
    assert evaluate(inverse_word(w, ctx.gens), ctx) == evaluate(w, ctx).inverse()


def test_sort_key_matches_comparison():
    words = [w for w in enumerate_reduced_words(FREE2, 3)]
    by_key = sorted(words, key=word_sort_key)
    for u, v in zip(by_key, by_key[1:]):
        assert compare_presentations(u, v) is not Ordering.GREATER
