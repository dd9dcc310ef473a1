"""Words over an ordered symmetric generating set.

Letters are 1-based generator indices.  The alphabet is *symmetric*: an
involution pairs each index with the index of its inverse (fixed points are
allowed, for involutive generators).  On top of plain tuples of letters this
module provides free reduction, the presentation ordering (shorter first,
then first-difference lexicographic), and certified canonical presentations
found by breadth-first ball search in a group backend.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import LetterOutOfRangeError

Word = tuple  # tuple[int, ...]; 1-based letters


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class SymmetricGeneratingSet:
    """Ordered alphabet s_1..s_d together with the inverse involution."""

    size: int
    inverse_pairing: tuple  # inverse_pairing[i-1] = index of the inverse of s_i

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("generating set must be nonempty")
        if len(self.inverse_pairing) != self.size:
            raise ValueError("pairing length must equal size")
        for i, j in enumerate(self.inverse_pairing, start=1):
            if not 1 <= j <= self.size:
                raise ValueError(f"pairing value {j} out of range")
            if self.inverse_pairing[j - 1] != i:
                raise ValueError("inverse pairing must be an involution")

    def inverse(self, letter: int) -> int:
        return self.inverse_pairing[letter - 1]

    @classmethod
    def from_free_pairs(cls, pairs: int) -> "SymmetricGeneratingSet":
        """Alphabet (a1, a1^-1, a2, a2^-1, ...) for `pairs` free generators."""
        pairing = []
        for k in range(pairs):
            pairing += [2 * k + 2, 2 * k + 1]
        return cls(2 * pairs, tuple(pairing))


@dataclass(frozen=True)
class CanonicalWord:
    """A reduced word certified (by ball search) to be the canonical
    presentation of the element it evaluates to."""

    letters: Word
    certified: bool = True

    def __len__(self):
        return len(self.letters)


def check_letters(letters: Iterable, gens: SymmetricGeneratingSet) -> Word:
    word = tuple(letters)
    for x in word:
        if not 1 <= x <= gens.size:
            raise LetterOutOfRangeError(f"letter {x} outside 1..{gens.size}")
    return word


def normalize_letters(letters: Sequence, gens: SymmetricGeneratingSet) -> Word:
    """Accept the serialized form where -i abbreviates the inverse of s_i."""
    out = []
    for x in letters:
        x = int(x)
        if x < 0:
            x = gens.inverse(-x)
        if not 1 <= x <= gens.size:
            raise LetterOutOfRangeError(f"letter {x} outside 1..{gens.size}")
        out.append(x)
    return tuple(out)


def reduce_word(letters: Iterable, gens: SymmetricGeneratingSet) -> Word:
    """Freely reduce: cancel adjacent (i, inverse(i)) pairs until none remain."""
    stack = []
    for x in check_letters(letters, gens):
        if stack and stack[-1] == gens.inverse(x):
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def is_reduced(letters: Sequence, gens: SymmetricGeneratingSet) -> bool:
    return all(gens.inverse(a) != b for a, b in zip(letters, letters[1:]))


def inverse_word(letters: Sequence, gens: SymmetricGeneratingSet) -> Word:
    return tuple(gens.inverse(x) for x in reversed(letters))


def concat_reduced(w1: Sequence, w2: Sequence, gens: SymmetricGeneratingSet) -> Word:
    return reduce_word(tuple(w1) + tuple(w2), gens)


def compare_presentations(w1: Sequence, w2: Sequence) -> Ordering:
    """Order two reduced words: shorter first, equal lengths letterwise at the
    first differing position.  Total on reduced words by construction."""
    if len(w1) != len(w2):
        return Ordering.LESS if len(w1) < len(w2) else Ordering.GREATER
    for a, b in zip(w1, w2):
        if a != b:
            return Ordering.LESS if a < b else Ordering.GREATER
    return Ordering.EQUAL


def word_sort_key(letters: Sequence) -> tuple:
    """Sort key realizing the presentation ordering."""
    return (len(letters), tuple(letters))


def min_word(words: Iterable) -> Word:
    """The presentation-least word of a nonempty iterable."""
    return min(words, key=word_sort_key)


def enumerate_reduced_words(gens: SymmetricGeneratingSet, max_len: int):
    """Yield every reduced word of length <= max_len in presentation order.

    Exhaustive (no group quotient); meant as an oracle for small alphabets.
    """
    yield ()
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for s in range(1, gens.size + 1):
                if w and gens.inverse(w[-1]) == s:
                    continue
                nxt.append(w + (s,))
        for w in nxt:
            yield w
        frontier = nxt


def canonical_presentation(g, ctx, radius_cap: int) -> CanonicalWord:
    """Canonical presentation of a group element: the presentation-least
    reduced word of minimal length evaluating to ``g``, found by breadth-first
    enumeration with element hashing.

    Raises NotFoundWithinCapError when ``g`` is not in the Cayley ball of
    radius ``radius_cap``.
    """
    from .group_core import ball_enumerate  # cycle-free at call time

    ball = ball_enumerate(ctx, radius_cap)
    word = ball.word_of(g)
    if word is None:
        from .errors import NotFoundWithinCapError

        raise NotFoundWithinCapError(
            f"element not reachable within radius {radius_cap}; raise the cap"
        )
    return CanonicalWord(word, certified=True)


def format_word(letters: Sequence) -> str:
    """Compact s-index display with run-length powers, e.g. 's2.s1^2'."""
    if not letters:
        return "e"
    parts = []
    for letter, grp in itertools.groupby(letters):
        n = len(list(grp))
        parts.append(f"s{letter}" + (f"^{n}" if n > 1 else ""))
    return ".".join(parts)
