"""Exact group-element backends and Cayley-ball enumeration.

Two backends with decidable equality:

* ``unitriangular`` -- n x n upper unitriangular matrices over Python ints
  (arbitrary precision; entries of bounded-length words grow polynomially,
  so fixed-width integers are not safe).
* ``permutation`` -- permutations of {0..N-1} in one-line notation.

Elements are immutable and hashable, which is what makes breadth-first
enumeration with element hashing work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import BackendMismatchError, BallTooLargeError
from .words import (
    CanonicalWord,
    SymmetricGeneratingSet,
    Word,
    check_letters,
)

UNITRIANGULAR = "unitriangular"
PERMUTATION = "permutation"


@dataclass(frozen=True)
class GroupElement:
    backend: str
    data: tuple  # rows of the matrix, or the one-line permutation

    def __post_init__(self):
        if self.backend == UNITRIANGULAR:
            n = len(self.data)
            for i, row in enumerate(self.data):
                if len(row) != n:
                    raise ValueError("matrix must be square")
                if row[i] != 1 or any(row[j] != 0 for j in range(i)):
                    raise ValueError("matrix must be upper unitriangular")
        elif self.backend == PERMUTATION:
            if sorted(self.data) != list(range(len(self.data))):
                raise ValueError("permutation must be a bijection of 0..N-1")
        else:
            raise ValueError(f"unknown backend {self.backend!r}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if self.backend != other.backend:
            raise BackendMismatchError("cannot multiply across backends")
        if self.backend == UNITRIANGULAR:
            a, b = self.data, other.data
            n = len(a)
            rows = []
            for i in range(n):
                ai = a[i]
                row = []
                for j in range(n):
                    # upper triangular: only k in [i, j] contributes
                    row.append(sum(ai[k] * b[k][j] for k in range(i, j + 1)))
                rows.append(tuple(row))
            return GroupElement(UNITRIANGULAR, tuple(rows))
        return GroupElement(
            PERMUTATION, tuple(self.data[other.data[i]] for i in range(len(self.data)))
        )

    def inverse(self) -> "GroupElement":
        if self.backend == UNITRIANGULAR:
            # back-substitution; exact over the integers
            n = len(self.data)
            inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
            for j in range(n):
                for i in range(j - 1, -1, -1):
                    s = sum(self.data[i][k] * inv[k][j] for k in range(i + 1, j + 1))
                    inv[i][j] = -s
            return GroupElement(UNITRIANGULAR, tuple(tuple(r) for r in inv))
        out = [0] * len(self.data)
        for i, v in enumerate(self.data):
            out[v] = i
        return GroupElement(PERMUTATION, tuple(out))

    def is_identity(self) -> bool:
        if self.backend == UNITRIANGULAR:
            n = len(self.data)
            return all(
                self.data[i][j] == (1 if i == j else 0)
                for i in range(n)
                for j in range(i, n)
            )
        return all(v == i for i, v in enumerate(self.data))


def identity_matrix(n: int) -> GroupElement:
    return GroupElement(
        UNITRIANGULAR, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    )


def identity_permutation(n: int) -> GroupElement:
    return GroupElement(PERMUTATION, tuple(range(n)))


def unitriangular(rows) -> GroupElement:
    return GroupElement(UNITRIANGULAR, tuple(tuple(int(x) for x in r) for r in rows))


def permutation(one_line) -> GroupElement:
    return GroupElement(PERMUTATION, tuple(int(x) for x in one_line))


def elementary_unitriangular(n: int, i: int, j: int, value: int = 1) -> GroupElement:
    """Identity plus ``value`` at (i, j), 0-based, i < j."""
    if not 0 <= i < j < n:
        raise ValueError("need 0 <= i < j < n")
    rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    rows[i][j] = value
    return unitriangular(rows)


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """[g, h] = g^-1 h^-1 g h (fixed convention; generated subgroups do not
    depend on it)."""
    return g.inverse() * h.inverse() * g * h


@dataclass(frozen=True)
class GroupContext:
    """A group given by generator images over a symmetric alphabet."""

    gens: SymmetricGeneratingSet
    images: tuple  # images[i-1] = GroupElement of s_i
    backend: str = field(init=False)

    def __post_init__(self):
        if len(self.images) != self.gens.size:
            raise ValueError("one image per generator required")
        backends = {g.backend for g in self.images}
        if len(backends) != 1:
            raise BackendMismatchError("generator images must share one backend")
        object.__setattr__(self, "backend", backends.pop())
        for i in range(1, self.gens.size + 1):
            gi = self.image(i)
            if gi.is_identity():
                raise ValueError(f"generator s{i} evaluates to the identity")
            if self.image(self.gens.inverse(i)) != gi.inverse():
                raise ValueError(f"image of inverse letter {i} is not the inverse image")

    def image(self, letter: int) -> GroupElement:
        return self.images[letter - 1]

    @property
    def identity(self) -> GroupElement:
        if self.backend == UNITRIANGULAR:
            return identity_matrix(len(self.images[0].data))
        return identity_permutation(len(self.images[0].data))


def evaluate(letters: Sequence, ctx: GroupContext) -> GroupElement:
    """Left-to-right product of generator images; empty word -> identity."""
    out = ctx.identity
    for x in check_letters(letters, ctx.gens):
        out = out * ctx.image(x)
    return out


class CayleyBall:
    """Ball of a Cayley graph with one *canonical* word per element.

    ``order`` lists elements in canonical-presentation order (length, then
    lexicographic), which is also the alphabetical ordering of the elements;
    every stored word's prefixes are themselves stored (prefix closure).
    Each entry keeps the index of its parent (the word minus its last letter)
    so sweeps can fold homomorphisms incrementally.
    """

    def __init__(self, ctx: GroupContext):
        self.ctx = ctx
        self.radius = 0
        e = ctx.identity
        self.order = [e]
        self.words = [()]  # words[i] = canonical word of order[i]
        self.parents = [(-1, 0)]  # (parent index, last letter); identity sentinel
        self.index = {e: 0}
        self._layer_start = [0, 1]  # order[_layer_start[r] : _layer_start[r+1]] has length r

    def __len__(self):
        return len(self.order)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.index

    def word_of(self, g: GroupElement) -> Optional[Word]:
        i = self.index.get(g)
        return None if i is None else self.words[i]

    def canonical_word_of(self, g: GroupElement) -> Optional[CanonicalWord]:
        w = self.word_of(g)
        return None if w is None else CanonicalWord(w, certified=True)

    def element_of(self, letters: Sequence) -> GroupElement:
        return evaluate(letters, self.ctx)

    def elements(self):
        return iter(self.order)

    def grow(self, radius: int, element_cap: Optional[int] = None) -> "CayleyBall":
        """Extend the enumeration to the requested radius (idempotent)."""
        gens = self.ctx.gens
        while self.radius < radius:
            lo, hi = self._layer_start[self.radius], self._layer_start[self.radius + 1]
            for pi in range(lo, hi):
                w = self.words[pi]
                parent = self.order[pi]
                for s in range(1, gens.size + 1):
                    if w and gens.inverse(w[-1]) == s:
                        continue  # not reduced
                    g = parent * self.ctx.image(s)
                    if g in self.index:
                        continue
                    self.index[g] = len(self.order)
                    self.order.append(g)
                    self.words.append(w + (s,))
                    self.parents.append((pi, s))
                    if element_cap is not None and len(self.order) > element_cap:
                        raise BallTooLargeError(
                            f"ball exceeds {element_cap} elements at radius "
                            f"{self.radius + 1}"
                        )
            self.radius += 1
            self._layer_start.append(len(self.order))
        return self

    def truncated_size(self, radius: int) -> int:
        if radius >= self.radius:
            return len(self.order)
        return self._layer_start[radius + 1]

    def sweep(self, fold, unit):
        """Yield (element, word, folded value) in canonical order, where the
        value of an entry is fold(parent value, last letter); the identity
        gets ``unit``.  One product per element instead of one per letter."""
        values = [unit]
        yield self.order[0], self.words[0], unit
        for i in range(1, len(self.order)):
            pi, s = self.parents[i]
            v = fold(values[pi], s)
            values.append(v)
            yield self.order[i], self.words[i], v


_BALL_CACHE: dict = {}


def ball_enumerate(
    ctx: GroupContext, radius: int, element_cap: Optional[int] = None
) -> CayleyBall:
    """Enumerate all elements of reduced-word length <= radius with their
    canonical words.  Balls are cached per context and grown monotonically."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    ball = _BALL_CACHE.get(ctx)
    if ball is None:
        ball = CayleyBall(ctx)
        _BALL_CACHE[ctx] = ball
    return ball.grow(radius, element_cap)


def clear_ball_cache():
    _BALL_CACHE.clear()
