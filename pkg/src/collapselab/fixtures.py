"""Desk-scale fixtures: lattice groups as unitriangular matrices, finite
quotient oracles via left-regular permutation embeddings, and translation /
rotation actions on torus and circle nets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .action import IsometricAction
from .group_core import (
    GroupContext,
    elementary_unitriangular,
    permutation,
)
from .metricspace import FiniteMetricSpace, euclidean_grid_ball
from .subgroups import FiniteQuotientOracle
from .words import SymmetricGeneratingSet


def _context_from_positive_gens(gens) -> GroupContext:
    """Alphabet (g1, g1^-1, g2, g2^-1, ...) from a list of elements."""
    images = []
    for g in gens:
        images += [g, g.inverse()]
    return GroupContext(
        gens=SymmetricGeneratingSet.from_free_pairs(len(gens)), images=tuple(images)
    )


def free_abelian_context(n: int) -> GroupContext:
    """Z^n as block-diagonal unitriangular 2n x 2n matrices (all generators
    sit in the first superdiagonal stratum)."""
    gens = [elementary_unitriangular(2 * n, 2 * i, 2 * i + 1) for i in range(n)]
    return _context_from_positive_gens(gens)


def heisenberg_context() -> GroupContext:
    """Integer Heisenberg group in UT(3, Z), generators x = E12, y = E23."""
    return _context_from_positive_gens(
        [elementary_unitriangular(3, 0, 1), elementary_unitriangular(3, 1, 2)]
    )


def unitriangular_context(n: int) -> GroupContext:
    """Full UT(n, Z) with the elementary superdiagonal generators."""
    return _context_from_positive_gens(
        [elementary_unitriangular(n, i, i + 1) for i in range(n - 1)]
    )


# ---------------------------------------------------------------------------
# finite quotients via the left-regular representation


def _left_regular_oracle(
    elements, mult, identity, gen_elements, subgroup_elements
) -> FiniteQuotientOracle:
    index = {el: i for i, el in enumerate(elements)}

    def perm_of(g):
        return permutation([index[mult(g, x)] for x in elements])

    images = tuple(perm_of(g) for g in gen_elements)
    sub = frozenset(perm_of(h) for h in _close(subgroup_elements, mult, identity))
    return FiniteQuotientOracle(degree=len(elements), images=images, subgroup=sub)


def _close(seed, mult, identity):
    """Subgroup closure; in a finite group the semigroup closure of a
    generating set already contains every inverse."""
    out = {identity}
    frontier = [identity]
    gens = list(seed)
    while frontier:
        g = frontier.pop()
        for h in gens:
            p = mult(g, h)
            if p not in out:
                out.add(p)
                frontier.append(p)
    return out


def abelian_mod_oracle(moduli: Sequence, subgroup_gens: Sequence = ()) -> FiniteQuotientOracle:
    """Quotient of Z^n by componentwise reduction mod ``moduli``; the target
    subgroup is generated by the given residue tuples.  Pairs with
    free_abelian_context(len(moduli))."""
    mods = tuple(int(m) for m in moduli)
    n = len(mods)
    elements = [t for t in itertools.product(*(range(m) for m in mods))]

    def mult(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, mods))

    gen_elements = []
    for i in range(n):
        plus = tuple(1 % mods[i] if j == i else 0 for j in range(n))
        minus = tuple((-1) % mods[i] if j == i else 0 for j in range(n))
        gen_elements += [plus, minus]
    subgroup = [tuple(int(x) % m for x, m in zip(t, mods)) for t in subgroup_gens]
    identity = tuple(0 for _ in mods)
    return _left_regular_oracle(elements, mult, identity, gen_elements, subgroup)


def heisenberg_mod_oracle(q: int, subgroup_gens: Sequence = ()) -> FiniteQuotientOracle:
    """Quotient of the Heisenberg lattice by entries mod q (order q^3); the
    subgroup is generated by the given (a, b, c) triples.  Pairs with
    heisenberg_context()."""
    elements = [t for t in itertools.product(range(q), repeat=3)]

    def mult(g, h):
        # (a1,b1,c1)*(a2,b2,c2) from the UT(3) product: c picks up a1*b2
        return ((g[0] + h[0]) % q, (g[1] + h[1]) % q, (g[2] + h[2] + g[0] * h[1]) % q)

    x, y = (1, 0, 0), (0, 1, 0)
    x_inv, y_inv = ((-1) % q, 0, 0), (0, (-1) % q, 0)
    subgroup = [tuple(int(v) % q for v in t) for t in subgroup_gens]
    return _left_regular_oracle(elements, mult, (0, 0, 0), [x, x_inv, y, y_inv], subgroup)


# ---------------------------------------------------------------------------
# actions


def circle_rotation_action(count: int, shift: int, circumference=None) -> IsometricAction:
    """Z acting on an evenly spaced circle net by rotating ``shift`` steps."""
    from .metricspace import circle_net

    space = circle_net(count if circumference is None else circumference, count)
    ctx = _context_from_positive_gens(
        [elementary_unitriangular(2, 0, 1)]
    )
    fwd = tuple((i + shift) % count for i in range(count))
    back = tuple((i - shift) % count for i in range(count))
    return IsometricAction(ctx, space, (fwd, back))


def torus_grid_space(counts: Sequence, spacings: Sequence) -> FiniteMetricSpace:
    """Grid net of a flat torus with per-dimension point counts and spacings;
    index 0 is the origin."""
    counts = tuple(int(c) for c in counts)
    spacings = tuple(float(s) for s in spacings)
    sides = tuple(c * s for c, s in zip(counts, spacings))
    pts = np.array(list(itertools.product(*(range(c) for c in counts))), dtype=float)
    pts *= np.asarray(spacings)
    n = len(pts)
    rows = np.zeros((n, n))
    sides_arr = np.asarray(sides)
    for i in range(n):
        delta = np.abs(pts - pts[i])
        delta = np.minimum(delta, sides_arr - delta)
        rows[i] = np.sqrt((delta**2).sum(axis=1))
    return FiniteMetricSpace(rows.tolist(), basepoint=0, coords=pts, exact=False)


def torus_translation_action(counts: Sequence, spacings: Sequence, shifts: Sequence) -> IsometricAction:
    """Z^n acting on a torus grid; ``shifts``[i] is the per-dimension step
    tuple of the i-th positive generator."""
    counts = tuple(int(c) for c in counts)
    space = torus_grid_space(counts, spacings)
    n_dims = len(counts)
    strides = []
    acc = 1
    for c in reversed(counts):
        strides.append(acc)
        acc *= c
    strides = tuple(reversed(strides))
    total = acc

    def perm_for(step):
        out = []
        for flat in range(total):
            coords = []
            rem = flat
            for s, c in zip(strides, counts):
                coords.append(rem // s)
                rem %= s
            moved = [(x + k) % c for x, k, c in zip(coords, step, counts)]
            out.append(sum(x * s for x, s in zip(moved, strides)))
        return tuple(out)

    ctx = free_abelian_context(len(shifts))
    perms = []
    for step in shifts:
        fwd = perm_for(tuple(int(k) for k in step))
        bwd = perm_for(tuple(-int(k) for k in step))
        perms += [fwd, bwd]
    return IsometricAction(ctx, space, tuple(perms))


@dataclass(frozen=True)
class CollapsingTorusFixture:
    """Z^n acting by deck translations on a periodic window of the universal
    cover of T^n with the first n-k circle factors collapsed to circumference
    1/j.  The window holds ``window`` net points per dimension, so no
    nontrivial element of the radius-(window-1)/2 ball acts trivially."""

    action: IsometricAction
    limit_ball: FiniteMetricSpace
    n: int
    k: int
    j: int
    window: int
    delta_window: tuple  # (low, high): rank n-k exactly for delta in window


def collapsing_torus_action(n: int, k: int, j: int, window: int = 7) -> CollapsingTorusFixture:
    """Generators translate by 1/j along the n-k collapsed directions and by
    1 along the k unit directions; the net spacing equals the translation
    step per dimension, so point counts do not grow with j."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    counts = [window] * n
    spacings = [1.0 / j] * (n - k) + [1.0] * k
    shifts = [tuple(1 if t == i else 0 for t in range(n)) for i in range(n)]
    action = torus_translation_action(counts, spacings, shifts)
    if k == 0:
        limit = FiniteMetricSpace([[0]], basepoint=0)
    else:
        limit = euclidean_grid_ball(k, r=0.45, spacing=0.15)
    return CollapsingTorusFixture(
        action=action,
        limit_ball=limit,
        n=n,
        k=k,
        j=j,
        window=window,
        delta_window=(1.0 / (2.0 * j), 0.5),
    )
