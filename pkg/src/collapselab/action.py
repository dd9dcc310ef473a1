"""Isometric group actions on finite metric spaces.

An action assigns to every generator a permutation of the point set; elements
act through their words, and Cayley-ball sweeps resolve abstract elements to
point permutations.  On top of displacement live the short subgroups (all
elements moving the basepoint less than twice a threshold), the pigeonhole
power search with its hyperbolic-volume packing bound, the displacement
property of graded generators, and the rank-bound reports for collapsing
fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import BallTooLargeError, InputFormatError, NotFoundWithinCapError
from .group_core import GroupContext, GroupElement, ball_enumerate
from .metricspace import FiniteMetricSpace
from .nilpotent import PolycyclicRefinement, lower_central_series, refine_lcs
from .words import SymmetricGeneratingSet, Word


def compose(p: tuple, q: tuple) -> tuple:
    """(p o q)[i] = p[q[i]]: apply q first, then p."""
    return tuple(p[q[i]] for i in range(len(q)))


def identity_perm(n: int) -> tuple:
    return tuple(range(n))


class IsometricAction:
    """Per-generator point permutations on a finite metric space."""

    def __init__(self, ctx: GroupContext, space: FiniteMetricSpace, perms, declared_eps_act=0.0):
        self.ctx = ctx
        self.space = space
        self.perms = tuple(tuple(int(x) for x in p) for p in perms)
        if len(self.perms) != ctx.gens.size:
            raise InputFormatError("one permutation per generator required")
        n = space.size
        for p in self.perms:
            if sorted(p) != list(range(n)):
                raise InputFormatError("action images must permute the points")
        for i in range(1, ctx.gens.size + 1):
            j = ctx.gens.inverse(i)
            if compose(self.perms[i - 1], self.perms[j - 1]) != identity_perm(n):
                raise InputFormatError("action images must respect the inverse pairing")
        self.eps_act = self._distortion()
        if self.eps_act > declared_eps_act + 1e-12:
            raise InputFormatError(
                f"action distortion {self.eps_act} exceeds the declared bound"
            )

    def _distortion(self) -> float:
        D = np.asarray(self.space.dist, dtype=float)
        worst = 0.0
        for p in self.perms:
            idx = np.asarray(p)
            worst = max(worst, float(np.abs(D[np.ix_(idx, idx)] - D).max()))
        return worst

    def perm_of_letter(self, letter: int) -> tuple:
        return self.perms[letter - 1]

    def perm_of_word(self, letters: Sequence) -> tuple:
        out = identity_perm(self.space.size)
        for x in letters:
            out = compose(out, self.perm_of_letter(x))
        return out

    def resolve(self, g, ball_cap: int = 8) -> tuple:
        """Point permutation of a word or an element (looked up in the
        Cayley ball up to ``ball_cap``)."""
        if isinstance(g, GroupElement):
            ball = ball_enumerate(self.ctx, ball_cap)
            word = ball.word_of(g)
            if word is None:
                raise NotFoundWithinCapError("element outside the action's ball cap")
            return self.perm_of_word(word)
        return self.perm_of_word(tuple(g))


def displacement(action: IsometricAction, g, x: int, ball_cap: int = 8) -> float:
    """d(g.x, x), exact distance lookup."""
    p = action.resolve(g, ball_cap)
    return float(action.space.dist[p[x]][x])


def max_displacement_ball(
    action: IsometricAction, g, p: int, R: float, ball_cap: int = 8
) -> float:
    perm = action.resolve(g, ball_cap)
    idx = action.space.ball_indices(p, R)
    return max(float(action.space.dist[perm[x]][x]) for x in idx)


@dataclass(frozen=True)
class DisplacementProfile:
    word: Word
    basepoint: int
    radius: float
    per_point: tuple  # (point index, displacement) within the stated ball
    max_displacement: float


def displacement_profile(action: IsometricAction, g, p: int, R: float, ball_cap: int = 8) -> DisplacementProfile:
    perm = action.resolve(g, ball_cap)
    word = tuple(g) if not isinstance(g, GroupElement) else ball_enumerate(action.ctx, ball_cap).word_of(g)
    idx = action.space.ball_indices(p, R)
    per_point = tuple((x, float(action.space.dist[perm[x]][x])) for x in idx)
    return DisplacementProfile(
        word=word,
        basepoint=p,
        radius=R,
        per_point=per_point,
        max_displacement=max(v for _, v in per_point),
    )


@dataclass(frozen=True)
class ShortElement:
    word: Word
    element: GroupElement
    perm: tuple
    displacement: float


@dataclass(frozen=True)
class ShortSubgroup:
    """Elements of the ball moving the basepoint less than 2*delta, with the
    ball snapshot of the subgroup they generate."""

    threshold: float
    basepoint: int
    generators: tuple  # ShortElement list, canonical order
    snapshot: frozenset  # elements of <generators> within the scanned ball
    ball_cap: int

    def subgroup_context(self) -> Optional[GroupContext]:
        """The short generators as a group context of their own (None when
        the generating set is empty)."""
        if not self.generators:
            return None
        elements = [s.element for s in self.generators]
        lookup = {el: i + 1 for i, el in enumerate(elements)}
        pairing = tuple(lookup[el.inverse()] for el in elements)
        return GroupContext(
            gens=SymmetricGeneratingSet(len(elements), pairing),
            images=tuple(elements),
        )

    def letter_perms(self) -> tuple:
        return tuple(s.perm for s in self.generators)


def short_subgroup(
    action: IsometricAction,
    p: int,
    delta: float,
    ball_cap: int = 6,
    element_cap: Optional[int] = 200_000,
) -> ShortSubgroup:
    """Scan the Cayley ball for elements with d(g.p, p) < 2*delta and snapshot
    the part of the generated subgroup visible in the ball."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    ball = ball_enumerate(action.ctx, ball_cap, element_cap)
    n = action.space.size
    shorts = []
    perms = {}
    limit = ball.truncated_size(ball_cap)
    for i, (el, word, perm) in enumerate(
        ball.sweep(lambda q, s: compose(q, action.perm_of_letter(s)), identity_perm(n))
    ):
        if i >= limit:
            break
        perms[el] = perm
        disp = float(action.space.dist[perm[p]][p])
        if disp < 2 * delta and not el.is_identity():
            shorts.append(ShortElement(word=word, element=el, perm=perm, displacement=disp))
    members = {action.ctx.identity}
    frontier = [action.ctx.identity]
    ball_set = set(ball.order[:limit])
    short_els = [s.element for s in shorts]
    while frontier:
        g = frontier.pop()
        for h in short_els:
            out = g * h
            if out in ball_set and out not in members:
                members.add(out)
                frontier.append(out)
    return ShortSubgroup(
        threshold=delta,
        basepoint=p,
        generators=tuple(shorts),
        snapshot=frozenset(members),
        ball_cap=ball_cap,
    )


def power_small_displacement(
    action: IsometricAction,
    gamma,
    p: int,
    eps: float,
    R: float,
    power_cap: int,
    ball_cap: int = 8,
) -> Optional[int]:
    """Smallest 1 <= d <= power_cap whose power moves every point of B_R(p)
    less than eps; None when the cap is exhausted."""
    perm = action.resolve(gamma, ball_cap)
    idx = action.space.ball_indices(p, R)
    D = action.space.dist
    current = perm
    for d in range(1, power_cap + 1):
        if all(float(D[current[x]][x]) < eps for x in idx):
            return d
        current = compose(current, perm)
    return None


def hyperbolic_ball_volume(n: int, r: float, epsrel: float = 1e-12) -> float:
    """Volume of the r-ball in the curvature -1 space form of dimension n:
    Vol(S^(n-1)) * integral_0^r sinh^(n-1)(t) dt, by adaptive quadrature."""
    sphere = 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)
    val, _ = integrate.quad(lambda t: math.sinh(t) ** (n - 1), 0.0, r, epsrel=epsrel, limit=200)
    return sphere * val


@dataclass(frozen=True)
class PackingBound:
    """Explicit packing constants behind the pigeonhole power search.

    The final power bound is pigeonhole_count ** net_count; for realistic
    parameters that integer has billions of digits, so it is carried as
    (base, exponent) with its decimal length, and materialized only when it
    fits the digit cap."""

    dimension: int
    eps: float
    R: float
    separation_count: int  # ball-packing count: ceil(V(10R) / V(eps/2))
    pigeonhole_count: int  # twice the separation count
    net_count: int  # eps/20-separated net bound, same volume ratio
    power_bound_digits: float  # decimal digits of the power bound
    power_bound: Optional[int]  # exact value when within the digit cap

    def power_bound_str(self) -> str:
        if self.power_bound is not None:
            return str(self.power_bound)
        return f"{self.pigeonhole_count}^{self.net_count}"


def packing_power_bound(n: int, eps: float, R: float, digit_cap: int = 4096) -> PackingBound:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 1/10]")
    if R < 1:
        raise ValueError("R must be at least 1")
    big = hyperbolic_ball_volume(n, 10.0 * R)
    n0 = math.ceil(big / hyperbolic_ball_volume(n, eps / 2.0))
    m0 = 2 * n0
    k0 = math.ceil(big / hyperbolic_ball_volume(n, eps / 40.0))
    digits = k0 * math.log10(m0) + 1
    return PackingBound(
        dimension=n,
        eps=eps,
        R=R,
        separation_count=n0,
        pigeonhole_count=m0,
        net_count=k0,
        power_bound_digits=digits,
        power_bound=m0**k0 if digits <= digit_cap else None,
    )


def displacement_constant(w: float, step_len: int) -> float:
    """The displacement constant 10 * w * 2^l for (w, l)-nilpotent groups."""
    if w < 1 or step_len < 0:
        raise ValueError("need w >= 1 and step_len >= 0")
    return 10.0 * w * 2.0**step_len


@dataclass(frozen=True)
class DisplacementPropertyReport:
    rank: int
    eps: float
    displacements: tuple  # (level, position, displacement)
    passed: bool
    failures: tuple  # (level, position, displacement) exceeding eps


def displacement_property_check(
    action: IsometricAction,
    refinement: PolycyclicRefinement,
    p: int,
    eps: float,
    letter_perms: Optional[tuple] = None,
) -> DisplacementPropertyReport:
    """Check that every graded generator moves the basepoint less than eps.

    ``letter_perms`` supplies the point permutations of the refinement's own
    alphabet when the refinement lives in a subgroup context; by default the
    refinement is assumed to share the action's alphabet.
    """
    n = action.space.size
    perms = letter_perms if letter_perms is not None else action.perms
    rows = []
    fails = []
    for gen in refinement.flattened():
        perm = identity_perm(n)
        for letter in gen.word:
            perm = compose(perm, perms[letter - 1])
        disp = float(action.space.dist[perm[p]][p])
        rows.append((gen.level, gen.position, disp))
        if not disp < eps:
            fails.append((gen.level, gen.position, disp))
    return DisplacementPropertyReport(
        rank=refinement.rank,
        eps=eps,
        displacements=tuple(rows),
        passed=not fails,
        failures=tuple(fails),
    )


@dataclass(frozen=True)
class RankBoundReport:
    delta: float
    short_generator_count: int
    rank: int
    ambient_dim: int
    limit_dim: int
    bound: int  # ambient_dim - limit_dim
    within_bound: bool
    attains_bound: bool


def rank_bound_report(
    action: IsometricAction,
    p: int,
    delta: float,
    ambient_n: int,
    limit_k: int,
    ball_cap: int = 6,
) -> RankBoundReport:
    """Rank of the delta-short subgroup at p against the n - k bound.

    The short generators are refined as a nilpotent group in their own right
    (unitriangular backend required); an empty short set has rank 0.
    """
    short = short_subgroup(action, p, delta, ball_cap)
    sub = short.subgroup_context()
    if sub is None:
        rank = 0
    else:
        lcs = lower_central_series(sub)
        rank = refine_lcs(lcs).rank
    bound = ambient_n - limit_k
    return RankBoundReport(
        delta=delta,
        short_generator_count=len(short.generators),
        rank=rank,
        ambient_dim=ambient_n,
        limit_dim=limit_k,
        bound=bound,
        within_bound=rank <= bound,
        attains_bound=rank == bound,
    )
