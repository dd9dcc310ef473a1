"""Finite-index subgroups through finite-quotient membership oracles.

A subgroup is always presented as N = preimage of H under a homomorphism
into a finite permutation group.  That keeps every operation total: coset
tables, the canonical (first-in-coset) transversal, and Schreier generating
sets with their effective bounds (at most C^2*d entries, each of length at
most 2C+1 for index C over d generators).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    InconsistentOracleError,
    MembershipViolationError,
    NotNormalError,
    SearchExhaustedError,
)
from .group_core import (
    GroupContext,
    GroupElement,
    ball_enumerate,
    evaluate,
    identity_permutation,
)
from .words import (
    CanonicalWord,
    Word,
    concat_reduced,
    inverse_word,
    min_word,
    reduce_word,
    word_sort_key,
)


def close_under_group_ops(seed, identity) -> frozenset:
    """Smallest subset containing ``seed`` closed under product and inverse."""
    out = {identity}
    frontier = deque(seed)
    gens = list(seed)
    while frontier:
        g = frontier.popleft()
        if g in out:
            continue
        out.add(g)
        for h in gens + [g.inverse()]:
            for p in (g * h, h * g, g.inverse()):
                if p not in out:
                    frontier.append(p)
    return frozenset(out)


@dataclass(frozen=True)
class FiniteQuotientOracle:
    """Homomorphism data phi (one permutation per generator) and a target
    subgroup H of the finite image; decides membership in N = phi^-1(H)."""

    degree: int
    images: tuple  # images[i-1] = permutation GroupElement for s_i
    subgroup: frozenset  # H as a set of permutation elements

    def __post_init__(self):
        ident = identity_permutation(self.degree)
        if ident not in self.subgroup:
            raise InconsistentOracleError("H must contain the identity")
        for g in self.subgroup:
            if g.inverse() not in self.subgroup:
                raise InconsistentOracleError("H must be closed under inverse")

    @classmethod
    def from_subgroup_generators(cls, degree, images, subgroup_generators):
        ident = identity_permutation(degree)
        H = close_under_group_ops(list(subgroup_generators), ident)
        return cls(degree, tuple(images), H)

    def check_pairing(self, ctx: GroupContext):
        for i in range(1, ctx.gens.size + 1):
            j = ctx.gens.inverse(i)
            if self.images[j - 1] != self.images[i - 1].inverse():
                raise InconsistentOracleError(
                    f"oracle images of s{i}, s{j} do not respect the inverse pairing"
                )

    def image_of_letter(self, letter: int) -> GroupElement:
        return self.images[letter - 1]

    def image_of_word(self, letters: Sequence) -> GroupElement:
        out = identity_permutation(self.degree)
        for x in letters:
            out = out * self.images[x - 1]
        return out

    def member_word(self, letters: Sequence) -> bool:
        return self.image_of_word(letters) in self.subgroup

    def member_perm(self, perm: GroupElement) -> bool:
        return perm in self.subgroup

    def image_group(self) -> frozenset:
        return close_under_group_ops(list(self.images), identity_permutation(self.degree))

    def is_normal(self) -> bool:
        """H normal in the image group iff N = phi^-1(H) is normal."""
        for g in self.images:
            gi = g.inverse()
            for h in self.subgroup:
                if gi * h * g not in self.subgroup:
                    return False
        return True

    def verify_on_ball(self, ctx: GroupContext, radius: int) -> bool:
        """Homomorphism spot-check: phi(g)*phi(s) = phi(g*s) on ball words."""
        ball = ball_enumerate(ctx, radius)
        for _, word, perm in ball.sweep(
            lambda p, s: p * self.images[s - 1], identity_permutation(self.degree)
        ):
            if perm != self.image_of_word(word):
                return False
        return True


def _coset_key(perm: GroupElement, subgroup: frozenset) -> tuple:
    """Canonical key of the left coset perm*H."""
    return min((perm * h).data for h in subgroup)


@dataclass(frozen=True)
class CosetTable:
    """Cosets of N = phi^-1(H), labelled by BFS with shortest-then-lex words;
    label 0 is the coset N itself."""

    index: int
    rep_words: tuple  # BFS word per label
    gen_action: tuple  # gen_action[s-1][label] = label of coset of (rep + s)
    oracle: FiniteQuotientOracle
    key_to_label: tuple  # sorted tuple of (coset key, label) pairs

    def label_of_perm(self, perm: GroupElement) -> int:
        key = _coset_key(perm, self.oracle.subgroup)
        return dict(self.key_to_label)[key]

    def label_of_word(self, letters: Sequence) -> int:
        return self.label_of_perm(self.oracle.image_of_word(letters))


def coset_table(ctx: GroupContext, oracle: FiniteQuotientOracle) -> CosetTable:
    """Enumerate the cosets of N = phi^-1(H) by breadth-first search from the
    identity, generators in index order; the index is computed exactly."""
    oracle.check_pairing(ctx)
    ident = identity_permutation(oracle.degree)
    start = _coset_key(ident, oracle.subgroup)
    labels = {start: 0}
    rep_words = [()]
    perms = [ident]
    queue = deque([0])
    edges = {}
    while queue:
        lab = queue.popleft()
        for s in range(1, ctx.gens.size + 1):
            p = perms[lab] * oracle.image_of_letter(s)
            key = _coset_key(p, oracle.subgroup)
            nxt = labels.get(key)
            if nxt is None:
                nxt = len(rep_words)
                labels[key] = nxt
                rep_words.append(rep_words[lab] + (s,))
                perms.append(p)
                queue.append(nxt)
            edges[(s, lab)] = nxt
    C = len(rep_words)
    action = tuple(
        tuple(edges[(s, lab)] for lab in range(C)) for s in range(1, ctx.gens.size + 1)
    )
    for row in action:
        if sorted(row) != list(range(C)):
            raise InconsistentOracleError("generator action is not a permutation of cosets")
    return CosetTable(
        index=C,
        rep_words=tuple(rep_words),
        gen_action=action,
        oracle=oracle,
        key_to_label=tuple(sorted(labels.items())),
    )


@dataclass(frozen=True)
class Transversal:
    """Per-coset representative words; canonical means each representative is
    the alphabetically least element of its coset in the verified ball."""

    table: CosetTable
    rep_words: tuple  # CanonicalWord per label
    rep_elements: tuple  # GroupElement per label
    canonical: bool = True

    @property
    def index(self) -> int:
        return self.table.index


def canonical_transversal(
    table: CosetTable, ctx: GroupContext, search_radius: Optional[int] = None
) -> Transversal:
    """First element of each coset in alphabetical order, by canonical-order
    ball sweep.  The representative of coset N is the identity, and every
    representative has length at most the index C."""
    C = table.index
    radius = C if search_radius is None else search_radius
    if radius < C:
        raise ValueError("search_radius must be at least the index")
    oracle = table.oracle
    ball = ball_enumerate(ctx, radius)
    label_lookup = dict(table.key_to_label)
    reps: dict = {}
    limit = ball.truncated_size(radius)
    for i, (el, word, perm) in enumerate(
        ball.sweep(lambda p, s: p * oracle.image_of_letter(s), identity_permutation(oracle.degree))
    ):
        if i >= limit:
            break
        lab = label_lookup[_coset_key(perm, oracle.subgroup)]
        if lab not in reps:
            reps[lab] = (CanonicalWord(word), el)
            if len(reps) == C:
                break
    if len(reps) != C:
        raise SearchExhaustedError(
            f"only {len(reps)} of {C} cosets have representatives within radius "
            f"{radius}; the oracle is inconsistent"
        )
    for lab in range(C):
        w, _ = reps[lab]
        assert len(w.letters) <= C, "canonical representative longer than the index"
    return Transversal(
        table=table,
        rep_words=tuple(reps[lab][0] for lab in range(C)),
        rep_elements=tuple(reps[lab][1] for lab in range(C)),
        canonical=True,
    )


@dataclass(frozen=True)
class SchreierEntry:
    word: Word
    element: GroupElement
    source: tuple  # (coset label, generator index) that produced it


@dataclass(frozen=True)
class SchreierSet:
    entries: tuple
    index: int
    alphabet_size: int

    @property
    def words(self) -> tuple:
        return tuple(e.word for e in self.entries)

    @property
    def count_bound(self) -> int:
        return self.index**2 * self.alphabet_size

    @property
    def length_bound(self) -> int:
        return 2 * self.index + 1

    def max_word_length(self) -> int:
        return max((len(e.word) for e in self.entries), default=0)


def schreier_generators(
    trans: Transversal, ctx: GroupContext, oracle: FiniteQuotientOracle
) -> SchreierSet:
    """Schreier generating set of N over the canonical transversal.

    One candidate per (representative t, generator s): F(s*t)^-1 * s * t,
    which lies in N for every subgroup since s*t and F(s*t) share a left
    coset.  Entries are reduced, deduplicated by element (keeping the
    presentation-least word), identity entries dropped, membership checked
    through the oracle, and both effective bounds asserted.
    """
    table = trans.table
    C = table.index
    d = ctx.gens.size
    label_lookup = dict(table.key_to_label)
    t_perms = [oracle.image_of_word(trans.rep_words[lab].letters) for lab in range(C)]
    best: dict = {}
    for lab in range(C):
        t_word = trans.rep_words[lab].letters
        t_el = trans.rep_elements[lab]
        for s in range(1, d + 1):
            # coset of s*t, hence F(s*t)
            key = _coset_key(oracle.image_of_letter(s) * t_perms[lab], oracle.subgroup)
            target = label_lookup[key]
            u_word = trans.rep_words[target].letters
            u_el = trans.rep_elements[target]
            word = concat_reduced(inverse_word(u_word, ctx.gens), (s,) + t_word, ctx.gens)
            el = u_el.inverse() * ctx.image(s) * t_el
            if not oracle.member_word(word):
                raise MembershipViolationError(
                    f"Schreier entry from coset {lab}, generator s{s} fails the oracle"
                )
            if el.is_identity():
                continue
            prev = best.get(el)
            if prev is None or word_sort_key(word) < word_sort_key(prev[0]):
                best[el] = (word, (lab, s))
    entries = tuple(
        SchreierEntry(word=w, element=el, source=src)
        for el, (w, src) in sorted(best.items(), key=lambda kv: word_sort_key(kv[1][0]))
    )
    out = SchreierSet(entries=entries, index=C, alphabet_size=d)
    assert len(out.entries) <= out.count_bound
    assert out.max_word_length() <= out.length_bound
    return out


def schreier_rewrite(
    letters: Sequence, trans: Transversal, ctx: GroupContext
) -> Optional[list]:
    """Rewrite a word lying in N as a product of Schreier entry words.

    Processes letters right to left through the coset table; returns the
    entry words in product order, or None when the input is not in N.
    """
    table = trans.table
    oracle = table.oracle
    label_lookup = dict(table.key_to_label)
    u_lab = 0
    parts = []
    for letter in reversed(tuple(letters)):
        t_word = trans.rep_words[u_lab].letters
        key = _coset_key(
            oracle.image_of_letter(letter) * oracle.image_of_word(t_word), oracle.subgroup
        )
        nxt = label_lookup[key]
        u_word = trans.rep_words[nxt].letters
        parts.append(
            concat_reduced(inverse_word(u_word, ctx.gens), (letter,) + t_word, ctx.gens)
        )
        u_lab = nxt
    if u_lab != 0:
        return None
    parts.reverse()
    return parts


@dataclass(frozen=True)
class PrefixClosureReport:
    passed: bool
    checked: int
    counterexamples: tuple


def prefix_closure_check(
    trans: Transversal, ctx: GroupContext, oracle: FiniteQuotientOracle
) -> PrefixClosureReport:
    """For normal N: every contiguous infix of a representative's canonical
    word must itself evaluate to a representative."""
    for g in tuple(oracle.images) + tuple(
        oracle.image_of_word(w.letters) for w in trans.rep_words
    ):
        gi = g.inverse()
        for h in oracle.subgroup:
            if gi * h * g not in oracle.subgroup:
                raise NotNormalError("oracle subgroup is not conjugation-invariant")
    table = trans.table
    rep_elements = set(trans.rep_elements)
    checked = 0
    bad = []
    for lab in range(table.index):
        w = trans.rep_words[lab].letters
        prefixes = [ctx.identity]
        for x in w:
            prefixes.append(prefixes[-1] * ctx.image(x))
        for i in range(len(w)):
            for j in range(i + 1, len(w) + 1):
                infix = w[i:j]
                el = prefixes[i].inverse() * prefixes[j]
                checked += 1
                if el not in rep_elements:
                    bad.append((lab, infix))
    return PrefixClosureReport(passed=not bad, checked=checked, counterexamples=tuple(bad))
