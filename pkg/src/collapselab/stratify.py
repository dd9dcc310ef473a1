"""Quantitative stratification on finite metric balls.

Cone-likeness at a scale is measured by a two-scale self-similarity score:
the pointed heuristic-GH upper bound between the r-ball and the r/2-ball
around the same center, both rescaled to unit size.  Exact cones score zero
by construction, which is the computable stand-in for symmetry against an
unknown comparison cone (a proxy, not claimed equivalent).  On top of the
scores live good/bad dyadic scales, line detection by additive chains,
cone-splitting with recursion on residual coordinates, the almost-Pythagorean
splitting detector, and the noncollapsing radius search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .metricspace import FiniteMetricSpace, gh_upper_heuristic, rescale


@dataclass(frozen=True)
class ScaleVerdict:
    alpha: int
    radius: float
    score: Optional[float]  # None when the ball was too small to compare
    good: bool
    skipped: bool


@dataclass(frozen=True)
class ScaleClassification:
    basepoint: int
    eps: float
    scales: tuple

    def bad_count(self) -> int:
        return sum(1 for s in self.scales if not s.skipped and not s.good)


def two_scale_score(
    X: FiniteMetricSpace,
    x: int,
    r: float,
    seed: int = 0,
    iterations: int = 60,
    good_enough: Optional[float] = None,
) -> Optional[float]:
    """Self-similarity score at (x, r): pointed heuristic-GH upper bound
    between B_r(x)/r and B_{r/2}(x)/(r/2); None when either ball is trivial."""
    big_idx = X.ball_indices(x, r)
    small_idx = X.ball_indices(x, r / 2)
    if not big_idx or not small_idx:
        return None
    if len(big_idx) == 1 and len(small_idx) == 1:
        return 0.0
    big = rescale(X.restrict(big_idx, basepoint=x), 1.0 / r)
    small = rescale(X.restrict(small_idx, basepoint=x), 2.0 / r)
    return gh_upper_heuristic(
        big, small, seed=seed, iterations=iterations, pointed=True, good_enough=good_enough
    ).upper


def good_bad_scales(
    X: FiniteMetricSpace,
    x: int,
    eps: float,
    alpha_max: int,
    scale_base: float = 1.0,
    seed: int = 0,
    iterations: int = 60,
) -> ScaleClassification:
    """Classify the dyadic scales r_alpha = scale_base * 2^-alpha at x as GOOD
    (score < eps) or BAD; scales with empty balls are skipped with a warning
    verdict."""
    out = []
    for alpha in range(alpha_max + 1):
        r = scale_base * 2.0**-alpha
        score = two_scale_score(X, x, r, seed=seed, iterations=iterations, good_enough=eps / 2)
        if score is None:
            out.append(ScaleVerdict(alpha, r, None, good=True, skipped=True))
        else:
            out.append(ScaleVerdict(alpha, r, score, good=score < eps, skipped=False))
    return ScaleClassification(basepoint=x, eps=eps, scales=tuple(out))


@dataclass(frozen=True)
class Chain:
    points: tuple  # indices ordered along the chain
    span: float
    defect: float


def line_detect(
    X: FiniteMetricSpace,
    eps: float,
    basepoint: Optional[int] = None,
    max_pairs: int = 40,
    max_chains: int = 5,
) -> tuple:
    """Maximal eps-additive chains: orders the farthest point pairs, collects
    points that lie additively between them, and greedily keeps a subset with
    pairwise-consistent positions.  Chains through the basepoint sort first."""
    n = X.size
    D = np.asarray(X.dist, dtype=float)
    pairs = [(D[a][b], a, b) for a in range(n) for b in range(a + 1, n)]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    chains = []
    seen = set()
    for dist_ab, a, b in pairs[:max_pairs]:
        if dist_ab <= 0 or (a, b) in seen:
            continue
        seen.add((a, b))
        tol = eps * dist_ab
        members = [
            (float(D[a][z]), z)
            for z in range(n)
            if abs(D[a][z] + D[z][b] - dist_ab) < tol
        ]
        members.sort()
        accepted = []
        worst = 0.0
        for t, z in members:
            bad = None
            for tp, zp in accepted:
                gap = abs(float(D[zp][z]) - (t - tp))
                if gap >= tol:
                    bad = gap
                    break
                worst = max(worst, gap)
            if bad is None:
                accepted.append((t, z))
        if len(accepted) < 2:
            continue
        span = accepted[-1][0] - accepted[0][0]
        chains.append(Chain(tuple(z for _, z in accepted), span, worst))
    from_base = lambda c: 0 if (basepoint is not None and basepoint in c.points) else 1
    chains.sort(key=lambda c: (from_base(c), -c.span, c.points))
    return tuple(chains[:max_chains])


@dataclass(frozen=True)
class FactorWitness:
    endpoint_a: int
    endpoint_b: int
    separation: float
    line_defect: float
    lipschitz_defect: float
    triangle_defect: float


@dataclass(frozen=True)
class SplittingReport:
    detected: int
    factors: tuple  # FactorWitness per extracted factor
    residual: FiniteMetricSpace
    candidate_scores: tuple = ()


def _coordinate(dres: np.ndarray, a: int, b: int) -> np.ndarray:
    """Squared-distance affine coordinate along (a, b): exact orthogonal
    projection on Euclidean products, defined on any finite metric."""
    return (dres[a, :] ** 2 - dres[b, :] ** 2) / (2.0 * dres[a][b])


def _triangle_defect(d: np.ndarray) -> float:
    worst = 0.0
    for j in range(len(d)):
        viol = d - (d[:, j : j + 1] + d[j : j + 1, :])
        worst = max(worst, float(viol.max()))
    return worst


def _extract_factor(resid2: np.ndarray, a: int, b: int, eps: float, diam: float):
    """Try to split off the (a, b) coordinate; returns (new resid2, lipschitz
    defect, triangle defect) or None when a defect exceeds its tolerance."""
    dres = np.sqrt(np.maximum(resid2, 0.0))
    h = _coordinate(dres, a, b)
    dh2 = (h[:, None] - h[None, :]) ** 2
    lip = float((dh2 - dres**2).max())
    if lip > eps * diam * diam:
        return None
    new2 = resid2 - dh2
    tri = _triangle_defect(np.sqrt(np.maximum(new2, 0.0)))
    if tri > eps * diam:
        return None
    return np.maximum(new2, 0.0), lip, tri


def splitting_detect(
    X: FiniteMetricSpace, k_cap: int, eps: float, span_frac: float = 0.25
) -> SplittingReport:
    """Greedy Euclidean-factor extraction through the basepoint.

    Each round looks for the farthest pair (a, b) that is eps-additively
    collinear through the basepoint with both legs at least ``span_frac`` of
    the diameter, builds the squared-distance coordinate, and accepts the
    factor only when the coordinate is 1-Lipschitz up to eps * diam^2 in
    squared form and the residual stays a metric up to eps * diam; residual
    distances carry to the next round.
    """
    p = X.basepoint if X.basepoint is not None else 0
    n = X.size
    D = np.asarray(X.dist, dtype=float)
    diam = float(D.max())
    if diam == 0 or n < 3:
        return SplittingReport(0, (), X)
    resid2 = D**2
    factors = []
    while len(factors) < k_cap:
        dres = np.sqrt(np.maximum(resid2, 0.0))
        leg = dres[p, :]
        cand = []
        for a in range(n):
            if leg[a] < span_frac * diam:
                continue
            for b in range(a + 1, n):
                if leg[b] < span_frac * diam or dres[a][b] <= 0:
                    continue
                defect = leg[a] + leg[b] - dres[a][b]
                if defect < eps * dres[a][b]:
                    cand.append((-dres[a][b], defect, a, b))
        cand.sort()
        accepted = None
        for negd, defect, a, b in cand[:8]:
            got = _extract_factor(resid2, a, b, eps, diam)
            if got is not None:
                accepted = (a, b, -negd, defect, got)
                break
        if accepted is None:
            break
        a, b, sep, defect, (resid2, lip, tri) = accepted
        factors.append(
            FactorWitness(
                endpoint_a=a,
                endpoint_b=b,
                separation=sep,
                line_defect=defect,
                lipschitz_defect=lip,
                triangle_defect=tri,
            )
        )
    residual = FiniteMetricSpace(
        np.sqrt(np.maximum(resid2, 0.0)).tolist(), basepoint=p, exact=False
    )
    return SplittingReport(len(factors), tuple(factors), residual)


def cone_split_check(
    X: FiniteMetricSpace,
    apex_candidates: Sequence,
    eps: float = 0.05,
    ambient_cap: int = 3,
    scales: int = 3,
    scale_base: Optional[float] = None,
    seed: int = 0,
    iterations: int = 60,
) -> SplittingReport:
    """Cone-splitting detector: scores each candidate as a cone point by
    two-scale self-similarity at scale_base * 2^-alpha (scale_base defaults
    to the candidate's eccentricity); whenever two GOOD candidates sit
    farther than eps apart (in the current residual), an R-factor is split
    off along their near-line and the remaining candidates are rescored on
    the residual coordinates, up to the ambient cap."""
    cands = list(apex_candidates)
    current = X
    D0 = np.asarray(X.dist, dtype=float)
    diam = float(D0.max())
    factors = []
    first_scores = None
    while len(factors) < ambient_cap:
        scores = {}
        for c in cands:
            ecc = float(np.asarray(current.dist, dtype=float)[c].max())
            base = ecc * 0.999 if scale_base is None else scale_base
            if base <= 0:
                continue
            worst = 0.0
            seen_any = False
            for alpha in range(scales):
                s = two_scale_score(
                    current, c, base * 2.0**-alpha,
                    seed=seed, iterations=iterations, good_enough=eps / 2,
                )
                if s is not None:
                    seen_any = True
                    worst = max(worst, s)
            if seen_any:
                scores[c] = worst
        if first_scores is None:
            first_scores = tuple(sorted(scores.items()))
        goods = [c for c, s in scores.items() if s < eps]
        dres = np.asarray(current.dist, dtype=float)
        best = None
        for i, a in enumerate(goods):
            for b in goods[i + 1 :]:
                if dres[a][b] > eps and (best is None or dres[a][b] > dres[best[0]][best[1]]):
                    best = (a, b)
        if best is None:
            break
        a, b = best
        got = _extract_factor(dres**2, a, b, eps, diam)
        if got is None:
            break
        resid2, lip, tri = got
        factors.append(
            FactorWitness(
                endpoint_a=a,
                endpoint_b=b,
                separation=float(dres[a][b]),
                line_defect=0.0,
                lipschitz_defect=lip,
                triangle_defect=tri,
            )
        )
        current = FiniteMetricSpace(
            np.sqrt(np.maximum(resid2, 0.0)).tolist(),
            basepoint=current.basepoint,
            exact=False,
        )
    return SplittingReport(
        len(factors), tuple(factors), current, candidate_scores=first_scores or ()
    )


@dataclass(frozen=True)
class NoncollapseRadius:
    value: float
    witness_point: Optional[int]
    witness_bound: Optional[float]
    best_ratio: Optional[float]  # best achieved bound/r over the grid
    note: Optional[str]


def noncollapse_radius(
    X: FiniteMetricSpace,
    z: int,
    euclidean_dim: int,
    scale_grid: Sequence,
    reference_factory: Callable[[float], FiniteMetricSpace],
    threshold: float = 1e-6,
    seed: int = 0,
    iterations: int = 60,
) -> NoncollapseRadius:
    """Largest grid scale r such that some ball B_r(z'), z' within distance 1
    of z, has heuristic GH upper bound below threshold * r against the
    Euclidean reference.  When no scale certifies (float GH estimates cannot
    reach 1e-6 on generic samples), returns 0 with a NOTE carrying the best
    achieved bound/r ratio."""
    near = X.ball_indices(z, 1.0)
    best_ratio = None
    best_at = None
    for r in sorted(scale_grid, reverse=True):
        ref = reference_factory(r)
        for zp in near:
            idx = X.ball_indices(zp, r)
            if len(idx) < 2:
                continue
            ball = X.restrict(idx, basepoint=zp)
            bound = gh_upper_heuristic(
                ball, ref, seed=seed, iterations=iterations, good_enough=threshold * r / 2
            ).upper
            ratio = bound / r
            if best_ratio is None or ratio < best_ratio:
                best_ratio = ratio
                best_at = (r, zp, bound)
            if bound < threshold * r:
                return NoncollapseRadius(
                    value=r, witness_point=zp, witness_bound=bound,
                    best_ratio=ratio, note=None,
                )
    note = (
        "no grid scale certifies the threshold; float GH estimation cannot "
        f"reach {threshold:g}*r here - best achieved bound/r is "
        f"{best_ratio if best_ratio is not None else float('nan')}"
    )
    return NoncollapseRadius(
        value=0.0,
        witness_point=None if best_at is None else best_at[1],
        witness_bound=None if best_at is None else best_at[2],
        best_ratio=best_ratio,
        note=note,
    )
