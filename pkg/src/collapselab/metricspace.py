"""Finite pointed metric spaces and Gromov-Hausdorff estimation.

Distances are exact rationals when constructed from rationals and float64
otherwise; the exhaustive GH oracle is exact for the given matrices (and
returns Fractions for exact inputs), the heuristic tier brackets it with a
provable lower bound and a local-search upper bound with witness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, InputFormatError


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) or (isinstance(x, str) and "/" in x)


class FiniteMetricSpace:
    """Square symmetric distance matrix with an optional basepoint.

    ``exact`` spaces hold Fractions (object dtype); all other spaces hold
    float64.  Instances are treated as immutable.
    """

    def __init__(self, dist, basepoint: Optional[int] = None, coords=None, exact=None):
        rows = [list(r) for r in dist]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise InputFormatError("distance matrix must be square")
        if exact is None:
            exact = all(_is_rational(x) for r in rows for x in r)
        if exact:
            self.dist = np.array(
                [[Fraction(x) for x in r] for r in rows], dtype=object
            )
        else:
            self.dist = np.array(rows, dtype=float)
        self.exact = exact
        if basepoint is not None and not 0 <= basepoint < n:
            raise InputFormatError("basepoint out of range")
        self.basepoint = basepoint
        self.coords = None if coords is None else np.asarray(coords, dtype=float)

    @property
    def size(self) -> int:
        return len(self.dist)

    def d(self, i: int, j: int):
        return self.dist[i][j]

    def diameter(self):
        return max((self.dist[i][j] for i in range(self.size) for j in range(i + 1, self.size)), default=0)

    def radius(self):
        """min over centers of the max distance to the center."""
        return min(max(row) for row in self.dist)

    def ball_indices(self, center: int, r) -> tuple:
        return tuple(i for i in range(self.size) if self.dist[center][i] <= r)

    def restrict(self, indices: Sequence, basepoint: Optional[int] = None) -> "FiniteMetricSpace":
        idx = list(indices)
        sub = [[self.dist[i][j] for j in idx] for i in idx]
        bp = idx.index(basepoint) if basepoint is not None and basepoint in idx else None
        coords = None if self.coords is None else self.coords[idx]
        return FiniteMetricSpace(sub, basepoint=bp, coords=coords, exact=self.exact)

    def ball_space(self, center: int, r) -> "FiniteMetricSpace":
        return self.restrict(self.ball_indices(center, r), basepoint=center)


def rescale(X: FiniteMetricSpace, lam) -> FiniteMetricSpace:
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    exact = X.exact and _is_rational(lam)
    factor = Fraction(lam) if exact else float(lam)
    rows = [[factor * X.dist[i][j] for j in range(X.size)] for i in range(X.size)]
    coords = None if X.coords is None else X.coords * float(lam)
    return FiniteMetricSpace(rows, basepoint=X.basepoint, coords=coords, exact=exact)


def product(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> FiniteMetricSpace:
    """l2-combined product on index pairs, (i, j) in row-major order."""
    n, m = X.size, Y.size
    DX2 = np.asarray(X.dist, dtype=float) ** 2
    DY2 = np.asarray(Y.dist, dtype=float) ** 2
    D = np.sqrt(DX2[:, None, :, None] + DY2[None, :, None, :]).reshape(n * m, n * m)
    bp = None
    if X.basepoint is not None and Y.basepoint is not None:
        bp = X.basepoint * m + Y.basepoint
    return FiniteMetricSpace(D.tolist(), basepoint=bp, exact=False)


@dataclass(frozen=True)
class MetricReport:
    passed: bool
    symmetry_defect: float
    diagonal_defect: float
    triangle_defect: float
    worst_triple: Optional[tuple]


def validate_metric(X: FiniteMetricSpace, tol: float = 1e-9) -> MetricReport:
    """Symmetry, zero diagonal, and the triangle inequality up to ``tol``;
    reports the worst violating triple."""
    n = X.size
    sym = max(
        (abs(float(X.dist[i][j] - X.dist[j][i])) for i in range(n) for j in range(i)),
        default=0.0,
    )
    diag = max((abs(float(X.dist[i][i])) for i in range(n)), default=0.0)
    neg = max((-float(X.dist[i][j]) for i in range(n) for j in range(n)), default=0.0)
    worst = None
    tri = 0.0
    for i, j, k in itertools.permutations(range(n), 3):
        v = float(X.dist[i][k] - (X.dist[i][j] + X.dist[j][k]))
        if v > tri:
            tri = v
            worst = (i, j, k)
    passed = sym <= tol and diag <= tol and tri <= tol and neg <= tol
    return MetricReport(passed, sym, diag, tri, worst)


@dataclass(frozen=True)
class Correspondence:
    """Relation between index sets, surjective onto both."""

    pairs: tuple

    def check_surjective(self, n: int, m: int):
        left = {p[0] for p in self.pairs}
        right = {p[1] for p in self.pairs}
        if left != set(range(n)) or right != set(range(m)):
            raise InputFormatError("correspondence must cover both spaces")


def distortion(R: Correspondence, X: FiniteMetricSpace, Y: FiniteMetricSpace):
    """max over related pairs of |d_X - d_Y|."""
    R.check_surjective(X.size, Y.size)
    worst = Fraction(0) if (X.exact and Y.exact) else 0.0
    for (x1, y1), (x2, y2) in itertools.combinations_with_replacement(R.pairs, 2):
        v = abs(X.dist[x1][x2] - Y.dist[y1][y2])
        if v > worst:
            worst = v
    return worst


@dataclass(frozen=True)
class GHBound:
    lower: float
    upper: float
    witness: Correspondence


def _pair_correspondence(f, g) -> Correspondence:
    pairs = sorted(set([(i, fi) for i, fi in enumerate(f)] + [(gj, j) for j, gj in enumerate(g)]))
    return Correspondence(tuple(pairs))


def gh_exact_small(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace,
    size_cap: int = 6,
    pointed: bool = False,
):
    """Exact GH distance of small matrices: half the minimal distortion over
    closed correspondences, searched as map pairs (f: X->Y, g: Y->X) by
    depth-first branch and bound.  Exact rationals in, exact rational out."""
    n, m = X.size, Y.size
    if n > size_cap or m > size_cap:
        raise CapExceededError(f"exact GH capped at {size_cap} points")
    if pointed and (X.basepoint is None or Y.basepoint is None):
        raise InputFormatError("pointed GH needs basepoints on both spaces")
    exact = X.exact and Y.exact
    dX = [[X.dist[i][j] for j in range(n)] for i in range(n)]
    dY = [[Y.dist[i][j] for j in range(m)] for i in range(m)]

    f = [0] * n
    g = [0] * m
    best = [None]

    def assign_g(j, worst):
        if best[0] is not None and worst >= best[0]:
            return
        if j == m:
            if best[0] is None or worst < best[0]:
                best[0] = worst
            return
        if pointed and j == Y.basepoint:
            candidates = [X.basepoint]
        else:
            candidates = range(n)
        for cand in candidates:
            g[j] = cand
            w = worst
            ok = True
            for jj in range(j + 1):
                v = abs(dY[jj][j] - dX[g[jj]][g[j]])
                if v > w:
                    w = v
                if best[0] is not None and w >= best[0]:
                    ok = False
                    break
            if ok:
                for i in range(n):
                    v = abs(dX[i][g[j]] - dY[f[i]][j])
                    if v > w:
                        w = v
                    if best[0] is not None and w >= best[0]:
                        ok = False
                        break
            if ok:
                assign_g(j + 1, w)
        g[j] = 0

    def assign_f(i, worst):
        if best[0] is not None and worst >= best[0]:
            return
        if i == n:
            assign_g(0, worst)
            return
        if pointed and i == X.basepoint:
            candidates = [Y.basepoint]
        else:
            candidates = range(m)
        for cand in candidates:
            f[i] = cand
            w = worst
            ok = True
            for ii in range(i + 1):
                v = abs(dX[ii][i] - dY[f[ii]][f[i]])
                if v > w:
                    w = v
                if best[0] is not None and w >= best[0]:
                    ok = False
                    break
            if ok:
                assign_f(i + 1, w)
        f[i] = 0

    # seed with a cheap heuristic (re-evaluated exactly) so pruning bites
    # immediately; the seed value is itself achievable
    seed = gh_upper_heuristic(X, Y, seed=0, iterations=0, pointed=pointed)
    best[0] = distortion(seed.witness, X, Y)
    assign_f(0, Fraction(0) if exact else 0.0)
    val = best[0] / 2
    return val if exact else float(val)


def _fg_distortion_np(f, g, DX, DY) -> float:
    """Distortion of graph(f) + graph(g), vectorized."""
    fa = np.asarray(f)
    ga = np.asarray(g)
    a = np.abs(DX - DY[np.ix_(fa, fa)]).max() if len(fa) else 0.0
    b = np.abs(DY - DX[np.ix_(ga, ga)]).max() if len(ga) else 0.0
    c = np.abs(DX[:, ga] - DY[fa, :]).max() if len(fa) and len(ga) else 0.0
    return float(max(a, b, c))


def _resampled_profiles(D, k):
    P = np.sort(D, axis=1)
    n = P.shape[1]
    idx = np.linspace(0, n - 1, k).round().astype(int)
    return P[:, idx]


def gh_upper_heuristic(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace,
    seed: int = 0,
    iterations: int = 200,
    pointed: bool = False,
    good_enough: Optional[float] = None,
) -> GHBound:
    """Heuristic GH bracket.

    Upper: distortion/2 of a correspondence built by greedy distance-profile
    matching (identity seed when sizes agree) improved by single-point
    reassignments; deterministic given the seed, with an optional early stop
    once the upper bound reaches ``good_enough``.  Lower: half the larger of
    |diam X - diam Y| and |rad X - rad Y|, both valid for every
    correspondence.
    """
    n, m = X.size, Y.size
    DX = np.asarray(X.dist, dtype=float)
    DY = np.asarray(Y.dist, dtype=float)
    if pointed and (X.basepoint is None or Y.basepoint is None):
        raise InputFormatError("pointed heuristic needs basepoints")

    k = max(2, min(48, n, m))
    PX = _resampled_profiles(DX, k)
    PY = _resampled_profiles(DY, k)
    prof_cost = np.abs(PX[:, None, :] - PY[None, :, :]).sum(axis=2)
    prof_scale = max(float(prof_cost.max()), 1e-30)

    def greedy(DS, DT, profile, forced, seed_anchors=(), anchor_cap=24):
        """Anchor-consistent assignment: each source point goes where its
        distances to the already-matched anchor pairs are best preserved,
        profile similarity only breaking ties.  Sources are visited in
        farthest-point order so the anchors spread across the space early;
        pre-seeded anchors lock the assignment to a partner map's frame."""
        src = DS.shape[0]
        tie_scale = 1e-3 * max(float(DS.max()), float(DT.max()), 1e-30) / prof_scale
        out = np.empty(src, dtype=int)
        start = forced[0] if forced is not None else int(np.argmax(DS.max(axis=1)))
        order = [start]
        chosen = np.zeros(src, dtype=bool)
        chosen[start] = True
        dist_to_chosen = DS[start].copy()
        for _ in range(src - 1):
            cand = int(np.argmax(np.where(chosen, -1.0, dist_to_chosen)))
            order.append(cand)
            chosen[cand] = True
            dist_to_chosen = np.minimum(dist_to_chosen, DS[cand])
        anchors = list(seed_anchors)
        for i in order:
            if forced is not None and i == forced[0]:
                out[i] = forced[1]
                anchors.append((i, forced[1]))
                continue
            cost = profile[i] * tie_scale
            if anchors:
                rows = np.stack([np.abs(DS[i][a] - DT[b]) for a, b in anchors])
                cost = rows.max(axis=0) + cost
            pick = int(np.argmin(cost))
            out[i] = pick
            if len(anchors) < anchor_cap:
                anchors.append((i, pick))
        return list(out), anchors

    forced_f = (X.basepoint, Y.basepoint) if pointed else None
    forced_g = (Y.basepoint, X.basepoint) if pointed else None
    f, f_anchors = greedy(DX, DY, prof_cost, forced_f)
    # the reverse map reuses f's anchor pairs so both sides pick one frame
    g, _ = greedy(
        DY, DX, prof_cost.T, forced_g, seed_anchors=[(b, a) for a, b in f_anchors]
    )
    if n == m and (not pointed or X.basepoint == Y.basepoint):
        ident = list(range(n))
        if _fg_distortion_np(ident, ident, DX, DY) <= _fg_distortion_np(f, g, DX, DY):
            f, g = ident[:], ident[:]

    best = _fg_distortion_np(f, g, DX, DY)
    target = 0.0 if good_enough is None else 2.0 * good_enough
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        if best <= target:
            break
        if rng.integers(0, 2) == 0:
            i = int(rng.integers(0, n))
            if pointed and i == X.basepoint:
                continue
            old = f[i]
            cand = int(rng.integers(0, m))
            if cand == old:
                continue
            f[i] = cand
            w = _fg_distortion_np(f, g, DX, DY)
            if w < best:
                best = w
            else:
                f[i] = old
        else:
            j = int(rng.integers(0, m))
            if pointed and j == Y.basepoint:
                continue
            old = g[j]
            cand = int(rng.integers(0, n))
            if cand == old:
                continue
            g[j] = cand
            w = _fg_distortion_np(f, g, DX, DY)
            if w < best:
                best = w
            else:
                g[j] = old

    diam_gap = abs(float(X.diameter()) - float(Y.diameter()))
    rad_gap = abs(float(X.radius()) - float(Y.radius()))
    lower = max(diam_gap, rad_gap) / 2.0
    return GHBound(lower=lower, upper=best / 2.0, witness=_pair_correspondence(f, g))


@dataclass(frozen=True)
class GHACheckReport:
    passed: bool
    basepoint_ok: bool
    onto_defect: float
    iso_defect: float
    worst_onto: Optional[int]
    worst_iso: Optional[tuple]


def eps_gha_check(f_map, X: FiniteMetricSpace, Y: FiniteMetricSpace, eps: float) -> GHACheckReport:
    """Verify a pointed map on the 1/eps-ball: basepoint to basepoint,
    eps-onto (the target ball lies in the eps-neighborhood of the image) and
    eps-isometric (distance defect below eps on the required ball)."""
    if X.basepoint is None or Y.basepoint is None:
        raise InputFormatError("both spaces need basepoints")
    R = 1.0 / eps
    fm = {int(k): int(v) for k, v in dict(f_map).items()}
    required = X.ball_indices(X.basepoint, R)
    for i in required:
        if i not in fm:
            raise InputFormatError(f"map undefined on point {i} of the 1/eps ball")
    basepoint_ok = fm[X.basepoint] == Y.basepoint
    image = [fm[i] for i in required]
    onto_defect = 0.0
    worst_onto = None
    for yj in Y.ball_indices(Y.basepoint, R):
        gap = min(float(Y.dist[yj][yi]) for yi in image)
        if gap > onto_defect:
            onto_defect = gap
            worst_onto = yj
    iso_defect = 0.0
    worst_iso = None
    for a, b in itertools.combinations(required, 2):
        v = abs(float(X.dist[a][b]) - float(Y.dist[fm[a]][fm[b]]))
        if v > iso_defect:
            iso_defect = v
            worst_iso = (a, b)
    passed = basepoint_ok and onto_defect < eps and iso_defect < eps
    return GHACheckReport(passed, basepoint_ok, onto_defect, iso_defect, worst_onto, worst_iso)


# ---------------------------------------------------------------------------
# fixtures


def from_points(points, basepoint: Optional[int] = None) -> FiniteMetricSpace:
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    return FiniteMetricSpace(dist.tolist(), basepoint=basepoint, coords=pts, exact=False)


def two_point_space(gap, basepoint: int = 0) -> FiniteMetricSpace:
    return FiniteMetricSpace([[0, gap], [gap, 0]], basepoint=basepoint)


def segment_net(length, count: int, basepoint: Optional[int] = 0) -> FiniteMetricSpace:
    """Evenly spaced exact net of [0, length]."""
    xs = [Fraction(length) * i / (count - 1) for i in range(count)]
    rows = [[abs(a - b) for b in xs] for a in xs]
    return FiniteMetricSpace(rows, basepoint=basepoint, exact=True)


def circle_net(circumference, count: int, basepoint: Optional[int] = 0) -> FiniteMetricSpace:
    """Evenly spaced net of a circle with the arc-length metric; exact when
    the circumference is rational."""
    exact = _is_rational(circumference)
    C = Fraction(circumference) if exact else float(circumference)
    rows = []
    for i in range(count):
        row = []
        for j in range(count):
            k = abs(i - j)
            k = min(k, count - k)
            row.append(C * k / count)
        rows.append(row)
    return FiniteMetricSpace(rows, basepoint=basepoint, exact=exact)


def euclidean_ball_sample(
    k: int, r: float, count: int, seed: int, include_center: bool = True
) -> FiniteMetricSpace:
    """Uniform sample of the k-ball of radius r; index 0 is the center when
    included, and the basepoint either way."""
    rng = np.random.default_rng(seed)
    pts = []
    if include_center:
        pts.append(np.zeros(k))
    while len(pts) < count:
        cand = rng.uniform(-r, r, size=k)
        if (cand**2).sum() <= r * r:
            pts.append(cand)
    return from_points(np.array(pts), basepoint=0)


def euclidean_grid_ball(k: int, r: float, spacing: float) -> FiniteMetricSpace:
    """Grid net of the k-ball (deterministic); origin is index 0."""
    steps = int(math.floor(r / spacing))
    axes = [np.arange(-steps, steps + 1) * spacing for _ in range(k)]
    pts = [np.zeros(k)]
    for combo in itertools.product(*axes):
        p = np.array(combo, dtype=float)
        if (p**2).sum() <= r * r and (p != 0).any():
            pts.append(p)
    return from_points(np.array(pts), basepoint=0)


def flat_torus_sample(side_lengths, count: int, seed: int) -> FiniteMetricSpace:
    """Uniform sample of a flat torus; distances minimize over deck translates
    in the +-1 fundamental-domain window (exact for this representation)."""
    sides = np.asarray(side_lengths, dtype=float)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, size=(count, len(sides))) * sides
    rows = np.zeros((count, count))
    for i in range(count):
        delta = np.abs(pts - pts[i])
        delta = np.minimum(delta, sides - delta)
        rows[i] = np.sqrt((delta**2).sum(axis=1))
    return FiniteMetricSpace(rows.tolist(), basepoint=0, coords=pts, exact=False)


def torus_ball_net(side_lengths, per_unit: int, center=None, radius=None) -> FiniteMetricSpace:
    """Deterministic grid net of a flat torus, optionally cut to a ball."""
    sides = [float(s) for s in side_lengths]
    axes = [np.arange(int(round(s * per_unit))) / per_unit for s in sides]
    pts = np.array(list(itertools.product(*axes)))
    if center is None:
        center = np.zeros(len(sides))
    delta = np.abs(pts - np.asarray(center))
    delta = np.minimum(delta, np.asarray(sides) - delta)
    dist_to_center = np.sqrt((delta**2).sum(axis=1))
    if radius is not None:
        keep = dist_to_center <= radius
        pts = pts[keep]
        dist_to_center = dist_to_center[keep]
    order = np.argsort(dist_to_center, kind="stable")
    pts = pts[order]
    n = len(pts)
    rows = np.zeros((n, n))
    for i in range(n):
        delta = np.abs(pts - pts[i])
        delta = np.minimum(delta, np.asarray(sides) - delta)
        rows[i] = np.sqrt((delta**2).sum(axis=1))
    return FiniteMetricSpace(rows.tolist(), basepoint=0, coords=pts, exact=False)


def _cone_distance(r1, a1, r2, a2, angle):
    gap = abs(a1 - a2)
    gap = min(gap, angle - gap)
    if gap >= math.pi:
        return r1 + r2
    return math.sqrt(max(r1 * r1 + r2 * r2 - 2 * r1 * r2 * math.cos(gap), 0.0))


def cone_sample(
    angle: float, r: float, count: int, seed: int, include_apex: bool = True
) -> FiniteMetricSpace:
    """Random sample of the 2d cone of total apex angle ``angle`` and radius
    r, with the unrolled law-of-cosines metric; apex is index 0."""
    rng = np.random.default_rng(seed)
    radii = np.sqrt(rng.uniform(0, 1, size=count)) * r
    angles = rng.uniform(0, angle, size=count)
    if include_apex:
        radii[0] = 0.0
        angles[0] = 0.0
    rows = [
        [
            _cone_distance(radii[i], angles[i], radii[j], angles[j], angle)
            for j in range(count)
        ]
        for i in range(count)
    ]
    return FiniteMetricSpace(rows, basepoint=0, exact=False)


def cone_net(
    angle: float, r: float, rings: int, per_ring: int, ratio: float = 2.0
) -> FiniteMetricSpace:
    """Geometric ring net of a cone: radii r/ratio^i with shared angular
    positions, hence exactly self-similar under scaling by 1/ratio; apex is
    index 0."""
    pts = [(0.0, 0.0)]
    for i in range(rings):
        rho = r / ratio**i
        for a in range(per_ring):
            pts.append((rho, angle * a / per_ring))
    rows = [
        [_cone_distance(p[0], p[1], q[0], q[1], angle) for q in pts] for p in pts
    ]
    return FiniteMetricSpace(rows, basepoint=0, exact=False)


def geometric_cluster_net(centers, radius: float, levels: int) -> FiniteMetricSpace:
    """1d net with geometric offset clusters radius/2^i around each center,
    so each center is exactly self-similar under halving at scales <= radius;
    index 0 is the first center."""
    xs = []
    for c in centers:
        xs.append(float(c))
        for i in range(levels):
            off = radius / 2.0**i
            xs += [c - off, c + off]
    rows = [[abs(a - b) for b in xs] for a in xs]
    return FiniteMetricSpace(rows, basepoint=0, exact=False)


def two_apex_product_net(
    angle: float = 1.5 * math.pi,
    separation: float = 2.0,
    cluster_radius: float = 0.5,
    levels: int = 5,
    rings: int = 6,
    per_ring: int = 8,
) -> FiniteMetricSpace:
    """Product of a two-cluster line net with a cone net: every point on the
    apex line is a cone point, and the two cluster centers are exactly
    self-similar at scales up to cluster_radius.  The basepoint is the first
    center on the apex line; the second sits ``separation`` away at index
    offset one cluster block."""
    line = geometric_cluster_net(
        [-separation / 2.0, separation / 2.0], cluster_radius, levels
    )
    cone = cone_net(angle, cluster_radius, rings=rings, per_ring=per_ring)
    return product(line, cone)


def cone_over_space(
    base: FiniteMetricSpace, r: float, rings: int, ratio: float = 2.0
) -> FiniteMetricSpace:
    """Geometric net of the metric cone over a finite space: points (t, w)
    with the cone law d^2 = t^2 + s^2 - 2ts cos(min(d_W, pi)); apex index 0."""
    pts = [(0.0, -1)]
    for i in range(rings):
        t = r / ratio**i
        for w in range(base.size):
            pts.append((t, w))
    rows = []
    for t1, w1 in pts:
        row = []
        for t2, w2 in pts:
            if w1 < 0 or w2 < 0:
                row.append(t1 + t2 if (w1 < 0) != (w2 < 0) else abs(t1 - t2))
                continue
            gap = min(float(base.dist[w1][w2]), math.pi)
            row.append(
                math.sqrt(max(t1 * t1 + t2 * t2 - 2 * t1 * t2 * math.cos(gap), 0.0))
            )
        rows.append(row)
    return FiniteMetricSpace(rows, basepoint=0, exact=False)
