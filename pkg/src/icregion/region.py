"""Capacity-region polytopes: construction, vertices, membership, slices.

Every half-space bounds one rate or the sum of two rates, so polytopes are
stored as a list of ``HalfSpace`` records over user subsets; the implicit
constraints ``R_i >= 0`` are always added.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .channel_model import Dmic, GaussianIC, InterferencePattern, ProductDistribution
from .conditions import check_conditions, paper_case
from .errors import ConditionError, EmptySliceError, ScaleError, ValidationError
from .info_metrics import MiQuery, mi_evaluator, query

GEOM_TOL = 1e-9
MAX_VERTEX_DIM = 8


@dataclass(frozen=True)
class HalfSpace:
    """``sum_{i in users} R_i <= bound``."""

    users: tuple
    bound: float
    label: str = ""
    source: MiQuery | None = None
    kind: str = ""

    def __post_init__(self):
        users = tuple(sorted(int(u) for u in self.users))
        if not 1 <= len(users) <= 2 or len(set(users)) != len(users):
            raise ValidationError(f"half-space must bound 1 or 2 distinct rates, got {users}")
        if not math.isfinite(self.bound) or self.bound < 0:
            raise ValidationError(f"half-space bound must be finite and >= 0, got {self.bound}")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "bound", float(self.bound))

    def coeffs(self, k: int) -> np.ndarray:
        a = np.zeros(k)
        a[list(self.users)] = 1.0
        return a

    def lhs_text(self) -> str:
        return " + ".join(f"R{u + 1}" for u in self.users)


@dataclass(frozen=True)
class RatePolytope:
    dim: int
    halfspaces: tuple
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        for h in self.halfspaces:
            if max(h.users) >= self.dim:
                raise ValidationError(f"half-space on users {h.users} outside dimension {self.dim}")

    def merged(self) -> dict:
        """Tightest bound per user subset."""
        out: dict[tuple, float] = {}
        for h in self.halfspaces:
            out[h.users] = min(out.get(h.users, math.inf), h.bound)
        return out

    def constraint_matrix(self):
        """``(A, b)`` of the merged system including ``-R_i <= 0``."""
        m = self.merged()
        keys = sorted(m, key=lambda u: (len(u), u))
        rows = [np.zeros(self.dim) for _ in keys]
        for r, u in zip(rows, keys):
            r[list(u)] = 1.0
        a = np.vstack(rows + [-np.eye(self.dim)]) if rows else -np.eye(self.dim)
        b = np.array([m[u] for u in keys] + [0.0] * self.dim)
        return a, b

    def with_halfspaces(self, extra) -> "RatePolytope":
        return RatePolytope(self.dim, self.halfspaces + tuple(extra), self.note)


def _add(halfspaces: list, h: HalfSpace) -> None:
    """Append ``h`` unless the same MI term already bounds the same rates."""
    for n, old in enumerate(halfspaces):
        if old.users == h.users and old.source == h.source and old.kind == h.kind:
            if h.bound < old.bound:
                halfspaces[n] = h
            return
    halfspaces.append(h)


def _term(mi, users, q: MiQuery, kind: str) -> HalfSpace:
    lhs = " + ".join(f"R{u + 1}" for u in sorted(users))
    return HalfSpace(users, max(mi(q), 0.0), f"{lhs} <= {q.label()}", q, kind)


def theorem_halfspaces(mi, k: int, pattern: InterferencePattern) -> list:
    """Single-rate bounds for every user and one pair bound per receiver."""
    everyone = set(range(k))
    hs: list[HalfSpace] = []
    for i in range(k):
        _add(hs, _term(mi, [i], query([i], i, everyone - {i}), "single"))
    for j in range(k):
        lj = pattern.strong[j]
        _add(hs, _term(mi, [j, lj], query([j, lj], j, pattern.very_strong[j]), "pair"))
    return hs


def _resolve(channel, dist):
    if isinstance(channel, tuple):
        channel, dist = channel
    if isinstance(channel, Dmic) and dist is None:
        raise ValidationError("a Dmic needs an input distribution")
    return channel, dist


def capacity_polytope(channel, pattern: InterferencePattern, dist: ProductDistribution | None = None,
                      *, force: bool = False) -> RatePolytope:
    """Region with ``R_i <= I[X_i; Y_i | rest]`` and, at each receiver j,
    ``R_j + R_{l_j} <= I[X_j, X_{l_j}; Y_j | very strong set of j]``.

    A Gaussian channel must satisfy ``pattern`` unless ``force``. For a DMIC the
    result is the region at the given distribution, which is an inner region in
    general and the capacity region only after the union over distributions.
    """
    channel, dist = _resolve(channel, dist)
    if pattern.k != channel.k:
        raise ValidationError(f"pattern is for k={pattern.k}, channel has k={channel.k}")
    note = "capacity region"
    if isinstance(channel, GaussianIC):
        report = check_conditions(channel, pattern)
        if not report.passed:
            if not force:
                worst = "; ".join(i.describe() for i in report.violated)
                raise ConditionError(f"interference conditions fail: {worst}")
            note = "forced: conditions fail, not a capacity region"
    else:
        note = "inner region at this distribution"
    mi = mi_evaluator(channel, dist)
    return RatePolytope(channel.k, theorem_halfspaces(mi, channel.k, pattern), note)


# -- 3-user and 2-user reference systems, written term by term ------------------------------


# (users, receiver, given) in the labeling of the 3-user analysis, 0-based.
_THEOREM1_TERMS = [
    ((0,), 0, (1, 2)), ((1,), 1, (2, 0)), ((2,), 2, (0, 1)),
    ((0, 1), 0, (2,)), ((1, 2), 1, (0,)), ((2, 0), 2, (1,)),
]
_THEOREM2_TERMS = [
    ((0,), 0, (1, 2)), ((1,), 1, (2, 0)), ((2,), 2, (0, 1)),
    ((0, 1), 0, (2,)), ((0, 1), 1, (2,)),  # min of two terms, kept as two half-spaces
    ((2, 0), 2, (1,)),
]


def reference_3user_system(channel, case: int, perm, dist=None) -> RatePolytope:
    """The 3-user region of ``case`` with users relabeled by ``perm``."""
    channel, dist = _resolve(channel, dist)
    terms = _THEOREM1_TERMS if case == 1 else _THEOREM2_TERMS
    mi = mi_evaluator(channel, dist)
    hs = []
    for users, rx, given in terms:
        u = [perm[x] for x in users]
        q = query(u, perm[rx], [perm[g] for g in given])
        hs.append(_term(mi, u, q, "single" if len(u) == 1 else "pair"))
    return RatePolytope(3, hs, f"case {case} reference")


def reference_for_pattern(channel, pattern: InterferencePattern, dist=None) -> RatePolytope:
    case, perm = paper_case(pattern)
    return reference_3user_system(channel, case, perm, dist)


def strong_interference_2user(channel, dist=None) -> RatePolytope:
    """Two-user strong-interference region: single-user bounds plus
    ``R_1 + R_2 <= min_j I[X_1, X_2; Y_j]``."""
    channel, dist = _resolve(channel, dist)
    if channel.k != 2:
        raise ValidationError("two-user region needs k=2")
    mi = mi_evaluator(channel, dist)
    hs = [
        _term(mi, [0], query([0], 0, [1]), "single"),
        _term(mi, [1], query([1], 1, [0]), "single"),
        _term(mi, [0, 1], query([0, 1], 0), "pair"),
        _term(mi, [0, 1], query([0, 1], 1), "pair"),
    ]
    return RatePolytope(2, hs, "two-user strong interference")


def constraint_signature(p: RatePolytope) -> list:
    """Sorted ``(users, query, bound)`` tuples, for set comparison of systems."""
    def key(h):
        s = h.source
        return (h.users, tuple(sorted(s.senders)), s.receiver, tuple(sorted(s.given)))
    return sorted((key(h), h.bound) for h in p.halfspaces)


def same_constraint_set(p1: RatePolytope, p2: RatePolytope, tol: float = GEOM_TOL) -> bool:
    s1, s2 = constraint_signature(p1), constraint_signature(p2)
    return len(s1) == len(s2) and all(
        k1 == k2 and abs(b1 - b2) <= tol for (k1, b1), (k2, b2) in zip(s1, s2)
    )


# -- geometry ---------------------------------------------------------------------------------


def _dedup_sorted(points: np.ndarray, tol: float) -> np.ndarray:
    if len(points) == 0:
        return points
    points = points[np.lexsort(points.T[::-1])]
    keep = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in keep):
            keep.append(p)
    return np.array(keep)


def vertices_of(a: np.ndarray, b: np.ndarray, tol: float = GEOM_TOL) -> np.ndarray:
    """Vertices of ``{x : A x <= b}`` by enumerating all square active sets."""
    n_rows, dim = a.shape
    found = []
    combos = itertools.combinations(range(n_rows), dim)
    chunk = 20000
    while True:
        idx = np.array(list(itertools.islice(combos, chunk)), dtype=int)
        if idx.size == 0:
            break
        sub_a = a[idx]
        sub_b = b[idx]
        det = np.linalg.det(sub_a)
        ok = np.abs(det) > 1e-12
        if not np.any(ok):
            continue
        x = np.linalg.solve(sub_a[ok], sub_b[ok][..., None])[..., 0]
        feasible = np.all(x @ a.T <= b + tol, axis=1)
        found.append(x[feasible])
    if not found:
        return np.zeros((0, dim))
    pts = np.vstack(found)
    pts[np.abs(pts) < 1e-15] = 0.0
    return _dedup_sorted(pts, tol)


def vertices(p: RatePolytope) -> np.ndarray:
    """All vertices, deduplicated within 1e-9 and sorted lexicographically."""
    if p.dim > MAX_VERTEX_DIM:
        raise ScaleError(f"vertex enumeration limited to dim <= {MAX_VERTEX_DIM}, got {p.dim}")
    a, b = p.constraint_matrix()
    return vertices_of(a, b)


def contains(p: RatePolytope, r, tol: float = GEOM_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (p.dim,):
        raise ValidationError(f"rate point has shape {r.shape}, polytope dim {p.dim}")
    if np.any(r < -tol):
        return False
    return all(r[list(h.users)].sum() <= h.bound + tol for h in p.halfspaces)


def max_weighted_sum(p: RatePolytope, w, verts: np.ndarray | None = None):
    """``max_{R in p} w . R`` by scanning the vertices; returns (value, argmax)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (p.dim,) or np.any(w < 0) or not np.any(w > 0):
        raise ValidationError("weights must be nonnegative, not all zero, one per user")
    v = vertices(p) if verts is None else verts
    vals = v @ w
    best = int(np.argmax(vals))
    return float(vals[best]), v[best]


def hausdorff(v1: np.ndarray, v2: np.ndarray) -> float:
    """L-infinity Hausdorff distance between two finite point sets."""
    if len(v1) == 0 or len(v2) == 0:
        return 0.0 if len(v1) == len(v2) else math.inf
    d = np.max(np.abs(v1[:, None, :] - v2[None, :, :]), axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class Slice:
    users: tuple
    fixed: dict
    polyline: np.ndarray  # upper-right boundary, from the R_j axis to the R_i axis
    samples: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        i, j = self.users
        w.writerow([f"R_{i + 1}", f"R_{j + 1}"])
        for x, y in self.samples:
            w.writerow([f"{x:.6g}", f"{y:.6g}"])
        return buf.getvalue()


def slice2d(p: RatePolytope, i: int, j: int, fixed: dict, grid: int = 200) -> Slice:
    """Exact boundary of the ``(R_i, R_j)`` section with the other rates fixed.

    ``fixed`` maps every other user to its rate. Raises EmptySliceError when no
    nonnegative ``(R_i, R_j)`` is feasible.
    """
    if i == j or not (0 <= i < p.dim and 0 <= j < p.dim):
        raise ValidationError(f"invalid slice users {(i, j)}")
    others = [u for u in range(p.dim) if u not in (i, j)]
    if set(fixed) != set(others):
        raise ValidationError(f"fixed rates needed for users {[u + 1 for u in others]}")
    r = np.zeros(p.dim)
    for u, v in fixed.items():
        r[u] = v
    if np.any(r[others] < 0):
        raise EmptySliceError("fixed rates must be nonnegative")
    cap_i = cap_j = cap_sum = math.inf
    for h in p.halfspaces:
        rest = sum(r[u] for u in h.users if u not in (i, j))
        slack = h.bound - rest
        has_i, has_j = i in h.users, j in h.users
        if has_i and has_j:
            cap_sum = min(cap_sum, slack)
        elif has_i:
            cap_i = min(cap_i, slack)
        elif has_j:
            cap_j = min(cap_j, slack)
        elif slack < -GEOM_TOL:
            raise EmptySliceError(f"fixed rates violate {h.label or h.lhs_text()}")
    if min(cap_i, cap_j, cap_sum) < -GEOM_TOL:
        raise EmptySliceError("fixed rates leave no feasible (R_i, R_j)")
    cap_i, cap_j, cap_sum = (max(c, 0.0) for c in (cap_i, cap_j, cap_sum))
    s = min(cap_sum, cap_i + cap_j)
    top = min(cap_j, s)
    right = min(cap_i, s)
    if not all(math.isfinite(v) for v in (s, top, right)):
        raise ValidationError("slice is unbounded")
    corners = [(0.0, top), (s - top, top), (right, s - right), (right, 0.0)]
    poly = []
    for c in corners:
        if not poly or max(abs(c[0] - poly[-1][0]), abs(c[1] - poly[-1][1])) > GEOM_TOL:
            poly.append(c)
    xs = np.unique(np.concatenate([np.linspace(0.0, right, max(grid, 2)),
                                   [c[0] for c in poly]]))
    ys = np.minimum(top, s - xs)
    samples = np.column_stack([xs, np.maximum(ys, 0.0)])
    samples = np.vstack([samples, [right, 0.0]]) if samples[-1, 1] > 0 else samples
    return Slice((i, j), dict(fixed), np.array(poly), samples)


# -- DMIC: union over sampled distributions ---------------------------------------------------


@dataclass
class SampledHull:
    polytopes: list
    distributions: list
    points: np.ndarray  # hull vertices of the union of all polytope vertex sets
    volume: float


def random_distribution(input_sizes, q_support: int, rng) -> ProductDistribution:
    w = rng.dirichlet(np.ones(q_support)) if q_support > 1 else np.ones(1)
    pmfs = [[rng.dirichlet(np.ones(n)) for n in input_sizes] for _ in range(q_support)]
    return ProductDistribution(w, pmfs)


def dmic_sampled_hull(ch: Dmic, pattern: InterferencePattern, n_dists: int, q_support: int,
                      seed: int) -> SampledHull:
    """Inner approximation of the DMIC region from sampled input distributions.

    The first distribution is uniform; the rest are Dirichlet draws with
    ``q_support`` time-sharing components. The draws for a given seed form a
    fixed sequence, so a larger ``n_dists`` only adds polytopes.
    """
    if not 1 <= q_support <= 2 * ch.k + 1:
        raise ValidationError(f"q_support must be in 1..{2 * ch.k + 1}")
    rng = np.random.default_rng(seed)
    polys, dists, pts = [], [], []
    for n in range(n_dists):
        if n == 0:
            dist = ProductDistribution.uniform(ch.input_sizes)
        else:
            dist = random_distribution(ch.input_sizes, q_support, rng)
        poly = capacity_polytope(ch, pattern, dist)
        polys.append(poly)
        dists.append(dist)
        pts.append(vertices(poly))
    if not pts:
        return SampledHull([], [], np.zeros((0, ch.k)), 0.0)
    allpts = _dedup_sorted(np.vstack(pts), GEOM_TOL)
    try:
        hull = ConvexHull(allpts)
        return SampledHull(polys, dists, allpts[hull.vertices], float(hull.volume))
    except (QhullError, ValueError):
        # lower-dimensional union (some bound is zero)
        return SampledHull(polys, dists, allpts, 0.0)
