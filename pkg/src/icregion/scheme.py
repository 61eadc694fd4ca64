"""Successive-decoding achievability region and its redundancy check.

At receiver j the very strong interferers are decoded one at a time in a
chosen order, each treating the undecoded signals as noise; the desired user
and the strong interferer are then decoded jointly as a two-user MAC. Under
the interference conditions every constraint beyond the capacity-region ones
is redundant; ``redundancy_check`` verifies that by vertex scan.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel_model import GaussianIC, InterferencePattern
from .conditions import check_conditions, dmic_conditions_at
from .errors import PreconditionError, ValidationError
from .info_metrics import mi_evaluator, query
from .region import (
    GEOM_TOL,
    RatePolytope,
    _add,
    _resolve,
    _term,
    capacity_polytope,
    hausdorff,
    theorem_halfspaces,
    vertices,
    vertices_of,
)

REDUNDANT_KINDS = ("successive", "cross_single")


def default_orderings(pattern: InterferencePattern) -> tuple:
    return tuple(tuple(sorted(v)) for v in pattern.very_strong)


def all_orderings(pattern: InterferencePattern):
    """Every combination of per-receiver decoding orders."""
    return itertools.product(*(itertools.permutations(sorted(v)) for v in pattern.very_strong))


def n_orderings(pattern: InterferencePattern) -> int:
    return math.prod(math.factorial(len(v)) for v in pattern.very_strong)


def _check_orderings(pattern, orderings):
    if len(orderings) != pattern.k:
        raise ValidationError(f"{len(orderings)} orderings for {pattern.k} receivers")
    for j, order in enumerate(orderings):
        if sorted(order) != sorted(pattern.very_strong[j]) or len(set(order)) != len(order):
            raise ValidationError(
                f"receiver {j + 1}: ordering {[u + 1 for u in order]} is not a permutation of "
                f"{sorted(u + 1 for u in pattern.very_strong[j])}"
            )


def receiver_halfspaces(mi, k: int, pattern: InterferencePattern, j: int, order) -> list:
    """Constraints for decoding at receiver j only; ``order`` lists the very strong users."""
    everyone = set(range(k))
    hs = []
    decoded: list[int] = []
    for m in order:
        hs.append(_term(mi, [m], query([m], j, decoded), "successive"))
        decoded.append(m)
    lj = pattern.strong[j]
    hs.append(_term(mi, [j], query([j], j, everyone - {j}), "single"))
    hs.append(_term(mi, [lj], query([lj], j, everyone - {lj}), "cross_single"))
    hs.append(_term(mi, [j, lj], query([j, lj], j, pattern.very_strong[j]), "pair"))
    return hs


def scheme_region(channel, pattern: InterferencePattern, orderings=None, dist=None) -> RatePolytope:
    """All decoding constraints of the scheme, redundant ones included."""
    channel, dist = _resolve(channel, dist)
    if pattern.k != channel.k:
        raise ValidationError(f"pattern is for k={pattern.k}, channel has k={channel.k}")
    orderings = default_orderings(pattern) if orderings is None else tuple(map(tuple, orderings))
    _check_orderings(pattern, orderings)
    mi = mi_evaluator(channel, dist)
    hs: list = []
    for j in range(channel.k):
        for h in receiver_halfspaces(mi, channel.k, pattern, j, orderings[j]):
            _add(hs, h)
    return RatePolytope(channel.k, hs, "successive decoding scheme")


@dataclass
class RedundancyReport:
    constraints: list  # dicts: label, kind, receiver, max_violation
    orderings_checked: int
    distinct_systems: int
    max_vertex_diff: float
    failing_orderings: list = field(default_factory=list)
    tol: float = GEOM_TOL

    @property
    def max_violation(self) -> float:
        return max((c["max_violation"] for c in self.constraints), default=-math.inf)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol and self.max_vertex_diff <= self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_violation": self.max_violation,
            "max_vertex_diff": self.max_vertex_diff,
            "orderings_checked": self.orderings_checked,
            "distinct_systems": self.distinct_systems,
            "failing_orderings": [[[u + 1 for u in o] for o in combo]
                                  for combo in self.failing_orderings[:10]],
            "constraints": self.constraints,
        }


def _conditions_hold(channel, pattern, dist) -> bool:
    if isinstance(channel, GaussianIC):
        return check_conditions(channel, pattern).passed
    return dmic_conditions_at(channel, pattern, dist).status != "violated"


def redundancy_check(channel, pattern: InterferencePattern, orderings=None, dist=None,
                     *, force: bool = False, tol: float = GEOM_TOL) -> RedundancyReport:
    """Verify that the scheme's extra constraints never cut the capacity polytope.

    ``orderings`` is one combination of per-receiver orders, or None for all
    combinations. For each redundant-class half-space the largest violation
    over the capacity polytope's vertices is reported; for each ordering
    combination the L-infinity Hausdorff distance between the scheme's and the
    capacity polytope's vertex sets is computed.
    """
    channel, dist = _resolve(channel, dist)
    if not _conditions_hold(channel, pattern, dist) and not force:
        raise PreconditionError("interference conditions fail; redundancy is only claimed under them")
    k = channel.k
    mi = mi_evaluator(channel, dist)
    cap = RatePolytope(k, theorem_halfspaces(mi, k, pattern))
    cap_v = vertices(cap)

    if orderings is None:
        per_rx_orders = [list(itertools.permutations(sorted(v))) for v in pattern.very_strong]
    else:
        orderings = tuple(map(tuple, orderings))
        _check_orderings(pattern, orderings)
        per_rx_orders = [[o] for o in orderings]

    # single-rate bounds each receiver adds, per decoding order
    cap_single = np.full(k, math.inf)
    for h in cap.halfspaces:
        if len(h.users) == 1:
            cap_single[h.users[0]] = min(cap_single[h.users[0]], h.bound)
    extra_tables = []
    seen = {}
    for j, orders in enumerate(per_rx_orders):
        table = np.full((len(orders), k), math.inf)
        for n, order in enumerate(orders):
            for h in receiver_halfspaces(mi, k, pattern, j, order):
                if h.kind in REDUNDANT_KINDS:
                    u = h.users[0]
                    table[n, u] = min(table[n, u], h.bound)
                    seen.setdefault((h.source, h.kind), (h, j))
        extra_tables.append(table)

    constraints = []
    for (src, kind), (h, j) in sorted(seen.items(), key=lambda kv: kv[1][0].label):
        lhs = cap_v[:, list(h.users)].sum(axis=1)
        constraints.append({
            "label": h.label,
            "kind": kind,
            "receiver": j + 1,
            "bound": h.bound,
            "max_violation": float(np.max(lhs - h.bound)),
        })

    idx = np.array(list(itertools.product(*(range(len(o)) for o in per_rx_orders))), dtype=int)
    rows = np.broadcast_to(cap_single, (len(idx), k)).copy()
    for j, table in enumerate(extra_tables):
        rows = np.minimum(rows, table[idx[:, j]])
    systems, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)

    pairs: dict[tuple, float] = {}
    for h in cap.halfspaces:
        if len(h.users) == 2:
            pairs[h.users] = min(pairs.get(h.users, math.inf), h.bound)
    diffs = np.empty(len(systems))
    for s, singles in enumerate(systems):
        a_rows, b_vals = [], []
        for u in range(k):
            if math.isfinite(singles[u]):
                r = np.zeros(k)
                r[u] = 1.0
                a_rows.append(r)
                b_vals.append(singles[u])
        for users, bound in sorted(pairs.items()):
            r = np.zeros(k)
            r[list(users)] = 1.0
            a_rows.append(r)
            b_vals.append(bound)
        a = np.vstack(a_rows + [-np.eye(k)])
        b = np.array(b_vals + [0.0] * k)
        diffs[s] = hausdorff(vertices_of(a, b), cap_v)

    per_combo = diffs[inverse]
    failing = [tuple(per_rx_orders[j][c[j]] for j in range(k))
               for c in idx[per_combo > tol]]
    return RedundancyReport(constraints, len(idx), len(systems), float(per_combo.max()),
                            failing, tol)


def ordering_vertex_diffs(channel, pattern, dist=None) -> list:
    """Direct per-combination comparison (one polytope per ordering); slow, for cross-checks."""
    channel, dist = _resolve(channel, dist)
    cap_v = vertices(capacity_polytope(channel, pattern, dist, force=True))
    out = []
    for combo in all_orderings(pattern):
        sv = vertices(scheme_region(channel, pattern, combo, dist))
        out.append((combo, hausdorff(sv, cap_v)))
    return out
