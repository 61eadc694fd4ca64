"""Batch verification suite combining every module's cross-checks."""

from __future__ import annotations

import itertools
import math

from .channel_model import GaussianIC, InterferencePattern, ProductDistribution
from .conditions import (
    check_conditions,
    classify_gaussian,
    dmic_condition_gap,
    dmic_conditions_at,
    strong_inequality,
    very_strong_inequality,
)
from .errors import PreconditionError
from .info_metrics import dmic_mi, gaussian_mi, mc_gaussian_mi, query
from .region import (
    GEOM_TOL,
    capacity_polytope,
    constraint_signature,
    hausdorff,
    reference_for_pattern,
    strong_interference_2user,
    vertices,
)
from .scheme import redundancy_check

MAX_PATTERNS = 64


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _system_deviation(p1, p2) -> float:
    s1, s2 = constraint_signature(p1), constraint_signature(p2)
    if len(s1) != len(s2) or any(a[0] != b[0] for a, b in zip(s1, s2)):
        return math.inf
    return max((abs(a[1] - b[1]) for a, b in zip(s1, s2)), default=0.0)


def valid_gaussian_patterns(ic: GaussianIC, limit: int = MAX_PATTERNS) -> list:
    """Every pattern whose inequalities all hold (at most ``limit``)."""
    k = ic.k
    choices = []
    for j in range(k):
        choices.append([
            lj for lj in range(k)
            if lj != j and strong_inequality(ic, lj, j).margin >= 0
            and all(very_strong_inequality(ic, m, j).margin >= 0 for m in range(k) if m not in (j, lj))
        ])
    return [InterferencePattern.from_strong(list(strong))
            for strong in itertools.islice(itertools.product(*choices), limit)]


def chain_rule_deviation(channel, dist=None) -> float:
    """Largest ``|I[a,b; Y|T] - I[a; Y|T] - I[b; Y|T,a]|`` over ordered pairs and receivers."""
    gaussian = isinstance(channel, GaussianIC)

    def mi(s, j, t):
        q = query(s, j, t)
        return gaussian_mi(channel, q) if gaussian else dmic_mi(channel, dist, q)

    k = channel.k
    dev = 0.0
    for a, b in itertools.permutations(range(k), 2):
        rest = [u for u in range(k) if u not in (a, b)]
        given = rest[: len(rest) // 2]
        for j in range(k):
            lhs = mi([a, b], j, given)
            dev = max(dev, abs(lhs - mi([a], j, given) - mi([b], j, given + [a])))
    return dev


def _mi_terms(polytope):
    return [h.source for h in polytope.halfspaces]


def verify_instance(channel, pattern: InterferencePattern | None = None,
                    dist: ProductDistribution | None = None, *, samples: int = 200_000,
                    seed: int = 0, tol: float = GEOM_TOL, force: bool = False) -> dict:
    """Run every applicable check; returns a JSON-ready report."""
    checks: dict[str, dict] = {}
    gaussian = isinstance(channel, GaussianIC)
    k = channel.k

    if gaussian:
        if pattern is None:
            cls = classify_gaussian(channel)
            pattern = cls.pattern
        if pattern is None:
            checks["conditions"] = {"status": "FAIL",
                                    "detail": "no receiver-consistent strong/very strong pattern"}
            if not force:
                return _finish(checks, None)
            pattern = InterferencePattern.cyclic(k)
        rep = check_conditions(channel, pattern)
        checks["conditions"] = {"status": _status(rep.passed), "min_margin": rep.min_margin}
        conditions_ok = rep.passed
    else:
        if dist is None:
            dist = ProductDistribution.uniform(channel.input_sizes)
        if pattern is None:
            pattern = InterferencePattern.cyclic(k)
        at = dmic_conditions_at(channel, pattern, dist)
        sampled = dmic_condition_gap(channel, pattern, max(samples // 100, 100), seed)
        conditions_ok = at.status != "violated"
        checks["conditions"] = {
            "status": _status(conditions_ok),
            "min_gap_at_distribution": at.min_gap,
            "sampled_min_gap": sampled.min_gap,
            "sampled_status": sampled.status,
        }
    if not conditions_ok and not force:
        return _finish(checks, pattern)

    cap = capacity_polytope(channel, pattern, dist, force=True)

    if k == 3:
        dev = _system_deviation(cap, reference_for_pattern(channel, pattern, dist))
        checks["theorem_consistency"] = {"status": _status(dev <= tol), "max_deviation": dev}
    if k == 2:
        dev = _system_deviation(cap, strong_interference_2user(channel, dist))
        checks["two_user_reduction"] = {"status": _status(dev <= tol), "max_deviation": dev}

    if gaussian and conditions_ok:
        cap_v = vertices(cap)
        worst = 0.0
        pats = valid_gaussian_patterns(channel)
        for pat in pats:
            worst = max(worst, hausdorff(vertices(capacity_polytope(channel, pat)), cap_v))
        checks["pattern_invariance"] = {"status": _status(worst <= tol), "patterns": len(pats),
                                        "max_deviation": worst}

    try:
        red = redundancy_check(channel, pattern, None, dist, force=force, tol=tol)
        checks["scheme_equals_capacity"] = {
            "status": _status(red.max_vertex_diff <= tol),
            "orderings": red.orderings_checked,
            "max_deviation": red.max_vertex_diff,
        }
        checks["redundancy"] = {"status": _status(red.max_violation <= tol),
                                "max_violation": red.max_violation}
    except PreconditionError as exc:
        checks["redundancy"] = {"status": "FAIL", "detail": str(exc)}

    if gaussian:
        worst_z = 0.0
        ok = True
        for n, q in enumerate(_mi_terms(cap)):
            est, se = mc_gaussian_mi(channel, q, samples, seed + 7919 * n)
            exact = gaussian_mi(channel, q)
            z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
            worst_z = max(worst_z, z)
            ok = ok and z <= 3.0
        checks["mi_oracle"] = {"status": _status(ok), "max_abs_z": worst_z, "samples": samples}

    chain_tol = 1e-12 if gaussian else 1e-10
    dev = chain_rule_deviation(channel, dist)
    checks["chain_rule"] = {"status": _status(dev <= chain_tol), "max_deviation": dev}
    return _finish(checks, pattern)


def _finish(checks: dict, pattern) -> dict:
    passed = all(c["status"] != "FAIL" for c in checks.values())
    out = {"passed": passed, "checks": checks}
    if pattern is not None:
        out["pattern"] = {"strong": [s + 1 for s in pattern.strong],
                          "very_strong": [sorted(m + 1 for m in v) for v in pattern.very_strong]}
    return out
