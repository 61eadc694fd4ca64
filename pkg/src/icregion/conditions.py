"""Strong and very strong interference conditions.

Gaussian channels are decided in closed form (gain-squared domain). For DMICs
the conditions must hold for every product input distribution, which sampling
cannot decide: a negative sampled gap certifies a violation, a nonnegative one
is reported as ``"sampled-pass"`` only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .channel_model import Dmic, GaussianIC, InterferencePattern, ProductDistribution, validate
from .errors import PreconditionError, ValidationError
from .info_metrics import MiQuery, _cond_mi_batch, dmic_mi_batch, query

NEG_TOL = 1e-12

# The labelings used in the 3-user analysis, receivers 0-based:
# Case 1: each user is strong at exactly one receiver.
# Case 2: user 1 strong at both other receivers, user 3 very strong at both.
PAPER_CASE1 = InterferencePattern.from_strong([1, 2, 0])
PAPER_CASE2 = InterferencePattern.from_strong([1, 0, 0])


@dataclass(frozen=True)
class Inequality:
    kind: str  # "very_strong" or "strong"
    user: int
    receiver: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def describe(self) -> str:
        m, j = self.user + 1, self.receiver + 1
        return (f"{self.kind} user {m} at Rx{j}: |h{m}{j}|^2 = {self.lhs:.6g} >= {self.rhs:.6g}"
                f" (margin {self.margin:+.6g})")


def very_strong_inequality(ic: GaussianIC, m: int, j: int) -> Inequality:
    """``|h_mj|^2 >= 1 + sum_{i != m} |h_ij|^2 P_i``.

    A zero-power user meets the condition vacuously (both MI terms are 0); its
    margin is then reported as ``max(raw margin, 0)``.
    """
    rp = ic.received_powers()[:, j]
    rhs = 1.0 + math.fsum(rp[i] for i in range(ic.k) if i != m)
    lhs = float(ic.gain2[m, j])
    if ic.powers[m] == 0 and lhs < rhs:
        lhs = rhs
    return Inequality("very_strong", m, j, lhs, rhs)


def strong_inequality(ic: GaussianIC, l: int, j: int) -> Inequality:
    """``|h_lj|^2 >= 1`` (the direct gain at receiver l is 1)."""
    lhs = float(ic.gain2[l, j])
    if ic.powers[l] == 0 and lhs < 1.0:
        lhs = 1.0
    return Inequality("strong", l, j, lhs, 1.0)


@dataclass
class ConditionReport:
    pattern: InterferencePattern
    inequalities: list

    @property
    def passed(self) -> bool:
        return all(ineq.margin >= 0 for ineq in self.inequalities)

    @property
    def violated(self) -> list:
        return [ineq for ineq in self.inequalities if ineq.margin < 0]

    @property
    def min_margin(self) -> float:
        return min(ineq.margin for ineq in self.inequalities)


def check_conditions(ic: GaussianIC, pattern: InterferencePattern) -> ConditionReport:
    """Evaluate every inequality required by ``pattern``; equality passes."""
    if pattern.k != ic.k:
        raise ValidationError(f"pattern is for k={pattern.k}, channel has k={ic.k}")
    ineqs = []
    for j in range(ic.k):
        ineqs.append(strong_inequality(ic, pattern.strong[j], j))
        for m in sorted(pattern.very_strong[j]):
            ineqs.append(very_strong_inequality(ic, m, j))
    return ConditionReport(pattern, ineqs)


@dataclass
class Classification:
    labels: dict  # (user, receiver) -> "very_strong" | "strong" | "neither"
    pattern: InterferencePattern | None
    report: ConditionReport | None
    uncovered: list  # receivers with no valid strong/very strong assignment
    case: int | None = None  # 1 or 2 for k=3
    paper_labeling: bool = False

    @property
    def ok(self) -> bool:
        return self.pattern is not None


def _link_label(ic, m, j) -> str:
    if very_strong_inequality(ic, m, j).margin >= 0:
        return "very_strong"
    if strong_inequality(ic, m, j).margin >= 0:
        return "strong"
    return "neither"


def classify_gaussian(ic: GaussianIC) -> Classification:
    """Find an interference pattern the channel satisfies.

    Receivers are independent, so the lexicographically smallest valid pattern
    takes, at each receiver, the smallest user that can serve as the strong
    interferer while every other interferer is very strong.
    """
    validate(ic)
    k = ic.k
    labels = {(m, j): _link_label(ic, m, j) for j in range(k) for m in range(k) if m != j}
    strong = []
    uncovered = []
    for j in range(k):
        choice = None
        for lj in range(k):
            if lj == j or labels[(lj, j)] == "neither":
                continue
            if all(labels[(m, j)] == "very_strong" for m in range(k) if m not in (j, lj)):
                choice = lj
                break
        if choice is None:
            uncovered.append(j)
        strong.append(choice)
    if uncovered:
        return Classification(labels, None, None, uncovered)
    pattern = InterferencePattern.from_strong(strong)
    report = check_conditions(ic, pattern)
    case, perm = paper_case(pattern) if k == 3 else (None, None)
    return Classification(labels, pattern, report, [], case, perm == (0, 1, 2))


def paper_case(pattern: InterferencePattern) -> tuple[int, tuple]:
    """Case (1 or 2) of a 3-user pattern and the relabeling that produces it.

    ``perm[u]`` is the actual index of the user the 3-user analysis calls ``u``;
    the first matching permutation in lexicographic order is returned.
    """
    if pattern.k != 3:
        raise ValidationError("cases 1 and 2 are defined for k=3 only")
    for case, ref in ((1, PAPER_CASE1), (2, PAPER_CASE2)):
        for perm in itertools.permutations(range(3)):
            if all(pattern.strong[perm[j]] == perm[ref.strong[j]] for j in range(3)):
                return case, perm
    raise AssertionError(f"3-user pattern {pattern.describe()} matches neither case")


# -- DMIC conditions ---------------------------------------------------------------


def pattern_condition_queries(k: int, pattern: InterferencePattern):
    """Yield ``(kind, user, receiver, satisfied_side, other_side)`` MI queries.

    Each condition reads ``mi(satisfied_side) >= mi(other_side)``.
    """
    everyone = set(range(k))
    for j in range(k):
        lj = pattern.strong[j]
        own = query([lj], lj, everyone - {lj})
        yield "strong", lj, j, query([lj], j, everyone - {lj}), own
        for m in sorted(pattern.very_strong[j]):
            yield "very_strong", m, j, query([m], j), query([m], m, everyone - {m})


@dataclass
class ConditionGap:
    kind: str
    user: int
    receiver: int
    satisfied_side: MiQuery
    other_side: MiQuery
    min_gap: float
    argmin: list  # per-user pmfs at the minimizing distribution

    @property
    def status(self) -> str:
        return "violated" if self.min_gap < -NEG_TOL else "sampled-pass"


@dataclass
class GapReport:
    gaps: list
    n_distributions: int

    @property
    def min_gap(self) -> float:
        return min(g.min_gap for g in self.gaps)

    @property
    def status(self) -> str:
        return "violated" if any(g.status == "violated" for g in self.gaps) else "sampled-pass"


def sample_product_pmfs(input_sizes, n_samples: int, rng, include_vertices: bool = True):
    """Uniform, then all deterministic inputs, then Dirichlet(1) draws, per user."""
    rows = [[np.full(n, 1.0 / n)] for n in input_sizes]
    if include_vertices:
        for xs in itertools.product(*(range(n) for n in input_sizes)):
            for i, (n, x) in enumerate(zip(input_sizes, xs)):
                p = np.zeros(n)
                p[x] = 1.0
                rows[i].append(p)
    stacked = [np.array(r) for r in rows]
    if n_samples:
        stacked = [np.vstack([s, rng.dirichlet(np.ones(n), size=n_samples)])
                   for s, n in zip(stacked, input_sizes)]
    return stacked


def dmic_condition_gap(ch: Dmic, pattern: InterferencePattern, n_samples: int, seed: int) -> GapReport:
    """Minimum of ``satisfied_side - other_side`` for every condition of ``pattern``."""
    validate(ch)
    if pattern.k != ch.k:
        raise ValidationError(f"pattern is for k={pattern.k}, channel has k={ch.k}")
    rng = np.random.default_rng(seed)
    pmfs = sample_product_pmfs(ch.input_sizes, n_samples, rng)
    cache: dict[MiQuery, np.ndarray] = {}

    def values(q):
        if q not in cache:
            cache[q] = dmic_mi_batch(ch, pmfs, q)
        return cache[q]

    gaps = []
    for kind, user, rx, good, other in pattern_condition_queries(ch.k, pattern):
        diff = values(good) - values(other)
        b = int(np.argmin(diff))
        gaps.append(ConditionGap(kind, user, rx, good, other, float(diff[b]),
                                 [p[b].copy() for p in pmfs]))
    return GapReport(gaps, pmfs[0].shape[0])


def dmic_conditions_at(ch: Dmic, pattern: InterferencePattern, dist: ProductDistribution) -> GapReport:
    """Condition gaps at each time-sharing component of one distribution."""
    pmfs = [np.array([per_q[i] for per_q in dist.pmfs]) for i in range(ch.k)]
    gaps = []
    for kind, user, rx, good, other in pattern_condition_queries(ch.k, pattern):
        diff = dmic_mi_batch(ch, pmfs, good) - dmic_mi_batch(ch, pmfs, other)
        b = int(np.argmin(diff))
        gaps.append(ConditionGap(kind, user, rx, good, other, float(diff[b]),
                                 [p[b].copy() for p in pmfs]))
    return GapReport(gaps, len(dist.q_weights))


# -- n-letter extension (n = 2) -------------------------------------------------------


def make_degraded_pair(input_sizes, output_size: int, seed: int, sender: int = 0,
                       rx_a: int = 0, rx_b: int = 1, post=None) -> Dmic:
    """Random DMIC in which ``Y_{rx_a}`` is a degraded copy of ``Y_{rx_b}``.

    ``Y_{rx_a}`` is produced from ``Y_{rx_b}`` by a per-letter stochastic map
    that may look at every input except the sender's. ``post`` is either None
    (random map, also depending on the other inputs) or a fixed
    ``(output_size, output_size)`` row-stochastic matrix applied to ``Y_{rx_b}``.
    The returned channel carries the tag ``(sender, rx_a, rx_b)``.
    """
    k = len(input_sizes)
    if rx_a == rx_b or not all(0 <= v < k for v in (sender, rx_a, rx_b)):
        raise ValidationError(f"invalid degradation triple {(sender, rx_a, rx_b)}")
    rng = np.random.default_rng(seed)
    n = math.prod(input_sizes)
    m = output_size
    tables = [rng.dirichlet(np.ones(m), size=n) for _ in range(k)]
    others = [i for i in range(k) if i != sender]
    other_sizes = [input_sizes[i] for i in others]
    if post is None:
        maps = rng.dirichlet(np.ones(m), size=(math.prod(other_sizes), m))
    else:
        post = np.asarray(post, dtype=float)
        maps = np.broadcast_to(post, (math.prod(other_sizes), m, m))
    wb = tables[rx_b]
    wa = np.empty_like(wb)
    for idx, xs in enumerate(itertools.product(*(range(s) for s in input_sizes))):
        o = np.ravel_multi_index([xs[i] for i in others], other_sizes)
        wa[idx] = wb[idx] @ maps[o]
    tables[rx_a] = wa
    return Dmic(input_sizes, [m] * k, tables, degradations=((sender, rx_a, rx_b),))


def two_letter_tensor(ch: Dmic, j: int) -> np.ndarray:
    """Transition of receiver j over two channel uses, indexed ``[a_1..a_k, y]``.

    ``a_i = x_i(1) * |X_i| + x_i(2)`` and ``y = y(1) * |Y_j| + y(2)``.
    """
    k = ch.k
    t = ch.tensor(j)
    outer = np.multiply.outer(t, t)  # axes: x(1)..., y(1), x(2)..., y(2)
    order = []
    for i in range(k):
        order += [i, k + 1 + i]
    order += [k, 2 * k + 1]
    sizes = [n * n for n in ch.input_sizes] + [ch.output_sizes[j] ** 2]
    return outer.transpose(order).reshape(sizes)


@dataclass
class Lemma1Report:
    sender: int
    rx_a: int
    rx_b: int
    n_distributions: int
    min_gap: float
    argmin: list

    @property
    def passed(self) -> bool:
        return self.min_gap >= -1e-10


def lemma1_extension_check(ch: Dmic, sender: int, rx_a: int, rx_b: int,
                           n_samples: int, seed: int) -> Lemma1Report:
    """Brute-force the two-letter form of the degradedness inequality.

    Checks ``I[X_s^2; Y_a^2 | others^2] <= I[X_s^2; Y_b^2 | others^2]`` where
    each user's two-letter input is an arbitrary joint pmf over its squared
    alphabet and users are independent. The single-letter premise must hold
    by construction (see ``make_degraded_pair``), never by sampling.
    """
    if (sender, rx_a, rx_b) not in ch.degradations:
        raise PreconditionError(
            f"channel is not structurally degraded for (sender={sender + 1}, "
            f"rx_a={rx_a + 1}, rx_b={rx_b + 1})"
        )
    validate(ch)
    rng = np.random.default_rng(seed)
    sizes2 = [n * n for n in ch.input_sizes]
    pmfs = [np.vstack([np.full(n, 1.0 / n), rng.dirichlet(np.ones(n), size=n_samples)])
            for n in sizes2]
    q = query([sender], 0, set(range(ch.k)) - {sender})
    ia = _cond_mi_batch(two_letter_tensor(ch, rx_a), pmfs, q)
    ib = _cond_mi_batch(two_letter_tensor(ch, rx_b), pmfs, q)
    gap = ib - ia
    b = int(np.argmin(gap))
    return Lemma1Report(sender, rx_a, rx_b, len(gap), float(gap[b]), [p[b] for p in pmfs])


# -- discrete-input probe of the Gaussian conditions ------------------------------------


def base_constellation(levels: int) -> np.ndarray:
    """``levels`` lowest-energy points of a centred square grid (QPSK for 4)."""
    if levels < 2:
        raise ValidationError("need at least 2 constellation points")
    side = math.ceil(math.sqrt(levels))
    if side % 2:
        side += 1
    axis = np.arange(side) - (side - 1) / 2.0
    pts = (axis[:, None] + 1j * axis[None, :]).ravel()
    order = np.lexsort((np.angle(pts), np.round(np.abs(pts), 12)))
    return pts[order[:levels]]


def _discrete_mi_samples(amps, consts, pmfs, senders, xs_idx, noise):
    """Per-sample ``log2 p(y | x_S) - log2 p(y)`` for ``y = sum a_i x_i + noise``.

    ``consts[i]``/``pmfs[i]`` describe user i's discrete input; ``xs_idx[i]``
    holds the sampled symbol indices.
    """
    users = list(range(len(amps)))
    y = noise.copy()
    for i in users:
        y += amps[i] * consts[i][xs_idx[i]]
    rest = [i for i in users if i not in senders]

    def log_mix(which, shift):
        # log sum_{x_which} p(x_which) exp(-|y - shift - sum a x|^2)
        if not which:
            return -np.abs(y - shift) ** 2
        combos = list(itertools.product(*(range(len(consts[i])) for i in which)))
        pts = np.array([sum(amps[i] * consts[i][c[n]] for n, i in enumerate(which)) for c in combos])
        logw = np.array([sum(math.log(max(pmfs[i][c[n]], 1e-300)) for n, i in enumerate(which))
                         for c in combos])
        d = -np.abs((y - shift)[:, None] - pts[None, :]) ** 2 + logw[None, :]
        return logsumexp(d, axis=1)

    known = np.zeros_like(y)
    for i in senders:
        known += amps[i] * consts[i][xs_idx[i]]
    return (log_mix(rest, known) - log_mix(users, 0.0)) / math.log(2.0)


@dataclass
class Lemma2Report:
    n_pmfs: int
    levels: int
    min_gap: float
    min_studentized: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def lemma2_spot_check(ic: GaussianIC, levels: int, n_samples: int, seed: int,
                      pattern: InterferencePattern | None = None, mc_samples: int = 4000,
                      skip_gaussian_check: bool = False) -> Lemma2Report:
    """Falsification probe: do the conditions also hold for discrete inputs?

    If the Gaussian-input conditions hold, they hold for every input
    distribution; here each user sends a ``levels``-point constellation with a
    sampled pmf scaled to its power budget, and each condition's two MI terms
    are estimated by Monte Carlo on paired draws. A condition is violated when
    its gap is below ``-3`` standard errors. The first pmf set is uniform.
    """
    if pattern is None:
        cls = classify_gaussian(ic)
        if cls.pattern is None and not skip_gaussian_check:
            raise PreconditionError("instance satisfies no interference pattern")
        pattern = cls.pattern or InterferencePattern.cyclic(ic.k)
    if not skip_gaussian_check and not check_conditions(ic, pattern).passed:
        raise PreconditionError("instance fails the Gaussian conditions for this pattern")
    rng = np.random.default_rng(seed)
    k = ic.k
    base = base_constellation(levels)
    min_gap = math.inf
    min_z = math.inf
    violations = []
    for s in range(n_samples):
        pmfs = [np.full(levels, 1.0 / levels) if s == 0 else rng.dirichlet(np.ones(levels))
                for _ in range(k)]
        consts = []
        for i in range(k):
            energy = float(pmfs[i] @ np.abs(base) ** 2)
            consts.append(base * math.sqrt(ic.powers[i] / energy))
        xs = [rng.choice(levels, size=mc_samples, p=pmfs[i]) for i in range(k)]
        z = rng.standard_normal((mc_samples, 2))
        noise = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)
        for j in range(k):
            checks = [("strong", pattern.strong[j])]
            checks += [("very_strong", m) for m in sorted(pattern.very_strong[j])]
            for kind, m in checks:
                # own receiver with everyone else known: y = x_m + n
                own = _discrete_mi_samples([1.0], [consts[m]], [pmfs[m]], [0], [xs[m]], noise)
                if kind == "strong":
                    users = [m]
                else:
                    users = list(range(k))
                amps = [ic.gains[i, j] for i in users]
                cross = _discrete_mi_samples(amps, [consts[i] for i in users],
                                             [pmfs[i] for i in users], [users.index(m)],
                                             [xs[i] for i in users], noise)
                diff = cross - own
                gap = float(diff.mean())
                se = float(diff.std(ddof=1) / math.sqrt(mc_samples))
                if se > 0:
                    zval = gap / se
                else:
                    zval = 0.0 if gap >= 0 else -math.inf
                min_gap = min(min_gap, gap)
                min_z = min(min_z, zval)
                if zval < -3.0:
                    violations.append({"pmf_index": s, "kind": kind, "user": m,
                                       "receiver": j, "gap": gap, "stderr": se})
    return Lemma2Report(n_samples, levels, min_gap, min_z, violations)
