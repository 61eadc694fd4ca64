"""Channel instances, input distributions and interference patterns.

User and receiver indices are 0-based everywhere in code. Gains are stored
user-major: ``gains[i, j]`` is the amplitude from user ``i`` to receiver ``j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CanonicalizationError, ValidationError

ROW_SUM_TOL = 1e-12
MAX_ENUMERATION = 10**7


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GaussianIC:
    """K-user complex Gaussian interference channel in canonical form.

    Receiver ``j`` observes ``Y_j = sum_i gains[i, j] X_i + N_j`` with
    ``N_j ~ CN(0, 1)`` and ``E|X_i|^2 <= powers[i]``.
    """

    gains: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gains", _frozen(self.gains, complex))
        object.__setattr__(self, "powers", _frozen(self.powers, float))
        if self.gains.ndim != 2 or self.gains.shape[0] != self.gains.shape[1]:
            raise ValidationError(f"gains must be a square matrix, got shape {self.gains.shape}")
        if self.powers.shape != (self.gains.shape[0],):
            raise ValidationError(
                f"powers must have length {self.gains.shape[0]}, got shape {self.powers.shape}"
            )

    @property
    def k(self) -> int:
        return self.gains.shape[0]

    @property
    def gain2(self) -> np.ndarray:
        """Squared gain magnitudes ``|h_ij|^2``."""
        return np.abs(self.gains) ** 2

    def received_powers(self) -> np.ndarray:
        """``rp[i, j] = |h_ij|^2 P_i``, the power of user i seen at receiver j."""
        return self.gain2 * self.powers[:, None]

    def with_gain(self, i: int, j: int, value: complex) -> "GaussianIC":
        g = self.gains.copy()
        g[i, j] = value
        return GaussianIC(g, self.powers)

    def __eq__(self, other):
        if not isinstance(other, GaussianIC):
            return NotImplemented
        return np.array_equal(self.gains, other.gains) and np.array_equal(self.powers, other.powers)

    def __hash__(self):
        return hash((self.gains.tobytes(), self.powers.tobytes()))


@dataclass(frozen=True, eq=False)
class Dmic:
    """Discrete memoryless interference channel.

    ``transitions[j]`` has shape ``(prod(input_sizes), output_sizes[j])``; row
    ``idx`` is the pmf of ``Y_j`` given the joint input with index ``idx``, where
    ``x_1`` is the most significant digit (numpy C order).

    ``degradations`` holds ``(sender, rx_a, rx_b)`` triples certified by
    construction: ``Y_{rx_a}`` is a per-letter stochastic function of
    ``Y_{rx_b}`` and the inputs of every user other than ``sender``.
    """

    input_sizes: tuple
    output_sizes: tuple
    transitions: tuple
    degradations: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "input_sizes", tuple(int(n) for n in self.input_sizes))
        object.__setattr__(self, "output_sizes", tuple(int(n) for n in self.output_sizes))
        object.__setattr__(
            self, "transitions", tuple(_frozen(t, float) for t in self.transitions)
        )
        object.__setattr__(
            self, "degradations", tuple(tuple(int(v) for v in d) for d in self.degradations)
        )

    @property
    def k(self) -> int:
        return len(self.input_sizes)

    def tensor(self, j: int) -> np.ndarray:
        """Transition of receiver ``j`` as an array indexed ``[x_1, ..., x_k, y]``."""
        return self.transitions[j].reshape(self.input_sizes + (self.output_sizes[j],))

    @classmethod
    def from_function(cls, input_sizes, output_sizes, fn) -> "Dmic":
        """Deterministic channel; ``fn(xs)`` returns the tuple of outputs ``(y_1..y_k)``."""
        n = int(np.prod(input_sizes))
        tables = [np.zeros((n, m)) for m in output_sizes]
        for idx, xs in enumerate(itertools.product(*(range(s) for s in input_sizes))):
            ys = fn(xs)
            for j, y in enumerate(ys):
                tables[j][idx, y] = 1.0
        return cls(input_sizes, output_sizes, tables)


@dataclass(frozen=True, eq=False)
class ProductDistribution:
    """Independent per-user input pmfs mixed by a time-sharing variable Q.

    ``pmfs[q][i]`` is the pmf of ``X_i`` given ``Q = q``.
    """

    q_weights: np.ndarray
    pmfs: tuple

    def __post_init__(self):
        object.__setattr__(self, "q_weights", _frozen(self.q_weights, float))
        object.__setattr__(
            self, "pmfs", tuple(tuple(_frozen(p, float) for p in per_q) for per_q in self.pmfs)
        )
        if len(self.pmfs) != len(self.q_weights):
            raise ValidationError(
                f"{len(self.q_weights)} q_weights but {len(self.pmfs)} pmf groups"
            )

    @property
    def k(self) -> int:
        return len(self.pmfs[0]) if self.pmfs else 0

    @classmethod
    def single(cls, pmfs: Sequence) -> "ProductDistribution":
        return cls([1.0], [list(pmfs)])

    @classmethod
    def uniform(cls, input_sizes: Sequence[int]) -> "ProductDistribution":
        return cls.single([np.full(n, 1.0 / n) for n in input_sizes])

    @classmethod
    def deterministic(cls, input_sizes: Sequence[int], xs: Sequence[int]) -> "ProductDistribution":
        pmfs = []
        for n, x in zip(input_sizes, xs):
            p = np.zeros(n)
            p[x] = 1.0
            pmfs.append(p)
        return cls.single(pmfs)


@dataclass(frozen=True)
class InterferencePattern:
    """One strong interferer and K-2 very strong interferers per receiver.

    ``strong[j]`` is the strong interferer at receiver ``j``;
    ``very_strong[j]`` is the set of the remaining interferers.
    """

    strong: tuple
    very_strong: tuple

    def __post_init__(self):
        object.__setattr__(self, "strong", tuple(int(s) for s in self.strong))
        object.__setattr__(self, "very_strong", tuple(frozenset(v) for v in self.very_strong))
        problems = []
        k = len(self.strong)
        if k < 2:
            problems.append("pattern needs at least 2 receivers")
        if len(self.very_strong) != k:
            problems.append(f"very_strong has {len(self.very_strong)} entries, expected {k}")
        for j in range(min(k, len(self.very_strong))):
            lj, vs = self.strong[j], self.very_strong[j]
            if not 0 <= lj < k or lj == j:
                problems.append(f"receiver {j + 1}: strong interferer {lj + 1} invalid")
            if lj in vs or j in vs or len(vs) != k - 2 or not vs <= set(range(k)):
                problems.append(
                    f"receiver {j + 1}: very strong set {sorted(m + 1 for m in vs)} does not "
                    f"complete {{{j + 1}, {lj + 1}}} to all users"
                )
        if problems:
            raise ValidationError(problems)

    @classmethod
    def from_strong(cls, strong: Sequence[int]) -> "InterferencePattern":
        k = len(strong)
        return cls(strong, [set(range(k)) - {j, strong[j]} for j in range(k)])

    @classmethod
    def cyclic(cls, k: int) -> "InterferencePattern":
        """Strong interferer at receiver j is user j+1 (mod k)."""
        return cls.from_strong([(j + 1) % k for j in range(k)])

    @property
    def k(self) -> int:
        return len(self.strong)

    def describe(self) -> str:
        parts = []
        for j in range(self.k):
            vs = ",".join(str(m + 1) for m in sorted(self.very_strong[j]))
            parts.append(f"Rx{j + 1}: strong={self.strong[j] + 1} very_strong={{{vs}}}")
        return "; ".join(parts)


def normalize_gaussian(raw_gains, noise_vars, powers) -> GaussianIC:
    """Bring an arbitrary Gaussian IC to unit direct gains and unit noise.

    Every received signal-to-noise ratio ``|g_ij|^2 P_i / sigma_j^2`` is kept,
    which keeps every conditional mutual information unchanged.
    """
    g = np.array(raw_gains, dtype=complex)
    nv = np.array(noise_vars, dtype=float)
    p = np.array(powers, dtype=float)
    k = g.shape[0]
    problems = [f"noise variance at receiver {j + 1} is {nv[j]!r}" for j in range(k)
                if not (nv[j] > 0 and math.isfinite(nv[j]))]
    if problems:
        raise ValidationError(problems)
    direct = np.diag(g)
    if np.any(direct == 0):
        bad = [j + 1 for j in range(k) if direct[j] == 0]
        raise CanonicalizationError(f"zero direct gain at users {bad}")
    if np.all(direct == 1) and np.all(nv == 1):
        return GaussianIC(g, p)
    sigma = np.sqrt(nv)
    # X_i = X'_i / amp_i with amp_i = g_ii / sigma_i; Y'_j = Y_j / sigma_j
    amp = direct / sigma
    h = g / amp[:, None] / sigma[None, :]
    h[np.diag_indices(k)] = 1.0
    return GaussianIC(h, np.abs(amp) ** 2 * p)


def validate(instance, k: int | None = None):
    """Check every invariant of ``instance``; return it or raise ValidationError.

    For a ProductDistribution, ``k`` (user count) defaults to the number of
    per-user pmfs.
    """
    if isinstance(instance, GaussianIC):
        problems = _gaussian_problems(instance)
    elif isinstance(instance, Dmic):
        problems = _dmic_problems(instance)
    elif isinstance(instance, ProductDistribution):
        problems = _distribution_problems(instance, k)
    elif isinstance(instance, InterferencePattern):
        problems = []
    else:
        raise TypeError(f"cannot validate {type(instance).__name__}")
    if problems:
        raise ValidationError(problems)
    return instance


def _gaussian_problems(ic: GaussianIC) -> list[str]:
    problems = []
    if ic.k < 2:
        problems.append(f"k={ic.k}, need k >= 2")
    for j in range(ic.k):
        if ic.gains[j, j] != 1:
            problems.append(f"gains[{j + 1}][{j + 1}] = {ic.gains[j, j]} is not 1 (not canonical)")
    if not np.all(np.isfinite(ic.gains)):
        problems.append("gains contain non-finite entries")
    for i, p in enumerate(ic.powers):
        if not (p >= 0 and math.isfinite(p)):
            problems.append(f"power of user {i + 1} is {p!r}")
    return problems


def _dmic_problems(ch: Dmic) -> list[str]:
    problems = []
    k = ch.k
    if k < 2:
        problems.append(f"k={k}, need k >= 2")
    if len(ch.output_sizes) != k or len(ch.transitions) != k:
        problems.append(
            f"{k} input alphabets but {len(ch.output_sizes)} output alphabets and "
            f"{len(ch.transitions)} transition tables"
        )
        return problems
    for i, n in enumerate(ch.input_sizes):
        if n < 2:
            problems.append(f"|X_{i + 1}| = {n} < 2")
    for j, m in enumerate(ch.output_sizes):
        if m < 2:
            problems.append(f"|Y_{j + 1}| = {m} < 2")
    n_in = math.prod(ch.input_sizes)
    if n_in * max(ch.output_sizes) > MAX_ENUMERATION:
        problems.append(
            f"enumeration size {n_in} x {max(ch.output_sizes)} exceeds {MAX_ENUMERATION}"
        )
        return problems
    for j, t in enumerate(ch.transitions):
        if t.shape != (n_in, ch.output_sizes[j]):
            problems.append(
                f"receiver {j + 1}: transition shape {t.shape}, expected {(n_in, ch.output_sizes[j])}"
            )
            continue
        if np.any((t < 0) | (t > 1)) or not np.all(np.isfinite(t)):
            rows = np.nonzero(np.any((t < 0) | (t > 1) | ~np.isfinite(t), axis=1))[0]
            problems.append(f"receiver {j + 1}: entries outside [0, 1] in rows {rows.tolist()}")
        dev = np.abs(t.sum(axis=1) - 1.0)
        for row in np.nonzero(dev > ROW_SUM_TOL)[0]:
            problems.append(
                f"receiver {j + 1}, row {int(row)}: sums to {t[row].sum():.15g}, not 1"
            )
    for d in ch.degradations:
        if len(d) != 3 or not all(0 <= v < k for v in d):
            problems.append(f"degradation tag {d} out of range")
    return problems


def _distribution_problems(dist: ProductDistribution, k: int | None) -> list[str]:
    problems = []
    k = dist.k if k is None else k
    nq = len(dist.q_weights)
    if nq == 0:
        problems.append("no time-sharing components")
    if nq > 2 * k + 1:
        problems.append(f"|Q| = {nq} exceeds 2K+1 = {2 * k + 1}")
    w = dist.q_weights
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        problems.append("negative or non-finite q_weights")
    if nq and abs(w.sum() - 1.0) > ROW_SUM_TOL:
        problems.append(f"q_weights sum to {w.sum():.15g}, not 1")
    for q, per_q in enumerate(dist.pmfs):
        if len(per_q) != k:
            problems.append(f"q={q}: {len(per_q)} user pmfs, expected {k}")
            continue
        for i, p in enumerate(per_q):
            if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)):
                problems.append(f"q={q}, user {i + 1}: invalid pmf entries")
            elif abs(p.sum() - 1.0) > ROW_SUM_TOL:
                problems.append(f"q={q}, user {i + 1}: pmf sums to {p.sum():.15g}, not 1")
    return problems


def check_distribution_matches(ch: Dmic, dist: ProductDistribution) -> None:
    problems = []
    if dist.k != ch.k:
        problems.append(f"distribution has {dist.k} users, channel has {ch.k}")
    else:
        for q, per_q in enumerate(dist.pmfs):
            for i, p in enumerate(per_q):
                if p.shape != (ch.input_sizes[i],):
                    problems.append(
                        f"q={q}, user {i + 1}: pmf length {p.shape}, alphabet {ch.input_sizes[i]}"
                    )
    if problems:
        raise ValidationError(problems)


class ConformingInstance(NamedTuple):
    ic: GaussianIC
    pattern: InterferencePattern
    power_scale: float
    """Factor applied to the requested powers to make the pattern feasible (1.0 if none)."""


VS_SLACK = 1.05
_CONTRACTION_TARGET = 0.9


def random_conforming_instance(
    k: int,
    seed: int,
    powers_hint: Sequence[float] | None = None,
    pattern: InterferencePattern | None = None,
) -> ConformingInstance:
    """Seeded random Gaussian IC that satisfies ``pattern`` (cyclic by default).

    Strong gains get magnitude in [1, 2]. Very strong gains at each receiver
    solve the coupled inequalities
    ``|h_mj|^2 >= 1 + sum_{i != m} |h_ij|^2 P_i`` by fixed-point iteration with
    multiplicative slack 1.05. Those inequalities are jointly solvable only when
    the spectral radius of the very strong power-coupling matrix is below 1, so
    powers are scaled down when needed; the factor is returned.
    """
    if k < 2:
        raise ValidationError(f"k={k}, need k >= 2")
    rng = np.random.default_rng(seed)
    if pattern is None:
        pattern = InterferencePattern.cyclic(k)
    elif pattern.k != k:
        raise ValidationError(f"pattern is for k={pattern.k}, requested k={k}")
    if powers_hint is None:
        powers = rng.uniform(0.2, 2.0, size=k)
    else:
        powers = np.array(powers_hint, dtype=float)
        if powers.shape != (k,) or np.any(powers < 0) or not np.all(np.isfinite(powers)):
            raise ValidationError(f"powers_hint must be {k} nonnegative finite reals")

    rho = 0.0
    for j in range(k):
        vs = sorted(pattern.very_strong[j])
        if len(vs) >= 2:
            m = np.tile(powers[vs], (len(vs), 1))
            np.fill_diagonal(m, 0.0)
            rho = max(rho, float(np.max(np.abs(np.linalg.eigvals(m)))))
    scale = 1.0
    if VS_SLACK * rho >= _CONTRACTION_TARGET:
        scale = _CONTRACTION_TARGET / (VS_SLACK * rho)
        powers = powers * scale

    gains = np.eye(k, dtype=complex)
    for j in range(k):
        lj = pattern.strong[j]
        gains[lj, j] = rng.uniform(1.0, 2.0) * np.exp(2j * np.pi * rng.uniform())
        vs = sorted(pattern.very_strong[j])
        if not vs:
            continue
        base = 1.0 + powers[j] + abs(gains[lj, j]) ** 2 * powers[lj]
        coupling = np.tile(powers[vs], (len(vs), 1))
        np.fill_diagonal(coupling, 0.0)
        g2 = np.full(len(vs), base)
        for _ in range(10_000):
            nxt = VS_SLACK * (base + coupling @ g2)
            if np.max(np.abs(nxt - g2)) <= 1e-13 * np.max(nxt):
                g2 = nxt
                break
            g2 = nxt
        phases = np.exp(2j * np.pi * rng.uniform(size=len(vs)))
        for m, g, ph in zip(vs, g2, phases):
            gains[m, j] = math.sqrt(g) * ph
    return ConformingInstance(GaussianIC(gains, powers), pattern, float(scale))
