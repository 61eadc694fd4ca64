"""Conditional mutual information terms ``I[X_S; Y_j | X_T, Q]``, in bits.

Three backends: closed form for Gaussian inputs on a GaussianIC, exact
enumeration on a Dmic, and a Monte Carlo estimator used as an independent
check of the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .channel_model import Dmic, GaussianIC, ProductDistribution, check_distribution_matches
from .errors import ValidationError

LN2 = math.log(2.0)
PROB_FLOOR = 1e-300
_BATCH_ELEMS = 4_000_000


@dataclass(frozen=True)
class MiQuery:
    """``I[X_S; Y_j | X_T]`` with 0-based user indices."""

    senders: frozenset
    receiver: int
    given: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "senders", frozenset(int(s) for s in self.senders))
        object.__setattr__(self, "given", frozenset(int(t) for t in self.given))
        object.__setattr__(self, "receiver", int(self.receiver))
        if not self.senders:
            raise ValidationError("MI query needs at least one sender")
        if self.senders & self.given:
            raise ValidationError(
                f"senders and conditioning overlap on users {sorted(u + 1 for u in self.senders & self.given)}"
            )

    def check(self, k: int) -> "MiQuery":
        idx = self.senders | self.given | {self.receiver}
        bad = sorted(i for i in idx if not 0 <= i < k)
        if bad:
            raise IndexError(f"indices {bad} out of range for k={k}")
        return self

    def label(self) -> str:
        s = ",".join(f"X{i + 1}" for i in sorted(self.senders))
        out = f"I[{s};Y{self.receiver + 1}"
        if self.given:
            out += "|" + ",".join(f"X{i + 1}" for i in sorted(self.given))
        return out + "]"

    def __str__(self):
        return self.label()


def query(senders: Iterable[int], receiver: int, given: Iterable[int] = ()) -> MiQuery:
    return MiQuery(frozenset(senders), receiver, frozenset(given))


# -- Gaussian closed form -------------------------------------------------------


def _gaussian_terms(rp: np.ndarray, q: MiQuery, noise: float = 1.0):
    k = len(rp)
    rest = [i for i in range(k) if i not in q.senders and i not in q.given]
    signal = math.fsum(rp[i] for i in sorted(q.senders))
    den = noise + math.fsum(rp[i] for i in rest)
    return signal, den


def gaussian_mi(ic: GaussianIC, q: MiQuery) -> float:
    """Closed form for independent ``X_i ~ CN(0, P_i)``:

    ``log2((1 + sum_{i not in T} |h_ij|^2 P_i) / (1 + sum_{i not in S u T} |h_ij|^2 P_i))``
    """
    q.check(ic.k)
    rp = ic.received_powers()[:, q.receiver]
    signal, den = _gaussian_terms(rp, q)
    return math.log1p(signal / den) / LN2


def gaussian_mi_raw(raw_gains, noise_vars, powers, q: MiQuery) -> float:
    """Same closed form on a non-canonical model (any direct gains and noise)."""
    g2 = np.abs(np.asarray(raw_gains, dtype=complex)) ** 2
    rp = g2[:, q.receiver] * np.asarray(powers, dtype=float)
    q.check(len(rp))
    signal, den = _gaussian_terms(rp, q, float(noise_vars[q.receiver]))
    return math.log1p(signal / den) / LN2


def mc_gaussian_mi(ic: GaussianIC, q: MiQuery, samples: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of ``gaussian_mi`` and its standard error.

    Draws Gaussian inputs and noise, then averages the log-likelihood ratio
    ``log p(y | x_S, x_T) - log p(y | x_T)`` with both densities taken exactly
    (the residual interference plus noise is Gaussian).
    """
    q.check(ic.k)
    if samples < 1000:
        raise ValidationError(f"samples={samples}, need at least 1000")
    rng = np.random.default_rng(seed)
    j = q.receiver
    h = ic.gains[:, j]
    senders = sorted(q.senders)
    rest = [i for i in range(ic.k) if i not in q.senders and i not in q.given]

    def cn(var):
        z = rng.standard_normal((samples, 2))
        return (z[:, 0] + 1j * z[:, 1]) * math.sqrt(var / 2.0)

    # draw in a fixed user order so the stream depends only on (seed, samples)
    signal = np.zeros(samples, dtype=complex)
    interference = cn(1.0)
    for i in range(ic.k):
        if i in q.given:
            continue
        x = cn(ic.powers[i])
        if i in q.senders:
            signal += h[i] * x
        else:
            interference += h[i] * x
    v_cond = 1.0 + sum(abs(h[i]) ** 2 * ic.powers[i] for i in rest)
    v_marg = v_cond + sum(abs(h[i]) ** 2 * ic.powers[i] for i in senders)
    y = signal + interference
    llr = (
        math.log(v_marg / v_cond)
        - np.abs(interference) ** 2 / v_cond
        + np.abs(y) ** 2 / v_marg
    ) / LN2
    return float(llr.mean()), float(llr.std(ddof=1) / math.sqrt(samples))


# -- DMIC exact enumeration -----------------------------------------------------


def _entropy_of_marginal(joint: np.ndarray, keep: list[int]) -> np.ndarray:
    drop = tuple(ax for ax in range(1, joint.ndim) if ax not in keep)
    m = joint.sum(axis=drop) if drop else joint
    m = m.reshape(m.shape[0], -1)
    safe = np.where(m > PROB_FLOOR, m, 1.0)
    return -(np.where(m > PROB_FLOOR, m * np.log2(safe), 0.0)).sum(axis=1)


def _cond_mi_batch(tensor: np.ndarray, pmfs: list[np.ndarray], q: MiQuery) -> np.ndarray:
    """``I[X_S; Y | X_T]`` for a batch of product input distributions.

    ``tensor`` is indexed ``[x_1, .., x_k, y]``; ``pmfs[i]`` has shape ``(B, |X_i|)``.
    """
    k = len(pmfs)
    batch = pmfs[0].shape[0]
    px = pmfs[0]
    for i in range(1, k):
        px = px[..., None] * pmfs[i].reshape((batch,) + (1,) * i + (-1,))
    joint = px[..., None] * tensor[None]
    s_ax = [i + 1 for i in sorted(q.senders)]
    t_ax = [i + 1 for i in sorted(q.given)]
    y_ax = [k + 1]
    val = (
        _entropy_of_marginal(joint, s_ax + t_ax)
        + _entropy_of_marginal(joint, t_ax + y_ax)
        - _entropy_of_marginal(joint, s_ax + t_ax + y_ax)
        - _entropy_of_marginal(joint, t_ax)
    )
    return val


def dmic_mi_batch(ch: Dmic, pmfs: list[np.ndarray], q: MiQuery) -> np.ndarray:
    """Vectorized ``dmic_mi`` for a degenerate Q over a batch of input pmfs.

    ``pmfs[i]`` has shape ``(B, |X_i|)``; returns shape ``(B,)``.
    """
    q.check(ch.k)
    tensor = ch.tensor(q.receiver)
    batch = pmfs[0].shape[0]
    step = max(1, _BATCH_ELEMS // tensor.size)
    out = np.empty(batch)
    for lo in range(0, batch, step):
        out[lo:lo + step] = _cond_mi_batch(tensor, [p[lo:lo + step] for p in pmfs], q)
    return out


def dmic_mi(ch: Dmic, dist: ProductDistribution, q: MiQuery) -> float:
    """Exact ``I[X_S; Y_j | X_T, Q]`` by enumeration over all (q, x, y_j).

    Time sharing enters as the weighted average over q of the per-q value.
    """
    q.check(ch.k)
    check_distribution_matches(ch, dist)
    tensor = ch.tensor(q.receiver)
    total = 0.0
    for w, per_q in zip(dist.q_weights, dist.pmfs):
        if w == 0:
            continue
        total += w * float(_cond_mi_batch(tensor, [p[None, :] for p in per_q], q)[0])
    return max(total, 0.0)


# -- unified access -------------------------------------------------------------


MiFunction = Callable[[MiQuery], float]


def mi_evaluator(channel, dist: ProductDistribution | None = None) -> MiFunction:
    """Cached ``query -> bits`` function for a Gaussian IC or a (Dmic, distribution)."""
    cache: dict[MiQuery, float] = {}
    if isinstance(channel, GaussianIC):
        if dist is not None:
            raise ValidationError("Gaussian channels take Gaussian inputs; no distribution allowed")

        def raw(q):
            return gaussian_mi(channel, q)
    elif isinstance(channel, Dmic):
        if dist is None:
            raise ValidationError("a Dmic needs an input distribution")
        check_distribution_matches(channel, dist)

        def raw(q):
            return dmic_mi(channel, dist, q)
    else:
        raise TypeError(f"unsupported channel type {type(channel).__name__}")

    def mi(q: MiQuery) -> float:
        if q not in cache:
            cache[q] = raw(q)
        return cache[q]

    mi.k = channel.k
    return mi
