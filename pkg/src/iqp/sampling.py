"""Sampling, l1 distances, synthetic approximate samplers and probability estimates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .amplitude import Distribution, output_distribution
from .core import BitsLike, IqpCircuit, as_bits, bits_str
from .rng import stream

MODEL_KINDS = ("exact", "uniform_mix", "adversarial_shift")


def sample(d: Distribution, shots: int, seed: int, substream: int = 0,
           rng: Optional[np.random.Generator] = None) -> dict[int, int]:
    """Inverse-CDF sampling; returns {basis index: count} over observed outcomes."""
    cdf = np.cumsum(d.probs)
    cdf /= cdf[-1]
    u = (rng or stream(seed, substream)).random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    counts = np.bincount(idx, minlength=len(cdf))
    return {int(y): int(c) for y, c in enumerate(counts) if c}


def l1_distance(p: Distribution, q: Distribution) -> float:
    if p.n != q.n or p.probs.shape != q.probs.shape:
        raise ValueError("distributions have different shapes")
    return float(np.abs(p.probs - q.probs).sum())


@dataclass(frozen=True)
class SamplerModel:
    """A classical sampler whose output q is a controlled perturbation of the circuit's p.

    ``param`` is the mixing weight for ``uniform_mix`` and the l1 budget for
    ``adversarial_shift``; it is ignored for ``exact``.
    """

    kind: str
    base: IqpCircuit
    param: float = 0.0

    @classmethod
    def with_budget(cls, kind: str, base: IqpCircuit, budget: float,
                    p: Optional[Distribution] = None) -> SamplerModel:
        """Model whose realized distribution sits at l1 distance ``budget`` from p."""
        if kind == "exact":
            return cls("exact", base)
        if kind == "adversarial_shift":
            return cls(kind, base, budget)
        if kind == "uniform_mix":
            p = p if p is not None else output_distribution(base)
            gap = float(np.abs(p.probs - 1.0 / len(p.probs)).sum())
            if budget == 0:
                return cls(kind, base, 0.0)
            if gap == 0 or budget > gap:
                raise ValueError(f"uniform_mix cannot reach l1 budget {budget} (max {gap})")
            return cls(kind, base, budget / gap)
        raise ValueError(f"unknown sampler kind {kind!r}")


def _shift(p: np.ndarray, budget: float) -> np.ndarray:
    q = p.copy()
    take = budget / 2
    if take == 0:
        return q
    recv = int(np.argmin(p))
    order = np.argsort(-p, kind="stable")
    left = take
    for i in order:
        if i == recv:
            continue
        r = min(q[i], left)
        q[i] -= r
        left -= r
        if left <= 0:
            break
    if left > 1e-15:
        raise ValueError(f"l1 budget {budget} exceeds what the distribution allows")
    q[recv] += take
    return q


def realize(model: SamplerModel, p: Optional[Distribution] = None) -> Distribution:
    """The model's output distribution q; ``p`` may be passed to skip recomputing the circuit's."""
    p = p if p is not None else output_distribution(model.base)
    if model.kind == "exact":
        return p
    if model.kind == "uniform_mix":
        eps = model.param
        if not 0 <= eps <= 1:
            raise ValueError(f"mixing weight {eps} outside [0, 1]")
        return Distribution(p.n, (1 - eps) * p.probs + eps / len(p.probs))
    if model.kind == "adversarial_shift":
        if not 0 <= model.param <= 2:
            raise ValueError(f"l1 budget {model.param} outside [0, 2]")
        return Distribution(p.n, _shift(p.probs, model.param))
    raise ValueError(f"unknown sampler kind {model.kind!r}")


def declared_l1(model: SamplerModel, p: Optional[Distribution] = None) -> float:
    """The l1 distance the model promises, computed from its definition rather than from q."""
    if model.kind == "exact":
        return 0.0
    if model.kind == "adversarial_shift":
        return model.param
    p = p if p is not None else output_distribution(model.base)
    return model.param * float(np.abs(1.0 / len(p.probs) - p.probs).sum())


@dataclass(frozen=True)
class ProbEstimate:
    """Estimate of q_y.

    In oracle mode ``relative_bound`` is the guaranteed multiplicative error.
    In empirical mode it is a 5-sigma binomial half-width relative to the
    estimate (inf when y was never observed) and ``shots`` is the sample size.
    """

    y: int
    value: float
    relative_bound: float
    shots: Optional[int] = None


def estimate_prob(model: Union[SamplerModel, Distribution], y: BitsLike, mode: str = "oracle",
                  rel: float = 0.0, shots: int = 0, seed: int = 0, substream: int = 0,
                  p: Optional[Distribution] = None,
                  rng: Optional[np.random.Generator] = None) -> ProbEstimate:
    """Estimate q_y to within a multiplicative factor.

    ``oracle`` reads q_y exactly and multiplies by a seeded factor in
    [1 - rel, 1 + rel]; ``empirical`` counts y in ``shots`` samples from q.
    """
    q = model if isinstance(model, Distribution) else realize(model, p)
    rng = rng or stream(seed, substream)
    y = as_bits(y, q.n)
    qy = float(q.probs[y])
    if mode == "oracle":
        if not 0 <= rel < 1:
            raise ValueError("rel must lie in [0, 1)")
        factor = 1.0 if rel == 0 else 1.0 + rng.uniform(-rel, rel)
        return ProbEstimate(y, qy * factor, rel)
    if mode == "empirical":
        if shots < 1:
            raise ValueError("empirical mode needs shots >= 1")
        count = sample(q, shots, seed, rng=rng).get(y, 0)
        value = count / shots
        bound = 5 * math.sqrt(value * (1 - value) / shots) / value if count else math.inf
        return ProbEstimate(y, value, bound, shots)
    raise ValueError(f"unknown mode {mode!r}")


def markov_fraction(p: Distribution, q: Distribution, eps: float, delta: float) -> float:
    """Fraction of y with |p_y - q_y| >= eps / (2**n delta); at most delta when ||p - q||_1 <= eps."""
    thresh = eps / ((1 << p.n) * delta)
    return float(np.mean(np.abs(p.probs - q.probs) >= thresh))


CSV_FIELDS = ("y", "p", "q", "estimate", "abs_err")


def write_rows_csv(fh, n: int, p: Distribution, q: Distribution, estimates: dict[int, float]) -> None:
    """One row per y: ``y,p,q,estimate,abs_err`` with 17 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for y in range(1 << n):
        est = estimates.get(y, float(q.probs[y]))
        w.writerow([bits_str(y, n), f"{p.probs[y]:.17g}", f"{q.probs[y]:.17g}",
                    f"{est:.17g}", f"{abs(est - p.probs[y]):.17g}"])
