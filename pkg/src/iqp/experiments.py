"""Numerical checks of the anticoncentration bounds and the approximation pipeline.

Instantiations used in every report (they are choices, not derived values):

* the unspecified 1/poly(n) estimator accuracy is ``rho = 1/n``;
* the ``1/4 + o(1)`` multiplicative target is ``1/4 + rho * (1 + 1/4)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Union

import numpy as np

from .amplitude import (ResourceLimitError, amplitude_direct, gap_gray, ising_partition,
                        output_distribution)
from .compile import compile_ising, compile_poly
from .core import IsingInstance, Polynomial3, apply_xmask, bits_str
from .rng import ALGORITHM, gen_ising, gen_poly3, gen_xmask, stream
from .sampling import SamplerModel, declared_l1, estimate_prob, l1_distance, realize

SCHEMA = 1
FOURTH_MOMENT_BOUND = 3
INSTANTIATION_NOTES = [
    "rho (the 1/poly(n) estimator accuracy) instantiated as 1/n unless set explicitly",
    "'1/4 + o(1)' multiplicative target instantiated as 1/4 + rho*(1 + 1/4)",
    "Stockmeyer estimation replaced by exact q_y times a seeded factor in [1-rho, 1+rho]",
]


@dataclass(frozen=True)
class BoundCheck:
    """``value`` compared against ``bound`` with a 3-sigma allowance in the favourable direction."""

    name: str
    value: float
    bound: float
    relation: str  # "<=" or ">="
    sigma: float = 0.0
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.relation == "<=":
            ok = self.value <= self.bound + 3 * self.sigma
        elif self.relation == ">=":
            ok = self.value >= self.bound - 3 * self.sigma
        else:
            raise ValueError(f"bad relation {self.relation!r}")
        object.__setattr__(self, "passed", bool(ok))

    def line(self) -> str:
        return (f"{self.name}: value={float(self.value):.6g} {self.relation} bound={float(self.bound):.6g}"
                f" (sigma={self.sigma:.3g}) {'PASS' if self.passed else 'FAIL'}")


@dataclass
class ExperimentReport:
    name: str
    config: dict
    summary: dict
    bounds: list[BoundCheck]
    trials: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    wall_clock_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bounds)

    def to_dict(self, timing: bool = True) -> dict:
        d = {"schema": SCHEMA, "experiment": self.name, "config": self.config,
             "summary": self.summary, "bounds": [asdict(b) for b in self.bounds],
             "notes": self.notes, "trials": self.trials}
        if timing:
            d["wall_clock_s"] = self.wall_clock_s
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, default=_jsonable) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA} experiment={self.name} config={json.dumps(self.config, sort_keys=True, default=_jsonable)}\n")
        if self.trials:
            cols = list(self.trials[0])
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for row in self.trials:
                w.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


# ---------------------------------------------------------------------------
# anticoncentration

EXACT_MAX_N = {"poly3": 3, "ising": 2}


def _all_poly3(n: int):
    tri = list(combinations(range(n), 3))
    pairs = list(combinations(range(n), 2))
    for bits in product((0, 1), repeat=len(tri) + len(pairs) + n):
        a = bits[:len(tri)]
        b = bits[len(tri):len(tri) + len(pairs)]
        c = bits[len(tri) + len(pairs):]
        yield Polynomial3(n, [t for t, x in zip(tri, a) if x], [p for p, x in zip(pairs, b) if x],
                          [i for i, x in enumerate(c) if x])


def _all_ising(n: int, edge_range: int = 8):
    pairs = list(combinations(range(n), 2))
    for w in product(range(edge_range), repeat=len(pairs)):
        for v in product(range(8), repeat=n):
            yield IsingInstance(n, dict(zip(pairs, w)), v, 8)


def _exact_guard(kind: str, n: int) -> None:
    if kind not in EXACT_MAX_N:
        raise ValueError(f"unknown family {kind!r}")
    if n > EXACT_MAX_N[kind]:
        raise ResourceLimitError(f"exact enumeration of {kind} limited to n <= {EXACT_MAX_N[kind]}")


def sample_normalized(kind: str, n: int, trials: int, seed: int, edge_range: int = 8) -> np.ndarray:
    """2**n |<0|C|0>|**2 for ``trials`` random circuits; trial i uses substream i."""
    out = np.empty(trials)
    for i in range(trials):
        if kind == "poly3":
            g = gap_gray(gen_poly3(n, seed, i))
            out[i] = g * g / 2.0 ** n
        elif kind == "ising":
            z = ising_partition(gen_ising(n, seed, i, edge_range)).value
            out[i] = abs(z) ** 2 / 2.0 ** n
        else:
            raise ValueError(f"unknown family {kind!r}")
    return out


@dataclass(frozen=True)
class StatResult:
    value: Union[float, Fraction]
    stderr: float
    samples: int
    check: BoundCheck


def moment4(kind: str, n: int, mode: str = "exact", trials: int = 10_000, seed: int = 0,
            edge_range: int = 8, samples: Optional[np.ndarray] = None) -> StatResult:
    """Normalized fourth moment M = 2**(2n) E|<0|C|0>|**4, compared against 3."""
    if mode == "exact":
        _exact_guard(kind, n)
        if kind == "poly3":
            gaps = [gap_gray(f) for f in _all_poly3(n)]
            M = Fraction(sum(g ** 4 for g in gaps), len(gaps) * 4 ** n)
        else:
            zs = [ising_partition(inst, "exact").value for inst in _all_ising(n, edge_range)]
            M = float(np.mean(np.abs(zs) ** 4)) / 4 ** n
        return StatResult(M, 0.0, len(gaps) if kind == "poly3" else len(zs),
                          BoundCheck(f"moment4[{kind},n={n}]", float(M), FOURTH_MOMENT_BOUND, "<="))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    r = samples if samples is not None else sample_normalized(kind, n, trials, seed, edge_range)
    x = r ** 2
    M = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(len(x)))
    return StatResult(M, se, len(x), BoundCheck(f"moment4[{kind},n={n}]", M, FOURTH_MOMENT_BOUND, "<=", se))


def pz_fraction(kind: str, n: int, alpha: float = 0.5, mode: str = "exact", trials: int = 10_000,
                seed: int = 0, edge_range: int = 8, samples: Optional[np.ndarray] = None) -> StatResult:
    """Pr[|<0|C|0>|**2 >= alpha 2**-n], compared against the Paley-Zygmund bound (1-alpha)**2/3."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    a = Fraction(alpha)
    bound = float((1 - a) ** 2 / 3)
    name = f"pz[{kind},n={n},alpha={alpha}]"
    if mode == "exact":
        _exact_guard(kind, n)
        if kind == "poly3":
            gaps = [gap_gray(f) for f in _all_poly3(n)]
            frac = Fraction(sum(g * g >= a * 2 ** n for g in gaps), len(gaps))
            total = len(gaps)
        else:
            zs = [ising_partition(inst, "exact").value for inst in _all_ising(n, edge_range)]
            frac = float(np.mean(np.abs(zs) ** 2 / 2 ** n >= alpha))
            total = len(zs)
        return StatResult(frac, 0.0, total, BoundCheck(name, float(frac), bound, ">="))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    r = samples if samples is not None else sample_normalized(kind, n, trials, seed, edge_range)
    f = float(np.mean(r >= alpha))
    se = math.sqrt(f * (1 - f) / len(r))
    return StatResult(f, se, len(r), BoundCheck(name, f, bound, ">=", se))


# ---------------------------------------------------------------------------
# counting bound behind the fourth-moment estimate

@dataclass(frozen=True)
class Lemma9Result:
    count: int
    bound: int
    passed: bool


def lemma9_sum(r: int, s: int, n: int) -> Lemma9Result:
    """Count quadruples (w, x, y, z) of n-bit strings with

    r | w_i w_j + x_i x_j - y_i y_j - z_i z_j  for all i < j, and
    s | w_k + x_k - y_k - z_k                  for all k,

    i.e. the terms whose averaged root-of-unity factors do not vanish.
    """
    if r < 2 or s < 2 or (s == 2 and r != 2):
        raise ValueError(f"need r, s >= 2 and r = 2 whenever s = 2; got r={r}, s={s}")
    if not 1 <= n <= 5:
        raise ResourceLimitError("lemma9_sum enumerates 2**(4n) quadruples; n must be in [1, 5]")
    idx = np.arange(1 << (4 * n), dtype=np.int64)
    full = (1 << n) - 1
    w, x, y, z = (idx & full, (idx >> n) & full, (idx >> 2 * n) & full, (idx >> 3 * n) & full)
    bit = lambda a, i: (a >> i) & 1  # noqa: E731
    ok = np.ones(len(idx), dtype=bool)
    for k in range(n):
        ok &= (bit(w, k) + bit(x, k) - bit(y, k) - bit(z, k)) % s == 0
    for i, j in combinations(range(n), 2):
        t = (bit(w, i) * bit(w, j) + bit(x, i) * bit(x, j)
             - bit(y, i) * bit(y, j) - bit(z, i) * bit(z, j))
        ok &= t % r == 0
    count = int(ok.sum())
    bound = 3 * 4 ** n
    return Lemma9Result(count, bound, count <= bound)


# ---------------------------------------------------------------------------
# worst-to-average pipeline

@dataclass
class PipelineConfig:
    alpha: float = 0.5
    p: float = 1 / 12
    eps: Optional[float] = None  # default alpha * p / 8
    delta: Optional[float] = None  # default p / 2
    rho: Optional[float] = None  # default 1 / n
    trials: int = 2000
    seed: int = 0
    edge_range: int = 8

    def resolved(self, n: int) -> PipelineConfig:
        c = PipelineConfig(**asdict(self))
        if c.eps is None:
            c.eps = c.alpha * c.p / 8
        if c.delta is None:
            c.delta = c.p / 2
        if c.rho is None:
            c.rho = 1 / n
        if not (0 < c.alpha < 1 and 0 < c.delta < 1):
            raise ValueError("alpha and delta must lie in (0, 1)")
        if not 0 <= c.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        return c


def _draw_base(family: str, n: int, rng, edge_range: int):
    if family == "poly3":
        f = gen_poly3(n, rng)
        return f, compile_poly(f)
    if family == "ising":
        inst = gen_ising(n, rng, edge_range=edge_range)
        return inst, compile_ising(inst)
    raise ValueError(f"unknown family {family!r}")


def _masked_prob_exact(family: str, inst, circuit, y: int) -> float:
    """|<0|C_y|0>|**2 from the exact amplitude of the masked circuit."""
    amp = amplitude_direct(apply_xmask(circuit, y), 0)
    if family == "poly3":
        g = amp.numerator
        # a uniform X mask on C_f is the same as adding the linear form y.x to f
        shifted = Polynomial3(inst.n, inst.cubic, inst.quadratic,
                              inst.linear ^ {i for i in range(inst.n) if (y >> i) & 1})
        if g != gap_gray(shifted):
            raise AssertionError("X-mask / linear-part identity violated")
        return float(Fraction(g * g, 4 ** inst.n))
    return abs(complex(amp.exact)) ** 2 / 4 ** circuit.n


def pipeline(family: str, n: int, model_kind: str, budget: float,
             cfg: PipelineConfig = PipelineConfig()) -> ExperimentReport:
    """Per trial: random circuit D, uniform y, sampler q near D's distribution, estimate of q_y.

    Checks (a) the additive bound |est - p_y| <= rho p_y + eps (1+rho) / (2**n delta)
    fails on at most a delta fraction, and (b) the fraction of trials that are
    anticoncentrated (p_y >= alpha 2**-n) and within the multiplicative target
    is at least p/2.
    """
    t0 = time.perf_counter()
    c = cfg.resolved(n)
    scale = 2.0 ** n
    mult_target = 0.25 + c.rho * 1.25
    rows = []
    obf_err = 0.0
    for i in range(c.trials):
        rng = stream(c.seed, i)
        inst, D = _draw_base(family, n, rng, c.edge_range)
        y = gen_xmask(n, rng)
        p = output_distribution(D)
        model = SamplerModel.with_budget(model_kind, D, budget, p)
        q = realize(model, p)
        est = estimate_prob(q, y, "oracle", c.rho, rng=rng).value
        py = float(p.probs[y])
        obf_err = max(obf_err, abs(py - _masked_prob_exact(family, inst, D, y)))
        err = abs(est - py)
        add_bound = c.rho * py + c.eps * (1 + c.rho) / (scale * c.delta)
        anti = py >= c.alpha / scale
        rel = err / py if py > 0 else None
        rows.append({"trial": i, "seed": c.seed, "substream": i, "y": bits_str(y, n),
                     "p": py, "q": float(q.probs[y]), "estimate": est, "abs_err": err,
                     "l1": l1_distance(p, q), "declared_l1": declared_l1(model, p),
                     "add_bound": add_bound, "add_ok": bool(err <= add_bound),
                     "anticoncentrated": bool(anti), "rel_err": rel,
                     "mult_ok": bool(anti and rel <= mult_target)})
    N = len(rows)
    fail = sum(not r["add_ok"] for r in rows) / N
    succ = sum(r["mult_ok"] for r in rows) / N
    sd_fail = math.sqrt(fail * (1 - fail) / N)
    sd_succ = math.sqrt(succ * (1 - succ) / N)
    summary = {
        "trials": N,
        "additive_failure_fraction": fail,
        "multiplicative_success_fraction": succ,
        "anticoncentrated_fraction": sum(r["anticoncentrated"] for r in rows) / N,
        "exact_fraction": sum(r["estimate"] == r["p"] for r in rows) / N,
        "max_l1": max(r["l1"] for r in rows),
        "max_l1_excess": max(abs(r["l1"] - r["declared_l1"]) for r in rows),
        "obfuscation_max_abs_err": obf_err,
        "multiplicative_target": mult_target,
    }
    bounds = [BoundCheck("additive_failure_fraction", fail, c.delta, "<=", sd_fail),
              BoundCheck("multiplicative_success_fraction", succ, c.p / 2, ">=", sd_succ)]
    config = {"family": family, "n": n, "model": model_kind, "budget": budget,
              "rng": ALGORITHM, **asdict(c)}
    return ExperimentReport("pipeline", config, summary, bounds, rows, list(INSTANTIATION_NOTES),
                            time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# signed-gap recovery from a multiplicative |ngap(f) - c| oracle

NOISE_MODES = ("zero", "random", "adversarial", "squared")


class RecoveryError(RuntimeError):
    pass


@dataclass
class RecoveryConfig:
    eps: float = 0.4
    noise: str = "random"
    grid_m: Optional[int] = None  # default n + 4
    max_iters: Optional[int] = None  # default 64 n

    def resolved(self, n: int) -> RecoveryConfig:
        c = RecoveryConfig(**asdict(self))
        if c.grid_m is None:
            c.grid_m = n + 4
        if c.max_iters is None:
            c.max_iters = 64 * n
        if c.noise not in NOISE_MODES:
            raise ValueError(f"noise must be one of {NOISE_MODES}")
        if c.grid_m < n:
            raise ValueError("grid_m must be >= n")
        if c.eps < 0:
            raise ValueError("eps must be non-negative")
        return c


@dataclass(frozen=True)
class RecoveryResult:
    ngap: Fraction
    iterations: int
    oracle_calls: int
    trace: list


class _DistanceOracle:
    """Returns (1 + gamma) |target - c| with |gamma| <= eps, and exactly 0 iff c == target.

    All quantities are in grid units of 2**(1-m).
    """

    def __init__(self, target: int, eps: float, noise: str, rng):
        self.target, self.eps, self.noise, self.rng = target, eps, noise, rng
        self.calls = 0

    def _factor(self) -> float:
        if self.noise == "zero":
            return 1.0
        u = self.rng.uniform(-self.eps, self.eps)
        if self.noise == "squared":
            # the squared distance is estimated within eps; its root is then within eps too
            return math.sqrt(1 + u)
        return 1 + u

    def distance(self, c: int, gamma: Optional[float] = None) -> float:
        self.calls += 1
        d = abs(self.target - c)
        if d == 0:
            return 0.0
        return d * (1 + gamma if gamma is not None else self._factor())

    def pair(self, cp: int, cm: int) -> tuple[float, float]:
        if self.noise != "adversarial":
            return self.distance(cp), self.distance(cm)
        # inflate the closer candidate and deflate the farther one
        closer_p = abs(self.target - cp) <= abs(self.target - cm)
        e = self.eps
        return self.distance(cp, e if closer_p else -e), self.distance(cm, -e if closer_p else e)


def _candidates(c: int, d: float, lim: int) -> tuple[int, int]:
    # truncate to the grid and stay inside [-1, 1]
    return (max(-lim, min(lim, round(c + d))), max(-lim, min(lim, round(c - d))))


def _adversarial_gamma(target: int, c: int, eps: float, lim: int) -> float:
    """Sign of gamma that maximizes the distance after the next branch decision."""
    best, best_g = -1.0, eps
    for g in (eps, -eps):
        d = abs(target - c) * (1 + g)
        cp, cm = _candidates(c, d, lim)
        closer_p = abs(target - cp) <= abs(target - cm)
        dp = abs(target - cp) * (1 + (eps if closer_p else -eps))
        dm = abs(target - cm) * (1 + (-eps if closer_p else eps))
        nxt = abs(target - (cp if dp <= dm else cm))
        if nxt > best:
            best, best_g = nxt, g
    return best_g


def recover_gap(f: Polynomial3, cfg: RecoveryConfig = RecoveryConfig(), seed: int = 0,
                substream: int = 0) -> RecoveryResult:
    """Recover the signed ngap(f) by repeated branch-and-shrink queries to a distance oracle.

    From a guess c, query d ~ |ngap - c|, query both c + d and c - d (truncated
    to the grid), keep the one the oracle reports as closer, and stop as soon as
    the oracle certifies a guess with distance 0.
    """
    c_ = cfg.resolved(f.n)
    n, m = f.n, c_.grid_m
    g = gap_gray(f)
    target_f = Fraction(g * 2 ** (m - 1), 2 ** n)
    if target_f.denominator != 1:
        raise ValueError("grid too coarse to represent ngap(f)")
    target = int(target_f)
    lim = 1 << (m - 1)
    oracle = _DistanceOracle(target, c_.eps, c_.noise, stream(seed, substream))
    c = 0
    trace = []
    for it in range(1, c_.max_iters + 1):
        gamma = _adversarial_gamma(target, c, c_.eps, lim) if c_.noise == "adversarial" else None
        d = oracle.distance(c, gamma)
        if d == 0:
            return RecoveryResult(Fraction(c, lim), it, oracle.calls, trace)
        cp, cm = _candidates(c, d, lim)
        dp, dm = oracle.pair(cp, cm)
        chosen = cp if dp <= dm else cm
        trace.append({"c": c, "d": d, "c_plus": cp, "c_minus": cm, "d_plus": dp,
                      "d_minus": dm, "chosen": chosen})
        if dp == 0 or dm == 0:
            c = cp if dp == 0 else cm
            return RecoveryResult(Fraction(c, lim), it, oracle.calls, trace)
        c = chosen
    raise RecoveryError(f"no certified guess after {c_.max_iters} iterations "
                        f"(eps={c_.eps}, noise={c_.noise})")


@dataclass(frozen=True)
class BridgeRecord:
    """Squared-value error vs absolute-value error for an estimate z of |ngap|."""

    ngap: float
    z: float
    squared_rel_err: float
    abs_rel_err: float
    holds: bool


def square_bridge(z: float, f: Union[Polynomial3, Fraction, float]) -> BridgeRecord:
    """Check |ngap^2 - z^2| <= e ngap^2  =>  ||ngap| - z| <= e |ngap| at e = the observed squared error."""
    if z < 0:
        raise ValueError("z must be non-negative")
    g = float(Fraction(gap_gray(f), 2 ** f.n)) if isinstance(f, Polynomial3) else float(f)
    a = abs(g)
    if a == 0:
        # the premise only holds for z = 0, where the conclusion holds too
        return BridgeRecord(g, z, 0.0 if z == 0 else math.inf, 0.0 if z == 0 else math.inf, True)
    sq = abs(g * g - z * z) / (g * g)
    ab = abs(a - z) / a
    return BridgeRecord(g, z, sq, ab, ab <= sq * (1 + 1e-12) + 1e-15)
