"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``. Compile time of the numba kernels is
excluded from the timed sections by a warm-up call.
"""

import sys
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

from iqp import (Cyclotomic, Hadamard, MixedCircuit, PhaseGate, Polynomial3,
                 amplitude_direct, amplitude_statevector, gap_gray, gap_naive, ising_partition, ngap)
from iqp.compile import compile_ising, compile_poly, gadgetize
from iqp.experiments import (PipelineConfig, RecoveryConfig, lemma9_sum, moment4, pipeline,
                             pz_fraction, recover_gap)
from iqp.rng import gen_ising, gen_poly3, stream

SEED = 20240


def report(k: int, ok: bool, detail: str, terminal=None) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    if terminal is not None:
        terminal.write_line("")
        terminal.write_line(line)
    else:
        print(line, flush=True)


def warm_up():
    f = Polynomial3(8, {(0, 1, 7)}, {(2, 3)}, {4})
    gap_gray(f), gap_naive(f), amplitude_direct(compile_poly(f))
    inst = gen_ising(8, 0)
    ising_partition(inst, "float"), ising_partition(inst, "exact")


def all_poly3(n):
    tri = list(combinations(range(n), 3))
    pairs = list(combinations(range(n), 2))
    for bits in product((0, 1), repeat=len(tri) + len(pairs) + n):
        it = iter(bits)
        yield Polynomial3(n, [t for t in tri if next(it)], [p for p in pairs if next(it)],
                          [i for i in range(n) if next(it)])


def random_mixed(n, m, rng):
    """Random diagonal gates interleaved with exactly m intermediate Hadamards."""
    ops = []
    for _ in range(int(rng.integers(0, 3 * n + 1))):
        k = int(rng.integers(1, min(3, n) + 1))
        q = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        den = int(rng.choice([1, 2, 4, 8]))
        ops.append(PhaseGate(q, int(rng.integers(0, 2 * den)), den))
    for _ in range(m):
        ops.insert(int(rng.integers(0, len(ops) + 1)), Hadamard(int(rng.integers(0, n))))
    return MixedCircuit(n, ops)


# ---------------------------------------------------------------------------

def criterion_1():
    warm_up()
    t0 = time.perf_counter()
    bad = 0
    worst = 0.0
    polys = list(all_poly3(3))
    for f in polys:
        g = gap_naive(f)
        a = amplitude_direct(compile_poly(f))
        sv = amplitude_statevector(compile_poly(f)) * 8
        worst = max(worst, abs(sv - g))
        if not (g == gap_gray(f) and a.exact == Cyclotomic.from_int(g) and int(a.exact) == g):
            bad += 1
    dt = time.perf_counter() - t0
    ok = len(polys) == 128 and bad == 0 and worst <= 1e-10 and dt < 1
    return ok, f"{len(polys)} polynomials, {bad} mismatches, float leg err {worst:.2e}, {dt:.2f}s"


def criterion_2():
    warm_up()
    t0 = time.perf_counter()
    worst_abs = worst_rel = 0.0
    exact_bad = 0
    for i in range(500):
        n = 1 + i % 10
        inst = gen_ising(n, SEED, i)
        c = compile_ising(inst)
        amp = amplitude_direct(c)
        zf = ising_partition(inst, "float").value
        ze = ising_partition(inst, "exact").exact
        worst_abs = max(worst_abs, abs(amp.value * 2 ** n - zf))
        # relative to |Z|, floored at 1 since Z can vanish exactly
        worst_rel = max(worst_rel, abs(complex(ze) - zf) / max(abs(zf), 1.0))
        exact_bad += amp.exact != ze
    dt = time.perf_counter() - t0
    ok = worst_abs <= 1e-10 and worst_rel <= 1e-9 and exact_bad == 0 and dt < 30
    return ok, (f"500 instances n<=10: |2^n amp - Z| max {worst_abs:.2e}, exact/float rel {worst_rel:.2e}, "
                f"cyclotomic mismatches {exact_bad}, {dt:.1f}s")


def criterion_3():
    warm_up()
    t0 = time.perf_counter()
    parts = []
    ok = moment4("poly3", 1).value == 2 and moment4("poly3", 2).value == Fraction(5, 2)
    parts.append(f"exact M(1)={moment4('poly3', 1).value} M(2)={moment4('poly3', 2).value}")
    for kind in ("poly3", "ising"):
        for n in (16, 20):
            r = moment4(kind, n, "mc", trials=10_000, seed=SEED)
            ok &= r.check.passed
            parts.append(f"{kind} n={n} M={r.value:.4f}+-{r.stderr:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    return ok, "; ".join(parts) + f"; {dt:.0f}s"


def criterion_4():
    warm_up()
    t0 = time.perf_counter()
    e1, e2 = pz_fraction("poly3", 1, 0.5).value, pz_fraction("poly3", 2, 0.5).value
    ok = e1 == Fraction(1, 2) and e2 == Fraction(5, 8)
    parts = [f"exact {e1}, {e2}"]
    for kind in ("poly3", "ising"):
        r = pz_fraction(kind, 16, 0.5, "mc", trials=10_000, seed=SEED + 1)
        bound = 1 / 12 - 3 * r.stderr
        ok &= r.value >= bound
        parts.append(f"{kind} n=16 frac={r.value:.4f} (>= {bound:.4f})")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    return ok, "; ".join(parts) + f"; {dt:.0f}s"


def criterion_5():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for r, s in ((2, 2), (4, 8)):
        for n in (1, 2, 3, 4):
            res = lemma9_sum(r, s, n)
            ok &= res.count <= 3 * 2 ** (2 * n)
            parts.append(f"({r},{s},{n})={res.count}")
    ok &= lemma9_sum(2, 2, 1).count == 8
    dt = time.perf_counter() - t0
    ok &= dt < 60
    return ok, " ".join(parts) + f"; {dt:.1f}s"


def criterion_6():
    warm_up()
    t0 = time.perf_counter()
    parts = []
    ok = True
    for noise in ("random", "adversarial"):
        hits, iters = 0, 0
        for i in range(100):
            f = gen_poly3(12, SEED, i)
            r = recover_gap(f, RecoveryConfig(0.4, noise), seed=SEED, substream=i)
            hits += r.ngap == ngap(f)
            iters = max(iters, r.iterations)
        ok &= hits == 100
        parts.append(f"{noise}: {hits}/100 (max iters {iters})")
    calls = max(recover_gap(gen_poly3(12, SEED, i), RecoveryConfig(0.0, "zero")).oracle_calls
                for i in range(100))
    ok &= calls <= 3
    parts.append(f"exact oracle max calls {calls}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    return ok, "; ".join(parts) + f"; {dt:.1f}s"


def criterion_7():
    warm_up()
    t0 = time.perf_counter()
    ok = True
    parts = []
    cfg = PipelineConfig(alpha=0.5, p=1 / 12, eps=1 / 192, delta=1 / 24, trials=2000, seed=SEED)
    for family in ("poly3", "ising"):
        for model in ("uniform_mix", "adversarial_shift"):
            rep = pipeline(family, 12, model, 1 / 192, cfg)
            ok &= rep.passed
            s = rep.summary
            parts.append(f"{family}/{model}: fail={s['additive_failure_fraction']:.4f} "
                         f"succ={s['multiplicative_success_fraction']:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 900
    return ok, "; ".join(parts) + f"; {dt:.0f}s"


def criterion_8():
    t0 = time.perf_counter()
    rng = stream(SEED, 8)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(0, 5))
        u = random_mixed(n, m, rng)
        r = gadgetize(u)
        assert r.m == m
        worst = max(worst, abs(amplitude_statevector(u) - r.scale * amplitude_direct(r.circuit).value))
    identity_ok = worst <= 1e-10
    tht = gadgetize(MixedCircuit(1, [PhaseGate((0,), 1, 4), Hadamard(0), PhaseGate((0,), 1, 4)]))
    a = amplitude_direct(tht.circuit)
    half_ok = a.exact == Cyclotomic.from_int(2)  # <00|C|00> = 2/4
    dt = time.perf_counter() - t0
    ok = identity_ok and half_ok and dt < 30
    return ok, (f"200 circuits identity err {worst:.2e} ({'ok' if identity_ok else 'violated'}); "
                f"T.H.T <00|C|00> = {complex(a):.6f} vs 1/2 ({'ok' if half_ok else 'differs'}); {dt:.1f}s")


def criterion_9():
    warm_up()
    f26 = gen_poly3(26, SEED)
    t0 = time.perf_counter()
    gap_gray(f26)
    t26 = time.perf_counter() - t0
    f22 = gen_poly3(22, SEED)
    t0 = time.perf_counter()
    g1 = gap_gray(f22)
    tg = time.perf_counter() - t0
    t0 = time.perf_counter()
    g2 = gap_naive(f22)
    tn = time.perf_counter() - t0
    speedup = tn / tg
    ok = t26 < 60 and speedup >= 20 and g1 == g2
    return ok, f"n=26 {t26:.2f}s; n=22 gray {tg:.3f}s naive {tn:.2f}s speedup {speedup:.0f}x"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k, request):
    ok, detail = CRITERIA[k - 1]()
    report(k, ok, detail, request.config.pluginmanager.getplugin("terminalreporter"))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        report(k, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
