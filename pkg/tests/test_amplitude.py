import cmath
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iqp import (CCZ, CZ, LIMITS, T, Hadamard, IqpCircuit, IsingInstance, MixedCircuit,
                 Polynomial3, ResourceLimitError, amplitude_direct, amplitude_statevector,
                 gap_gray, gap_naive, ising_partition, ngap, output_distribution)
from iqp.compile import compile_poly
from iqp.rng import gen_ising, gen_poly3, stream

from strategies import iqp_circuit, ising, poly3


def brute_gap(f):
    return sum(1 - 2 * f(x) for x in range(1 << f.n))


def brute_partition(inst):
    om = cmath.exp(1j * math.pi / inst.t)
    total = 0
    for z in product((1, -1), repeat=inst.n):
        e = sum(w * z[i] * z[j] for (i, j), w in inst.edges.items())
        e += sum(v * z[k] for k, v in enumerate(inst.vertices))
        total += om ** e
    return total


def random_circuit(n, rng, max_gates=10):
    from iqp import PhaseGate
    gates = []
    for _ in range(rng.integers(0, max_gates + 1)):
        k = int(rng.integers(1, min(3, n) + 1))
        q = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        den = int(rng.choice([1, 2, 4, 8]))
        gates.append(PhaseGate(q, int(rng.integers(0, 2 * den)), den))
    return IqpCircuit(n, gates, int(rng.integers(0, 1 << n)), int(rng.integers(0, 16)))


# gap ------------------------------------------------------------------------

@pytest.mark.parametrize("f, want", [
    (Polynomial3(2), 4),
    (Polynomial3(1, linear={0}), 0),
    (Polynomial3(2, quadratic={(0, 1)}), 2),
    (Polynomial3(3, cubic={(0, 1, 2)}), 6),
])
def test_gap_examples(f, want):
    assert gap_naive(f) == want
    assert gap_gray(f) == want


def test_gap_zero_polynomial_n20():
    assert gap_gray(Polynomial3(20)) == 1 << 20


@given(poly3(1, 9))
def test_gap_backends_agree_with_brute_force(f):
    assert gap_gray(f) == gap_naive(f) == brute_gap(f)


def test_gap_gray_vs_naive_seeded_n16():
    for i in range(1000):
        f = gen_poly3(16, 2024, i)
        assert gap_gray(f) == gap_naive(f), i


@pytest.mark.parametrize("n", [7, 8, 13, 17])
def test_gap_gray_segment_boundaries(n):
    # sizes around the packed-lane and segment thresholds
    for i in range(20):
        f = gen_poly3(n, 5, i)
        assert gap_gray(f) == gap_naive(f)


def test_ngap_fraction():
    assert ngap(Polynomial3(2, quadratic={(0, 1)})) == Fraction(1, 2)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_parseval_over_linear_parts(n):
    # sum over all 2^n linear parts of gap^2 is 4^n (output probabilities sum to 1)
    base = gen_poly3(n, 11)
    total = 0
    for lin in range(1 << n):
        f = Polynomial3(n, base.cubic, base.quadratic, {i for i in range(n) if (lin >> i) & 1})
        total += gap_gray(f) ** 2
    assert total == 4 ** n


def test_gap_resource_limit(monkeypatch):
    monkeypatch.setattr(LIMITS, "gap", 10)
    with pytest.raises(ResourceLimitError):
        gap_gray(Polynomial3(11))


# Ising ------------------------------------------------------------------------

def test_partition_examples():
    z0 = IsingInstance(3, {(0, 1): 0, (0, 2): 0, (1, 2): 0}, (0, 0, 0))
    assert ising_partition(z0, "exact").exact == 8
    assert ising_partition(z0, "float").value == pytest.approx(8)
    z1 = IsingInstance(2, {(0, 1): 1}, (0, 0))
    want = 4 * math.cos(math.pi / 8)
    assert abs(ising_partition(z1, "float").value - want) < 1e-12
    assert abs(complex(ising_partition(z1, "exact").exact) - want) < 1e-12
    z2 = IsingInstance(1, {}, (4,))
    assert ising_partition(z2, "exact").exact == 0


@pytest.mark.parametrize("t", [1, 2, 4, 8])
def test_partition_other_temperatures(t):
    rng = stream(3, t)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        edges = {(i, j): int(rng.integers(0, 2 * t)) for i in range(n) for j in range(i + 1, n)}
        inst = IsingInstance(n, edges, [int(x) for x in rng.integers(0, 2 * t, size=n)], t)
        want = brute_partition(inst)
        assert abs(complex(ising_partition(inst, "exact").exact) - want) < 1e-9
        assert abs(ising_partition(inst, "float").value - want) < 1e-9


def test_partition_exact_rejects_odd_t():
    inst = IsingInstance(1, {}, (1,), 3)
    with pytest.raises(ValueError):
        ising_partition(inst, "exact")
    assert abs(ising_partition(inst, "float").value - brute_partition(inst)) < 1e-12


@given(ising(1, 7))
def test_partition_vs_brute(inst):
    want = brute_partition(inst)
    assert abs(ising_partition(inst, "float").value - want) < 1e-9
    assert abs(complex(ising_partition(inst, "exact").exact) - want) < 1e-9


def test_partition_exact_vs_float_large():
    for i in range(5):
        inst = gen_ising(18, 9, i)
        ex = complex(ising_partition(inst, "exact").exact)
        fl = ising_partition(inst, "float").value
        assert abs(ex - fl) <= 1e-9 * max(abs(ex), 1.0)


def test_partition_float_deterministic():
    inst = gen_ising(16, 1)
    assert ising_partition(inst).value == ising_partition(inst).value


# circuit amplitudes ------------------------------------------------------------

def test_direct_examples():
    assert amplitude_direct(IqpCircuit(3)).exact == 8
    assert amplitude_direct(IqpCircuit(2, [CZ(0, 1)])).fraction() == Fraction(1, 2)
    assert amplitude_direct(IqpCircuit(3, [CCZ(0, 1, 2)]), "000").fraction() == Fraction(6, 8)


def test_direct_vs_statevector_seeded():
    rng = stream(77)
    for _ in range(200):
        n = int(rng.integers(1, 11))
        c = random_circuit(n, rng)
        y = int(rng.integers(0, 1 << n))
        assert abs(amplitude_direct(c, y).value - amplitude_statevector(c, y)) <= 1e-10


@given(iqp_circuit(1, 6), st.data())
def test_direct_vs_statevector(c, data):
    y = data.draw(st.integers(0, (1 << c.n) - 1))
    assert abs(complex(amplitude_direct(c, y)) - amplitude_statevector(c, y)) <= 1e-10


@given(poly3(1, 7))
def test_poly_backends_agree(f):
    c = compile_poly(f)
    g = gap_gray(f)
    assert amplitude_direct(c).exact == g
    assert abs(amplitude_statevector(c) * 2 ** f.n - g) <= 1e-10


def test_statevector_empty():
    assert amplitude_statevector(IqpCircuit(3)) == pytest.approx(1)


def test_statevector_mixed_t_h_t():
    # implicit H layers around T H T: H T H T H on one qubit
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    t = np.diag([1, cmath.exp(1j * math.pi / 4)])
    want = (h @ t @ h @ t @ h)[0, 0]
    got = amplitude_statevector(MixedCircuit(1, [T(0), Hadamard(0), T(0)]))
    assert abs(got - want) < 1e-12
    assert abs(got - (1 + 2 * cmath.exp(1j * math.pi / 4) - 1j) / (2 * math.sqrt(2))) < 1e-12
    assert abs(abs(got) - math.sqrt(3) / 2) < 1e-12
    # the bare product T H T, without the outer layers, has amplitude 1/sqrt(2)
    assert abs((t @ h @ t)[0, 0] - 1 / math.sqrt(2)) < 1e-12


def test_distribution_examples():
    d = output_distribution(IqpCircuit(3))
    assert d.probs[0] == pytest.approx(1) and d.probs[1:].sum() == pytest.approx(0)
    d = output_distribution(IqpCircuit(1, [T(0)]))
    assert d.probs == pytest.approx([math.cos(math.pi / 8) ** 2, math.sin(math.pi / 8) ** 2], abs=1e-12)


def test_distribution_seeded():
    rng = stream(8)
    for _ in range(50):
        n = int(rng.integers(1, 11))
        c = random_circuit(n, rng)
        d = output_distribution(c)
        assert abs(d.probs.sum() - 1) <= 1e-9
        assert d.validate() == []
        sv = np.abs(np.array([amplitude_statevector(c, y) for y in range(1 << n)])) ** 2
        assert np.max(np.abs(sv - d.probs)) <= 1e-10


def test_statevector_limit(monkeypatch):
    monkeypatch.setattr(LIMITS, "statevector", 4)
    with pytest.raises(ResourceLimitError):
        amplitude_statevector(IqpCircuit(5))


def test_results_independent_of_thread_count():
    import os
    import subprocess
    import sys
    code = ("from iqp import gap_gray, ising_partition, amplitude_direct\n"
            "from iqp.compile import compile_poly\n"
            "from iqp.rng import gen_ising, gen_poly3\n"
            "f = gen_poly3(20, 1); i = gen_ising(17, 1)\n"
            "print(gap_gray(f), repr(ising_partition(i).value), ising_partition(i, 'exact').exact,"
            " amplitude_direct(compile_poly(gen_poly3(16, 2))).exact)\n")
    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
