"""Amplitude backends and output distributions.

Three routes compute the same quantities independently:

* ``gap_naive`` / ``gap_gray`` count zeros minus ones of an F2 polynomial;
* ``amplitude_direct`` sums the diagonal phases of an IQP circuit exactly in
  Z[zeta_16], and ``ising_partition`` enumerates spin configurations;
* ``amplitude_statevector`` applies gates one by one to a dense state.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from . import _kernels
from .core import (BitsLike, IqpCircuit, IsingInstance, MixedCircuit, PhaseGate,
                   Polynomial3, Hadamard, as_bits, check)
from .cyclotomic import Cyclotomic

EXACT_T = (1, 2, 4, 8)


class ResourceLimitError(RuntimeError):
    pass


@dataclass
class Limits:
    """Largest n each backend accepts."""

    gap: int = 30
    partition_float: int = 26
    partition_exact: int = 24
    direct: int = 26
    statevector: int = 22
    distribution: int = 22


LIMITS = Limits()


def _guard(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise ResourceLimitError(f"{what}: n={n} exceeds the configured limit {cap}")


@dataclass(frozen=True)
class AmplitudeValue:
    """An amplitude ``exact / 2**n`` and its complex evaluation ``value``.

    ``exact`` is an int (a gap), a Cyclotomic, or None when only a float exists.
    """

    exact: Union[int, Cyclotomic, None]
    value: complex
    n: int

    @property
    def numerator(self) -> int:
        """Integer numerator over 2**n; raises when the exact value is not rational."""
        return int(self.exact)

    def fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.n)

    def __complex__(self) -> complex:
        return complex(self.value)

    def __abs__(self) -> float:
        return abs(self.value)


def _from_exact(exact: Cyclotomic, n: int) -> AmplitudeValue:
    return AmplitudeValue(exact, complex(exact) / (1 << n), n)


@dataclass(frozen=True)
class Distribution:
    n: int
    probs: np.ndarray

    def validate(self, tol: float = 1e-9) -> list[str]:
        out = []
        if self.probs.shape != (1 << self.n,):
            out.append(f"probs: shape {self.probs.shape}, expected ({1 << self.n},)")
        if np.any(self.probs < 0):
            out.append("probs: negative entries")
        if abs(float(self.probs.sum()) - 1.0) > tol:
            out.append(f"probs: sums to {self.probs.sum()!r}")
        return out


# ---------------------------------------------------------------------------
# gap(f)

def gap_naive(f: Polynomial3, chunk_log2: int = 20) -> int:
    """gap(f) by evaluating f on every input."""
    check(f)
    n = f.n
    _guard(n, LIMITS.gap, "gap_naive")
    monos = f.monomials()
    step = 1 << min(n, chunk_log2)
    zeros = 0
    for start in range(0, 1 << n, step):
        x = np.arange(start, start + step, dtype=np.int64)
        bits = [((x >> i) & 1).astype(np.uint8) for i in range(n)]
        val = np.zeros(step, dtype=np.uint8)
        for mono in monos:
            term = bits[mono[0]]
            for i in mono[1:]:
                term = term & bits[i]
            val ^= term
        zeros += step - int(val.sum(dtype=np.int64))
    return 2 * zeros - (1 << n)


@lru_cache(maxsize=None)
def _low_words(low: int) -> np.ndarray:
    """Truth table over the packed lanes of each product of low variables."""
    lanes = 1 << low
    return np.array([sum(1 << t for t in range(lanes) if t & lm == lm) for lm in range(lanes)],
                    dtype=np.uint64)


def _monomial_rows(f: Polynomial3) -> np.ndarray:
    """Monomials as rows of 3 sorted indices, padded with -1."""
    rows = np.full((len(f.cubic) + len(f.quadratic) + len(f.linear), 3), -1, dtype=np.int64)
    a, b = len(f.cubic), len(f.cubic) + len(f.quadratic)
    if f.cubic:
        rows[:a] = sorted(f.cubic)
    if f.quadratic:
        rows[a:b, :2] = sorted(f.quadratic)
    if f.linear:
        rows[b:, 0] = sorted(f.linear)
    return rows


def _gray_tables(f: Polynomial3, low: int):
    """Split each monomial into a packed low-variable truth table and its high variables."""
    H = f.n - low
    M = _monomial_rows(f)
    real = M >= 0
    is_low = real & (M < low)
    lm = (is_low * np.left_shift(1, np.where(is_low, M, 0))).sum(axis=1)
    low_word = _low_words(low)[lm]
    n_high = (M >= low).sum(axis=1)
    # indices are sorted, so the high variables are the trailing real entries
    first = real.sum(axis=1) - n_high
    cols = np.arange(3)
    take = np.take_along_axis(M, np.minimum(first[:, None] + cols, 2), axis=1)
    high = np.where(cols < n_high[:, None], take - low, -1)

    cub = n_high == 3
    a, b, c = high[cub, 0], high[cub, 1], high[cub, 2]
    w = low_word[cub]
    key = np.concatenate([a, b, c])
    order = np.argsort(key, kind="stable")
    tri_u = np.concatenate([b, a, a])[order]
    tri_w = np.concatenate([c, c, b])[order]
    tri_word = np.concatenate([w, w, w])[order]
    ptr = np.zeros(max(H, 1) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(np.bincount(key, minlength=max(H, 1)))
    if not len(M):
        low_word = np.zeros(1, dtype=np.uint64)
        high = np.full((1, 3), -1, dtype=np.int64)
        n_high = np.zeros(1, dtype=np.int64)
    return (1 << low, low_word, high, n_high, ptr, tri_u.astype(np.int64),
            tri_w.astype(np.int64), tri_word.astype(np.uint64))


# each segment reseeds from scratch, so keep them long relative to the reseed cost
_GAP_SEGMENT_LOG2 = 10


def gap_gray(f: Polynomial3) -> int:
    """gap(f) by Gray-code enumeration with 64-lane bit-parallel evaluation."""
    check(f)
    n = f.n
    _guard(n, LIMITS.gap, "gap_gray")
    low = min(n, 6)
    H = n - low
    tables = _gray_tables(f, low)
    n_seg_log2 = max(0, min(8, H - _GAP_SEGMENT_LOG2))
    return int(_kernels.gap_gray_kernel(H, *tables, n_seg_log2))


def ngap(f: Polynomial3) -> Fraction:
    return Fraction(gap_gray(f), 1 << f.n)


# ---------------------------------------------------------------------------
# Ising partition function

def _ising_arrays(inst: IsingInstance):
    n = inst.n
    W = np.zeros((n, n), dtype=np.int64)
    for (i, j), w in inst.edges.items():
        W[i, j] = W[j, i] = w
    return W, np.asarray(inst.vertices, dtype=np.int64)


def _block_size(n: int, t: int) -> int:
    """Number of spins summed out by table: balances the (2t)**L * 2**L table against 2**(n-L) * n steps."""
    best, best_cost = 0, float(n) * 2 ** n
    for L in range(1, min(n, 6) + 1):
        size = (2 * t) ** L
        if size > 1 << 16:
            break
        cost = size * 2 ** L * L + 2 ** (n - L) * n
        if cost < best_cost:
            best, best_cost = L, cost
    return best


def ising_partition(inst: IsingInstance, mode: str = "float") -> AmplitudeValue:
    """Unnormalized Z(omega) = sum_z omega**(sum w_ij z_i z_j + sum v_k z_k), omega = exp(i*pi/t)."""
    check(inst)
    n, t = inst.n, inst.t
    W, v = _ising_arrays(inst)
    if mode == "exact":
        _guard(n, LIMITS.partition_exact, "ising_partition(exact)")
        if t not in EXACT_T:
            raise ValueError(f"exact mode needs t in {EXACT_T}, got t={t}")
        hist = _kernels.ising_histogram(n, W, v, 2 * t, min(n, 8))
        zhist = np.zeros(16, dtype=np.int64)
        for e, c in enumerate(hist):
            zhist[(e * (8 // t)) % 16] += c
        exact = Cyclotomic.from_histogram(zhist)
        return AmplitudeValue(exact, complex(exact), 0)
    if mode == "float":
        _guard(n, LIMITS.partition_float, "ising_partition(float)")
        table = np.exp(1j * np.pi * np.arange(2 * t) / t)
        sums = _kernels.ising_float_chunks(n, W, v, table, _block_size(n, t))
        return AmplitudeValue(None, complex(_kernels.pairwise_sum(sums)), 0)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# IQP amplitudes

def _gate_arrays(gates) -> tuple[np.ndarray, np.ndarray]:
    masks = np.array([g.mask for g in gates], dtype=np.int64)
    units = np.array([g.units for g in gates], dtype=np.int64)
    return masks, units


def amplitude_direct(circuit: IqpCircuit, y: BitsLike = 0) -> AmplitudeValue:
    """<y|C|0> = 2**-n sum_x (-1)**(x.y') d(x), y' = y xor x_mask, summed exactly."""
    check(circuit)
    n = circuit.n
    _guard(n, LIMITS.direct, "amplitude_direct")
    yprime = as_bits(y, n) ^ circuit.x_mask
    masks, units = _gate_arrays(circuit.gates)
    hist = _kernels.phase_histogram(n, masks, units, yprime, min(n, 8))
    return _from_exact(Cyclotomic.from_histogram(hist).shift(circuit.phase), n)


def _hadamard_all(psi: np.ndarray, n: int) -> np.ndarray:
    for q in range(n):
        psi = _hadamard(psi, n, q)
    return psi


def _hadamard(psi: np.ndarray, n: int, q: int) -> np.ndarray:
    s = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    a, b = s[:, 0, :], s[:, 1, :]
    out = np.empty_like(s)
    out[:, 0, :] = (a + b) / np.sqrt(2)
    out[:, 1, :] = (a - b) / np.sqrt(2)
    return out.reshape(-1)


def _apply_phase(psi: np.ndarray, idx: np.ndarray, g: PhaseGate) -> None:
    m = g.mask
    sel = (idx & m) == m
    psi[sel] *= np.exp(1j * np.pi * g.units / 8)


def statevector(circuit: Union[IqpCircuit, MixedCircuit]) -> np.ndarray:
    """Dense output state C|0...0>."""
    check(circuit)
    n = circuit.n
    _guard(n, LIMITS.statevector, "statevector")
    idx = np.arange(1 << n, dtype=np.int64)
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    psi = _hadamard_all(psi, n)
    ops = circuit.ops if isinstance(circuit, MixedCircuit) else circuit.gates
    for op in ops:
        if isinstance(op, Hadamard):
            psi = _hadamard(psi, n, op.qubit)
        else:
            _apply_phase(psi, idx, op)
    psi = _hadamard_all(psi, n)
    if isinstance(circuit, IqpCircuit):
        psi = psi[idx ^ circuit.x_mask] * np.exp(1j * np.pi * circuit.phase / 8)
    return psi


def amplitude_statevector(circuit: Union[IqpCircuit, MixedCircuit], y: BitsLike = 0) -> complex:
    return complex(statevector(circuit)[as_bits(y, circuit.n)])


def _walsh_hadamard(a: np.ndarray, n: int) -> np.ndarray:
    a = a.copy()
    for q in range(n):
        s = a.reshape(1 << (n - q - 1), 2, 1 << q)
        lo, hi = s[:, 0, :].copy(), s[:, 1, :]
        s[:, 0, :] += hi
        s[:, 1, :] = lo - hi
    return a


def output_distribution(circuit: IqpCircuit) -> Distribution:
    """probs[y] = |<y|C|0>|**2 via a Walsh-Hadamard transform of the diagonal."""
    check(circuit)
    n = circuit.n
    _guard(n, LIMITS.distribution, "output_distribution")
    idx = np.arange(1 << n, dtype=np.int64)
    e = np.zeros(1 << n, dtype=np.int64)
    for g in circuit.gates:
        m = g.mask
        e[(idx & m) == m] += g.units
    d = np.exp(1j * np.pi * (e % 16) / 8)
    amp = _walsh_hadamard(d, n) / (1 << n)
    probs = np.abs(amp[idx ^ circuit.x_mask]) ** 2
    return Distribution(n, probs)
