"""Seeded instance generators.

Every draw comes from ``stream(seed, substream)``: a Philox counter-based
generator keyed by ``SeedSequence(seed, spawn_key=(substream,))``. Trial ``i``
of an experiment uses substream ``i`` and can be regenerated on its own.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .core import IsingInstance, Polynomial3

ALGORITHM = "philox4x64-10/seedsequence"


def stream(seed: int, substream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(substream),))
    return np.random.Generator(np.random.Philox(ss))


def _rng(seed, substream: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed, substream)


def gen_xmask(n: int, seed, substream: int = 0) -> int:
    """Uniform n-bit string (bit i = qubit i)."""
    bits = _rng(seed, substream).integers(0, 2, size=n)
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def gen_poly3(n: int, seed, substream: int = 0) -> Polynomial3:
    """Every cubic, quadratic and linear coefficient an independent fair bit.

    The linear part is drawn last with ``gen_xmask``, i.e. a uniform X mask on
    top of a random degree-2/3 part.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed, substream)
    tri = list(combinations(range(n), 3))
    pairs = list(combinations(range(n), 2))
    a = rng.integers(0, 2, size=len(tri))
    b = rng.integers(0, 2, size=len(pairs))
    mask = gen_xmask(n, rng)
    return Polynomial3(n,
                       [t for t, bit in zip(tri, a) if bit],
                       [p for p, bit in zip(pairs, b) if bit],
                       [i for i in range(n) if (mask >> i) & 1])


def gen_ising(n: int, seed, substream: int = 0, edge_range: int = 8) -> IsingInstance:
    """Vertex weights uniform on {0..7}; edge weights uniform on {0..edge_range-1}; t = 8."""
    if n < 1:
        raise ValueError("n must be positive")
    if edge_range not in (4, 8):
        raise ValueError("edge_range must be 4 or 8")
    rng = _rng(seed, substream)
    pairs = list(combinations(range(n), 2))
    w = rng.integers(0, edge_range, size=len(pairs))
    v = rng.integers(0, 8, size=n)
    return IsingInstance(n, {p: int(x) for p, x in zip(pairs, w)}, [int(x) for x in v], 8)
