"""Circuit, polynomial and Ising data model.

Conventions used everywhere in the package:

* qubits and variables are 0-based;
* a basis string is an int whose bit ``i`` is qubit ``i``; its text form puts
  qubit ``i`` at character ``i`` (so ``"01"`` means qubit 1 is set);
* phases are exact integers in units of pi/8 (a phase ``k`` is
  ``exp(i*pi*k/8)``), reduced mod 16.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Any, Iterable, Union

PHASE_UNITS = 16  # exp(i*pi*k/8) has period 16 in k
_DENOMINATORS = (1, 2, 4, 8)

BitsLike = Union[int, str, Iterable[int]]


class ValidationError(ValueError):
    """Raised when an operation receives an object failing ``validate``."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


# ---------------------------------------------------------------------------
# basis strings

def as_bits(x: BitsLike, n: int) -> int:
    """Normalize a basis string given as int, text or bit sequence."""
    if isinstance(x, str):
        if len(x) != n or set(x) - {"0", "1"}:
            raise ValueError(f"expected a {n}-character bit string, got {x!r}")
        return sum(1 << i for i, ch in enumerate(x) if ch == "1")
    if isinstance(x, int):
        if x < 0 or x >> n:
            raise ValueError(f"basis index {x} does not fit in {n} bits")
        return x
    bits = list(x)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"expected {n} bits, got {bits!r}")
    return sum(b << i for i, b in enumerate(bits))


def bits_str(x: int, n: int) -> str:
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))


def phase_value(k: int) -> complex:
    """exp(i*pi*k/8) evaluated in floating point."""
    import cmath

    return cmath.exp(1j * cmath.pi * (k % PHASE_UNITS) / 8)


# ---------------------------------------------------------------------------
# gates

@dataclass(frozen=True)
class PhaseGate:
    """Multiplies |x> by exp(i*pi*numerator/denominator) when every support bit is 1."""

    support: tuple[int, ...]
    numerator: int
    denominator: int = 1

    @property
    def units(self) -> int:
        """Phase in pi/8 units."""
        return (self.numerator * (8 // self.denominator)) % PHASE_UNITS

    @property
    def mask(self) -> int:
        return sum(1 << q for q in self.support)

    def normalized(self) -> PhaseGate:
        return replace(self, numerator=self.numerator % (2 * self.denominator))


def Z(q: int) -> PhaseGate:
    return PhaseGate((q,), 1, 1)


def CZ(a: int, b: int) -> PhaseGate:
    return PhaseGate(tuple(sorted((a, b))), 1, 1)


def CCZ(a: int, b: int, c: int) -> PhaseGate:
    return PhaseGate(tuple(sorted((a, b, c))), 1, 1)


def T(q: int) -> PhaseGate:
    return PhaseGate((q,), 1, 4)


def SqrtCZ(a: int, b: int) -> PhaseGate:
    return PhaseGate(tuple(sorted((a, b))), 1, 2)


@dataclass(frozen=True)
class Hadamard:
    qubit: int


# ---------------------------------------------------------------------------
# domain objects

@dataclass(frozen=True)
class Polynomial3:
    """Degree <= 3 polynomial over F2 without constant term."""

    n: int
    cubic: frozenset = frozenset()
    quadratic: frozenset = frozenset()
    linear: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "cubic", frozenset(tuple(t) for t in self.cubic))
        object.__setattr__(self, "quadratic", frozenset(tuple(t) for t in self.quadratic))
        object.__setattr__(self, "linear", frozenset(self.linear))

    def monomials(self) -> list[tuple[int, ...]]:
        """All monomials in canonical (sorted) order."""
        return (sorted(self.cubic) + sorted(self.quadratic)
                + [(i,) for i in sorted(self.linear)])

    def __call__(self, x: BitsLike) -> int:
        x = as_bits(x, self.n)
        v = 0
        for mono in self.monomials():
            v ^= all((x >> i) & 1 for i in mono)
        return v


@dataclass(frozen=True)
class IsingInstance:
    """Complete-graph Ising model at omega = exp(i*pi/t)."""

    n: int
    edges: dict  # (i, j) with i < j -> weight
    vertices: tuple[int, ...]
    t: int = 8

    def __post_init__(self):
        object.__setattr__(self, "edges", {tuple(k): int(w) for k, w in self.edges.items()})
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))

    __hash__ = None  # type: ignore[assignment]

    def weight(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return self.edges.get((i, j), 0)

    def v_prime(self) -> tuple[int, ...]:
        """(-v_k - sum_{j != k} w_jk) mod 2t."""
        m = 2 * self.t
        return tuple((-self.vertices[k] - sum(self.weight(j, k) for j in range(self.n) if j != k)) % m
                     for k in range(self.n))


@dataclass(frozen=True)
class IqpCircuit:
    """H^n . D . H^n followed by X on the bits of ``x_mask``; D = product of ``gates``.

    ``phase`` is a global phase in pi/8 units.
    """

    n: int
    gates: tuple[PhaseGate, ...] = ()
    x_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))


@dataclass(frozen=True)
class MixedCircuit:
    """Diagonal gates interleaved with Hadamards, inside implicit H layers on every qubit."""

    n: int
    ops: tuple[Union[PhaseGate, Hadamard], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def m(self) -> int:
        """Number of intermediate Hadamards."""
        return sum(isinstance(op, Hadamard) for op in self.ops)


# ---------------------------------------------------------------------------
# validation

def _check_index(i: Any, n: int, path: str, out: list[str]) -> None:
    if not isinstance(i, int) or isinstance(i, bool):
        out.append(f"{path}: index {i!r} is not an integer")
    elif not 0 <= i < n:
        out.append(f"{path}: index {i} out of range [0, {n})")


def _check_tuple(t: Any, arity: int, n: int, path: str, out: list[str]) -> None:
    if not isinstance(t, tuple) or len(t) != arity:
        out.append(f"{path}: expected a {arity}-tuple, got {t!r}")
        return
    for i in t:
        _check_index(i, n, path, out)
    if any(a >= b for a, b in zip(t, t[1:])):
        out.append(f"{path}: components of {t} not strictly increasing")


def _check_gate(g: PhaseGate, n: int, path: str, out: list[str]) -> None:
    if not 1 <= len(g.support) <= 3:
        out.append(f"{path}.support: {len(g.support)} qubits, expected 1-3")
    for q in g.support:
        _check_index(q, n, f"{path}.support", out)
    if any(a >= b for a, b in zip(g.support, g.support[1:])):
        out.append(f"{path}.support: {g.support} not strictly increasing")
    if g.denominator not in _DENOMINATORS:
        out.append(f"{path}.denominator: {g.denominator} not in {_DENOMINATORS}")
    elif not 0 <= g.numerator < 2 * g.denominator:
        out.append(f"{path}.numerator: {g.numerator} not reduced mod {2 * g.denominator}")


def _poly_fast_ok(f: Polynomial3) -> bool:
    """Cheap all-good check; the detailed pass only runs when this fails."""
    n = f.n
    try:
        return (all(type(t) is tuple and len(t) == 3 and -1 < t[0] < t[1] < t[2] < n for t in f.cubic)
                and all(type(t) is tuple and len(t) == 2 and -1 < t[0] < t[1] < n for t in f.quadratic)
                and all(-1 < i < n for i in f.linear)
                and all(type(i) is int for t in f.cubic for i in t)
                and all(type(i) is int for t in f.quadratic for i in t)
                and all(type(i) is int for i in f.linear))
    except TypeError:
        return False


def validate(obj) -> list[str]:
    """Return every violated invariant as ``"field.path: message"``; empty means ok."""
    out: list[str] = []
    n = getattr(obj, "n", None)
    if not isinstance(n, int) or n < 1:
        return [f"n: expected a positive integer, got {n!r}"]

    if isinstance(obj, Polynomial3):
        if _poly_fast_ok(obj):
            return out
        for t in sorted(obj.cubic, key=repr):
            _check_tuple(t, 3, n, "cubic", out)
        for t in sorted(obj.quadratic, key=repr):
            _check_tuple(t, 2, n, "quadratic", out)
        for i in sorted(obj.linear, key=repr):
            _check_index(i, n, "linear", out)

    elif isinstance(obj, IsingInstance):
        if not isinstance(obj.t, int) or obj.t < 1:
            return out + [f"t: expected a positive integer, got {obj.t!r}"]
        m = 2 * obj.t
        pairs = set(combinations(range(n), 2))
        for key, w in obj.edges.items():
            path = f"edges[{key}]"
            if key not in pairs:
                out.append(f"{path}: not a pair i<j of [0, {n})")
            elif not 0 <= w < m:
                out.append(f"{path}: weight {w} not reduced mod {m}")
        for key in sorted(pairs - set(obj.edges)):
            out.append(f"edges[{key}]: missing weight")
        if len(obj.vertices) != n:
            out.append(f"vertices: {len(obj.vertices)} weights for {n} vertices")
        for k, v in enumerate(obj.vertices):
            if not 0 <= v < m:
                out.append(f"vertices[{k}]: weight {v} not reduced mod {m}")

    elif isinstance(obj, IqpCircuit):
        for idx, g in enumerate(obj.gates):
            _check_gate(g, n, f"gates[{idx}]", out)
        if not 0 <= obj.x_mask < (1 << n):
            out.append(f"x_mask: {obj.x_mask} does not fit in {n} bits")
        if not 0 <= obj.phase < PHASE_UNITS:
            out.append(f"phase: {obj.phase} not reduced mod {PHASE_UNITS}")

    elif isinstance(obj, MixedCircuit):
        for idx, op in enumerate(obj.ops):
            if isinstance(op, Hadamard):
                _check_index(op.qubit, n, f"ops[{idx}].qubit", out)
            elif isinstance(op, PhaseGate):
                _check_gate(op, n, f"ops[{idx}]", out)
            else:
                out.append(f"ops[{idx}]: unknown op {op!r}")
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")
    return out


def check(obj) -> None:
    violations = validate(obj)
    if violations:
        raise ValidationError(violations)


# ---------------------------------------------------------------------------
# operations

def diagonal_phase(circuit: IqpCircuit, x: BitsLike) -> Fraction:
    """Phase of D at basis string x times the global phase, as a multiple of pi in [0, 2)."""
    x = as_bits(x, circuit.n)
    k = circuit.phase
    for g in circuit.gates:
        m = g.mask
        if x & m == m:
            k += g.units
    return Fraction(k % PHASE_UNITS, 8)


def apply_xmask(circuit: IqpCircuit, mask: BitsLike) -> IqpCircuit:
    return replace(circuit, x_mask=circuit.x_mask ^ as_bits(mask, circuit.n))


def concat(a: IqpCircuit, b: IqpCircuit) -> IqpCircuit:
    """Product of the diagonal parts; X masks XOR."""
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    return IqpCircuit(a.n, a.gates + b.gates, a.x_mask ^ b.x_mask,
                      (a.phase + b.phase) % PHASE_UNITS)


# ---------------------------------------------------------------------------
# instance files

def to_dict(obj) -> dict:
    if isinstance(obj, Polynomial3):
        return {"kind": "poly3", "n": obj.n,
                "cubic": [list(t) for t in sorted(obj.cubic)],
                "quadratic": [list(t) for t in sorted(obj.quadratic)],
                "linear": sorted(obj.linear)}
    if isinstance(obj, IsingInstance):
        return {"kind": "ising", "n": obj.n, "t": obj.t,
                "edges": [[i, j, w] for (i, j), w in sorted(obj.edges.items())],
                "vertices": list(obj.vertices)}
    if isinstance(obj, IqpCircuit):
        return {"kind": "circuit", "n": obj.n,
                "gates": [_gate_dict(g) for g in obj.gates],
                "x_mask": bits_str(obj.x_mask, obj.n), "phase_num": obj.phase}
    if isinstance(obj, MixedCircuit):
        return {"kind": "mixed", "n": obj.n,
                "ops": [{"h": op.qubit} if isinstance(op, Hadamard) else _gate_dict(op)
                        for op in obj.ops]}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _gate_dict(g: PhaseGate) -> dict:
    return {"q": list(g.support), "num": g.numerator, "den": g.denominator}


def _gate(d: dict) -> PhaseGate:
    return PhaseGate(tuple(d["q"]), int(d["num"]), int(d.get("den", 1)))


def from_dict(d: dict):
    kind = d.get("kind")
    n = d["n"]
    if kind == "poly3":
        return Polynomial3(n, [tuple(t) for t in d.get("cubic", [])],
                           [tuple(t) for t in d.get("quadratic", [])], d.get("linear", []))
    if kind == "ising":
        return IsingInstance(n, {(i, j): w for i, j, w in d["edges"]}, d["vertices"], d.get("t", 8))
    if kind == "circuit":
        mask = d.get("x_mask", "0" * n)
        return IqpCircuit(n, [_gate(g) for g in d.get("gates", [])],
                          as_bits(mask, n), int(d.get("phase_num", 0)))
    if kind == "mixed":
        ops = [Hadamard(int(o["h"])) if "h" in o else _gate(o) for o in d.get("ops", [])]
        return MixedCircuit(n, ops)
    raise ValueError(f"unknown instance kind {kind!r}")


def dumps(obj, meta: dict | None = None) -> str:
    d = to_dict(obj)
    if meta:
        d["meta"] = meta
    return json.dumps(d, separators=(",", ":")) + "\n"


def loads(text: str):
    return from_dict(json.loads(text))


def load(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
