"""Translations into IQP circuit form."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (CCZ, CZ, PHASE_UNITS, Z, Hadamard, IqpCircuit, IsingInstance, MixedCircuit,
                   PhaseGate, Polynomial3, check)


def compile_poly(f: Polynomial3) -> IqpCircuit:
    """One CCZ / CZ / Z per cubic / quadratic / linear monomial, so <0|C_f|0> = gap(f)/2**n."""
    check(f)
    gates = [CCZ(*t) for t in sorted(f.cubic)]
    gates += [CZ(*t) for t in sorted(f.quadratic)]
    gates += [Z(i) for i in sorted(f.linear)]
    return IqpCircuit(f.n, gates)


def poly_from_circuit(circuit: IqpCircuit) -> Polynomial3:
    """Inverse of compile_poly for circuits made only of Z, CZ and CCZ."""
    buckets = {1: set(), 2: set(), 3: set()}
    for g in circuit.gates:
        if g.units != 8:
            raise ValueError(f"gate {g} is not a Z-type gate")
        buckets[len(g.support)] ^= {g.support}
    return Polynomial3(circuit.n, buckets[3], buckets[2], {s[0] for s in buckets[1]})


def compile_ising(inst: IsingInstance, repeated: bool = False) -> IqpCircuit:
    """IQP circuit with <0|C_I|0> = Z(exp(i*pi/8)) / 2**n, phase included.

    Uses Z(omega) = omega**(sum w + sum v) * sum_x i**(sum w_ij x_i x_j) * exp(i*pi/4 * v'.x):
    edge (i, j) becomes diag(1,1,1,i)**w_ij and vertex k becomes T**v'_k. With
    ``repeated`` each power is spelled out as unit gates.
    """
    check(inst)
    if inst.t != 8:
        raise ValueError(f"compile_ising supports t=8 only, got t={inst.t}")
    gates: list[PhaseGate] = []
    for (i, j), w in sorted(inst.edges.items()):
        w %= 4
        if repeated:
            gates += [PhaseGate((i, j), 1, 2)] * w
        elif w:
            gates.append(PhaseGate((i, j), w, 2))
    for k, vp in enumerate(inst.v_prime()):
        vp %= 8
        if repeated:
            gates += [PhaseGate((k,), 1, 4)] * vp
        elif vp:
            gates.append(PhaseGate((k,), vp, 4))
    phase = (sum(inst.edges.values()) + sum(inst.vertices)) % PHASE_UNITS
    return IqpCircuit(inst.n, gates, 0, phase)


@dataclass(frozen=True)
class GadgetResult:
    """IQP circuit on n + m qubits with <0|U|0> = 2**(m/2) <0...0|circuit|0...0>."""

    circuit: IqpCircuit
    m: int
    postselect_mask: int

    @property
    def scale_log2(self) -> Fraction:
        return Fraction(self.m, 2)

    @property
    def scale(self) -> float:
        return 2.0 ** (self.m / 2)


def gadgetize(u: MixedCircuit) -> GadgetResult:
    """Replace each intermediate H on qubit j by a fresh wire e and CZ(j, e).

    Later operations on j act on e. Fresh wires are numbered n, n+1, ... in
    encounter order.
    """
    check(u)
    wire = list(range(u.n))
    gates: list[PhaseGate] = []
    nxt = u.n
    for op in u.ops:
        if isinstance(op, Hadamard):
            gates.append(CZ(wire[op.qubit], nxt))
            wire[op.qubit] = nxt
            nxt += 1
        else:
            support = tuple(sorted(wire[q] for q in op.support))
            gates.append(PhaseGate(support, op.numerator, op.denominator))
    total = nxt
    return GadgetResult(IqpCircuit(total, gates), nxt - u.n, (1 << total) - 1)
