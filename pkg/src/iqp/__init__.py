"""Exact and sampled simulation of IQP circuits, Ising partition functions and F2 polynomial gaps."""

from .core import (CCZ, CZ, T, Z, Hadamard, IqpCircuit, IsingInstance, MixedCircuit, PhaseGate,
                   Polynomial3, SqrtCZ, ValidationError, apply_xmask, as_bits, bits_str,
                   diagonal_phase, validate)
from .cyclotomic import Cyclotomic
from .amplitude import (LIMITS, AmplitudeValue, Distribution, Limits, ResourceLimitError,
                        amplitude_direct, amplitude_statevector, gap_gray, gap_naive,
                        ising_partition, ngap, output_distribution)
from .compile import compile_ising, compile_poly, gadgetize

__version__ = "0.1.0"

__all__ = [
    "CCZ", "CZ", "T", "Z", "SqrtCZ", "Hadamard", "PhaseGate", "IqpCircuit", "IsingInstance",
    "MixedCircuit", "Polynomial3", "ValidationError", "apply_xmask", "as_bits", "bits_str",
    "diagonal_phase", "validate", "Cyclotomic", "LIMITS", "AmplitudeValue", "Distribution",
    "Limits", "ResourceLimitError", "amplitude_direct", "amplitude_statevector", "gap_gray",
    "gap_naive", "ising_partition", "ngap", "output_distribution", "compile_ising",
    "compile_poly", "gadgetize",
]
