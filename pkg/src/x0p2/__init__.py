"""Minimal regular models of X0(p^2) at primes above p and their exact Arakelov invariants."""
from .exactkernel import QMatrix, Rational, kernel_basis, solve_linear
from .fibermodel import (FiberModel, InvalidPrime, ResidueClass, build_blueprint, classify_prime,
                         contract_minimal, count_nodes, minimal_model, validate)
from .redgraph import MetrizedGraph, betti1, dual_graph, genus_oracle, total_length
from .mginv import effective_resistance, tau_constant, theta_tilde

__all__ = [
    "QMatrix", "Rational", "kernel_basis", "solve_linear",
    "FiberModel", "InvalidPrime", "ResidueClass", "build_blueprint", "classify_prime",
    "contract_minimal", "count_nodes", "minimal_model", "validate",
    "MetrizedGraph", "betti1", "dual_graph", "genus_oracle", "total_length",
    "effective_resistance", "tau_constant", "theta_tilde",
]
